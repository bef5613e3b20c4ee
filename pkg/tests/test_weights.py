"""Unit tests for Malliavin weights, Girsanov density, Harnack constants."""

import numpy as np
import pytest

from fracsde.fbm import sample_path_batch, sample_path_pair
from fracsde.grids import TimeGrid
from fracsde.models import make_model
from fracsde.sde import solve_additive, solve_additive_batch
from fracsde.weights import (bismut_weight, girsanov_density,
                             harnack_constants, ibp_weight_high,
                             ibp_weight_low, quad_variation_bound_check)


def test_brownian_zero_drift_weight_is_scaled_endpoint():
    # H = 1/2, b = 0: N_T = <y, W_T>/T exactly (discretely: sum of dW / T)
    grid = TimeGrid(1.0, 128)
    model = make_model("zero", 0.5)
    pp = sample_path_pair(grid, 1, 0.5, 17)
    sol = solve_additive(model, [0.0], pp)
    w = bismut_weight(model, grid, sol.x_values, pp.w_increments, [2.0])
    expected = 2.0 * pp.w_increments.sum() / grid.horizon
    assert w.value[0] == pytest.approx(expected, abs=1e-13)


def test_weight_linearity_in_direction():
    grid = TimeGrid(1.0, 64)
    h = 0.7
    model = make_model("ou(1.0)", h)
    pp = sample_path_pair(grid, 1, h, 23)
    sol = solve_additive(model, [0.5], pp)
    w1 = bismut_weight(model, grid, sol.x_values, pp.w_increments, [1.0])
    w3 = bismut_weight(model, grid, sol.x_values, pp.w_increments, [3.0])
    assert w3.value[0] == pytest.approx(3.0 * w1.value[0], rel=1e-12)
    assert w3.quad_variation[0] == pytest.approx(9.0 * w1.quad_variation[0],
                                                 rel=1e-12)


def test_weight_batch_matches_single():
    grid = TimeGrid(1.0, 64)
    h = 0.7
    model = make_model("ou(1.0)", h)
    dw, bh = sample_path_batch(grid, 1, h, 31, 4)
    states = solve_additive_batch(model, [0.2], grid, bh)
    wb = bismut_weight(model, grid, states, dw, [1.0])
    for i in range(4):
        ws = bismut_weight(model, grid, states[i], dw[i], [1.0])
        assert ws.value[0] == pytest.approx(wb.value[i], rel=1e-12)


def test_regime_gates():
    grid = TimeGrid(1.0, 32)
    low = make_model("ou(1.0)", 0.3)
    high = make_model("ou(1.0)", 0.7)
    td = make_model("td_decay", 0.3)
    pp = sample_path_pair(grid, 1, 0.3, 2)
    sol = solve_additive(low, [0.0], pp)
    with pytest.raises(ValueError):
        bismut_weight(low, grid, sol.x_values, pp.w_increments, [1.0])
    with pytest.raises(ValueError):
        ibp_weight_high(low, grid, sol.x_values, pp.w_increments, [1.0])
    pp_h = sample_path_pair(grid, 1, 0.7, 2)
    sol_h = solve_additive(high, [0.0], pp_h)
    with pytest.raises(ValueError):
        ibp_weight_low(high, grid, sol_h.x_values, pp_h.w_increments, [1.0])
    with pytest.raises(ValueError):
        bismut_weight(td, grid, sol.x_values, pp.w_increments, [1.0])
    # valid combinations run
    ibp_weight_low(td, grid, sol.x_values, pp.w_increments, [1.0])
    ibp_weight_high(high, grid, sol_h.x_values, pp_h.w_increments, [1.0])


def test_girsanov_zero_shift_is_unit_density():
    grid = TimeGrid(1.0, 32)
    pp = sample_path_pair(grid, 1, 0.7, 9)
    eta = np.zeros((33, 1))
    g = girsanov_density(grid, 0.7, eta, pp.w_increments)
    assert g.log_density[0] == 0.0
    assert g.shift_l2[0] == 0.0


def test_girsanov_mean_density_near_one():
    grid = TimeGrid(1.0, 64)
    h = 0.7
    dw, _ = sample_path_batch(grid, 1, h, 40, 4000)
    eta = np.broadcast_to(0.3 * (1.0 - grid.nodes)[None, :, None],
                          (4000, 65, 1))
    g = girsanov_density(grid, h, eta, dw)
    r = np.exp(g.log_density)
    se = r.std(ddof=1) / np.sqrt(r.size)
    assert abs(r.mean() - 1.0) < 4.0 * se


def test_harnack_constants_ou_degeneracies():
    # K2 = 0 for OU: A2 = 0, Fernique pair trivial, infinite radius
    grid = TimeGrid(1.0, 64)
    model = make_model("ou(1.0)", 0.7)
    c = harnack_constants(model, [0.0], grid, n_paths=256)
    assert c.a2 == 0.0
    assert c.lam0 == 0.0
    assert c.b0 == 1.0
    assert c.radius(2.0) == np.inf
    assert c.a1 > 0.0
    assert c.coeff == pytest.approx(c.a1)
    f0 = c.factor(2.0, 0.0)
    assert f0 == pytest.approx(1.0)
    with pytest.raises(ValueError):
        c.radius(1.0)


def test_harnack_constants_nonzero_k2():
    grid = TimeGrid(1.0, 64)
    model = make_model("tanh_drift(0.5)", 0.7)
    c = harnack_constants(model, [0.0], grid, n_paths=512)
    assert c.a2 > 0.0
    assert c.lam0 > 0.0
    assert c.b0 >= 1.0
    assert np.isfinite(c.radius(2.0))


def test_quad_variation_bound_on_ou_paths():
    grid = TimeGrid(1.0, 256)
    h = 0.7
    model = make_model("ou(1.0)", h)
    dw, bh = sample_path_batch(grid, 1, h, 50, 64)
    states = solve_additive_batch(model, [0.5], grid, bh)
    y = [1.0]
    w = bismut_weight(model, grid, states, dw, y)
    c = harnack_constants(model, [0.5], grid, n_paths=256)
    from fracsde.grids import holder_norms_batch, sup_norms_batch
    beta = h - c.delta
    combined = holder_norms_batch(bh, grid, beta) + sup_norms_batch(bh)
    margins = quad_variation_bound_check(c, w.quad_variation, combined, y)
    assert margins.min() > -1e-9
