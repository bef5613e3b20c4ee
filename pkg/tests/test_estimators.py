"""Unit tests for the Monte Carlo estimator harnesses."""

import numpy as np
import pytest

from fracsde.estimators import (density_smoke, estimate_pt, gradient_bismut,
                                gradient_fd, harnack_check, ibp_check,
                                invariant_measure_iterate, make_test_function,
                                shift_harnack_check)
from fracsde.grids import TimeGrid
from fracsde.models import make_model


GRID = TimeGrid(1.0, 64)


def test_test_function_registry():
    tf = make_test_function("tanh(1.0)")
    x = np.array([[0.5]])
    assert tf.positive
    assert tf.f(x)[0] == pytest.approx(np.tanh(0.5) + 2.0)
    g = make_test_function("gauss(0.0)")
    assert g.f(np.zeros((1, 1)))[0] == pytest.approx(1.0)
    c = make_test_function("const(3.0)")
    assert c.f(np.zeros((2, 1))).tolist() == [3.0, 3.0]
    ind = make_test_function("indicator(0.0,0.1)")
    vals = ind.f(np.array([[-5.0], [5.0]]))
    assert 0.45 < vals[0] < 0.55 and 1.45 < vals[1] < 1.55
    with pytest.raises(ValueError):
        make_test_function("step(1.0)")


def test_estimate_pt_deterministic():
    model = make_model("ou(1.0)", 0.7)
    tf = make_test_function("tanh(1.0)")
    a = estimate_pt(model, [0.5], tf.f, GRID, 2000, 42)
    b = estimate_pt(model, [0.5], tf.f, GRID, 2000, 42)
    assert a.mean == b.mean
    assert a.std_error == b.std_error
    c = estimate_pt(model, [0.5], tf.f, GRID, 2000, 43)
    assert c.mean != a.mean


def test_estimate_pt_rejects_empty():
    model = make_model("ou(1.0)", 0.7)
    with pytest.raises(ValueError):
        estimate_pt(model, [0.0], lambda x: x[:, 0], GRID, 0, 1)


def test_gradient_scaling_in_direction():
    model = make_model("ou(1.0)", 0.7)
    f = lambda x: x[:, 0]
    g1 = gradient_bismut(model, [0.3], [1.0], f, GRID, 2000, 7)
    g2 = gradient_bismut(model, [0.3], [2.0], f, GRID, 2000, 7)
    assert g2.mean == pytest.approx(2.0 * g1.mean, rel=1e-12)


def test_gradient_bismut_regime_gate():
    model = make_model("ou(1.0)", 0.3)
    with pytest.raises(ValueError):
        gradient_bismut(model, [0.0], [1.0], lambda x: x[:, 0], GRID, 100, 1)


def test_gradient_fd_constant_function_is_zero():
    # common random numbers: the central difference of a constant vanishes
    model = make_model("ou(1.0)", 0.7)
    g = gradient_fd(model, [0.2], [1.0], lambda x: np.full(x.shape[0], 5.0),
                    GRID, 500, 3)
    assert g.estimate.mean == 0.0
    assert g.bias == 0.0


def test_gradient_fd_linear_function():
    # zero drift, f(x) = x: the gradient is exactly 1 for every path
    model = make_model("zero", 0.7)
    g = gradient_fd(model, [0.0], [1.0], lambda x: x[:, 0], GRID, 500, 3)
    assert g.estimate.mean == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(ValueError):
        gradient_fd(model, [0.0], [0.0], lambda x: x[:, 0], GRID, 100, 1)


def test_ibp_check_small_sample():
    model = make_model("ou(1.0)", 0.7)
    tf = make_test_function("tanh(1.0)")
    rep = ibp_check(model, [0.3], [1.0], tf, GRID, 8000, 12)
    assert abs(rep.diff) < 4.0 * rep.se_diff


def test_harnack_jensen_at_equal_points():
    # x = y: factor 1 and the margin reduces to E f^p - (E f)^p >= 0
    model = make_model("ou(1.0)", 0.7)
    tf = make_test_function("tanh(1.0)")
    rep = harnack_check(model, [0.4], [0.4], 2.0, tf, GRID, 20000, 5)
    assert rep.exponent_factor == pytest.approx(1.0)
    assert rep.distance == 0.0
    assert rep.admissible
    assert rep.margin > -3.0 * rep.margin_se


def test_harnack_requires_positive_f_and_p():
    model = make_model("ou(1.0)", 0.7)
    tf = make_test_function("tanh(1.0)")
    with pytest.raises(ValueError):
        harnack_check(model, [0.0], [0.1], 1.0, tf, GRID, 100, 1)
    f_signed = make_test_function("const(-1.0)")
    with pytest.raises(ValueError):
        harnack_check(model, [0.0], [0.1], 2.0, f_signed, GRID, 100, 1)


def test_shift_harnack_zero_shift_is_jensen():
    model = make_model("ou(1.0)", 0.3)
    tf = make_test_function("tanh(1.0)")
    rep = shift_harnack_check(model, [0.2], [0.0], 2.0, tf, GRID, 20000, 6)
    assert rep.exponent_factor == pytest.approx(1.0)
    assert rep.radius == np.inf
    assert rep.margin > -3.0 * rep.margin_se


def test_shift_harnack_gates():
    tf = make_test_function("tanh(1.0)")
    with pytest.raises(ValueError):
        shift_harnack_check(make_model("ou(1.0)", 0.5), [0.0], [0.1], 2.0,
                            tf, GRID, 100, 1)
    with pytest.raises(ValueError):
        shift_harnack_check(make_model("mult_tanh", 0.7), [0.0], [0.1], 2.0,
                            tf, GRID, 100, 1)


def test_invariant_measure_bound_branches():
    grid = TimeGrid(1.0, 64)
    # strong contraction: C14 < 1, explicit bound reported
    strong = make_model("ou(3.0)", 0.7)
    tr = invariant_measure_iterate(strong, [1.0], grid, 5, 64, 77)
    assert tr.c14 < 1.0
    assert tr.bound is not None and tr.bound > 0.0
    assert tr.warning is None
    assert tr.second_moments.shape == (5,)
    # weak contraction: C14 >= 1, warning instead of a bound
    weak = make_model("ou(1.0)", 0.7)
    with pytest.warns(RuntimeWarning):
        tr2 = invariant_measure_iterate(weak, [1.0], grid, 3, 32, 78)
    assert tr2.bound is None
    assert tr2.warning is not None


def test_invariant_measure_gates():
    grid = TimeGrid(1.0, 32)
    with pytest.raises(ValueError):
        invariant_measure_iterate(make_model("ou(1.0)", 0.3), [0.0], grid,
                                  2, 8, 1)
    with pytest.raises(ValueError):
        invariant_measure_iterate(make_model("ou(1.0)", 0.7), [0.0], grid,
                                  2, 8, 1, beta=0.9)


def test_density_smoke_zero_drift():
    grid = TimeGrid(1.0, 128)
    model = make_model("zero", 0.3)
    rep = density_smoke(model, [0.5], grid, 5000, 20, 91)
    assert rep.gaussian_null
    assert not rep.atom_flag
    assert rep.chi_square < rep.chi_square_99
    assert rep.counts.sum() == 5000


def test_density_smoke_gates():
    grid = TimeGrid(1.0, 32)
    with pytest.raises(ValueError):
        density_smoke(make_model("zero", 0.7), [0.0], grid, 100, 10, 1)
    with pytest.raises(ValueError):
        density_smoke(make_model("zero", 0.3), [0.0], grid, 0, 10, 1)
