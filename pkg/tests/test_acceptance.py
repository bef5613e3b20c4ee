"""Acceptance suite: the twelve primary verification criteria.

Each test prints one pass/fail line on the real stdout so the ledger is
visible even under pytest capture.  Seeds are fixed; every criterion has
been sized so the whole suite stays within its runtime budget.
"""

import numpy as np
import pytest
from scipy.special import gamma

from fracsde.estimators import (density_smoke, estimate_pt, gradient_bismut,
                                gradient_fd, harnack_check, ibp_check,
                                invariant_measure_iterate, make_test_function,
                                shift_harnack_check)
from fracsde.fbm import (fbm_covariance, fgn_autocovariance, sample_fgn_exact,
                         sample_path_batch, sample_path_pair)
from fracsde.fraccalc import (SampledFunction, forward_differences,
                              k_h_inverse, kh_forward, rl_derivative,
                              rl_integral)
from fracsde.grids import TimeGrid, holder_norms_batch, sup_norms_batch
from fracsde.models import make_model
from fracsde.sde import (coupled_bismut_pair, coupled_ibp_pair,
                         solve_additive_batch)
from fracsde.weights import (bismut_weight, girsanov_density,
                             harnack_constants, quad_variation_bound_check)


_EMIT = print


@pytest.fixture(autouse=True)
def _console(capfd):
    """Route ledger lines around pytest's capture to the real stdout."""
    global _EMIT

    def emit(line):
        with capfd.disabled():
            print(line, flush=True)

    _EMIT = emit
    yield
    _EMIT = print


def _ledger(number: int, name: str, passed: bool, detail: str = ""):
    status = "PASS" if passed else "FAIL"
    suffix = f"  ({detail})" if detail else ""
    _EMIT(f"[{status}] criterion {number:2d}: {name}{suffix}")
    assert passed, f"criterion {number} ({name}): {detail}"


def test_criterion_01_fgn_autocovariance():
    worst = 0.0
    for h in (0.3, 0.7):
        x = sample_fgn_exact(h, 1 << 12, 1.0, 20260101, n_paths=200)
        exact = fgn_autocovariance(np.arange(6), h)
        for lag in range(6):
            prods = x[:, : x.shape[1] - lag] * x[:, lag:]
            per_path = prods.mean(axis=1)
            emp = per_path.mean()
            se = per_path.std(ddof=1) / np.sqrt(per_path.shape[0])
            worst = max(worst, abs(emp - exact[lag]) / se)
    _ledger(1, "fGn exact-generator autocovariance", worst < 4.0,
            f"max |z| = {worst:.2f} over lags 0..5, H in {{0.3, 0.7}}")


def test_criterion_02_volterra_covariance():
    worst_var = 0.0
    worst_z = 0.0
    grid = TimeGrid(1.0, 1 << 10)
    t = grid.nodes
    for h in (0.3, 0.7):
        _, bh = sample_path_batch(grid, 1, h, 20260102, 10_000)
        paths = bh[:, :, 0]
        var_rel = abs(paths[:, -1].var(ddof=1) - 1.0)  # T = 1: Var = T^{2H} = 1
        worst_var = max(worst_var, var_rel)
        # subgrid away from t = 0, where the midpoint kernel quadrature
        # carries its largest relative bias
        idx = np.linspace(grid.n_steps // 8, grid.n_steps, 8).astype(int)
        for i in idx:
            for j in idx[idx <= i]:
                prod = paths[:, i] * paths[:, j]
                se = prod.std(ddof=1) / np.sqrt(prod.shape[0])
                z = abs(prod.mean() - fbm_covariance(t[i], t[j], h)) / se
                worst_z = max(worst_z, z)
    ok = worst_var < 0.03 and worst_z < 4.0
    _ledger(2, "Volterra covariance structure", ok,
            f"var rel err = {worst_var:.4f}, max cov |z| = {worst_z:.2f}")


def test_criterion_03_brownian_degeneracy():
    grid = TimeGrid(1.0, 256)
    pp = sample_path_pair(grid, 1, 0.5, 20260103)
    cum = np.concatenate([[0.0], np.cumsum(pp.w_increments[:, 0])])
    err_path = np.abs(pp.fbm_values[:, 0] - cum).max()
    smooth = SampledFunction(grid, np.sin(grid.nodes) * grid.nodes)
    out = k_h_inverse(smooth, 0.5)
    err_inv = np.abs(out.values
                     - forward_differences(smooth.values, grid.dt)).max()
    ok = err_path < 1e-10 and err_inv < 1e-10
    _ledger(3, "H = 1/2 degeneracies", ok,
            f"path err = {err_path:.2e}, inverse err = {err_inv:.2e}")


def test_criterion_04_fractional_calculus_identities():
    errs = []
    for h in (0.3, 0.7):
        grid = TimeGrid(1.0, 2048)
        t = grid.nodes
        # I^alpha power rule at alpha = 1/2 on f(t) = t
        got = rl_integral(SampledFunction(grid, t), 0.5).values
        exact = gamma(2.0) / gamma(2.5) * t ** 1.5
        err_i = np.abs(got - exact).max() / np.abs(exact).max()
        # D^alpha I^alpha = id at the operator order alpha = |H - 1/2|
        alpha = abs(h - 0.5)
        g = SampledFunction(grid, np.sin(2.0 * t))
        comp = rl_derivative(rl_integral(g, alpha), alpha).values
        err_di = np.abs(comp[1:] - g.values[1:]).max()
        # K_H^{-1} K_H = id, interior sup
        err_k = 0.0
        for vals in (np.ones_like(t), np.cos(3.0 * t)):
            fwd = kh_forward(SampledFunction(grid, vals), h)
            back = k_h_inverse(fwd, h).values
            err_k = max(err_k, np.abs(back[1:] - vals[1:]).max())
        errs.append((err_i, err_di, err_k))
    ok = all(a < 1e-3 and b < 1e-2 and c < 2e-2 for a, b, c in errs)
    detail = "; ".join(f"H={h}: I={a:.1e} DI={b:.1e} K={c:.1e}"
                       for h, (a, b, c) in zip((0.3, 0.7), errs))
    _ledger(4, "fractional-calculus identities (n = 2048)", ok, detail)


def test_criterion_05_coupling_exactness():
    rng = np.random.default_rng(20260105)
    grid = TimeGrid(1.0, 64)
    worst = 0.0
    frac_down = (grid.horizon - grid.nodes) / grid.horizon
    frac_up = grid.nodes / grid.horizon
    for k in range(100):
        h = rng.uniform(0.55, 0.95)
        spec = (f"ou({rng.uniform(0.2, 2.0):.4f})" if k % 2 == 0
                else f"tanh_drift({rng.uniform(0.2, 1.0):.4f})")
        model = make_model(spec, h)
        pp = sample_path_pair(grid, 1, h, 1000 + k)
        x, y = rng.normal(size=2)
        eps = rng.uniform(0.01, 0.3)
        base, pert = coupled_bismut_pair(model, [x], [y], eps, pp)
        gap = pert.x_values[:, 0] - base.x_values[:, 0] - frac_down * eps * y
        worst = max(worst, np.abs(gap).max())
        base, pert = coupled_ibp_pair(model, [x], [y], eps, pp)
        gap = pert.x_values[:, 0] - base.x_values[:, 0] - frac_up * eps * y
        worst = max(worst, np.abs(gap).max())
    _ledger(5, "coupling exactness on 100 random models", worst < 1e-12,
            f"max deviation = {worst:.2e}")


def test_criterion_06_girsanov():
    h, eps, n_paths = 0.7, 0.05, 10_000
    grid = TimeGrid(1.0, 256)
    model = make_model("ou(1.0)", h)
    x = np.array([0.4])
    y = np.array([1.0])
    tf = make_test_function("tanh(1.0)")
    dw, bh = sample_path_batch(grid, 1, h, 20260106, n_paths)
    states = solve_additive_batch(model, x, grid, bh)
    frac = ((grid.horizon - grid.nodes) / grid.horizon)[None, :, None]
    eta = (model.b(0.0, states) - model.b(0.0, states + frac * eps * y)
           - (eps / grid.horizon) * y)
    dens = girsanov_density(grid, h, eta, dw)
    r = np.exp(dens.log_density)
    se_r = r.std(ddof=1) / np.sqrt(n_paths)
    z_unit = abs(r.mean() - 1.0) / se_r
    # measure-change identity: P_T f(x + eps y) = E[R f(X_T^x)]
    weighted = r * tf.f(states[:, -1, :])
    rhs = weighted.mean()
    se_rhs = weighted.std(ddof=1) / np.sqrt(n_paths)
    lhs = estimate_pt(model, x + eps * y, tf.f, grid, n_paths, 20260107)
    z_id = abs(lhs.mean - rhs) / np.hypot(lhs.std_error, se_rhs)
    ok = z_unit < 3.0 and z_id < 3.0
    _ledger(6, "Girsanov density (OU, H = 0.7, eps = 0.05)", ok,
            f"E[R] z = {z_unit:.2f}, identity z = {z_id:.2f}")


def test_criterion_07_bismut_formula():
    h, n_paths = 0.7, 100_000
    grid = TimeGrid(1.0, 512)
    model = make_model("ou(1.0)", h)
    x, y = np.array([0.5]), np.array([1.0])
    # f(x) = x: the exact gradient is e^{-kappa T} = e^{-1}
    lin = gradient_bismut(model, x, y, lambda z: z[:, 0], grid, n_paths, 90)
    z_lin = abs(lin.mean - np.exp(-1.0)) / lin.std_error
    # f = tanh: agree with the finite-difference oracle
    tf = make_test_function("tanh(1.0)")
    gb = gradient_bismut(model, x, y, tf.f, grid, n_paths, 91)
    gf = gradient_fd(model, x, y, tf.f, grid, n_paths, 92)
    diff = abs(gb.mean - gf.estimate.mean)
    tol = 2.0 * (gb.std_error + gf.estimate.std_error + gf.bias)
    ok = z_lin < 3.0 and diff <= tol
    _ledger(7, "Bismut derivative formula (OU, H = 0.7)", ok,
            f"linear z = {z_lin:.2f}, tanh |bismut - fd| = {diff:.2e} "
            f"vs tol {tol:.2e}")


def test_criterion_08_ibp_formulas():
    n_paths = 100_000
    grid = TimeGrid(1.0, 512)
    tf = make_test_function("tanh(1.0)")
    results = []
    for spec, h, seed in (("td_decay", 0.3, 88), ("ou(1.0)", 0.7, 89)):
        model = make_model(spec, h)
        rep = ibp_check(model, [0.3], [1.0], tf, grid, n_paths, seed)
        results.append((spec, abs(rep.diff) / rep.se_diff))
    ok = all(z <= 3.0 for _, z in results)
    detail = ", ".join(f"{spec}: |diff|/SE = {z:.2f}" for spec, z in results)
    _ledger(8, "shift IBP formulas (N^1 low / N^2 high)", ok, detail)


def test_criterion_09_quad_variation_domination():
    h = 0.7
    delta = (h - 0.5) / 2.0
    grid = TimeGrid(1.0, 512)
    model = make_model("ou(1.0)", h)
    x, y = [0.5], [1.0]
    dw, bh = sample_path_batch(grid, 1, h, 20260109, 1000)
    states = solve_additive_batch(model, x, grid, bh)
    w = bismut_weight(model, grid, states, dw, y)
    c = harnack_constants(model, x, grid, delta=delta, n_paths=1024)
    combined = (holder_norms_batch(bh, grid, h - delta)
                + sup_norms_batch(bh))
    margins = quad_variation_bound_check(c, w.quad_variation, combined, y)
    ok = margins.min() > -1e-9
    _ledger(9, "quadratic-variation domination (1000 OU paths)", ok,
            f"min margin = {margins.min():.3f}")


def test_criterion_10_harnack_inequalities():
    n_paths = 100_000
    grid = TimeGrid(1.0, 128)
    tf = make_test_function("tanh(1.0)")
    x = np.array([0.2])
    worst = np.inf
    pieces = []
    rng = np.random.default_rng(20260110)
    # additive (OU) and multiplicative (sigma = 2 + tanh) Harnack
    for spec, h in (("ou(1.0)", 0.7), ("mult_tanh", 0.7)):
        model = make_model(spec, h)
        probe = harnack_check(model, x, x, 2.0, tf, grid, 256, 0)
        cap = probe.radius if np.isfinite(probe.radius) else 0.5
        zmin = np.inf
        for k in range(20):
            d = cap * (k + 1) / 20.0 * rng.choice([-1.0, 1.0])
            rep = harnack_check(model, x, x + d, 2.0, tf, grid, n_paths,
                                3000 + k)
            assert rep.admissible
            zmin = min(zmin, rep.margin / rep.margin_se)
        pieces.append(f"{spec}: min margin z = {zmin:.2f}")
        worst = min(worst, zmin)
    # shift Harnack for both regimes
    for h in (0.3, 0.7):
        model = make_model("ou(1.0)", h)
        probe = shift_harnack_check(model, x, [0.0], 2.0, tf, grid, 256, 0)
        cap = probe.radius if np.isfinite(probe.radius) else 0.5
        zmin = np.inf
        for k in range(20):
            d = cap * (k + 1) / 20.0 * rng.choice([-1.0, 1.0])
            rep = shift_harnack_check(model, x, [d], 2.0, tf, grid, n_paths,
                                      4000 + k)
            assert rep.admissible
            zmin = min(zmin, rep.margin / rep.margin_se)
        pieces.append(f"shift H={h}: min margin z = {zmin:.2f}")
        worst = min(worst, zmin)
    _ledger(10, "Harnack and shift-Harnack inequalities", worst >= -3.0,
            "; ".join(pieces))


def test_criterion_11_invariant_measure():
    h = 0.7
    grid = TimeGrid(1.0, 128)
    model = make_model("ou(1.0)", h)
    with pytest.warns(RuntimeWarning):
        tr = invariant_measure_iterate(model, [1.0], grid, 50, 1000, 111)
    cesaro = tr.second_moments
    tail = np.abs(np.diff(cesaro[-11:]) / cesaro[-10:]).max()
    with pytest.warns(RuntimeWarning):
        oracle = invariant_measure_iterate(model, [1.0], grid, 500, 50, 112)
    ratio = cesaro[-1] / oracle.second_moments[-1]
    # contractive configuration where C14 < 1: explicit moment bound
    strong = make_model("ou(3.0)", h)
    tr3 = invariant_measure_iterate(strong, [1.0], grid, 50, 200, 113)
    bound_ok = (tr3.c14 < 1.0 and tr3.bound is not None
                and tr3.second_moments[-1] <= tr3.bound)
    ok = tail < 0.02 and abs(ratio - 1.0) < 0.10 and bound_ok
    _ledger(11, "Krylov-Bogoliubov invariant measure (OU, H = 0.7)", ok,
            f"tail change = {tail:.3%}, oracle ratio = {ratio:.3f}, "
            f"C14 = {tr3.c14:.3f}, bound margin = "
            f"{tr3.bound - tr3.second_moments[-1]:.2f}")


def test_criterion_12_density_smoke():
    grid = TimeGrid(1.0, 128)
    model = make_model("zero", 0.3)
    rep = density_smoke(model, [0.5], grid, 20_000, 40, 20260112)
    ok = (rep.gaussian_null and not rep.atom_flag
          and rep.chi_square < rep.chi_square_99)
    _ledger(12, "density smoke test (b = 0, H = 0.3)", ok,
            f"chi2 = {rep.chi_square:.1f} vs 99% quantile "
            f"{rep.chi_square_99:.1f}")
