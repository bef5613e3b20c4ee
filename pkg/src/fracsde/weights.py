"""Malliavin-type integration-by-parts weights, Girsanov densities and
Harnack-inequality constants.

All stochastic integrals are discrete Ito sums against the driving Brownian
increments: the integrand rows are the per-node values of
(K_H^{-1} int_0^. eta dr)(s) from the fraccalc plans, paired left-point so
that each row multiplies the *following* W increment.  The first cell, where
the integrand has an integrable power singularity, uses the closed-form cell
average of the leading power behavior (deterministic given the start point,
so adaptedness and the martingale property are preserved).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .fbm import sample_path_batch
from .fraccalc import KhInversePlan, c0_constant, kh_inverse_plan
from .grids import (HurstRegime, TimeGrid, as_hurst, holder_norms_batch,
                    sup_norms_batch)
from .models import SdeModel
from .sde import apriori_bounds

__all__ = [
    "WeightKind",
    "MalliavinWeight",
    "GirsanovDensity",
    "HarnackConstants",
    "bismut_weight",
    "ibp_weight_low",
    "ibp_weight_high",
    "girsanov_density",
    "harnack_constants",
    "quad_variation_bound_check",
]


class WeightKind(enum.Enum):
    BISMUT = "bismut"
    IBP_LOW = "ibp_low"
    IBP_HIGH = "ibp_high"


@dataclass(frozen=True)
class MalliavinWeight:
    """Discrete weight N_T per path, with per-term Ito sums and the
    quadratic variation of the discrete stochastic integral."""

    kind: WeightKind
    value: np.ndarray           # (P,)
    terms: np.ndarray           # (P, 3) Ito sums of the three expansion terms
    quad_variation: np.ndarray  # (P,)


@dataclass(frozen=True)
class GirsanovDensity:
    """log R and the discrete L^2 norm of the Cameron-Martin shift."""

    log_density: np.ndarray  # (P,)
    shift_l2: np.ndarray     # (P,) = sum_i |v(s_i)|^2 dt


def _first_cell_factor(plan: KhInversePlan) -> float:
    """Cell-average weight on eta(0) for the singular first cell [0, dt].

    The integrand behaves like  C(H) eta(0) s^{1/2-H}  as s -> 0; the factor
    returned is C(H) * (cell average of s^{1/2-H}) = C(H) dt^{1/2-H}/(3/2-H).
    """
    h = plan.hurst.h
    if plan.hurst.regime is HurstRegime.BROWNIAN:
        return 1.0
    avg = plan.grid.dt ** (0.5 - h) / (1.5 - h)
    if plan.hurst.regime is HurstRegime.HIGH:
        lead = (1.0 - (h - 0.5) * c0_constant(plan.hurst)) / (
            sp.gamma(1.5 - h) * plan._norm)
    else:
        lead = sp.beta(1.5 - h, 0.5 - h) / (sp.gamma(0.5 - h) * plan._norm)
    return avg * lead


def _integrand_rows(plan: KhInversePlan, eta: np.ndarray):
    """Batched integrand rows.

    eta: (P, n+1, d).  Returns (i0, rows) with i0 of shape (P, d) for the
    first cell and rows of shape (3, P, n, d), one slab per expansion term,
    where row k is the integrand at node s_{k+1}.
    """
    p, n1, d = eta.shape
    n = n1 - 1
    flat = np.moveaxis(eta, 1, 0).reshape(n1, p * d)
    t1, t2, t3 = plan.terms(flat)

    def back(a):
        return np.moveaxis(a.reshape(n, p, d), 0, 1)

    rows = np.stack([back(t1), back(t2), back(t3)])
    i0 = eta[:, 0, :] * _first_cell_factor(plan)
    return i0, rows


def _ito_sums(grid: TimeGrid, i0: np.ndarray, rows: np.ndarray,
              dw: np.ndarray):
    """Left-point Ito pairing of the integrand rows with the W increments.

    Row at s_i multiplies dW over [t_i, t_{i+1}] (i = 1..n-1); the first-cell
    value i0 multiplies dW over [0, t_1].  Returns (term_sums (P, 3),
    value (P,), qv (P,))."""
    dt = grid.dt
    total = i0 + 0.0
    inner = rows[:, :, :-1, :]  # integrand at s_1..s_{n-1}
    term_sums = np.einsum("tpkd,pkd->pt", inner, dw[:, 1:, :])
    # attribute the first cell to the leading term
    term_sums[:, 0] += np.einsum("pd,pd->p", i0, dw[:, 0, :])
    value = term_sums.sum(axis=1)
    integrand = inner.sum(axis=0)
    qv = (np.einsum("pd,pd->p", total, total)
          + np.einsum("pkd,pkd->p", integrand, integrand)) * dt
    return term_sums, value, qv


def _prep(x_states: np.ndarray, w_increments: np.ndarray):
    x = np.asarray(x_states, dtype=float)
    dw = np.asarray(w_increments, dtype=float)
    if x.ndim == 2:
        x = x[None, :, :]
    if dw.ndim == 2:
        dw = dw[None, :, :]
    if x.shape[0] != dw.shape[0] or x.shape[1] != dw.shape[1] + 1:
        raise ValueError("state/increment shapes are inconsistent")
    return x, dw


def _weight(kind: WeightKind, model: SdeModel, grid: TimeGrid,
            x_states: np.ndarray, w_increments: np.ndarray,
            y: np.ndarray) -> MalliavinWeight:
    x, dw = _prep(x_states, w_increments)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    t = grid.nodes
    horizon = grid.horizon
    if kind is WeightKind.BISMUT:
        gby = model.grad_b_y(0.0, x, y)
        eta = ((horizon - t)[:, None] * gby + y) / horizon
    else:
        targ = t if model.time_dependent else 0.0
        gby = model.grad_b_y(targ, x, y)
        eta = (y - t[:, None] * gby) / horizon
    eta = np.broadcast_to(eta, x.shape).copy()
    plan = kh_inverse_plan(grid, model.hurst)
    i0, rows = _integrand_rows(plan, eta)
    term_sums, value, qv = _ito_sums(grid, i0, rows, dw)
    return MalliavinWeight(kind=kind, value=value, terms=term_sums,
                           quad_variation=qv)


def bismut_weight(model: SdeModel, grid: TimeGrid, x_states, w_increments,
                  y) -> MalliavinWeight:
    """Weight N_T of the Bismut derivative formula
    nabla_y P_T f(x) = E[f(X_T) N_T]  (time-homogeneous drift, H >= 1/2).

    eta(r) = [(T-r) grad_y b(X_r) + y]/T; x_states may be a single path
    (n+1, d) or a batch (P, n+1, d) aligned with w_increments.
    """
    if model.time_dependent:
        raise ValueError("bismut weight requires a time-homogeneous drift")
    if model.hurst.regime is HurstRegime.LOW:
        raise ValueError("bismut weight requires H >= 1/2")
    return _weight(WeightKind.BISMUT, model, grid, x_states, w_increments, y)


def ibp_weight_low(model: SdeModel, grid: TimeGrid, x_states, w_increments,
                   y) -> MalliavinWeight:
    """Weight N_T^1 of the shift integration-by-parts formula
    E[(nabla_y f)(X_T)] = E[f(X_T) N_T^1]  for H < 1/2 (drift may depend
    on time): eta(r) = [y - r grad_y b(r, X_r)]/T, single-integral form."""
    if model.hurst.regime is HurstRegime.HIGH:
        raise ValueError("ibp_weight_low requires H <= 1/2")
    return _weight(WeightKind.IBP_LOW, model, grid, x_states, w_increments, y)


def ibp_weight_high(model: SdeModel, grid: TimeGrid, x_states, w_increments,
                    y) -> MalliavinWeight:
    """Weight N_T^2 of the shift integration-by-parts formula for H > 1/2
    (time-homogeneous drift): eta(r) = [y - r grad_y b(X_r)]/T."""
    if model.time_dependent:
        raise ValueError("ibp_weight_high requires a time-homogeneous drift")
    if model.hurst.regime is HurstRegime.LOW:
        raise ValueError("ibp_weight_high requires H >= 1/2")
    return _weight(WeightKind.IBP_HIGH, model, grid, x_states, w_increments, y)


def girsanov_density(grid: TimeGrid, hurst, eta, w_increments) -> GirsanovDensity:
    """Density R = dQ/dP removing the drift perturbation int_0^. eta dr.

    v = K_H^{-1} int_0^. eta dr is the Cameron-Martin shift of the driving
    Brownian motion; log R = -sum <v(s_i), dW_i> - (1/2) sum |v(s_i)|^2 dt.
    eta: (n+1, d) or (P, n+1, d) aligned with w_increments.
    """
    hurst = as_hurst(hurst)
    eta = np.asarray(eta, dtype=float)
    if eta.ndim == 2:
        eta = eta[None, :, :]
    dw = np.asarray(w_increments, dtype=float)
    if dw.ndim == 2:
        dw = dw[None, :, :]
    plan = kh_inverse_plan(grid, hurst)
    i0, rows = _integrand_rows(plan, eta)
    _, value, qv = _ito_sums(grid, i0, rows, dw)
    return GirsanovDensity(log_density=-value - 0.5 * qv, shift_l2=qv)


# ---------------------------------------------------------------------------
# Harnack constants

@dataclass(frozen=True)
class HarnackConstants:
    """A_1, A_2 of the quadratic-variation bound
    <N>_T <= (A_1 + A_2 |||B^H|||_{H-delta}^2) |y|^2, with the Fernique
    pair (lambda_0, B_0 = E exp[lambda_0 |||B^H|||^2]) estimated by MC."""

    hurst: float
    horizon: float
    delta: float
    a1: float
    a2: float
    lam0: float
    b0: float
    b0_se: float
    d1: float
    d2: float

    @property
    def coeff(self) -> float:
        """A_1 + (A_2/lambda_0) log B_0, the exponent per unit |x-y|^2
        (times p/(p-1))."""
        if self.a2 == 0.0:
            return self.a1
        return self.a1 + (self.a2 / self.lam0) * np.log(self.b0)

    def radius(self, p: float) -> float:
        """Largest admissible |x - y| for the power-p Harnack inequality."""
        if p <= 1.0:
            raise ValueError("Harnack inequality requires p > 1")
        if self.a2 == 0.0:
            return np.inf
        return (p - 1.0) / p * np.sqrt(self.lam0 / (2.0 * self.a2))

    def factor(self, p: float, dist2: float) -> float:
        """exp[(p/(p-1)) coeff |x-y|^2]."""
        if p <= 1.0:
            raise ValueError("Harnack inequality requires p > 1")
        return float(np.exp(p / (p - 1.0) * self.coeff * dist2))


def harnack_constants(model: SdeModel, x, grid: TimeGrid,
                      delta: float = None, n_paths: int = 4096,
                      rng_seed=2024) -> HarnackConstants:
    """Closed-form A_1, A_2 plus Monte Carlo (lambda_0, B_0).

    lambda_0 is chosen on a dyadic ladder: the largest lambda for which the
    sample mean of exp[lambda |||B^H|||^2] has relative standard error
    below 10% is halved (safety margin against heavy tails).  When K_2 = 0
    the A_2 term vanishes and (lambda_0, B_0) = (0, 1) with infinite radius.
    """
    h = model.hurst.h
    if model.hurst.regime is not HurstRegime.HIGH:
        raise ValueError("Harnack constants require H > 1/2")
    if delta is None:
        delta = 0.5 * (h - 0.5)
    if not 0.0 < delta < h - 0.5:
        raise ValueError("delta must lie in (0, H - 1/2)")
    t = grid.horizon
    k1, k2 = model.k1, model.k2
    bounds = apriori_bounds(model, np.atleast_1d(np.asarray(x, dtype=float)),
                            t, 0.0)
    d1, d2 = bounds.d1, bounds.d2
    g = sp.gamma(1.5 - h)
    c0 = c0_constant(model.hurst)
    a1 = 3.0 / (g * g * t ** (2.0 * h)) * (
        (1.0 + k1 * t) ** 2 / (2.0 - 2.0 * h)
        + (c0 * (h - 0.5) * (1.0 + k1 * t)) ** 2 / (2.0 - 2.0 * h)
        + (np.sqrt(3.0) * (h - 0.5) * (d1 * k2 * t + k1) * t
           / (np.sqrt(4.0 - 2.0 * h) * (1.5 - h))) ** 2)
    a2 = 9.0 * (h - 0.5) ** 2 / (g * g) * max(
        (d2 * k2 / (1.5 - h)) ** 2 * t ** (4.0 - 2.0 * h) / (4.0 - 2.0 * h),
        (k2 / (0.5 - delta)) ** 2 * t ** (2.0 - 2.0 * delta) / (2.0 - 2.0 * delta))
    if k2 == 0.0:
        return HarnackConstants(hurst=h, horizon=t, delta=delta, a1=a1,
                                a2=0.0, lam0=0.0, b0=1.0, b0_se=0.0,
                                d1=d1, d2=d2)
    _, bh = sample_path_batch(grid, model.dim, model.hurst, rng_seed, n_paths)
    combined = sup_norms_batch(bh) + holder_norms_batch(bh, grid, h - delta)
    c2 = combined ** 2
    lam_pass = None
    with np.errstate(over="ignore"):
        for k in range(12, -13, -1):
            lam = 2.0 ** k
            vals = np.exp(lam * c2)
            m = float(np.mean(vals))
            if not np.isfinite(m) or m <= 0.0:
                continue
            se = float(np.std(vals, ddof=1)) / np.sqrt(n_paths)
            if se / m < 0.10:
                lam_pass = lam
                break
    if lam_pass is None:
        raise RuntimeError("no dyadic lambda_0 with acceptable standard error")
    lam0 = 0.5 * lam_pass
    vals = np.exp(lam0 * c2)
    b0 = float(np.mean(vals))
    b0_se = float(np.std(vals, ddof=1)) / np.sqrt(n_paths)
    return HarnackConstants(hurst=h, horizon=t, delta=delta, a1=a1, a2=a2,
                            lam0=lam0, b0=b0, b0_se=b0_se, d1=d1, d2=d2)


def quad_variation_bound_check(constants: HarnackConstants,
                               quad_variation: np.ndarray,
                               combined_norms: np.ndarray, y) -> np.ndarray:
    """Margins of <N>_T <= (A_1 + A_2 |||B^H|||^2) |y|^2 per path.

    Nonnegative margins (up to roundoff) mean the bound holds pathwise.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    y2 = float(y @ y)
    c2 = np.asarray(combined_norms, dtype=float) ** 2
    return (constants.a1 + constants.a2 * c2) * y2 - np.asarray(quad_variation)
