"""Euler solvers, a-priori bounds, Lamperti transform, coupling constructions.

Additive-noise equations dX = b(t, X)dt + dB^H are solved by explicit Euler
(the noise term is exact for additive noise).  One-dimensional multiplicative
equations dX = b(X)dt + sigma(X)dB^H are solved through the Lamperti
transform F(y) = int_0^y dz/sigma(z), which reduces them to additive noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .fbm import PathPair
from .grids import TimeGrid
from .models import SdeModel

__all__ = [
    "SolvedPath",
    "AprioriBounds",
    "LampertiMap",
    "solve_additive",
    "solve_additive_batch",
    "solve_multiplicative_1d",
    "solve_young_1d",
    "lamperti",
    "coupled_bismut_pair",
    "coupled_ibp_pair",
    "apriori_bounds",
]


class SolverFailure(RuntimeError):
    """Euler step produced a non-finite state; carries the failing step."""

    def __init__(self, step: int):
        super().__init__(f"solver failure (non-finite state) at step {step}")
        self.step = step


@dataclass(frozen=True)
class SolvedPath:
    """One Euler trajectory together with its inputs."""

    model: SdeModel
    x0: np.ndarray
    path_pair: PathPair
    x_values: np.ndarray  # (n_steps+1, dim)


@dataclass(frozen=True)
class AprioriBounds:
    """Constants of the Gronwall a-priori estimate at a given start x."""

    d1: float
    d2: float
    sup_bound: float


def apriori_bounds(model: SdeModel, x0: np.ndarray, horizon: float,
                   noise_sup: float) -> AprioriBounds:
    """d1, d2 and the pathwise sup bound
    ||X||_inf <= [(1+K1 T)|x| + T|b(x)| + ||B^H||_inf] e^{K1 T}."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    k1 = model.k1
    t = horizon
    bx = float(np.linalg.norm(model.b(0.0, x0)))
    ax = float(np.linalg.norm(x0))
    e = np.exp(k1 * t)
    d1 = k1 * e * ax + (1.0 + k1 * t * e) * (k1 * ax + bx)
    d2 = k1 * e
    sup_bound = ((1.0 + k1 * t) * ax + t * bx + noise_sup) * e
    return AprioriBounds(d1=d1, d2=d2, sup_bound=sup_bound)


def _euler(model: SdeModel, x0: np.ndarray, grid: TimeGrid,
           fbm_values: np.ndarray, extra_drift: Optional[np.ndarray] = None,
           drift_states: Optional[np.ndarray] = None) -> np.ndarray:
    """Shared Euler loop over a batch.

    fbm_values: (P, n+1, d).  extra_drift: constant (d,) added to the drift.
    drift_states: if given, evaluate the drift along these states instead of
    the evolving ones (used by the exact couplings).
    """
    p, n_plus, d = fbm_values.shape
    n = n_plus - 1
    dt = grid.dt
    t = grid.nodes
    x = np.empty((p, n + 1, d))
    x[:, 0, :] = x0
    db = np.diff(fbm_values, axis=1)
    for i in range(n):
        state = x[:, i, :] if drift_states is None else drift_states[:, i, :]
        inc = model.b(t[i], state) * dt + db[:, i, :]
        if extra_drift is not None:
            inc = inc + extra_drift * dt
        x[:, i + 1, :] = x[:, i, :] + inc
        if not np.all(np.isfinite(x[:, i + 1, :])):
            raise SolverFailure(i + 1)
    return x


def solve_additive_batch(model: SdeModel, x0, grid: TimeGrid,
                         fbm_values: np.ndarray,
                         check_bounds: bool = True) -> np.ndarray:
    """Euler for dX = b(t,X)dt + dB^H over a batch; returns (P, n+1, d)."""
    if model.sigma is not None:
        raise ValueError("solve_additive requires an additive model")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    x = _euler(model, x0, grid, fbm_values)
    if check_bounds and not model.time_dependent:
        noise_sup = float(np.max(np.linalg.norm(fbm_values, axis=2)))
        bounds = apriori_bounds(model, x0, grid.horizon, noise_sup)
        observed = float(np.max(np.linalg.norm(x, axis=2)))
        assert observed <= bounds.sup_bound * (1.0 + 1e-9), (
            f"a-priori sup bound violated: {observed} > {bounds.sup_bound}")
    return x


def solve_additive(model: SdeModel, x0, path_pair: PathPair,
                   check_bounds: bool = True) -> SolvedPath:
    """Single-path front end of solve_additive_batch."""
    x = solve_additive_batch(model, x0, path_pair.grid,
                             path_pair.fbm_values[None, :, :],
                             check_bounds=check_bounds)
    return SolvedPath(model=model, x0=np.atleast_1d(np.asarray(x0, dtype=float)),
                      path_pair=path_pair, x_values=x[0])


# ---------------------------------------------------------------------------
# Lamperti transform

class LampertiMap:
    """Tabulated F(y) = int_0^y dz/sigma(z) with spline inverse.

    F is a cubic Hermite interpolant whose node slopes are exactly 1/sigma;
    the inverse seeds from linear interpolation and polishes with Newton
    iterations on the spline (round-trip accuracy ~1e-12).
    """

    def __init__(self, sigma: Callable, lo: float, hi: float,
                 n_table: int = 4097, d3: float = None, d4: float = None):
        if hi <= lo or not lo <= 0.0 <= hi:
            raise ValueError("tabulation range must contain 0 with lo < hi")
        self.lo, self.hi = float(lo), float(hi)
        xs = np.linspace(lo, hi, n_table)
        inv_sigma = 1.0 / np.asarray(sigma(xs), dtype=float)
        if d3 is not None and (np.any(inv_sigma > 1.0 / d3 + 1e-12)
                               or np.any(inv_sigma < 1.0 / d4 - 1e-12)):
            raise ValueError("sigma leaves [d3, d4] on the tabulation range")
        # cumulative cell integrals by 5-point Gauss-Legendre
        gx, gw = np.polynomial.legendre.leggauss(5)
        mids = 0.5 * (xs[:-1] + xs[1:])
        half = 0.5 * np.diff(xs)
        cells = np.zeros(n_table - 1)
        for xk, wk in zip(gx, gw):
            cells += wk / np.asarray(sigma(mids + xk * half), dtype=float)
        cells *= half
        values = np.concatenate([[0.0], np.cumsum(cells)])
        anchor = np.interp(0.0, xs, values)
        values -= anchor  # enforce F(0) = 0
        self._xs = xs
        self._values = values
        self._spline = CubicHermiteSpline(xs, values, inv_sigma)
        self._dspline = self._spline.derivative()

    def forward(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.lo) or np.any(x > self.hi):
            raise ValueError("argument outside Lamperti tabulation range")
        return self._spline(x)

    def derivative(self, x):
        return self._dspline(np.asarray(x, dtype=float))

    def inverse(self, z):
        z = np.asarray(z, dtype=float)
        if np.any(z < self._values[0]) or np.any(z > self._values[-1]):
            raise ValueError("argument outside Lamperti tabulation range")
        x = np.interp(z, self._values, self._xs)
        for _ in range(3):
            x = x - (self._spline(x) - z) / self._dspline(x)
            x = np.clip(x, self.lo, self.hi)
        return x

    def inverse_fast(self, z):
        """Table-lookup inverse without Newton polish.

        Accuracy ~ table spacing squared; used for drift evaluations inside
        the Euler loop, where the Lipschitz drift tolerates it."""
        z = np.asarray(z, dtype=float)
        if np.any(z < self._values[0]) or np.any(z > self._values[-1]):
            raise ValueError("argument outside Lamperti tabulation range")
        return np.interp(z, self._values, self._xs)


def lamperti(sigma: Callable, lo: float, hi: float, n_table: int = 4097,
             d3: float = None, d4: float = None) -> LampertiMap:
    """Build the Lamperti map F, F^{-1} for sigma on [lo, hi]."""
    return LampertiMap(sigma, lo, hi, n_table=n_table, d3=d3, d4=d4)


def _transformed_drift(model: SdeModel, lam: LampertiMap):
    def drift(t, y):
        x = lam.inverse_fast(y)
        return model.b(t, x) / np.asarray(model.sigma(x), dtype=float)
    return drift


def solve_multiplicative_1d(model: SdeModel, x0: float, path_pair: PathPair,
                            lam: Optional[LampertiMap] = None) -> SolvedPath:
    """1-D multiplicative SDE dX = b(X)dt + sigma(X)dB^H via Lamperti.

    Requires H > 1/2 (pathwise Young integration regime) and dim = 1.
    """
    batch = solve_multiplicative_batch(model, x0, path_pair.grid,
                                       path_pair.fbm_values[None, :, :], lam=lam)
    return SolvedPath(model=model, x0=np.atleast_1d(float(x0)),
                      path_pair=path_pair, x_values=batch[0])


def solve_multiplicative_batch(model: SdeModel, x0: float, grid: TimeGrid,
                               fbm_values: np.ndarray,
                               lam: Optional[LampertiMap] = None) -> np.ndarray:
    if model.sigma is None:
        raise ValueError("model has no diffusion")
    if model.hurst.h <= 0.5:
        raise ValueError("multiplicative solver requires H > 1/2")
    x0 = float(np.ravel(x0)[0])
    if lam is None:
        lam = _auto_lamperti(model, x0, grid, fbm_values)
    y0 = float(lam.forward(x0))
    drift = _transformed_drift(model, lam)
    trans = SdeModel.__new__(SdeModel)  # lightweight shell; skip spot checks
    trans.__dict__.update(model.__dict__)
    trans.name = model.name + ":lamperti"
    trans.drift = drift
    trans.sigma = None
    trans.d3 = trans.d4 = trans.sigma_prime = None
    y = _euler(trans, np.array([y0]), grid, fbm_values)
    # table-lookup inverse: its O(table spacing^2) error is far below the
    # Euler discretization error of the path itself
    return lam.inverse_fast(y)


def _auto_lamperti(model: SdeModel, x0: float, grid: TimeGrid,
                   fbm_values: np.ndarray) -> LampertiMap:
    """Tabulation range padded by the a-priori sup bound of the Y equation.

    Maps are cached on the model keyed by the half-width rounded up to the
    next power of two, so repeated chunked solves reuse one table.
    """
    noise_sup = float(np.max(np.abs(fbm_values)))
    bx = float(np.abs(model.b(0.0, np.array([x0])))[0]) / model.d3
    y0 = abs(x0) / model.d3
    k1bar = model.k1 * model.d4 / model.d3 ** 2  # crude Lipschitz bound for b/sigma
    r = ((1.0 + k1bar * grid.horizon) * y0 + grid.horizon * bx + noise_sup + 1.0) \
        * np.exp(k1bar * grid.horizon) + 1.0
    half_width = model.d4 * r + abs(x0) + 1.0
    half_width = float(2.0 ** np.ceil(np.log2(half_width)))
    cache = model.__dict__.setdefault("_lamperti_cache", {})
    if half_width not in cache:
        n_table = max(4097, int(np.ceil(2.0 * half_width / 2e-3)) + 1)
        cache[half_width] = LampertiMap(
            model.sigma, -half_width, half_width,
            n_table=min(n_table, 1 << 17), d3=model.d3, d4=model.d4)
    return cache[half_width]


def solve_young_1d(model: SdeModel, x0: float, path_pair: PathPair) -> SolvedPath:
    """Direct left-point Young-Euler scheme for dX = b dt + sigma(X)dB^H.

    Test oracle only; production multiplicative solves go through Lamperti.
    """
    if model.sigma is None:
        raise ValueError("model has no diffusion")
    grid = path_pair.grid
    n = grid.n_steps
    dt = grid.dt
    t = grid.nodes
    db = np.diff(path_pair.fbm_values[:, 0])
    x = np.empty(n + 1)
    x[0] = float(x0)
    for i in range(n):
        xi = np.array([x[i]])
        x[i + 1] = (x[i] + float(model.b(t[i], xi)[0]) * dt
                    + float(np.asarray(model.sigma(x[i]))) * db[i])
        if not np.isfinite(x[i + 1]):
            raise SolverFailure(i + 1)
    return SolvedPath(model=model, x0=np.atleast_1d(float(x0)),
                      path_pair=path_pair, x_values=x[:, None])


# ---------------------------------------------------------------------------
# exact couplings

def coupled_bismut_pair(model: SdeModel, x, y, eps: float,
                        path_pair: PathPair) -> tuple[SolvedPath, SolvedPath]:
    """Derivative-formula coupling: X^eps has drift b evaluated along X plus the
    constant pull -(eps/T) y and start x + eps y, so that
    X^eps_t - X_t = ((T-t)/T) eps y exactly and X^eps_T = X_T."""
    if model.sigma is not None or model.time_dependent:
        raise ValueError("bismut coupling requires an additive, time-homogeneous model")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    grid = path_pair.grid
    fb = path_pair.fbm_values[None, :, :]
    xv = _euler(model, x, grid, fb)
    xe = _euler(model, x + eps * y, grid, fb,
                extra_drift=-(eps / grid.horizon) * y, drift_states=xv)
    base = SolvedPath(model=model, x0=x, path_pair=path_pair, x_values=xv[0])
    pert = SolvedPath(model=model, x0=x + eps * y, path_pair=path_pair,
                      x_values=xe[0])
    return base, pert


def coupled_ibp_pair(model: SdeModel, x, y, eps: float,
                     path_pair: PathPair) -> tuple[SolvedPath, SolvedPath]:
    """Shift-IBP coupling: X^eps has drift b(t, X) plus +(eps/T) y and
    the same start, so that X^eps_t - X_t = (t/T) eps y exactly."""
    if model.sigma is not None:
        raise ValueError("ibp coupling requires an additive model")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    grid = path_pair.grid
    fb = path_pair.fbm_values[None, :, :]
    xv = _euler(model, x, grid, fb)
    xe = _euler(model, x, grid, fb,
                extra_drift=(eps / grid.horizon) * y, drift_states=xv)
    base = SolvedPath(model=model, x0=x, path_pair=path_pair, x_values=xv[0])
    pert = SolvedPath(model=model, x0=x, path_pair=path_pair, x_values=xe[0])
    return base, pert
