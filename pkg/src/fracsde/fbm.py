"""Fractional Brownian motion: covariance, Volterra kernel, path sampling.

The production pipeline is W-first: ordinary Brownian increments are drawn
and the fBm is assembled through the Volterra kernel, B^H(t_i) =
sum_{j<i} K_H(t_i, s_j*) dW_j with s_j* the step midpoints.  An exact-law
fractional Gaussian noise generator (circulant embedding) is kept purely
as a distributional oracle for the Volterra construction.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla
from scipy import special as sp

from .grids import Hurst, HurstRegime, TimeGrid, as_hurst

__all__ = [
    "PathPair",
    "fbm_covariance",
    "volterra_kernel",
    "volterra_matrix",
    "sample_path_pair",
    "sample_path_batch",
    "sample_fgn_exact",
    "fgn_autocovariance",
]


@dataclass(frozen=True)
class PathPair:
    """Coupled discrete sample of the driving W and the derived B^H."""

    grid: TimeGrid
    dim: int
    w_increments: np.ndarray  # (n_steps, dim), each entry ~ N(0, dt)
    fbm_values: np.ndarray    # (n_steps+1, dim), fbm_values[0] = 0


def fbm_covariance(t: float, s: float, h) -> float:
    """Covariance R_H(t, s) = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2."""
    hurst = as_hurst(h)
    if t < 0.0 or s < 0.0:
        raise ValueError("fBm covariance requires nonnegative times")
    two_h = 2.0 * hurst.h
    return 0.5 * (t ** two_h + s ** two_h - abs(t - s) ** two_h)


def _kernel_constant(h: float) -> float:
    if h > 0.5:
        return np.sqrt(h * (2.0 * h - 1.0) / sp.beta(2.0 - 2.0 * h, h - 0.5))
    return np.sqrt(2.0 * h / ((1.0 - 2.0 * h) * sp.beta(1.0 - 2.0 * h, h + 0.5)))


def _kernel_high(t: np.ndarray, s: np.ndarray, h: float) -> np.ndarray:
    # K_H(t,s) = c_H s^{1/2-H} int_s^t (u-s)^{H-3/2} u^{H-1/2} du.  The
    # substitution u = s/theta turns the integral into
    # s^{2H-1} int_{s/t}^1 theta^{a-1} (1-theta)^{b-1} dtheta with
    # a = 1-2H < 0, b = H-1/2; one integration by parts lifts a to a+1 > 0
    # so the tail is an ordinary regularized incomplete beta.
    a = 1.0 - 2.0 * h
    b = h - 0.5
    x = s / t
    tail = sp.beta(a + 1.0, b) * (1.0 - sp.betainc(a + 1.0, b, x))
    integral = (-(x ** a) * (1.0 - x) ** b + (a + b) * tail) / a
    return _kernel_constant(h) * s ** (h - 0.5) * integral


def _kernel_low(t: np.ndarray, s: np.ndarray, h: float) -> np.ndarray:
    # K_H(t,s) = c_H [ (t/s)^{H-1/2}(t-s)^{H-1/2}
    #                  - (H-1/2) s^{1/2-H} int_s^t u^{H-3/2}(u-s)^{H-1/2} du ];
    # the same u = s/theta substitution makes the integral an incomplete
    # beta with parameters a = 1-2H > 0, b = H+1/2.
    a = 1.0 - 2.0 * h
    b = h + 0.5
    x = s / t
    tail = sp.beta(a, b) * (1.0 - sp.betainc(a, b, x))
    alg = (t / s) ** (h - 0.5) * (t - s) ** (h - 0.5)
    return _kernel_constant(h) * (alg - (h - 0.5) * s ** (h - 0.5) * tail)


def volterra_kernel(t, s, h):
    """Volterra kernel K_H(t, s) for 0 < s < t.

    Satisfies R_H(t, s) = int_0^{t ^ s} K_H(t, r) K_H(s, r) dr; for
    H = 1/2 the kernel is the indicator of {s < t}.  Diverges as s -> t
    for H < 1/2 and as s -> 0 for H > 1/2.
    """
    hurst = as_hurst(h)
    t_arr = np.asarray(t, dtype=float)
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr <= 0.0) or np.any(s_arr >= t_arr):
        raise ValueError("Volterra kernel requires 0 < s < t")
    if hurst.regime is HurstRegime.BROWNIAN:
        out = np.ones(np.broadcast_shapes(t_arr.shape, s_arr.shape))
    elif hurst.regime is HurstRegime.HIGH:
        out = _kernel_high(t_arr, s_arr, hurst.h)
    else:
        out = _kernel_low(t_arr, s_arr, hurst.h)
    return out if out.ndim else float(out)


def volterra_matrix(grid: TimeGrid, h) -> np.ndarray:
    """Lower-triangular map from W increments to fBm node values.

    Returns L of shape (n_steps+1, n_steps) with L[i, j] = K_H(t_i, s_j*)
    for j < i (midpoint kernel evaluation) and 0 otherwise, so that
    fbm_values = L @ w_increments.
    """
    hurst = as_hurst(h)
    n = grid.n_steps
    t = grid.nodes
    mids = grid.midpoints
    L = np.zeros((n + 1, n))
    rows, cols = np.tril_indices(n, k=0)
    # node index i = row + 1 pairs with midpoints j = col <= row < i
    tt = t[rows + 1]
    ss = mids[cols]
    if hurst.regime is HurstRegime.BROWNIAN:
        vals = np.ones_like(tt)
    elif hurst.regime is HurstRegime.HIGH:
        vals = _kernel_high(tt, ss, hurst.h)
    else:
        vals = _kernel_low(tt, ss, hurst.h)
    L[rows + 1, cols] = vals
    return L


def sample_path_batch(grid: TimeGrid, dim: int, h, rng_seed,
                      n_paths: int,
                      volterra: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Batch W-first sampling.

    Returns (dw, bh) with dw of shape (n_paths, n_steps, dim) and bh of
    shape (n_paths, n_steps+1, dim).  Deterministic given rng_seed.
    """
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    hurst = as_hurst(h)
    rng = np.random.default_rng(rng_seed)
    n = grid.n_steps
    dw = rng.normal(0.0, np.sqrt(grid.dt), size=(n_paths, n, dim))
    if hurst.regime is HurstRegime.BROWNIAN:
        bh = np.zeros((n_paths, n + 1, dim))
        bh[:, 1:, :] = np.cumsum(dw, axis=1)
        return dw, bh
    if volterra is None:
        volterra = volterra_matrix(grid, hurst)
    # (n+1, n) @ (n, P*d) in one BLAS call
    flat = np.moveaxis(dw, 1, 0).reshape(n, -1)
    bh_flat = volterra @ flat
    bh = np.moveaxis(bh_flat.reshape(n + 1, n_paths, dim), 0, 1)
    bh[:, 0, :] = 0.0
    return dw, bh


def sample_path_pair(grid: TimeGrid, dim: int, h, rng_seed,
                     volterra: np.ndarray | None = None) -> PathPair:
    """Sample one coupled (W, B^H) path; deterministic given the seed."""
    dw, bh = sample_path_batch(grid, dim, h, rng_seed, 1, volterra=volterra)
    return PathPair(grid=grid, dim=dim, w_increments=dw[0], fbm_values=bh[0])


def fgn_autocovariance(k, h, dt: float = 1.0):
    """Autocovariance gamma(k) of fractional Gaussian noise increments."""
    hurst = as_hurst(h)
    two_h = 2.0 * hurst.h
    k = np.abs(np.asarray(k, dtype=float))
    out = 0.5 * (np.abs(k + 1) ** two_h - 2 * k ** two_h + np.abs(k - 1) ** two_h)
    return out * dt ** two_h


# negative circulant eigenvalue mass below this fraction of the trace is clipped
_EMBEDDING_TOL = 1e-8


def sample_fgn_exact(h, n: int, dt: float, rng_seed, n_paths: int | None = None) -> np.ndarray:
    """Exact-law stationary fGn via circulant embedding (Davies-Harte).

    Falls back to a dense Cholesky factorization (with a warning) when the
    circulant embedding has substantially negative eigenvalues.  Returns a
    (n,) array, or (n_paths, n) when n_paths is given.
    """
    if n < 2:
        raise ValueError("need at least two lags")
    hurst = as_hurst(h)
    squeeze = n_paths is None
    p = 1 if squeeze else n_paths
    rng = np.random.default_rng(rng_seed)
    gamma = fgn_autocovariance(np.arange(n + 1), hurst, dt)
    circ = np.concatenate([gamma[:n], [gamma[n]], gamma[n - 1:0:-1]])
    lam = np.fft.fft(circ).real
    neg_mass = -lam[lam < 0].sum()
    if neg_mass > _EMBEDDING_TOL * lam.sum():
        warnings.warn(
            "circulant embedding not nonnegative definite; "
            "falling back to Cholesky", RuntimeWarning)
        cov = sla.toeplitz(gamma[:n])
        chol = np.linalg.cholesky(cov)
        out = rng.normal(size=(p, n)) @ chol.T
        return out[0] if squeeze else out
    lam = np.clip(lam, 0.0, None)
    m = 2 * n
    u = rng.normal(size=(p, m))
    v = rng.normal(size=(p, m))
    w = np.zeros((p, m), dtype=complex)
    w[:, 0] = np.sqrt(lam[0] / m) * u[:, 0]
    w[:, n] = np.sqrt(lam[n] / m) * u[:, n]
    ks = np.arange(1, n)
    half = np.sqrt(lam[ks] / (2 * m))
    w[:, ks] = half * (u[:, ks] + 1j * v[:, ks])
    w[:, m - ks] = np.conj(w[:, ks])
    out = np.fft.fft(w, axis=1).real[:, :n]
    return out[0] if squeeze else out
