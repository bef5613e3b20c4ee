"""Time grids, Hurst parameters and discrete path norms.

Everything downstream (noise generation, solvers, weights) shares one
uniform partition of [0, T]; the norm computations here are exact for the
discrete path, i.e. sups are taken over all grid node pairs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

# Pairwise Hoelder-norm computation is O(n^2); larger grids are rejected.
MAX_NORM_GRID = 4096


class HurstRegime(enum.Enum):
    LOW = "low"          # H < 1/2
    BROWNIAN = "brownian"  # H = 1/2
    HIGH = "high"        # H > 1/2


@dataclass(frozen=True)
class Hurst:
    """Hurst parameter in (0, 1) with its regime."""

    h: float

    def __post_init__(self):
        if not 0.0 < self.h < 1.0:
            raise ValueError(f"Hurst parameter must lie in (0, 1), got {self.h}")

    @property
    def regime(self) -> HurstRegime:
        if self.h < 0.5:
            return HurstRegime.LOW
        if self.h > 0.5:
            return HurstRegime.HIGH
        return HurstRegime.BROWNIAN


def as_hurst(h) -> Hurst:
    """Coerce a float or Hurst into a Hurst instance."""
    return h if isinstance(h, Hurst) else Hurst(float(h))


@dataclass(frozen=True)
class TimeGrid:
    """Uniform partition of [0, T] with n_steps steps (n_steps+1 nodes)."""

    horizon: float
    n_steps: int

    def __post_init__(self):
        if self.horizon <= 0.0:
            raise ValueError("time horizon must be positive")
        if self.n_steps < 1:
            raise ValueError("need at least one step")

    @property
    def dt(self) -> float:
        return self.horizon / self.n_steps

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n_steps + 1)

    @property
    def midpoints(self) -> np.ndarray:
        """Step midpoints, used for singularity-free kernel evaluation."""
        t = self.nodes
        return 0.5 * (t[:-1] + t[1:])


@dataclass(frozen=True)
class PathNorms:
    """Sup norm, Hoelder norm at exponent beta, and their sum."""

    sup_norm: float
    holder_norm: float
    beta: float

    @property
    def combined(self) -> float:
        return self.sup_norm + self.holder_norm


def path_norms(values: np.ndarray, grid: TimeGrid, beta: float) -> PathNorms:
    """Exact discrete sup and Hoelder norms of a sampled path.

    values has shape (n_steps+1,) or (n_steps+1, d); the Hoelder quotient
    |f(t)-f(s)|/|t-s|^beta is maximized over all node pairs.
    """
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie in (0, 1)")
    values = np.asarray(values, dtype=float)
    if values.shape[0] < 2:
        raise ValueError("need at least two nodes for path norms")
    if values.shape[0] != grid.n_steps + 1:
        raise ValueError("values length does not match grid")
    if grid.n_steps + 1 > MAX_NORM_GRID:
        raise ValueError(f"norm computation limited to {MAX_NORM_GRID} nodes")
    if values.ndim == 1:
        values = values[:, None]
    t = grid.nodes
    norms = _holder_batch(values[None, :, :], t, beta)
    sup = float(np.max(np.linalg.norm(values, axis=1)))
    return PathNorms(sup_norm=sup, holder_norm=float(norms[0]), beta=beta)


def _holder_batch(values: np.ndarray, t: np.ndarray, beta: float) -> np.ndarray:
    """Hoelder norms for a batch of paths, shape (P, n+1, d) -> (P,)."""
    gaps = np.abs(t[None, :] - t[:, None]) ** beta
    np.fill_diagonal(gaps, np.inf)  # exclude s == t
    diffs = np.linalg.norm(values[:, None, :, :] - values[:, :, None, :], axis=3)
    return np.max(diffs / gaps[None, :, :], axis=(1, 2))


def holder_norms_batch(values: np.ndarray, grid: TimeGrid, beta: float,
                       chunk: int = 64) -> np.ndarray:
    """Discrete Hoelder norms for a batch of scalar or vector paths.

    values: (P, n+1) or (P, n+1, d). Chunks the O(P n^2) broadcast to keep
    memory bounded.
    """
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie in (0, 1)")
    values = np.asarray(values, dtype=float)
    if values.ndim == 2:
        values = values[:, :, None]
    if grid.n_steps + 1 > MAX_NORM_GRID:
        raise ValueError(f"norm computation limited to {MAX_NORM_GRID} nodes")
    t = grid.nodes
    out = np.empty(values.shape[0])
    for lo in range(0, values.shape[0], chunk):
        hi = min(lo + chunk, values.shape[0])
        out[lo:hi] = _holder_batch(values[lo:hi], t, beta)
    return out


def sup_norms_batch(values: np.ndarray) -> np.ndarray:
    """Sup norms for a batch of paths, (P, n+1) or (P, n+1, d)."""
    values = np.asarray(values, dtype=float)
    if values.ndim == 2:
        return np.max(np.abs(values), axis=1)
    return np.max(np.linalg.norm(values, axis=2), axis=1)
