"""SDE model specifications: drift/diffusion callables plus regularity constants.

A model carries the constants the estimates need (K1, K2, K3, d3, d4) as
trusted inputs; registration spot-checks them on random points rather than
proving them.  Built-in models are addressed by name, e.g. "ou(1.0)".
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .grids import Hurst, HurstRegime, as_hurst

__all__ = ["SdeModel", "make_model", "MODEL_NAMES"]

_SPOT_CHECK_POINTS = 1000
_SPOT_CHECK_TOL = 1e-9


@dataclass
class SdeModel:
    """Drift b(t, x) with gradient, constants, and optional 1-D diffusion.

    drift and drift_grad are vectorized over leading axes: drift(t, x) maps
    (..., d) -> (..., d) and drift_grad(t, x) maps (..., d) -> (..., d, d).
    k1 bounds |grad b| (operator norm), k2 is its Lipschitz constant, k3 the
    one-sided linear-growth constant <x, b(x)> <= k3 |x|^2 (optional).
    """

    name: str
    dim: int
    drift: Callable
    drift_grad: Callable
    k1: float
    k2: float
    hurst: Hurst
    k3: Optional[float] = None
    sigma: Optional[Callable] = None
    sigma_prime: Optional[Callable] = None
    d3: Optional[float] = None
    d4: Optional[float] = None
    time_dependent: bool = False
    rng_check_seed: int = 1234

    def __post_init__(self):
        self.hurst = as_hurst(self.hurst)
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        if self.time_dependent and self.hurst.regime is HurstRegime.HIGH:
            raise ValueError("time-dependent drift is only supported for H < 1/2")
        if self.sigma is not None:
            if self.dim != 1:
                raise ValueError("multiplicative diffusion only in dimension 1")
            if self.d3 is None or self.d4 is None or not 0.0 < self.d3 <= self.d4:
                raise ValueError("diffusion requires bounds 0 < d3 <= d4")
        self._spot_check()

    # -- vectorized helpers --------------------------------------------------

    def b(self, t, x):
        """Drift at time t and states x, shape (..., d) -> (..., d)."""
        return np.asarray(self.drift(t, np.asarray(x, dtype=float)), dtype=float)

    def grad_b(self, t, x):
        """Drift Jacobian, shape (..., d) -> (..., d, d)."""
        return np.asarray(self.drift_grad(t, np.asarray(x, dtype=float)), dtype=float)

    def grad_b_y(self, t, x, y):
        """Directional derivative (grad b) y, shape (..., d)."""
        jac = self.grad_b(t, x)
        return jac @ np.asarray(y, dtype=float)

    # -- registration spot checks -------------------------------------------

    def _spot_check(self):
        rng = np.random.default_rng(self.rng_check_seed)
        x = rng.normal(0.0, 3.0, size=(_SPOT_CHECK_POINTS, self.dim))
        y = rng.normal(0.0, 3.0, size=(_SPOT_CHECK_POINTS, self.dim))
        ts = rng.uniform(0.0, 2.0, size=_SPOT_CHECK_POINTS) if self.time_dependent else 0.0
        jx = self.grad_b(ts, x)
        jy = self.grad_b(ts, y)
        op_norms = np.linalg.norm(jx, ord=2, axis=(-2, -1))
        if np.any(op_norms > self.k1 + _SPOT_CHECK_TOL):
            raise ValueError(
                f"model {self.name!r}: |grad b| exceeds K1={self.k1} "
                f"(observed {op_norms.max():.6g})")
        gaps = np.linalg.norm(jx - jy, ord=2, axis=(-2, -1))
        dists = np.linalg.norm(x - y, axis=-1)
        if np.any(gaps > self.k2 * dists + _SPOT_CHECK_TOL):
            raise ValueError(
                f"model {self.name!r}: grad b Lipschitz constant exceeds K2={self.k2}")
        if self.k3 is not None and not self.time_dependent:
            inner = np.einsum("pd,pd->p", x, self.b(0.0, x))
            if np.any(inner > self.k3 * np.sum(x * x, axis=-1) + _SPOT_CHECK_TOL):
                raise ValueError(
                    f"model {self.name!r}: <x, b(x)> exceeds K3|x|^2 with K3={self.k3}")
        if self.sigma is not None:
            xs = rng.normal(0.0, 5.0, size=_SPOT_CHECK_POINTS)
            sig = np.asarray(self.sigma(xs), dtype=float)
            if np.any(sig < self.d3 - _SPOT_CHECK_TOL) or np.any(sig > self.d4 + _SPOT_CHECK_TOL):
                raise ValueError(
                    f"model {self.name!r}: sigma leaves [{self.d3}, {self.d4}]")


# ---------------------------------------------------------------------------
# built-in registry

# max |d/dx sech^2(x)| = 4/(3*sqrt(3))
_SECH2_LIP = 4.0 / (3.0 * np.sqrt(3.0))


def _zero(dim: int, hurst) -> SdeModel:
    return SdeModel(
        name="zero", dim=dim, hurst=hurst,
        drift=lambda t, x: np.zeros_like(x),
        drift_grad=lambda t, x: np.zeros(np.shape(x) + (dim,)),
        k1=0.0, k2=0.0, k3=0.0)


def _ou(kappa: float, dim: int, hurst) -> SdeModel:
    if kappa <= 0:
        raise ValueError("ou model requires kappa > 0")
    eye = np.eye(dim)

    def grad(t, x):
        return np.broadcast_to(-kappa * eye, np.shape(x) + (dim,))

    return SdeModel(
        name=f"ou({kappa:g})", dim=dim, hurst=hurst,
        drift=lambda t, x: -kappa * x, drift_grad=grad,
        k1=kappa, k2=0.0, k3=-kappa)


def _tanh_drift(a: float, dim: int, hurst) -> SdeModel:
    def drift(t, x):
        return a * np.tanh(x)

    def grad(t, x):
        diag = a / np.cosh(x) ** 2
        out = np.zeros(np.shape(x) + (dim,))
        idx = np.arange(dim)
        out[..., idx, idx] = diag
        return out

    return SdeModel(
        name=f"tanh_drift({a:g})", dim=dim, hurst=hurst,
        drift=drift, drift_grad=grad,
        k1=abs(a), k2=_SECH2_LIP * abs(a), k3=max(a, 0.0))


def _td_decay(dim: int, hurst) -> SdeModel:
    """Time-dependent drift b(t, x) = -x/(1+t) (H < 1/2 only)."""
    eye = np.eye(dim)

    def drift(t, x):
        return -x / (1.0 + np.asarray(t, dtype=float))[..., None] \
            if np.ndim(t) else -x / (1.0 + t)

    def grad(t, x):
        scale = -1.0 / (1.0 + np.asarray(t, dtype=float))
        if np.ndim(t):
            return scale[..., None, None] * eye
        return np.broadcast_to(scale * eye, np.shape(x) + (dim,))

    return SdeModel(
        name="td_decay", dim=dim, hurst=hurst,
        drift=drift, drift_grad=grad,
        k1=1.0, k2=0.0, k3=0.0, time_dependent=True)


def _mult_tanh(hurst) -> SdeModel:
    return SdeModel(
        name="mult_tanh", dim=1, hurst=hurst,
        drift=lambda t, x: np.zeros_like(x),
        drift_grad=lambda t, x: np.zeros(np.shape(x) + (1,)),
        k1=0.0, k2=0.0, k3=0.0,
        sigma=lambda x: 2.0 + np.tanh(x),
        sigma_prime=lambda x: 1.0 / np.cosh(x) ** 2,
        d3=1.0, d4=3.0)


MODEL_NAMES = ("zero", "ou", "tanh_drift", "td_decay", "mult_tanh")

_NAME_RE = re.compile(r"^([a-z_]+)(?:\(([^)]*)\))?$")


def make_model(spec: str, hurst, dim: int = 1) -> SdeModel:
    """Instantiate a built-in model from a registry string.

    Accepted: "zero", "ou(kappa)", "tanh_drift(a)", "td_decay", "mult_tanh".
    """
    m = _NAME_RE.match(spec.strip())
    if not m:
        raise ValueError(f"malformed model spec {spec!r}")
    name, arg = m.group(1), m.group(2)
    hurst = as_hurst(hurst)
    if name == "zero":
        return _zero(dim, hurst)
    if name == "ou":
        return _ou(float(arg) if arg else 1.0, dim, hurst)
    if name == "tanh_drift":
        return _tanh_drift(float(arg) if arg else 1.0, dim, hurst)
    if name == "td_decay":
        return _td_decay(dim, hurst)
    if name == "mult_tanh":
        if dim != 1:
            raise ValueError("mult_tanh is one-dimensional")
        return _mult_tanh(hurst)
    raise ValueError(f"unknown model {name!r}; known: {MODEL_NAMES}")
