"""Monte Carlo estimators and inequality verification harnesses.

All estimators are replica-parallel over deterministic per-chunk seed
streams (numpy SeedSequence spawning) with a fixed-order reduction, so the
results are bit-reproducible for a given seed regardless of chunk size.
Solver failures are isolated by bisection and counted; an experiment aborts
if more than 0.1% of the replicas fail.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import special as sp
from scipy import stats

from .fbm import sample_path_batch, volterra_matrix
from .grids import (HurstRegime, TimeGrid, holder_norms_batch, sup_norms_batch)
from .models import SdeModel
from .sde import (SolverFailure, apriori_bounds, solve_additive_batch,
                  solve_multiplicative_batch)
from .weights import (HarnackConstants, bismut_weight, harnack_constants,
                      ibp_weight_high, ibp_weight_low)

__all__ = [
    "McEstimate",
    "FdGradient",
    "IbpReport",
    "InequalityReport",
    "InvariantMeasureTrace",
    "DensityReport",
    "TestFunction",
    "make_test_function",
    "estimate_pt",
    "gradient_bismut",
    "gradient_fd",
    "ibp_check",
    "harnack_check",
    "shift_harnack_check",
    "invariant_measure_iterate",
    "density_smoke",
    "TEST_FUNCTION_NAMES",
]

_DEFAULT_CHUNK = 1 << 14
_MAX_FAILURE_FRACTION = 1e-3


# ---------------------------------------------------------------------------
# results

@dataclass(frozen=True)
class McEstimate:
    """Sample mean with its standard error."""

    mean: float
    std_error: float
    n_paths: int
    seed: int


@dataclass(frozen=True)
class FdGradient:
    """Finite-difference gradient with a Richardson bias estimate."""

    estimate: McEstimate
    fd_eps: float
    bias: float  # |G(eps) - G(eps/2)| / 3, estimates the O(eps^2) FD bias


@dataclass(frozen=True)
class IbpReport:
    """Same-path comparison of E[(grad_y f)(X_T)] and E[f(X_T) N_T]."""

    lhs: McEstimate
    rhs: McEstimate
    diff: float
    se_diff: float  # SE of the per-path difference (same paths on both sides)


@dataclass(frozen=True)
class InequalityReport:
    """One Harnack-type comparison lhs <= rhs * factor."""

    lhs: McEstimate           # (P_T f(x))^p, delta-method SE
    rhs: McEstimate           # P_T f^p(y) (or shifted variant)
    exponent_factor: float    # the exp[...] bound
    margin: float             # rhs.mean * factor - lhs.mean
    margin_se: float
    admissible: bool          # radius constraint satisfied
    distance: float           # |x - y| or |y|
    radius: float             # admissibility radius (inf when A2 = 0)


@dataclass(frozen=True)
class InvariantMeasureTrace:
    """Krylov-Bogoliubov iteration record."""

    block_T: float
    n_blocks: int
    endpoint_samples: np.ndarray   # (n_blocks, n_chains, d) block endpoints
    block_moments: np.ndarray      # (n_blocks,) chain-average |X|^2 per block
    second_moments: np.ndarray     # (n_blocks,) running Cesaro averages
    second_moment_se: float        # SE of the final block moment over chains
    c11: float
    c12: float
    c13: float
    c14: float
    bound: Optional[float]         # C13/(1-C14) + |x0|^2 when C14 < 1
    warning: Optional[str]


@dataclass(frozen=True)
class DensityReport:
    """Histogram-based qualitative density check (H < 1/2, d = 1)."""

    counts: np.ndarray
    bin_edges: np.ndarray
    max_bin_mass: float
    atom_flag: bool          # True if some bin carries implausible mass
    chi_square: float
    chi_square_99: float     # 99% quantile of the reference chi-square law
    gaussian_null: bool      # chi-square is against Normal(x, T^{2H});
                             # exact only for zero drift


# ---------------------------------------------------------------------------
# bounded test-function library

@dataclass(frozen=True)
class TestFunction:
    """Bounded test function with gradient, vectorized over (..., d)."""

    name: str
    f: Callable
    grad: Callable
    positive: bool


def _tf_const(c: float, dim: int) -> TestFunction:
    return TestFunction(
        name=f"const({c:g})", positive=c > 0.0,
        f=lambda x: np.full(np.shape(x)[:-1], float(c)),
        grad=lambda x: np.zeros(np.shape(x)))


def _tf_tanh(a: float, dim: int) -> TestFunction:
    vec = np.full(dim, float(a))

    def f(x):
        return np.tanh(x @ vec) + 2.0

    def grad(x):
        return (1.0 / np.cosh(x @ vec) ** 2)[..., None] * vec

    return TestFunction(name=f"tanh({a:g})", f=f, grad=grad, positive=True)


def _tf_gauss(m: float, dim: int) -> TestFunction:
    center = np.full(dim, float(m))

    def f(x):
        return np.exp(-np.sum((x - center) ** 2, axis=-1))

    def grad(x):
        return -2.0 * (x - center) * f(x)[..., None]

    return TestFunction(name=f"gauss({m:g})", f=f, grad=grad, positive=True)


def _tf_indicator(c: float, w: float, dim: int) -> TestFunction:
    """Smoothed indicator of {x_1 > c}: (1 + tanh((x_1 - c)/w))/2 + 1/2,
    shifted up to stay strictly positive for Harnack-type checks."""
    if w <= 0.0:
        raise ValueError("indicator width must be positive")

    def f(x):
        return 0.5 * (1.0 + np.tanh((x[..., 0] - c) / w)) + 0.5

    def grad(x):
        out = np.zeros(np.shape(x))
        out[..., 0] = 0.5 / (w * np.cosh((x[..., 0] - c) / w) ** 2)
        return out

    return TestFunction(name=f"indicator({c:g},{w:g})", f=f, grad=grad,
                        positive=True)


TEST_FUNCTION_NAMES = ("const", "tanh", "gauss", "indicator")

_TF_RE = re.compile(r"^([a-z_]+)(?:\(([^)]*)\))?$")


def make_test_function(spec: str, dim: int = 1) -> TestFunction:
    """Build a test function from a registry string.

    Accepted: "const(c)", "tanh(a)", "gauss(m)", "indicator(c,w)".
    """
    m = _TF_RE.match(spec.strip())
    if not m:
        raise ValueError(f"malformed test function spec {spec!r}")
    name, arg = m.group(1), m.group(2)
    args = [float(v) for v in arg.split(",")] if arg else []
    if name == "const":
        return _tf_const(args[0] if args else 1.0, dim)
    if name == "tanh":
        return _tf_tanh(args[0] if args else 1.0, dim)
    if name == "gauss":
        return _tf_gauss(args[0] if args else 0.0, dim)
    if name == "indicator":
        c = args[0] if args else 0.0
        w = args[1] if len(args) > 1 else 0.5
        return _tf_indicator(c, w, dim)
    raise ValueError(f"unknown test function {name!r}; known: {TEST_FUNCTION_NAMES}")


# ---------------------------------------------------------------------------
# chunked solving machinery

def _solve_states(model: SdeModel, x0, grid: TimeGrid, fbm: np.ndarray):
    if model.sigma is None:
        return solve_additive_batch(model, x0, grid, fbm, check_bounds=False)
    return solve_multiplicative_batch(model, x0, grid, fbm)


def _resilient_solve(model: SdeModel, x0, grid: TimeGrid, fbm: np.ndarray):
    """Solve a batch, isolating failing paths by bisection.

    Returns (states, ok) where failed rows of `states` are zero-filled and
    flagged False in `ok`.  x0 may be shared or per-path (P, d).
    """
    p = fbm.shape[0]
    x0 = np.asarray(x0, dtype=float)
    try:
        return _solve_states(model, x0, grid, fbm), np.ones(p, dtype=bool)
    except (SolverFailure, FloatingPointError):
        if p == 1:
            states = np.zeros((1, fbm.shape[1], model.dim))
            return states, np.zeros(1, dtype=bool)
        half = p // 2
        parts = []
        for sl in (slice(0, half), slice(half, p)):
            sub_x0 = x0[sl] if x0.ndim == 2 else x0
            parts.append(_resilient_solve(model, sub_x0, grid, fbm[sl]))
        states = np.concatenate([a for a, _ in parts])
        ok = np.concatenate([b for _, b in parts])
        return states, ok


class _Accumulator:
    """Streaming mean/SE with deterministic (insertion-order) reduction."""

    def __init__(self):
        self.n = 0
        self.total = 0.0
        self.total_sq = 0.0

    def add(self, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        self.n += values.size
        self.total += float(values.sum())
        self.total_sq += float((values * values).sum())

    def estimate(self, seed) -> McEstimate:
        if self.n == 0:
            raise RuntimeError("no successful replicas")
        mean = self.total / self.n
        if self.n > 1:
            var = max(self.total_sq - self.n * mean * mean, 0.0) / (self.n - 1)
            se = float(np.sqrt(var / self.n))
        else:
            se = 0.0
        try:
            seed = int(seed)
        except (TypeError, ValueError):
            seed = -1  # non-integer seed objects (e.g. SeedSequence spawns)
        return McEstimate(mean=mean, std_error=se, n_paths=self.n, seed=seed)


def _as_seedseq(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def _chunk_seeds(seed, n_paths: int, chunk: int):
    """Deterministic (start, size, child_seed) schedule."""
    n_chunks = (n_paths + chunk - 1) // chunk
    children = _as_seedseq(seed).spawn(n_chunks)
    out = []
    for k in range(n_chunks):
        size = min(chunk, n_paths - k * chunk)
        out.append((k * chunk, size, children[k]))
    return out


def _check_failures(n_failed: int, n_total: int):
    if n_failed > _MAX_FAILURE_FRACTION * n_total:
        raise RuntimeError(
            f"{n_failed}/{n_total} replicas failed (> 0.1%); aborting")


def _map_reduce(model: SdeModel, x0, grid: TimeGrid, n_paths: int, seed,
                per_chunk: Callable, chunk: int = _DEFAULT_CHUNK):
    """Run per_chunk(states, dw, ok) over deterministic chunks.

    per_chunk receives the solved states (m, n+1, d), the W increments and
    the success mask, and returns one or more value arrays (masked entries
    are ignored by the caller)."""
    volterra = volterra_matrix(grid, model.hurst)
    n_failed = 0
    results = None
    for _, size, child in _chunk_seeds(seed, n_paths, chunk):
        dw, fbm = sample_path_batch(grid, model.dim, model.hurst, child, size,
                                    volterra=volterra)
        states, ok = _resilient_solve(model, x0, grid, fbm)
        n_failed += int((~ok).sum())
        vals = per_chunk(states, dw, ok)
        if not isinstance(vals, tuple):
            vals = (vals,)
        if results is None:
            results = tuple(_Accumulator() for _ in vals)
        for acc, v in zip(results, vals):
            acc.add(np.asarray(v)[ok])
    _check_failures(n_failed, n_paths)
    return results


# ---------------------------------------------------------------------------
# estimators

def estimate_pt(model: SdeModel, x, f: Callable, grid: TimeGrid,
                n_paths: int, seed, chunk: int = _DEFAULT_CHUNK) -> McEstimate:
    """Monte Carlo estimate of P_T f(x) = E f(X_T^x)."""
    if n_paths < 1:
        raise ValueError("n_paths must be positive")

    def per_chunk(states, dw, ok):
        return np.asarray(f(states[:, -1, :]), dtype=float)

    (acc,) = _map_reduce(model, x, grid, n_paths, seed, per_chunk, chunk)
    return acc.estimate(seed)


def gradient_bismut(model: SdeModel, x, y, f: Callable, grid: TimeGrid,
                    n_paths: int, seed,
                    chunk: int = _DEFAULT_CHUNK) -> McEstimate:
    """nabla_y P_T f(x) through the derivative formula E[f(X_T) N_T].

    Uses the control variate E[N_T] = 0: the average is taken over
    (f(X_T) - f(x)) N_T, which is unbiased with smaller variance.
    """
    if model.hurst.regime is HurstRegime.LOW:
        raise ValueError("the derivative formula requires H >= 1/2")
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    fx = float(np.asarray(f(x_arr[None, :]))[0])

    def per_chunk(states, dw, ok):
        w = bismut_weight(model, grid, states, dw, y)
        fv = np.asarray(f(states[:, -1, :]), dtype=float)
        return (fv - fx) * w.value

    (acc,) = _map_reduce(model, x, grid, n_paths, seed, per_chunk, chunk)
    return acc.estimate(seed)


def gradient_fd(model: SdeModel, x, y, f: Callable, grid: TimeGrid,
                n_paths: int, seed, fd_eps: float = None,
                chunk: int = _DEFAULT_CHUNK) -> FdGradient:
    """Central finite-difference oracle for nabla_y P_T f(x).

    Common random numbers: all four starts x +- eps y, x +- (eps/2) y share
    the same driving paths.  The returned estimate uses step eps/2; the bias
    field is the Richardson residual |G(eps) - G(eps/2)|/3.
    """
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    ynorm = float(np.linalg.norm(y_arr))
    if ynorm == 0.0:
        raise ValueError("fd direction must be nonzero")
    eps = 0.05 / ynorm if fd_eps is None else float(fd_eps)
    if eps <= 0.0:
        raise ValueError("fd_eps must be positive")

    volterra = volterra_matrix(grid, model.hurst)
    acc_full = _Accumulator()
    acc_half = _Accumulator()
    n_failed = 0
    for _, size, child in _chunk_seeds(seed, n_paths, chunk):
        dw, fbm = sample_path_batch(grid, model.dim, model.hurst, child, size,
                                    volterra=volterra)
        ok = np.ones(size, dtype=bool)
        ends = {}
        for label, e in (("p", eps), ("m", -eps), ("ph", 0.5 * eps),
                         ("mh", -0.5 * eps)):
            states, okk = _resilient_solve(model, x_arr + e * y_arr, grid, fbm)
            ok &= okk
            ends[label] = np.asarray(f(states[:, -1, :]), dtype=float)
        n_failed += int((~ok).sum())
        acc_full.add(((ends["p"] - ends["m"]) / (2.0 * eps))[ok])
        acc_half.add(((ends["ph"] - ends["mh"]) / eps)[ok])
    _check_failures(n_failed, n_paths)
    full = acc_full.estimate(seed)
    half = acc_half.estimate(seed)
    bias = abs(full.mean - half.mean) / 3.0
    return FdGradient(estimate=half, fd_eps=eps, bias=bias)


def ibp_check(model: SdeModel, x, y, tf: TestFunction, grid: TimeGrid,
              n_paths: int, seed, chunk: int = _DEFAULT_CHUNK) -> IbpReport:
    """Same-path comparison of the two sides of the shift IBP formula
    E[(grad_y f)(X_T)] = E[f(X_T) N_T^{1|2}] (weight chosen by regime)."""
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    weight_fn = (ibp_weight_low if model.hurst.regime is HurstRegime.LOW
                 else ibp_weight_high)

    def per_chunk(states, dw, ok):
        w = weight_fn(model, grid, states, dw, y_arr)
        end = states[:, -1, :]
        lhs = np.asarray(tf.grad(end), dtype=float) @ y_arr
        rhs = np.asarray(tf.f(end), dtype=float) * w.value
        return lhs, rhs, lhs - rhs

    lhs_acc, rhs_acc, diff_acc = _map_reduce(model, x, grid, n_paths, seed,
                                             per_chunk, chunk)
    lhs = lhs_acc.estimate(seed)
    rhs = rhs_acc.estimate(seed)
    diff = diff_acc.estimate(seed)
    return IbpReport(lhs=lhs, rhs=rhs, diff=diff.mean,
                     se_diff=diff.std_error)


# ---------------------------------------------------------------------------
# Harnack-type inequality harnesses

def _power_estimate(est: McEstimate, p: float) -> McEstimate:
    """(mean)^p with the delta-method standard error."""
    mean = est.mean ** p
    se = abs(p * est.mean ** (p - 1.0)) * est.std_error
    return McEstimate(mean=mean, std_error=se, n_paths=est.n_paths,
                      seed=est.seed)


def _transformed_constants_model(model: SdeModel) -> SdeModel:
    """Additive shell carrying the Lamperti-transformed drift's constants.

    Only the zero-drift multiplicative model is supported: there the
    transformed drift vanishes and K1bar = K2bar = 0.  (General transformed
    constants are not derivable from (K1, K2, d3, d4) alone.)
    """
    if model.k1 != 0.0 or model.k2 != 0.0:
        raise ValueError("multiplicative Harnack constants are only "
                         "implemented for zero drift")
    shell = SdeModel.__new__(SdeModel)
    shell.__dict__.update(model.__dict__)
    shell.name = model.name + ":transformed"
    shell.sigma = shell.sigma_prime = None
    return shell


def harnack_check(model: SdeModel, x, y, p: float, tf: TestFunction,
                  grid: TimeGrid, n_paths: int, seed,
                  constants: HarnackConstants = None,
                  chunk: int = _DEFAULT_CHUNK) -> InequalityReport:
    """(P_T f(x))^p <= P_T f^p(y) exp[...] with the closed-form factor.

    For a multiplicative model the constants come from the transformed
    (Lamperti) drift; the exponent is divided by d_3^2 and the admissible
    radius multiplied by d_3.
    """
    if p <= 1.0:
        raise ValueError("Harnack inequality requires p > 1")
    if not tf.positive:
        raise ValueError("Harnack inequality requires a positive f")
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    multiplicative = model.sigma is not None
    ss = _as_seedseq(seed).spawn(3)
    if constants is None:
        cmodel = _transformed_constants_model(model) if multiplicative else model
        constants = harnack_constants(cmodel, x_arr, grid, rng_seed=ss[2])
    dist = float(np.linalg.norm(x_arr - y_arr))
    if multiplicative:
        factor = float(np.exp(p / (p - 1.0) * constants.coeff
                              * dist ** 2 / model.d3 ** 2))
        radius = constants.radius(p) * model.d3
    else:
        factor = constants.factor(p, dist ** 2)
        radius = constants.radius(p)
    admissible = dist <= radius
    lhs_raw = estimate_pt(model, x_arr, tf.f, grid, n_paths, ss[0], chunk)
    lhs = _power_estimate(lhs_raw, p)
    rhs = estimate_pt(model, y_arr, lambda z: np.asarray(tf.f(z)) ** p,
                      grid, n_paths, ss[1], chunk)
    margin = rhs.mean * factor - lhs.mean
    margin_se = float(np.hypot(rhs.std_error * factor, lhs.std_error))
    return InequalityReport(lhs=lhs, rhs=rhs, exponent_factor=factor,
                            margin=margin, margin_se=margin_se,
                            admissible=admissible, distance=dist,
                            radius=radius)


def shift_harnack_check(model: SdeModel, x, y, p: float, tf: TestFunction,
                        grid: TimeGrid, n_paths: int, seed,
                        constants: HarnackConstants = None,
                        chunk: int = _DEFAULT_CHUNK) -> InequalityReport:
    """Shift Harnack inequality (P_T f(x))^p <= P_T {f(y+.)}^p (x) exp[...].

    H < 1/2: closed-form Beta/Gamma factor, no radius restriction.
    H > 1/2: the A_1/A_2 factor with radius |y| <= ((p-1)/p) sqrt(lam0/(2 A_2)).
    """
    if p <= 1.0:
        raise ValueError("shift Harnack inequality requires p > 1")
    if not tf.positive:
        raise ValueError("shift Harnack inequality requires a positive f")
    if model.sigma is not None:
        raise ValueError("shift Harnack applies to additive models")
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    h = model.hurst.h
    t = grid.horizon
    dist = float(np.linalg.norm(y_arr))
    if model.hurst.regime is HurstRegime.LOW:
        coeff = ((sp.beta(1.5 - h, 0.5 - h) / sp.gamma(0.5 - h)) ** 2
                 * (1.0 + model.k1 * t) ** 2
                 / (t ** (2.0 * h) * 2.0 * (1.0 - h)))
        factor = float(np.exp(p / (p - 1.0) * coeff * dist ** 2))
        radius = np.inf
    elif model.hurst.regime is HurstRegime.HIGH:
        if constants is None:
            constants = harnack_constants(model, x_arr, grid, rng_seed=seed)
        factor = constants.factor(p, dist ** 2)
        radius = constants.radius(p)
    else:
        raise ValueError("shift Harnack requires H != 1/2")
    admissible = dist <= radius
    ss = _as_seedseq(seed).spawn(2)
    lhs_raw = estimate_pt(model, x_arr, tf.f, grid, n_paths, ss[0], chunk)
    lhs = _power_estimate(lhs_raw, p)
    rhs = estimate_pt(model, x_arr,
                      lambda z: np.asarray(tf.f(z + y_arr)) ** p,
                      grid, n_paths, ss[1], chunk)
    margin = rhs.mean * factor - lhs.mean
    margin_se = float(np.hypot(rhs.std_error * factor, lhs.std_error))
    return InequalityReport(lhs=lhs, rhs=rhs, exponent_factor=factor,
                            margin=margin, margin_se=margin_se,
                            admissible=admissible, distance=dist,
                            radius=radius)


# ---------------------------------------------------------------------------
# invariant measure (Krylov-Bogoliubov)

def invariant_measure_iterate(model: SdeModel, x0, grid: TimeGrid,
                              n_blocks: int, n_chains: int, seed,
                              young_l: float = 1.0,
                              beta: float = None) -> InvariantMeasureTrace:
    """Krylov-Bogoliubov iteration of the discrete semigroup P_T^n.

    Each block advances all chains by one horizon T with FRESH independent
    fBm paths (realizing the n-fold semigroup composition).  Records the
    per-block chain-average of |X|^2 and its running Cesaro averages, plus
    the conditional moment-bound constants C11..C14 (the fBm norm
    expectations they involve are estimated by MC, and the Young-integral
    constant L with exponent beta in (1/2, H) is a configuration input).
    """
    if model.hurst.regime is not HurstRegime.HIGH:
        raise ValueError("invariant-measure iteration requires H > 1/2")
    if model.sigma is not None:
        raise ValueError("invariant-measure iteration requires additive noise")
    if model.k3 is None:
        raise ValueError("model must register the one-sided constant K3")
    h = model.hurst.h
    if beta is None:
        beta = 0.5 * (0.5 + h)
    if not 0.5 < beta < h:
        raise ValueError("beta must lie in (1/2, H)")
    x0_arr = np.atleast_1d(np.asarray(x0, dtype=float))
    t = grid.horizon
    k1, k3 = model.k1, model.k3
    volterra = volterra_matrix(grid, model.hurst)
    children = _as_seedseq(seed).spawn(n_blocks + 1)

    # fBm norm expectations for C11/C12 from a dedicated noise sample
    _, bh = sample_path_batch(grid, model.dim, model.hurst, children[0], 1024,
                              volterra=volterra)
    nb_beta = holder_norms_batch(bh, grid, beta)
    nb_sup = sup_norms_batch(bh)
    e_beta = float(np.mean(nb_beta))
    e_sup_beta = float(np.mean(nb_sup * nb_beta))
    e_beta2 = float(np.mean(nb_beta ** 2))
    bx = float(np.linalg.norm(model.b(0.0, x0_arr)))
    d1 = apriori_bounds(model, x0_arr, t, 0.0).d1
    d2 = k1 * np.exp(k1 * t)
    pref = 2.0 * young_l * t ** beta / (beta - 0.5)
    c11 = pref * (
        (d1 * t + (1.0 + k1 * t) ** 2 * np.exp(2.0 * k1 * t) / 4.0
         + bx * t * np.exp(k1 * t)) * e_beta
        + (np.exp(k1 * t) + d2 * t) * e_sup_beta
        + t ** beta * e_beta2)
    c12 = 1.0 + pref * e_beta
    c13 = c11 * np.exp(2.0 * k3 * t)
    c14 = c12 * np.exp(2.0 * k3 * t)
    if c14 < 1.0:
        bound = c13 / (1.0 - c14) + float(x0_arr @ x0_arr)
        warn = None
    else:
        bound = None
        warn = (f"C14 = {c14:.6g} >= 1: condition C12 exp(2 K3 T) < 1 fails "
                "for this configuration; no moment bound reported")
        warnings.warn(warn, RuntimeWarning)

    states = np.broadcast_to(x0_arr, (n_chains, model.dim)).copy()
    endpoints = np.empty((n_blocks, n_chains, model.dim))
    block_moments = np.empty(n_blocks)
    for k in range(n_blocks):
        _, fbm = sample_path_batch(grid, model.dim, model.hurst,
                                   children[k + 1], n_chains,
                                   volterra=volterra)
        paths = solve_additive_batch(model, states, grid, fbm,
                                     check_bounds=False)
        states = paths[:, -1, :]
        endpoints[k] = states
        block_moments[k] = float(np.mean(np.sum(states * states, axis=1)))
    cesaro = np.cumsum(block_moments) / np.arange(1, n_blocks + 1)
    final = np.sum(endpoints[-1] ** 2, axis=1)
    se = float(np.std(final, ddof=1) / np.sqrt(n_chains))
    return InvariantMeasureTrace(block_T=t, n_blocks=n_blocks,
                                 endpoint_samples=endpoints,
                                 block_moments=block_moments,
                                 second_moments=cesaro,
                                 second_moment_se=se,
                                 c11=float(c11), c12=float(c12),
                                 c13=float(c13), c14=float(c14),
                                 bound=bound, warning=warn)


# ---------------------------------------------------------------------------
# density smoke test

def density_smoke(model: SdeModel, x, grid: TimeGrid, n_paths: int,
                  n_bins: int, seed,
                  chunk: int = _DEFAULT_CHUNK) -> DensityReport:
    """Qualitative density check for X_T (H < 1/2, dimension 1).

    Bins the endpoint samples into equal-probability cells of the
    Normal(x, T^{2H}) reference law (exact for zero drift) and reports the
    chi-square statistic against its 99% quantile, plus an atom flag that
    trips when any single bin carries more than 10x its expected mass.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be positive")
    if model.hurst.regime is not HurstRegime.LOW:
        raise ValueError("density smoke test targets H < 1/2")
    if model.dim != 1:
        raise ValueError("density smoke test is one-dimensional")
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    sigma_t = grid.horizon ** model.hurst.h
    edges = stats.norm.ppf(np.linspace(0.0, 1.0, n_bins + 1),
                           loc=float(x_arr[0]), scale=sigma_t)
    counts = np.zeros(n_bins)
    total = 0
    volterra = volterra_matrix(grid, model.hurst)
    for _, size, child in _chunk_seeds(seed, n_paths, chunk):
        _, fbm = sample_path_batch(grid, 1, model.hurst, child, size,
                                   volterra=volterra)
        states, ok = _resilient_solve(model, x_arr, grid, fbm)
        ends = states[ok, -1, 0]
        counts += np.histogram(ends, bins=edges)[0]
        total += int(ok.sum())
    _check_failures(n_paths - total, n_paths)
    expected = total / n_bins
    chi2 = float(np.sum((counts - expected) ** 2 / expected))
    q99 = float(stats.chi2.ppf(0.99, n_bins - 1))
    max_mass = float(counts.max() / total)
    atom = max_mass > 10.0 / n_bins
    gaussian_null = model.k1 == 0.0 and model.k2 == 0.0
    return DensityReport(counts=counts, bin_edges=edges,
                         max_bin_mass=max_mass, atom_flag=atom,
                         chi_square=chi2, chi_square_99=q99,
                         gaussian_null=gaussian_null)
