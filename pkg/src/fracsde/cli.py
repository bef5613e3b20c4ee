"""Configuration-driven experiment runner.

Config files are flat INI (configparser) with one section per concern; the
schema is validated before any computation and unknown keys are rejected.
Reports are key-value text files whose body is byte-reproducible for a
fixed config + seed; timestamps and wall-clock live in a comment header.
CSV side files carry the plot-ready data.

Exit codes: 0 all declared tolerances pass; 1 a tolerance failed;
2 config/schema error; 3 numerical failure during an experiment stage.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import os
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .fbm import fbm_covariance, sample_path_batch, sample_path_pair
from .fraccalc import (SampledFunction, c0_constant, k_h_inverse, kh_forward,
                       rl_derivative, rl_integral)
from .grids import Hurst, HurstRegime, TimeGrid
from .models import MODEL_NAMES, make_model
from .weights import harnack_constants
from . import estimators as est

__all__ = ["ExperimentConfig", "main", "run", "validate"]

EXPERIMENTS = (
    "covariance_validation",
    "operator_validation",
    "bismut_vs_fd",
    "ibp_check",
    "harnack",
    "shift_harnack",
    "invariant_measure",
    "density_smoke",
)

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_SCHEMA = 2
EXIT_NUMERICAL = 3


class ConfigError(ValueError):
    """Schema violation; message names the offending section/field."""


@dataclass
class ExperimentConfig:
    experiment: str
    hurst: float
    horizon: float
    n_steps: int
    n_paths: int
    seed: int
    model_spec: str = "zero"
    dim: int = 1
    x: np.ndarray = field(default_factory=lambda: np.zeros(1))
    y: Optional[np.ndarray] = None
    p: float = 2.0
    f: str = "tanh(1.0)"
    delta: Optional[float] = None
    fd_eps: Optional[float] = None
    n_pairs: int = 20
    n_blocks: int = 50
    n_chains: int = 1000
    n_bins: int = 40

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(self.horizon, self.n_steps)


# schema: section -> {key: (required-for experiments or "*", parser)}
_ALLOWED = {
    "experiment": {"name"},
    "model": {"spec", "dim"},
    "hurst": {"h"},
    "grid": {"horizon", "n_steps"},
    "mc": {"n_paths", "seed"},
    "params": {"x", "y", "p", "f", "delta", "fd_eps", "n_pairs",
               "n_blocks", "n_chains", "n_bins"},
}

_REQUIRED = {
    "experiment.name", "hurst.h", "grid.horizon", "grid.n_steps",
    "mc.n_paths", "mc.seed",
}


def _parse_vector(raw: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in raw.split(",")], dtype=float)
    except ValueError as exc:
        raise ConfigError(f"malformed vector {raw!r}") from exc


def load_config(path) -> ExperimentConfig:
    """Parse + schema-validate an INI config file."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    for section in parser.sections():
        if section not in _ALLOWED:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser[section]:
            if key not in _ALLOWED[section]:
                raise ConfigError(f"unknown key {section}.{key}")
    for dotted in _REQUIRED:
        section, key = dotted.split(".")
        if not parser.has_option(section, key):
            raise ConfigError(f"missing field {dotted}")

    def get(section, key, cast, default=None):
        if not parser.has_option(section, key):
            return default
        raw = parser.get(section, key).strip()
        if raw == "":
            return default
        try:
            return cast(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {section}.{key}: {raw!r}") from exc

    name = parser.get("experiment", "name").strip()
    if name not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {name!r}; known: {', '.join(EXPERIMENTS)}")
    h = get("hurst", "h", float)
    if not 0.0 < h < 1.0:
        raise ConfigError("hurst out of range (must lie in (0, 1))")
    cfg = ExperimentConfig(
        experiment=name,
        hurst=h,
        horizon=get("grid", "horizon", float),
        n_steps=get("grid", "n_steps", int),
        n_paths=get("mc", "n_paths", int),
        seed=get("mc", "seed", int),
        model_spec=get("model", "spec", str, "zero"),
        dim=get("model", "dim", int, 1),
        x=get("params", "x", _parse_vector, np.zeros(1)),
        y=get("params", "y", _parse_vector, None),
        p=get("params", "p", float, 2.0),
        f=get("params", "f", str, "tanh(1.0)"),
        delta=get("params", "delta", float, None),
        fd_eps=get("params", "fd_eps", float, None),
        n_pairs=get("params", "n_pairs", int, 20),
        n_blocks=get("params", "n_blocks", int, 50),
        n_chains=get("params", "n_chains", int, 1000),
        n_bins=get("params", "n_bins", int, 40),
    )
    _validate_semantics(cfg)
    return cfg


def _validate_semantics(cfg: ExperimentConfig):
    if cfg.horizon <= 0.0:
        raise ConfigError("grid.horizon must be positive")
    if cfg.n_steps < 1:
        raise ConfigError("grid.n_steps must be >= 1")
    if cfg.n_paths < 1:
        raise ConfigError("mc.n_paths must be >= 1")
    if cfg.experiment in ("harnack", "invariant_measure") and cfg.hurst <= 0.5:
        raise ConfigError(f"{cfg.experiment.replace('_', ' ')} requires H>1/2")
    if cfg.experiment == "bismut_vs_fd" and cfg.hurst < 0.5:
        raise ConfigError("bismut_vs_fd requires H>=1/2")
    if cfg.experiment == "density_smoke" and cfg.hurst >= 0.5:
        raise ConfigError("density_smoke requires H<1/2")
    if cfg.experiment in ("ibp_check", "shift_harnack") and cfg.hurst == 0.5:
        raise ConfigError(f"{cfg.experiment} requires H != 1/2")
    if cfg.experiment == "harnack" and cfg.p <= 1.0:
        raise ConfigError("params.p must exceed 1")
    if cfg.x.shape[0] != cfg.dim:
        raise ConfigError("params.x dimension does not match model.dim")
    if cfg.y is not None and cfg.y.shape[0] != cfg.dim:
        raise ConfigError("params.y dimension does not match model.dim")
    # eager model/test-function validation so schema errors surface early
    try:
        make_model(cfg.model_spec, cfg.hurst, cfg.dim)
    except ValueError as exc:
        raise ConfigError(f"model.spec: {exc}") from exc
    try:
        est.make_test_function(cfg.f, cfg.dim)
    except ValueError as exc:
        raise ConfigError(f"params.f: {exc}") from exc


# ---------------------------------------------------------------------------
# report assembly

class Report:
    """Key-value report with a verdict ledger."""

    def __init__(self, cfg: ExperimentConfig):
        self.lines = []
        self.failures = []
        self.add("artifact.version", __version__)
        self.add("experiment", cfg.experiment)
        self.add("model.spec", cfg.model_spec)
        self.add("model.dim", cfg.dim)
        self.add("hurst.h", cfg.hurst)
        self.add("grid.horizon", cfg.horizon)
        self.add("grid.n_steps", cfg.n_steps)
        self.add("mc.n_paths", cfg.n_paths)
        self.add("mc.seed", cfg.seed)

    def add(self, key, value, label: str = None):
        if isinstance(value, (float, np.floating)):
            value = repr(float(value))
        suffix = f"  ({label})" if label else ""
        self.lines.append(f"{key} = {value}{suffix}")

    def verdict(self, name: str, passed: bool):
        self.lines.append(f"verdict.{name} = {'PASS' if passed else 'FAIL'}")
        if not passed:
            self.failures.append(name)

    def write(self, path: Path, wall_clock: float):
        stamp = datetime.now(timezone.utc).isoformat()
        header = (f"# fracsde experiment report\n"
                  f"# generated_at = {stamp}\n"
                  f"# wall_clock_s = {wall_clock:.3f}\n")
        path.write_text(header + "\n".join(self.lines) + "\n")


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v))
                             if isinstance(v, (float, np.floating)) else v
                             for v in row])


def _fmt_vec(v) -> str:
    return ";".join(repr(float(c)) for c in np.atleast_1d(v))


# ---------------------------------------------------------------------------
# experiments

def _exp_covariance_validation(cfg: ExperimentConfig, report: Report,
                               out_dir: Path):
    grid = cfg.grid
    _, bh = sample_path_batch(grid, 1, cfg.hurst, cfg.seed, cfg.n_paths)
    paths = bh[:, :, 0]
    # subgrid away from t = 0: the midpoint kernel quadrature has its
    # largest relative bias in the first cells
    idx = np.unique(np.linspace(max(1, grid.n_steps // 8),
                                grid.n_steps, 8).astype(int))
    t = grid.nodes
    rows = []
    max_z = 0.0
    for i in idx:
        for j in idx:
            if j > i:
                continue
            prod = paths[:, i] * paths[:, j]
            emp = float(np.mean(prod))
            se = float(np.std(prod, ddof=1) / np.sqrt(cfg.n_paths))
            exact = fbm_covariance(t[i], t[j], cfg.hurst)
            z = (emp - exact) / se if se > 0 else 0.0
            max_z = max(max_z, abs(z))
            rows.append((t[i], t[j], emp, exact, se, z))
    _write_csv(out_dir / "covariance.csv",
               ("t", "s", "empirical", "exact", "se", "z"), rows)
    pp = sample_path_pair(grid, cfg.dim, cfg.hurst, cfg.seed)
    _write_csv(out_dir / "paths.csv",
               ("t",) + tuple(f"BH_{k+1}" for k in range(cfg.dim)),
               [(t[i],) + tuple(pp.fbm_values[i]) for i in range(len(t))])
    report.add("covariance.max_abs_z", max_z, "MC-estimated")
    report.verdict("covariance_z_below_4", max_z < 4.0)


def _exp_operator_validation(cfg: ExperimentConfig, report: Report,
                             out_dir: Path):
    grid = cfg.grid
    t = grid.nodes
    hurst = Hurst(cfg.hurst)
    rows = []
    # I^alpha on a power law, closed form
    alpha = 0.5
    f = SampledFunction(grid, t)
    got = rl_integral(f, alpha).values
    from scipy import special as sp
    exact = sp.gamma(2.0) / sp.gamma(2.0 + alpha) * t ** (1.0 + alpha)
    denom = max(np.abs(exact).max(), 1e-300)
    err_i = float(np.abs(got - exact).max() / denom)
    rows.append(("rl_integral_power", err_i, 1e-3))
    # D^alpha inverts I^alpha on a smooth function (interior sup); use the
    # order the kernel operators need, alpha = |H - 1/2| (Marchaud scheme
    # error is O(dt^{1-alpha}), so large orders are out of scope)
    alpha = abs(cfg.hurst - 0.5) or 0.3
    g = SampledFunction(grid, np.sin(2.0 * t))
    comp = rl_derivative(rl_integral(g, alpha), alpha).values
    err_di = float(np.abs(comp[1:] - g.values[1:]).max())
    rows.append(("derivative_of_integral", err_di, 1e-2))
    # K_H^{-1} K_H = id on smooth functions, interior sup
    err_k = 0.0
    if hurst.regime is not HurstRegime.BROWNIAN:
        for vals in (np.ones_like(t), np.cos(3.0 * t)):
            fwd = kh_forward(SampledFunction(grid, vals), hurst)
            back = k_h_inverse(fwd, hurst).values
            err_k = max(err_k, float(np.abs(back[1:] - vals[1:]).max()))
    rows.append(("kh_inverse_of_forward", err_k, 2e-2))
    _write_csv(out_dir / "operator_errors.csv",
               ("check", "error", "tolerance"), rows)
    for name, err, tol in rows:
        report.add(f"operator.{name}", err, "closed-form oracle")
        report.verdict(name, err <= tol)


def _exp_bismut_vs_fd(cfg: ExperimentConfig, report: Report, out_dir: Path):
    model = make_model(cfg.model_spec, cfg.hurst, cfg.dim)
    tf = est.make_test_function(cfg.f, cfg.dim)
    y = cfg.y if cfg.y is not None else np.ones(cfg.dim)
    ss = np.random.SeedSequence(cfg.seed).spawn(2)
    gb = est.gradient_bismut(model, cfg.x, y, tf.f, cfg.grid, cfg.n_paths, ss[0])
    gf = est.gradient_fd(model, cfg.x, y, tf.f, cfg.grid, cfg.n_paths, ss[1],
                         fd_eps=cfg.fd_eps)
    diff = abs(gb.mean - gf.estimate.mean)
    tol = 3.0 * (gb.std_error + gf.estimate.std_error) + gf.bias
    report.add("bismut.mean", gb.mean, "MC-estimated")
    report.add("bismut.se", gb.std_error, "MC-estimated")
    report.add("fd.mean", gf.estimate.mean, "MC-estimated")
    report.add("fd.se", gf.estimate.std_error, "MC-estimated")
    report.add("fd.eps", gf.fd_eps)
    report.add("fd.bias", gf.bias, "Richardson estimate")
    report.add("diff.abs", diff)
    report.add("diff.tolerance", tol)
    _write_csv(out_dir / "gradients.csv",
               ("estimator", "mean", "se", "bias"),
               [("bismut", gb.mean, gb.std_error, 0.0),
                ("fd", gf.estimate.mean, gf.estimate.std_error, gf.bias)])
    report.verdict("bismut_matches_fd", diff <= tol)


def _exp_ibp_check(cfg: ExperimentConfig, report: Report, out_dir: Path):
    model = make_model(cfg.model_spec, cfg.hurst, cfg.dim)
    tf = est.make_test_function(cfg.f, cfg.dim)
    y = cfg.y if cfg.y is not None else np.ones(cfg.dim)
    rep = est.ibp_check(model, cfg.x, y, tf, cfg.grid, cfg.n_paths, cfg.seed)
    report.add("ibp.lhs_mean", rep.lhs.mean, "MC-estimated")
    report.add("ibp.rhs_mean", rep.rhs.mean, "MC-estimated")
    report.add("ibp.diff", rep.diff)
    report.add("ibp.se_diff", rep.se_diff)
    _write_csv(out_dir / "ibp.csv", ("side", "mean", "se"),
               [("lhs_grad", rep.lhs.mean, rep.lhs.std_error),
                ("rhs_weight", rep.rhs.mean, rep.rhs.std_error),
                ("diff", rep.diff, rep.se_diff)])
    report.verdict("ibp_diff_within_3se", abs(rep.diff) <= 3.0 * rep.se_diff)


def _sweep_targets(cfg: ExperimentConfig, radius: float, shift: bool):
    """Deterministic sweep of perturbation vectors inside the radius."""
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(1)[0])
    cap = radius if np.isfinite(radius) else 0.5
    out = []
    for k in range(cfg.n_pairs):
        direction = rng.normal(size=cfg.dim)
        direction /= np.linalg.norm(direction)
        r = cap * (k + 1) / cfg.n_pairs
        out.append(r * direction)
    return out


def _exp_harnack(cfg: ExperimentConfig, report: Report, out_dir: Path):
    model = make_model(cfg.model_spec, cfg.hurst, cfg.dim)
    tf = est.make_test_function(cfg.f, cfg.dim)
    cmodel = model
    if model.sigma is not None:
        cmodel = est._transformed_constants_model(model)
    constants = harnack_constants(
        cmodel, cfg.x, cfg.grid, delta=cfg.delta,
        rng_seed=np.random.SeedSequence(cfg.seed).spawn(2)[1])
    d3 = model.d3 if model.sigma is not None else 1.0
    report.add("constants.A1", constants.a1, "closed-form")
    report.add("constants.A2", constants.a2, "closed-form")
    report.add("constants.C0", float(c0_constant(cfg.hurst)), "closed-form")
    report.add("constants.delta", constants.delta)
    report.add("constants.lambda0", constants.lam0, "MC-estimated")
    report.add("constants.B0", constants.b0, "MC-estimated")
    report.add("constants.B0_se", constants.b0_se, "MC-estimated")
    radius = constants.radius(cfg.p) * d3
    report.add("constants.radius", radius, "closed-form")
    rows = []
    all_pass = True
    ss = np.random.SeedSequence(cfg.seed).spawn(cfg.n_pairs)
    for k, dy in enumerate(_sweep_targets(cfg, radius, shift=False)):
        y = cfg.x + dy
        rep = est.harnack_check(model, cfg.x, y, cfg.p, tf, cfg.grid,
                                cfg.n_paths, ss[k], constants=constants)
        ok = rep.admissible and rep.margin >= -3.0 * rep.margin_se
        all_pass &= ok
        rows.append((_fmt_vec(cfg.x), _fmt_vec(y), rep.lhs.mean, rep.rhs.mean,
                     rep.exponent_factor, rep.margin, rep.margin_se))
    _write_csv(out_dir / "margins.csv",
               ("x", "y_or_shift", "lhs", "rhs", "factor", "margin", "se"),
               rows)
    report.add("harnack.n_pairs", cfg.n_pairs)
    report.verdict("harnack_margins_nonnegative", all_pass)


def _exp_shift_harnack(cfg: ExperimentConfig, report: Report, out_dir: Path):
    model = make_model(cfg.model_spec, cfg.hurst, cfg.dim)
    tf = est.make_test_function(cfg.f, cfg.dim)
    constants = None
    if model.hurst.regime is HurstRegime.HIGH:
        constants = harnack_constants(
            model, cfg.x, cfg.grid, delta=cfg.delta,
            rng_seed=np.random.SeedSequence(cfg.seed).spawn(2)[1])
        radius = constants.radius(cfg.p)
        report.add("constants.A1", constants.a1, "closed-form")
        report.add("constants.A2", constants.a2, "closed-form")
        report.add("constants.lambda0", constants.lam0, "MC-estimated")
        report.add("constants.B0", constants.b0, "MC-estimated")
    else:
        radius = np.inf
        report.add("constants.radius", "inf", "closed-form")
    rows = []
    all_pass = True
    ss = np.random.SeedSequence(cfg.seed).spawn(cfg.n_pairs)
    for k, dy in enumerate(_sweep_targets(cfg, radius, shift=True)):
        rep = est.shift_harnack_check(model, cfg.x, dy, cfg.p, tf, cfg.grid,
                                      cfg.n_paths, ss[k], constants=constants)
        ok = rep.admissible and rep.margin >= -3.0 * rep.margin_se
        all_pass &= ok
        rows.append((_fmt_vec(cfg.x), _fmt_vec(dy), rep.lhs.mean,
                     rep.rhs.mean, rep.exponent_factor, rep.margin,
                     rep.margin_se))
    _write_csv(out_dir / "margins.csv",
               ("x", "y_or_shift", "lhs", "rhs", "factor", "margin", "se"),
               rows)
    report.add("shift_harnack.n_shifts", cfg.n_pairs)
    report.verdict("shift_harnack_margins_nonnegative", all_pass)


def _exp_invariant_measure(cfg: ExperimentConfig, report: Report,
                           out_dir: Path):
    model = make_model(cfg.model_spec, cfg.hurst, cfg.dim)
    trace = est.invariant_measure_iterate(model, cfg.x, cfg.grid,
                                          cfg.n_blocks, cfg.n_chains,
                                          cfg.seed)
    report.add("constants.C11", trace.c11, "MC-estimated")
    report.add("constants.C12", trace.c12, "MC-estimated")
    report.add("constants.C13", trace.c13, "MC-estimated")
    report.add("constants.C14", trace.c14, "MC-estimated")
    if trace.bound is not None:
        report.add("constants.moment_bound", trace.bound, "conditional")
    else:
        report.add("constants.moment_bound", "absent (C14 >= 1)")
    report.add("invariant.final_cesaro", float(trace.second_moments[-1]),
               "MC-estimated")
    _write_csv(out_dir / "trace.csv", ("block", "block_moment", "cesaro"),
               [(k + 1, trace.block_moments[k], trace.second_moments[k])
                for k in range(trace.n_blocks)])
    tail = trace.second_moments[-10:]
    rel_change = float((tail.max() - tail.min()) / max(abs(tail[-1]), 1e-12))
    report.add("invariant.tail_rel_change", rel_change)
    passed = rel_change < 0.02
    if trace.bound is not None:
        passed &= (trace.block_moments[-1]
                   <= trace.bound + 3.0 * trace.second_moment_se)
    report.verdict("invariant_measure_stabilized", passed)


def _exp_density_smoke(cfg: ExperimentConfig, report: Report, out_dir: Path):
    model = make_model(cfg.model_spec, cfg.hurst, cfg.dim)
    rep = est.density_smoke(model, cfg.x, cfg.grid, cfg.n_paths, cfg.n_bins,
                            cfg.seed)
    report.add("density.chi_square", rep.chi_square, "MC-estimated")
    report.add("density.chi_square_99", rep.chi_square_99, "closed-form")
    report.add("density.max_bin_mass", rep.max_bin_mass, "MC-estimated")
    report.add("density.atom_flag", rep.atom_flag)
    report.add("density.gaussian_null", rep.gaussian_null)
    _write_csv(out_dir / "histogram.csv", ("bin_left", "bin_right", "count"),
               [(rep.bin_edges[k], rep.bin_edges[k + 1], int(rep.counts[k]))
                for k in range(len(rep.counts))])
    passed = not rep.atom_flag
    if rep.gaussian_null:
        passed &= rep.chi_square < rep.chi_square_99
    report.verdict("density_smoke", passed)


_RUNNERS = {
    "covariance_validation": _exp_covariance_validation,
    "operator_validation": _exp_operator_validation,
    "bismut_vs_fd": _exp_bismut_vs_fd,
    "ibp_check": _exp_ibp_check,
    "harnack": _exp_harnack,
    "shift_harnack": _exp_shift_harnack,
    "invariant_measure": _exp_invariant_measure,
    "density_smoke": _exp_density_smoke,
}


# ---------------------------------------------------------------------------
# entry points

def validate(config_path) -> ExperimentConfig:
    """Schema check only; raises ConfigError on violation."""
    return load_config(config_path)


def run(config_path, out_dir, seed_override: int = None) -> int:
    """Execute the configured experiment; returns the process exit code."""
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    if seed_override is not None:
        cfg.seed = int(seed_override)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = Report(cfg)
    start = time.monotonic()
    try:
        _RUNNERS[cfg.experiment](cfg, report, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (RuntimeError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure in experiment {cfg.experiment!r}: {exc}",
              file=sys.stderr)
        return EXIT_NUMERICAL
    report.write(out / "report.txt", time.monotonic() - start)
    if report.failures:
        print("tolerance failures: " + ", ".join(report.failures),
              file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


def _limit_threads():
    raw = os.environ.get("FRACSDE_THREADS")
    if not raw:
        return None
    try:
        n = max(1, int(raw))
    except ValueError:
        print(f"ignoring malformed FRACSDE_THREADS={raw!r}", file=sys.stderr)
        return None
    import threadpoolctl
    return threadpoolctl.threadpool_limits(limits=n)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fracsde",
        description="Run or validate a fracsde experiment configuration.")
    parser.add_argument("--config", required=True, help="INI config file")
    parser.add_argument("--seed-override", type=int, default=None,
                        help="replace mc.seed from the config")
    parser.add_argument("--out-dir", default="fracsde-out",
                        help="directory for report and CSV files")
    parser.add_argument("--validate-only", action="store_true",
                        help="schema check only, no computation")
    args = parser.parse_args(argv)
    _limit_threads()
    if args.validate_only:
        try:
            validate(args.config)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_SCHEMA
        print("ok")
        return EXIT_OK
    return run(args.config, args.out_dir, args.seed_override)


if __name__ == "__main__":
    sys.exit(main())
