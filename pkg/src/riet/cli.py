"""Batch front end: JSON run configs, single runs, parameter sweeps, CSV output.

Subcommands: ``run <config>``, ``sweep <config>``, ``presets``. A config is a
flat JSON object; a preset expands to a full parameter set and any explicit
key overrides the preset value. Outputs are deterministic: rerunning the
same config byte-reproduces every CSV numeric column.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import analysis, dynamics, model

__all__ = ["RunConfig", "SweepSpec", "ConfigError", "load_config", "run", "sweep", "main"]

METHODS = ("lindblad", "ri", "ri_trotter", "stateprep", "rhp")
SWEEP_PARAMETERS = ("delta_e", "tau", "trotter_n")
SWEEP_HEADER = ["delta_e", "tau", "trotter_n", "k", "p0", "r_squared", "converged"]

PRESETS: dict[str, dict] = {
    "weakly_coupled": dict(kind="DA", v=0.1, lam=1.0, kbt=1.0, gamma_cfg=0.01, n_levels=16),
    "strongly_damped": dict(kind="DA", v=0.1, lam=1.0, kbt=1.0,
                            gamma_cfg=1.0 / (2.0 * np.pi), n_levels=16),
    "strongly_coupled": dict(kind="DA", v=1.0, lam=1.0, kbt=1.0, gamma_cfg=0.01, n_levels=16),
    "high_temperature": dict(kind="DA", v=0.1, lam=20.0, kbt=2.0, gamma_cfg=0.1, n_levels=32),
    "dba": dict(kind="DBA", v=0.1, kbt=1.0, gamma_cfg=0.01, n_levels=16,
                dba_site_energies=(5.0, 4.0, 3.0, 0.0),
                dba_positions=(-1.5, -0.5, 0.5, 1.5)),
}


class ConfigError(ValueError):
    """Invalid or unparsable run configuration."""


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple[float, ...]


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved parameters for one run or sweep."""

    method: str
    kind: str = "DA"
    delta_e: float | None = None
    v: float | None = None
    lam: float | None = None
    kbt: float | None = None
    gamma_cfg: float | None = None
    n_levels: int | None = None
    dba_site_energies: tuple[float, ...] | None = None
    dba_positions: tuple[float, ...] | None = None
    tau: float | None = None
    t_max: float = 1000.0
    dt: float = 1e-3
    trotter_n: int = 0
    rhp_t_start: float = 0.0
    record_stride: int | None = None
    sweep: SweepSpec | None = None
    output_dir: str = "."
    preset: str | None = None

    def model_params(self) -> model.ModelParams:
        missing = [name for name in ("v", "kbt", "gamma_cfg", "n_levels")
                   if getattr(self, name) is None]
        if missing:
            raise ConfigError(f"missing required field(s): {', '.join(missing)}")
        if self.kind == "DA":
            return model.ModelParams(kind="DA", v=self.v, kbt=self.kbt,
                                     gamma_cfg=self.gamma_cfg, n_levels=self.n_levels,
                                     delta_e=self.delta_e, lam=self.lam)
        return model.ModelParams(kind="DBA", v=self.v, kbt=self.kbt,
                                 gamma_cfg=self.gamma_cfg, n_levels=self.n_levels,
                                 dba_site_energies=self.dba_site_energies,
                                 dba_positions=self.dba_positions)


_CONFIG_KEYS = {f.name for f in fields(RunConfig)}


def _validated(cfg: RunConfig) -> RunConfig:
    if not cfg.method:
        raise ConfigError("field 'method' must not be empty")
    if cfg.method not in METHODS:
        raise ConfigError(f"field 'method' must be one of {METHODS}, got {cfg.method!r}")
    try:
        cfg.model_params()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.method in ("ri", "ri_trotter", "stateprep") and cfg.tau is None:
        raise ConfigError(f"field 'tau' is required for method {cfg.method!r}")
    sweeping_n = cfg.sweep is not None and cfg.sweep.parameter == "trotter_n"
    if cfg.method == "ri_trotter" and cfg.trotter_n < 1 and not sweeping_n:
        # a trotter_n sweep may carry 0 as the exact-propagator reference row
        raise ConfigError("field 'trotter_n' must be >= 1 for method 'ri_trotter'")
    if cfg.t_max <= 0 or cfg.dt <= 0:
        raise ConfigError("fields 't_max' and 'dt' must be positive")
    if cfg.sweep is not None:
        if cfg.sweep.parameter not in SWEEP_PARAMETERS:
            raise ConfigError(
                f"sweep parameter must be one of {SWEEP_PARAMETERS}, got {cfg.sweep.parameter!r}")
        if not cfg.sweep.values:
            raise ConfigError("sweep values must be a non-empty list")
        if cfg.sweep.parameter == "delta_e" and cfg.kind != "DA":
            raise ConfigError("delta_e sweeps are only defined for DA models")
    return cfg


def load_config(path) -> RunConfig:
    """Parse and validate a JSON run config, expanding its preset if any."""
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: parse error at line {exc.lineno}, column {exc.colno}: "
                          f"{exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top-level JSON value must be an object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown config key(s): {', '.join(sorted(unknown))}")

    merged: dict = {}
    preset = raw.get("preset")
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"{path}: unknown preset {preset!r}; "
                              f"available: {', '.join(sorted(PRESETS))}")
        merged.update(PRESETS[preset])
    merged.update({k: v for k, v in raw.items() if v is not None})

    if "method" not in merged:
        raise ConfigError(f"{path}: field 'method' is required")
    for key in ("dba_site_energies", "dba_positions"):
        if merged.get(key) is not None:
            merged[key] = tuple(float(x) for x in merged[key])
    if merged.get("sweep") is not None:
        sw = merged["sweep"]
        if not isinstance(sw, dict) or set(sw) - {"parameter", "values"}:
            raise ConfigError(f"{path}: sweep must be an object with 'parameter' and 'values'")
        merged["sweep"] = SweepSpec(parameter=sw.get("parameter", ""),
                                    values=tuple(sw.get("values", ())))
    try:
        cfg = RunConfig(**merged)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return _validated(cfg)


# ---------------------------------------------------------------------------
# engines from a config

def _build_system(cfg: RunConfig):
    params = cfg.model_params()
    ops = model.build_da(params) if params.kind == "DA" else model.build_dba(params)
    return params, ops


def _default_stride(cfg: RunConfig) -> int:
    step = cfg.dt if cfg.method == "lindblad" else cfg.tau
    if cfg.method == "rhp" and cfg.tau is not None:
        step = cfg.tau
    return max(1, int(round(0.1 / step)))


def _run_trajectory(cfg: RunConfig):
    """Produce (Trajectory, extras dict) for a single resolved config."""
    params, ops = _build_system(cfg)
    stride = cfg.record_stride or _default_stride(cfg)
    extras: dict = {}
    if cfg.method == "lindblad":
        rho0 = model.build_initial_state(ops, params)
        traj = dynamics.integrate_lindblad(rho0, ops, cfg.t_max, cfg.dt, stride)
    elif cfg.method in ("ri", "ri_trotter"):
        rho0 = model.build_initial_state(ops, params)
        n = cfg.trotter_n if cfg.method == "ri_trotter" else 0
        ri = dynamics.RIConfig(tau=cfg.tau, steps=int(round(cfg.t_max / cfg.tau)),
                               trotter_n=n, record_stride=stride)
        traj = dynamics.evolve_ri(rho0, ops, ri)
    elif cfg.method == "stateprep":
        ri = dynamics.RIConfig(tau=cfg.tau, steps=int(round(cfg.t_max / cfg.tau)),
                               record_stride=stride)
        traj = dynamics.run_state_preparation(ops, ri, params)
    elif cfg.method == "rhp":
        engine = "ri" if cfg.tau is not None else "lindblad"
        step = cfg.tau if engine == "ri" else cfg.dt
        res = analysis.rhp_measure(ops, params, engine, cfg.t_max, step, stride,
                                   t_start=cfg.rhp_t_start)
        traj = res.concurrence_trace
        reported = 0.0 if res.measure < analysis.RHP_ZERO_FLOOR else res.measure
        extras["rhp"] = {"measure_raw": res.measure, "measure": reported,
                         "delta_e_entanglement": res.delta_e_entanglement,
                         "engine": engine, "t_start": cfg.rhp_t_start}
    else:  # pragma: no cover - guarded by validation
        raise ConfigError(f"unhandled method {cfg.method!r}")
    return traj, extras


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if x is None:
        return ""
    return repr(float(x))


def write_trajectory_csv(path, traj: dynamics.Trajectory) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", *traj.column_names])
        for i, t in enumerate(traj.times):
            w.writerow([_fmt(t), *(_fmt(traj.columns[c][i]) for c in traj.column_names)])


def write_sweep_csv(path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_HEADER)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in SWEEP_HEADER])


def _write_manifest(outdir: Path, cfg: RunConfig, extras: dict, wall: float) -> None:
    params = cfg.model_params()
    doc = {
        "config": {**asdict(cfg), "sweep": None if cfg.sweep is None else asdict(cfg.sweep)},
        "gamma_internal": params.gamma_internal,
        "nbar": model.thermal_occupation(params.kbt),
        "wall_time_s": wall,
    }
    doc.update(extras)
    (outdir / "manifest.json").write_text(json.dumps(doc, indent=2, default=list) + "\n")


def run(cfg: RunConfig) -> int:
    """Execute one trajectory run and persist CSV + manifest."""
    t0 = time.perf_counter()
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    traj, extras = _run_trajectory(cfg)
    if cfg.method in ("lindblad", "ri", "ri_trotter"):
        fit = analysis.fit_transfer_rate(traj)
        extras["fit"] = asdict(fit)
    write_trajectory_csv(outdir / "trajectory.csv", traj)
    _write_manifest(outdir, cfg, extras, time.perf_counter() - t0)
    return 0


def _point_config(cfg: RunConfig, value: float) -> RunConfig:
    param = cfg.sweep.parameter
    if param == "delta_e":
        return replace(cfg, sweep=None, delta_e=float(value))
    if param == "tau":
        return replace(cfg, sweep=None, tau=float(value))
    return replace(cfg, sweep=None, trotter_n=int(value))


def _sweep_point(args) -> dict:
    cfg, value = args
    point = _point_config(cfg, value)
    traj, _ = _run_trajectory(point)
    try:
        fit = analysis.fit_transfer_rate(traj)
        k, p0, r2, ok = fit.k, fit.p0, fit.r_squared, fit.converged
    except ValueError:
        # unfittable trajectory (e.g. too few records) still yields a row
        k = p0 = r2 = float("nan")
        ok = False
    return {
        "delta_e": point.delta_e,
        "tau": point.tau,
        "trotter_n": point.trotter_n,
        "k": k,
        "p0": p0,
        "r_squared": r2,
        "converged": ok,
    }


def sweep(cfg: RunConfig, threads: int | None = None) -> int:
    """Run every sweep value through a worker pool; rows keep sweep order.

    Partial results are flushed to sweep.csv before an engine error is
    re-raised, so a crashed sweep still leaves the completed rows behind.
    """
    if cfg.sweep is None:
        raise ConfigError("config has no sweep section")
    t0 = time.perf_counter()
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    workers = threads or _thread_count()
    jobs = [(cfg, v) for v in cfg.sweep.values]
    rows: list[dict] = []
    try:
        if workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for row in pool.map(_sweep_point, jobs):
                    rows.append(row)
        else:
            for job in jobs:
                rows.append(_sweep_point(job))
    except Exception:
        write_sweep_csv(outdir / "sweep.csv", rows)
        raise
    write_sweep_csv(outdir / "sweep.csv", rows)
    _write_manifest(outdir, cfg, {"sweep_rows": len(rows)}, time.perf_counter() - t0)
    return 0


def _thread_count() -> int:
    env = os.environ.get("RI_ET_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _limit_blas_threads() -> None:
    # process-level parallelism beats BLAS threading at these matrix sizes
    try:
        from threadpoolctl import threadpool_limits

        global _BLAS_LIMIT
        _BLAS_LIMIT = threadpool_limits(limits=1)
    except Exception:
        pass


def _print_presets() -> None:
    for name, values in PRESETS.items():
        body = ", ".join(f"{k}={v}" for k, v in values.items())
        print(f"{name}: {body}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="riet",
        description="Repeated-interaction electron transfer simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("config", help="path to a JSON run config")
        p.add_argument("--output-dir", default=None, help="override config output_dir")
        p.add_argument("--threads", type=int, default=None,
                       help="worker processes for sweeps (default: RI_ET_THREADS or cores)")
        p.add_argument("--seedless", action="store_true",
                       help="reserved; all engines are deterministic")
    sub.add_parser("presets", help="print the built-in parameter sets")

    args = parser.parse_args(argv)
    if args.command == "presets":
        _print_presets()
        return 0

    _limit_blas_threads()
    try:
        cfg = load_config(args.config)
        if args.output_dir is not None:
            cfg = replace(cfg, output_dir=args.output_dir)
        if args.command == "run":
            return run(cfg)
        threads = args.threads if args.threads is not None else None
        return sweep(cfg, threads)
    except (ConfigError, dynamics.IntegrationDivergedError,
            dynamics.UnsupportedModelError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
