"""Experiment drivers and artifact writers.

Turns a loaded :class:`~hrnet.config.RunConfig` into files on disk:
``constants.csv`` and a printed constants block, ``trajectory.csv`` plus
``report.txt`` for single runs, and ``sweep.csv`` for parameter sweeps.

All files are written atomically (temp file in the target directory, then
``os.replace``), with LF line endings and fixed ``%.16e`` float formatting,
so repeated runs of the same config produce byte-identical artifacts.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import os
from dataclasses import dataclass, fields

import numpy as np

from .config import MetricsOptions, RunConfig
from .core import DerivedConstants, HRParameters, derive_constants
from .domain import poincare_constants
from .errors import ConfigError, IntegrationError
from .metrics import (
    TrajectoryRecord,
    energy_monitor,
    envelope_check,
    fit_sync_rate,
    record_trajectory,
)

FLOAT_FMT = "%.16e"

# parameters a sweep may scan (scalar model constants)
SWEEPABLE = ("a", "b", "alpha", "beta", "q", "r", "c", "J", "d", "p")

SWEEP_COLUMNS = ("value", "tail_dE_G", "rate", "mu",
                 "crossed_literal", "crossed_perpair", "status")


def fmt_float(x) -> str:
    return FLOAT_FMT % float(x)


def atomic_write_text(path, text):
    """Write text with LF endings via a temp file and atomic rename."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    tmp = os.path.join(directory, f".{os.path.basename(path)}.{os.getpid()}.tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
    os.replace(tmp, path)


def resolve_output_dir(cfg: RunConfig, cli_out=None, env=None) -> str:
    """Output directory precedence: --out flag, then env override, then config."""
    env = os.environ if env is None else env
    if cli_out:
        return os.fspath(cli_out)
    from_env = env.get("HRNET_OUTDIR", "")
    if from_env:
        return from_env
    return cfg.output_dir


@dataclass(frozen=True)
class Setup:
    """Everything derived from a config before any time stepping."""

    params: HRParameters
    consts: DerivedConstants
    eta1: float
    eta2: float
    eta_analytic: float


def build_setup(cfg: RunConfig) -> Setup:
    pc = poincare_constants(cfg.domain, mode=cfg.eta_mode)
    analytic = poincare_constants(cfg.domain, mode="analytic")
    consts = derive_constants(cfg.params, cfg.domain.omega_measure, pc.eta1, pc.eta2)
    return Setup(params=cfg.params, consts=consts, eta1=pc.eta1, eta2=pc.eta2,
                 eta_analytic=analytic.eta1)


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------

def constants_block(cfg: RunConfig, setup: Setup) -> str:
    c = setup.consts
    lines = ["# model parameters"]
    for f in fields(HRParameters):
        lines.append(f"{f.name} = {getattr(cfg.params, f.name)!r}")
    lines.append("# derived constants")
    lines.append(f"c1 = {fmt_float(c.c1)}")
    lines.append(f"c2 = {fmt_float(c.c2)}")
    lines.append(f"r_star = {fmt_float(c.r_star)}")
    lines.append(f"M = {fmt_float(c.big_m)}")
    lines.append(f"Q = {fmt_float(c.big_q)}")
    lines.append(f"G = {fmt_float(c.g)}")
    lines.append(
        f"eta1 = {fmt_float(c.eta1)}  (analytic cross-check "
        f"{fmt_float(setup.eta_analytic)})")
    lines.append(f"eta2 = {fmt_float(c.eta2)}")
    lines.append(f"R_literal = {fmt_float(c.big_r)}")
    lines.append(f"R_perpair = {fmt_float(c.big_r_alt)}")
    lines.append(f"mu = {fmt_float(c.mu)}")
    lines.append(f"omega_measure = {fmt_float(c.omega_measure)}")
    return "\n".join(lines) + "\n"


def domain_block(cfg: RunConfig, setup: Setup) -> str:
    lines = [
        f"eta1 = {fmt_float(setup.eta1)}  (analytic cross-check "
        f"{fmt_float(setup.eta_analytic)})",
        f"eta2 = {fmt_float(setup.eta2)}",
        f"omega_measure = {fmt_float(cfg.domain.omega_measure)}",
    ]
    return "\n".join(lines) + "\n"


def constants_csv(cfg: RunConfig, setup: Setup) -> str:
    param_names = [f.name for f in fields(HRParameters)]
    header = ",".join(param_names + list(DerivedConstants.FIELD_ORDER))
    values = [repr(getattr(cfg.params, name)) if name == "n_neurons"
              else fmt_float(getattr(cfg.params, name)) for name in param_names]
    values += [fmt_float(getattr(setup.consts, name))
               for name in DerivedConstants.FIELD_ORDER]
    return header + "\n" + ",".join(values) + "\n"


def run_constants(cfg: RunConfig, out_dir, domain_only=False) -> str:
    """Build constants artifacts; returns the printable block."""
    setup = build_setup(cfg)
    if domain_only:
        return domain_block(cfg, setup)
    atomic_write_text(os.path.join(out_dir, "constants.csv"),
                      constants_csv(cfg, setup))
    return constants_block(cfg, setup)


# ---------------------------------------------------------------------------
# single simulation
# ---------------------------------------------------------------------------

def trajectory_header(n_neurons: int) -> str:
    pair_cols = [f"dE_{i + 1}_{j + 1}" for i in range(n_neurons)
                 for j in range(i + 1, n_neurons)]
    return ",".join([
        "t", "total_energy", "gronwall_envelope", "stimulation_S",
        "threshold_literal", "threshold_perpair", "boundary_diff_full", "K_sum",
    ] + pair_cols)


def trajectory_csv(record: TrajectoryRecord | None, n_neurons: int) -> str:
    lines = [trajectory_header(n_neurons)]
    if record is not None:
        for k in range(len(record)):
            cells = [
                fmt_float(record.t[k]),
                fmt_float(record.total_energy[k]),
                fmt_float(record.gronwall_envelope[k]),
                fmt_float(record.stimulation_s[k]),
                fmt_float(record.threshold_literal[k]),
                fmt_float(record.threshold_perpair[k]),
                fmt_float(record.boundary_diff_full[k]),
                fmt_float(record.k_sum[k]),
            ]
            cells += [fmt_float(v) for v in record.diff_energy_g[k]]
            lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def simulation_report(record: TrajectoryRecord, consts: DerivedConstants,
                      opts: MetricsOptions) -> str:
    lines = []
    report = envelope_check(record, consts, tolerance=opts.tolerance,
                            entry_slack=opts.entry_slack,
                            decay_tolerance=opts.decay_tolerance)
    lines.extend(report.lines())
    lines.extend(energy_monitor(record, consts, tolerance=opts.tolerance).lines())
    fit = fit_sync_rate(record, window_fraction=opts.window_fraction,
                        floor=opts.floor)
    lines.extend(fit.lines())
    if not fit.already_synchronized and consts.mu > 0:
        lines.append(f"fitted rate / mu = {fit.rate / consts.mu:.6g} "
                     f"(mu = {consts.mu:.6g} is a sufficient-condition rate)")
    with np.errstate(invalid="ignore", divide="ignore"):
        ratios = np.where(record.boundary_diff_full > 0,
                          record.k_sum / record.boundary_diff_full, np.nan)
    finite = ratios[np.isfinite(ratios)]
    if finite.size:
        lines.append(
            f"summed-K to boundary-gap ratio over run: min {finite.min():.6g}, "
            f"max {finite.max():.6g} (measured, not presumed)")
    return "\n".join(lines) + "\n"


def run_simulate(cfg: RunConfig, out_dir) -> int:
    """Simulate per config, writing trajectory.csv and report.txt.

    Returns the process exit code: 0 on completion, 3 on integration
    failure (with partial trajectory rows flushed).
    """
    setup = build_setup(cfg)
    csv_path = os.path.join(out_dir, "trajectory.csv")
    report_path = os.path.join(out_dir, "report.txt")
    try:
        record = record_trajectory(cfg.ic, cfg.params, cfg.domain, cfg.matching,
                                   cfg.integrator, setup.consts)
    except IntegrationError as err:
        partial = getattr(err, "partial_record", None)
        atomic_write_text(csv_path, trajectory_csv(partial, cfg.params.n_neurons))
        atomic_write_text(report_path, f"integration failed: {err}\n")
        return 3
    atomic_write_text(csv_path, trajectory_csv(record, cfg.params.n_neurons))
    atomic_write_text(report_path,
                      simulation_report(record, setup.consts, cfg.metrics))
    return 0


# ---------------------------------------------------------------------------
# parameter sweep
# ---------------------------------------------------------------------------

def sweep_values(text) -> tuple:
    try:
        values = tuple(float(tok) for tok in str(text).split(","))
    except ValueError:
        raise ConfigError(f"--values: expected comma-separated numbers, got {text!r}")
    if not values:
        raise ConfigError("--values: empty list")
    return values


def _sweep_one(payload):
    """One sweep run; module-level so process pools can pickle it."""
    cfg, param, value = payload
    try:
        params = cfg.params.replace(**{param: value})
        setup = build_setup(dataclasses.replace(cfg, params=params))
    except ValueError as err:
        return {"value": value, "status": f"invalid({err})"}
    try:
        record = record_trajectory(cfg.ic, params, cfg.domain, cfg.matching,
                                   cfg.integrator, setup.consts)
    except IntegrationError as err:
        return {"value": value, "status": "failed", "mu": setup.consts.mu,
                "error": str(err)}
    sync = record.sync_total()
    tail_start = record.t[-1] - cfg.metrics.tail_fraction * (record.t[-1] - record.t[0])
    tail = sync[record.t >= tail_start]
    fit = fit_sync_rate(record, window_fraction=cfg.metrics.window_fraction,
                        floor=cfg.metrics.floor)
    return {
        "value": value,
        "status": "ok",
        "tail": float(tail.max()),
        "rate": fit.rate,
        "mu": setup.consts.mu,
        "crossed_literal": bool(
            np.any(record.stimulation_s > record.threshold_literal)),
        "crossed_perpair": bool(
            np.any(record.stimulation_s > record.threshold_perpair)),
    }


def sweep_rows(cfg: RunConfig, param: str, values, jobs: int = 1) -> list:
    """Run the sweep and return one result mapping per value, in order."""
    if param not in SWEEPABLE:
        raise ConfigError(
            f"--param: {param!r} is not sweepable; choose one of "
            f"{', '.join(SWEEPABLE)}")
    payloads = [(cfg, param, value) for value in values]
    if jobs > 1 and len(payloads) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_one, payloads))
    return [_sweep_one(p) for p in payloads]


def sweep_csv(rows) -> str:
    lines = [",".join(SWEEP_COLUMNS)]
    for row in rows:
        if row["status"] == "ok":
            cells = [
                fmt_float(row["value"]),
                fmt_float(row["tail"]),
                fmt_float(row["rate"]),
                fmt_float(row["mu"]),
                "1" if row["crossed_literal"] else "0",
                "1" if row["crossed_perpair"] else "0",
                "ok",
            ]
        else:
            cells = [fmt_float(row["value"]), "nan", "nan",
                     fmt_float(row.get("mu", float("nan"))), "0", "0",
                     row["status"].replace(",", ";")]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def run_sweep(cfg: RunConfig, out_dir, param: str, values, jobs: int = 1) -> int:
    rows = sweep_rows(cfg, param, values, jobs=jobs)
    atomic_write_text(os.path.join(out_dir, "sweep.csv"), sweep_csv(rows))
    return 0
