"""Command line entry point: bec-dimer <mode> --config FILE [--out PATH] [--format csv|json]."""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from . import verify as verify_mod
from .config import MODES, ConfigError, ExperimentConfig, load_config, sweep_point_config
from .dynamics import FiniteDifferenceError, NormDriftError, TrajectoryRecord, propagate, transport_metrics
from .meanfield import BlochVector, GPAmplitudes, compare_quantum_classical, integrate_meanfield, self_trapped
from .model import ScheduleDomainError
from .operators import left_well_state, right_well_state
from .output import render_csv, render_json, write_atomic
from .wells import GridTooCoarseError, TwoModeError, extract_parameters

log = logging.getLogger("bec_dimer")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2


class Artifact:
    """Columns plus summary for one run; rendered by the single writer in run()."""

    def __init__(self, columns: dict, summary: dict | None = None, sections: dict | None = None):
        self.columns = columns
        self.summary = summary or {}
        self.sections = sections or {}


def _initial_quantum(cfg: ExperimentConfig):
    n = cfg.model.n_particles
    return left_well_state(n) if cfg.initial == "left" else right_well_state(n)


def _initial_classical(cfg: ExperimentConfig):
    if cfg.meanfield.form == "gp":
        return GPAmplitudes(1 + 0j, 0j) if cfg.initial == "left" else GPAmplitudes(0j, 1 + 0j)
    return BlochVector(0.0, 0.0, -1.0 if cfg.initial == "left" else 1.0)


def _quantum(cfg: ExperimentConfig) -> TrajectoryRecord:
    return propagate(_initial_quantum(cfg), cfg.model, cfg.hamiltonian, cfg.propagation)


def _classical(cfg: ExperimentConfig):
    mf = cfg.meanfield
    return integrate_meanfield(_initial_classical(cfg), cfg.model, cfg.propagation, u_nl=mf.u_nl,
                               include_corrections=mf.include_corrections)


def run_evolve(cfg: ExperimentConfig) -> Artifact:
    rec = _quantum(cfg)
    return Artifact(rec.columns(), transport_metrics(rec, cfg.model.n_particles).to_dict())


def run_meanfield(cfg: ExperimentConfig) -> Artifact:
    traj = _classical(cfg)
    extra = {}
    if traj.form == "gp":
        extra = {"gp": {"pop_left": traj.pop_left, "pop_right": traj.pop_right, "phase": traj.phase}}
    return Artifact(traj.columns(), {"self_trapped": self_trapped(traj.w), "w_max": float(np.max(traj.w)),
                                     "w_min": float(np.min(traj.w))}, extra)


def run_compare(cfg: ExperimentConfig) -> Artifact:
    rec = _quantum(cfg)
    traj = _classical(cfg)
    dev = compare_quantum_classical(rec, traj, cfg.model.n_particles)
    cols = dict(rec.columns())
    cl = traj.columns()
    keep = np.isin(rec.times, dev.times)
    cols = {k: np.asarray(v)[keep] for k, v in cols.items()}
    for k in ("u", "v", "w"):
        cols[k] = np.interp(dev.times, traj.times, cl[k])
    cols["bloch_norm"] = np.interp(dev.times, traj.times, cl["norm"])
    cols.update({k: v for k, v in dev.columns().items() if k != "t"})
    summary = {**dev.summary(), **transport_metrics(rec, cfg.model.n_particles).to_dict(),
               "meanfield_self_trapped": self_trapped(traj.w)}
    return Artifact(cols, summary, {"quantum": rec.columns(), "classical": traj.columns(),
                                    "deviation": dev.columns()})


def run_extract(cfg: ExperimentConfig) -> Artifact:
    p = extract_parameters(cfg.wells, refine_tol=cfg.refine_tol)
    d = p.to_dict()
    validity = d.pop("validity")
    names = list(d) + [f"validity.{k}" for k in validity]
    values = list(d.values()) + list(validity.values())
    return Artifact({"parameter": names, "value": values}, {**d, "validity": validity})


def _sweep_point(args):
    cfg, value = args
    point = sweep_point_config(cfg, value)
    rec = _quantum(point)
    traj = integrate_meanfield(BlochVector(0.0, 0.0, -1.0 if point.initial == "left" else 1.0), point.model,
                               point.propagation, u_nl=point.meanfield.u_nl,
                               include_corrections=point.meanfield.include_corrections)
    metrics = transport_metrics(rec, point.model.n_particles)
    dev = compare_quantum_classical(rec, traj, point.model.n_particles)
    return (value, metrics.fidelity, metrics.self_trapped, self_trapped(traj.w), metrics.z_min, metrics.z_max,
            dev.max_deviation)


def run_sweep(cfg: ExperimentConfig) -> Artifact:
    jobs = [(cfg, v) for v in cfg.sweep.values]
    if cfg.sweep.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.sweep.workers) as pool:
            rows = list(pool.map(_sweep_point, jobs))  # map keeps input order
    else:
        rows = [_sweep_point(j) for j in jobs]
    names = (cfg.sweep.parameter, "fidelity", "self_trapped", "meanfield_self_trapped", "z_min", "z_max",
             "max_deviation")
    return Artifact({n: [r[i] for r in rows] for i, n in enumerate(names)})


def run_verify(cfg: ExperimentConfig) -> Artifact:
    checks = verify_mod.run_all(cfg.model.n_particles)
    for c in checks:
        log.info(c.line())
    return Artifact({"suite": [c.suite for c in checks], "check": [c.name for c in checks],
                     "value": [c.value for c in checks], "tolerance": [c.tolerance for c in checks],
                     "passed": [c.passed for c in checks]},
                    {"all_passed": all(c.passed for c in checks), "n_checks": len(checks)})


RUNNERS = {"evolve": run_evolve, "meanfield": run_meanfield, "compare": run_compare,
           "extract-params": run_extract, "sweep": run_sweep, "verify": run_verify}


def render(cfg: ExperimentConfig, art: Artifact) -> str:
    meta = {"program": "bec_dimer", "mode": cfg.mode, "config": cfg.to_dict()}
    if cfg.output.format == "csv":
        return render_csv(art.columns, meta, cfg.output.precision, cfg.output.hex_float)
    payload = {**meta, "columns": list(art.columns), "data": art.columns, "summary": art.summary}
    if art.sections:
        payload["sections"] = art.sections
    return render_json(payload)


def run(cfg: ExperimentConfig) -> int:
    """Execute one configured experiment and write its single output artifact."""
    art = RUNNERS[cfg.mode](cfg)
    text = render(cfg, art)
    if cfg.output.path:
        write_atomic(cfg.output.path, text)
        log.info("wrote %s", cfg.output.path)
    else:
        sys.stdout.write(text)
    if cfg.mode == "verify" and not art.summary["all_passed"]:
        return EXIT_NUMERICAL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bec-dimer", description=__doc__)
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        p = sub.add_parser(mode)
        p.add_argument("--config", required=True, help="YAML or JSON experiment file")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--hex-float", action="store_true", help="write CSV numbers as exact hex floats")
        p.add_argument("--seedless", action="store_true",
                       help="assert the run uses no randomness (always true; recorded in the metadata)")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    overrides = {}
    if args.out:
        overrides["path"] = args.out
    if args.format:
        overrides["format"] = args.format
    if args.hex_float:
        overrides["hex_float"] = True
    try:
        cfg = load_config(args.config, mode=args.mode, overrides=overrides)
        if args.seedless:
            cfg = replace(cfg, seedless=True)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run(cfg)
    except (NormDriftError, FiniteDifferenceError, TwoModeError, GridTooCoarseError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ScheduleDomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
