"""Experiment configuration: parsing, validation and a lossless dict echo."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from .dynamics import PropagationConfig
from .model import HamiltonianKind, ModelParams, Schedule
from .wells import WellSpec

MODES = ("evolve", "meanfield", "compare", "extract-params", "sweep", "verify")
FORMATS = ("csv", "json")
SWEEP_ALIASES = ("model.lambda",)


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending field."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class MeanfieldOptions:
    form: str = "bloch"
    u_nl: float | None = None
    include_corrections: bool = True

    def __post_init__(self):
        if self.form not in ("bloch", "gp"):
            raise ValueError(f"form must be 'bloch' or 'gp', got {self.form!r}")
        if self.u_nl is not None and not math.isfinite(self.u_nl):
            raise ValueError("u_nl must be finite")

    def to_dict(self) -> dict:
        return {"form": self.form, "u_nl": self.u_nl, "include_corrections": self.include_corrections}


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple
    workers: int = 1

    def to_dict(self) -> dict:
        return {"parameter": self.parameter, "values": list(self.values), "workers": self.workers}


@dataclass(frozen=True)
class OutputSpec:
    path: str | None = None
    format: str = "csv"
    precision: int = 12
    hex_float: bool = False

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}, got {self.format!r}")
        if isinstance(self.precision, bool) or int(self.precision) != self.precision or not 1 <= self.precision <= 17:
            raise ValueError("precision must be an integer in 1..17")

    def to_dict(self) -> dict:
        return {"path": self.path, "format": self.format, "precision": self.precision, "hex_float": self.hex_float}


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    model: ModelParams | None = None
    model_source: str = "explicit"
    wells: WellSpec | None = None
    refine_tol: float | None = None
    hamiltonian: HamiltonianKind = HamiltonianKind.FULL_CORRECTIONS
    initial: str = "left"
    propagation: PropagationConfig = field(default_factory=PropagationConfig)
    meanfield: MeanfieldOptions = field(default_factory=MeanfieldOptions)
    sweep: SweepSpec | None = None
    output: OutputSpec = field(default_factory=OutputSpec)
    seedless: bool = False

    def to_dict(self) -> dict:
        d = {
            "mode": self.mode,
            "hamiltonian": self.hamiltonian.value,
            "initial": self.initial,
            "propagation": self.propagation.to_dict(),
            "meanfield": self.meanfield.to_dict(),
            "output": self.output.to_dict(),
            "seedless": self.seedless,
        }
        if self.model is not None:
            if self.model_source == "wells":
                d["model"] = {"n_particles": self.model.n_particles, "source": "wells"}
            else:
                d["model"] = {**self.model.to_dict(), "source": "explicit"}
        if self.wells is not None:
            d["wells"] = {**self.wells.to_dict(), "refine_tol": self.refine_tol}
        if self.sweep is not None:
            d["sweep"] = self.sweep.to_dict()
        return d


def _section(d: dict, name: str) -> dict:
    value = d.get(name, {})
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(name, f"expected a mapping, got {type(value).__name__}")
    return value


def _wrap(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError, OSError) as exc:
        msg = f"missing key {exc}" if isinstance(exc, KeyError) else str(exc)
        raise ConfigError(name, msg) from exc


_TOP_KEYS = {"mode", "model", "wells", "hamiltonian", "initial", "propagation", "meanfield", "sweep", "output",
             "seedless"}


def parse_config(d: dict, base_dir: Path | None = None, mode: str | None = None) -> ExperimentConfig:
    """Build and validate an ExperimentConfig from a plain mapping.

    ``mode`` (from the CLI subcommand) must agree with d['mode'] when both are given.
    """
    if not isinstance(d, dict):
        raise ConfigError("<root>", "configuration must be a mapping")
    unknown = set(d) - _TOP_KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown top-level key")
    cfg_mode = d.get("mode", mode)
    if mode is not None and cfg_mode != mode:
        raise ConfigError("mode", f"config says {cfg_mode!r} but subcommand is {mode!r}")
    if cfg_mode not in MODES:
        raise ConfigError("mode", f"expected one of {MODES}, got {cfg_mode!r}")

    wells = refine_tol = None
    if "wells" in d:
        wd = dict(_section(d, "wells"))
        refine_tol = wd.pop("refine_tol", None)
        if refine_tol is not None:
            refine_tol = _wrap("wells.refine_tol", float, refine_tol)
        wells = _wrap("wells", WellSpec.from_dict, wd, base_dir)

    model = None
    source = "explicit"
    if "model" in d:
        md = dict(_section(d, "model"))
        source = md.pop("source", "explicit")
        if source not in ("explicit", "wells"):
            raise ConfigError("model.source", f"expected 'explicit' or 'wells', got {source!r}")
        unknown = set(md) - {"n_particles", "u0", "ut", "utt", "eps", "omega"}
        if unknown:
            raise ConfigError(f"model.{sorted(unknown)[0]}", "unknown key")
        if "n_particles" not in md:
            raise ConfigError("model.n_particles", "required")
        n = md["n_particles"]
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise ConfigError("model.n_particles", f"must be an integer >= 1, got {n!r}")
        if source == "wells":
            extra = set(md) - {"n_particles"}
            if extra:
                raise ConfigError(f"model.{sorted(extra)[0]}", "couplings come from the wells section when source=wells")
            if wells is None:
                raise ConfigError("wells", "required when model.source is 'wells'")
            model = _model_from_wells(n, wells, refine_tol)
        else:
            for key in ("u0", "ut", "utt"):
                if key in md and (isinstance(md[key], bool) or not isinstance(md[key], (int, float))
                                  or not math.isfinite(md[key])):
                    raise ConfigError(f"model.{key}", f"must be a finite number, got {md[key]!r}")
            for key in ("eps", "omega"):
                if key in md:
                    _wrap(f"model.{key}", Schedule.from_dict, md[key], base_dir)
            model = _wrap("model", ModelParams.from_dict, md, base_dir)

    hamiltonian = _wrap("hamiltonian", HamiltonianKind.parse, d.get("hamiltonian", "full"))
    initial = d.get("initial", "left")
    if initial not in ("left", "right"):
        raise ConfigError("initial", f"expected 'left' or 'right', got {initial!r}")
    propagation = _wrap("propagation", PropagationConfig.from_dict, _section(d, "propagation"))
    meanfield = _wrap("meanfield", lambda m: MeanfieldOptions(**m), _section(d, "meanfield"))
    output = _wrap("output", lambda o: OutputSpec(**o), _section(d, "output"))

    sweep = None
    if "sweep" in d:
        sd = _section(d, "sweep")
        unknown = set(sd) - {"parameter", "values", "workers"}
        if unknown:
            raise ConfigError(f"sweep.{sorted(unknown)[0]}", "unknown key")
        if "parameter" not in sd:
            raise ConfigError("sweep.parameter", "required")
        values = sd.get("values")
        if not isinstance(values, (list, tuple)) or not values:
            raise ConfigError("sweep.values", "must be a non-empty list")
        for v in values:
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError("sweep.values", f"all values must be finite numbers, got {v!r}")
        workers = sd.get("workers", 1)
        if isinstance(workers, bool) or not isinstance(workers, int) or workers < 1:
            raise ConfigError("sweep.workers", "must be an integer >= 1")
        sweep = SweepSpec(sd["parameter"], tuple(values), workers)

    seedless = d.get("seedless", False)
    if not isinstance(seedless, bool):
        raise ConfigError("seedless", "must be true or false")

    cfg = ExperimentConfig(cfg_mode, model, source, wells, refine_tol, hamiltonian, initial, propagation,
                           meanfield, sweep, output, seedless)
    _validate(cfg, d)
    return cfg


def _model_from_wells(n: int, wells: WellSpec, refine_tol) -> ModelParams:
    from .wells import extract_parameters

    p = _wrap("wells", extract_parameters, wells, refine_tol)
    return ModelParams(n, p.u0, p.ut, p.utt, Schedule.constant(p.eps), Schedule.constant(p.omega))


def _validate(cfg: ExperimentConfig, raw: dict):
    needs_model = cfg.mode in ("evolve", "meanfield", "compare", "sweep", "verify")
    if needs_model and cfg.model is None:
        raise ConfigError("model", f"required for mode {cfg.mode!r}")
    if cfg.mode == "extract-params" and cfg.wells is None:
        raise ConfigError("wells", "required for mode 'extract-params'")
    if cfg.mode == "sweep":
        if cfg.sweep is None:
            raise ConfigError("sweep", "required for mode 'sweep'")
        p = cfg.sweep.parameter
        if p not in SWEEP_ALIASES:
            _lookup(cfg.to_dict(), p)
        for v in cfg.sweep.values:
            point = _wrap(f"sweep.values[{v!r}]", sweep_point_config, cfg, v)
            _check_coverage(point)
    elif cfg.sweep is not None:
        raise ConfigError("sweep", f"only valid with mode 'sweep', not {cfg.mode!r}")
    if cfg.model is not None and cfg.mode in ("evolve", "meanfield", "compare"):
        _check_coverage(cfg)
    if cfg.mode == "meanfield" or cfg.mode == "compare":
        if cfg.meanfield.form == "gp" and cfg.meanfield.include_corrections and cfg.model.utt:
            raise ConfigError("meanfield.form", "the GP form has no U_tt term; use 'bloch' or set utt = 0")


def _check_coverage(cfg: ExperimentConfig):
    try:
        cfg.model.check_covers(cfg.propagation.t_start, cfg.propagation.t_end)
    except ValueError as exc:
        raise ConfigError("model", str(exc)) from exc


def _lookup(d: dict, dotted: str):
    node = d
    for part in dotted.split("."):
        if not isinstance(node, dict) or part not in node:
            raise ConfigError("sweep.parameter", f"{dotted!r} does not name a configuration field")
        node = node[part]
    if isinstance(node, dict) and node.get("kind") != "constant":
        raise ConfigError("sweep.parameter", f"{dotted!r} is not a scalar field")
    return node


def _assign(d: dict, dotted: str, value):
    parts = dotted.split(".")
    node = d
    for part in parts[:-1]:
        node = node[part]
    old = node[parts[-1]]
    if isinstance(old, dict):
        node[parts[-1]] = {"kind": "constant", "value": float(value)}
    elif isinstance(old, int) and not isinstance(old, bool):
        if float(value) != int(value):
            raise ValueError(f"{dotted} needs integer values, got {value!r}")
        node[parts[-1]] = int(value)
    else:
        node[parts[-1]] = value


def sweep_point_config(cfg: ExperimentConfig, value) -> ExperimentConfig:
    """Configuration for one sweep point (mode 'evolve', sweep removed)."""
    d = cfg.to_dict()
    d.pop("sweep")
    d["mode"] = "evolve"
    param = cfg.sweep.parameter
    if param == "model.lambda":
        if cfg.model_source != "explicit":
            raise ValueError("model.lambda sweeps need explicit couplings")
        omega = cfg.model.omega_schedule(cfg.propagation.t_start)
        d["model"]["u0"] = 2 * float(value) * abs(omega) / cfg.model.n_particles
    else:
        if param.startswith("model.") and cfg.model_source == "wells":
            raise ValueError("cannot sweep model couplings when source=wells; sweep wells.* instead")
        _assign(d, param, value)
    point = parse_config(d)
    return replace(point, sweep=None)


def load_config(path, mode: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("--config", str(exc)) from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("--config", f"cannot parse {path}: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "configuration must be a mapping")
    if mode is not None:
        raw.setdefault("mode", mode)
    for key, value in (overrides or {}).items():
        raw.setdefault("output", {})
        if not isinstance(raw["output"], dict):
            raise ConfigError("output", "expected a mapping")
        raw["output"][key] = value
    return parse_config(raw, base_dir=path.parent, mode=mode)
