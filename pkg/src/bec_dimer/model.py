"""Couplings, time-dependent schedules and the two-mode Hamiltonian matrices."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .operators import OperatorSet, build_operators

SCHEDULE_KINDS = ("constant", "linear-ramp", "gaussian-pulse", "piecewise-linear", "tabulated")

# slack allowed at the ends of a schedule domain, relative to its span
_DOMAIN_SLACK = 1e-12


class ScheduleDomainError(ValueError):
    pass


@dataclass(frozen=True)
class Schedule:
    """A real function of time.

    kinds and their parameters:
      constant          value
      linear-ramp       start, end, t0, t1          (domain [t0, t1])
      gaussian-pulse    amplitude, center, width, offset=0
      piecewise-linear  times, values               (domain [times[0], times[-1]])
      tabulated         times, values, or path to a two-column (t, value) text file

    ``t_min``/``t_max`` optionally restrict the domain of the unbounded kinds.
    """

    kind: str
    params: tuple = ()
    t_min: float = -math.inf
    t_max: float = math.inf

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}; expected one of {SCHEDULE_KINDS}")
        p = dict(self.params)
        if self.kind == "linear-ramp":
            if not p["t1"] > p["t0"]:
                raise ValueError("linear-ramp needs t1 > t0")
            object.__setattr__(self, "t_min", max(self.t_min, p["t0"]))
            object.__setattr__(self, "t_max", min(self.t_max, p["t1"]))
        elif self.kind in ("piecewise-linear", "tabulated"):
            times = np.asarray(p["times"], dtype=float)
            values = np.asarray(p["values"], dtype=float)
            if times.ndim != 1 or times.shape != values.shape or times.size < 2:
                raise ValueError(f"{self.kind} needs matching 1-D times/values with at least two points")
            if np.any(np.diff(times) <= 0):
                raise ValueError(f"{self.kind} times must be strictly increasing")
            if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
                raise ValueError(f"{self.kind} table contains non-finite entries")
            object.__setattr__(self, "t_min", max(self.t_min, float(times[0])))
            object.__setattr__(self, "t_max", min(self.t_max, float(times[-1])))
        elif self.kind == "gaussian-pulse" and not p["width"] > 0:
            raise ValueError("gaussian-pulse needs width > 0")
        for v in p.values():
            if isinstance(v, float) and not math.isfinite(v):
                raise ValueError(f"non-finite schedule parameter in {self.kind}")

    # constructors -----------------------------------------------------
    @classmethod
    def constant(cls, value: float) -> Schedule:
        return cls("constant", (("value", float(value)),))

    @classmethod
    def linear_ramp(cls, start: float, end: float, t0: float, t1: float) -> Schedule:
        return cls("linear-ramp", (("start", float(start)), ("end", float(end)), ("t0", float(t0)), ("t1", float(t1))))

    @classmethod
    def gaussian_pulse(cls, amplitude: float, center: float, width: float, offset: float = 0.0) -> Schedule:
        return cls("gaussian-pulse", (("amplitude", float(amplitude)), ("center", float(center)),
                                      ("width", float(width)), ("offset", float(offset))))

    @classmethod
    def piecewise_linear(cls, times, values) -> Schedule:
        return cls("piecewise-linear", (("times", tuple(map(float, times))), ("values", tuple(map(float, values)))))

    @classmethod
    def tabulated(cls, times, values) -> Schedule:
        return cls("tabulated", (("times", tuple(map(float, times))), ("values", tuple(map(float, values)))))

    @classmethod
    def from_file(cls, path) -> Schedule:
        data = np.loadtxt(path, ndmin=2)
        if data.shape[1] != 2:
            raise ValueError(f"{path}: expected two columns (t, value), got {data.shape[1]}")
        return cls.tabulated(data[:, 0], data[:, 1])

    # -------------------------------------------------------------------
    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    def covers(self, t0: float, t1: float) -> bool:
        return self._in_domain(t0) and self._in_domain(t1)

    def _in_domain(self, t: float) -> bool:
        span = self.t_max - self.t_min
        slack = _DOMAIN_SLACK * (span if math.isfinite(span) else 1.0) + _DOMAIN_SLACK * abs(t)
        return self.t_min - slack <= t <= self.t_max + slack

    def __call__(self, t: float) -> float:
        return evaluate_schedule(self, t)

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        for k, v in self.params:
            d[k] = list(v) if isinstance(v, tuple) else v
        if self.kind not in ("linear-ramp", "piecewise-linear", "tabulated"):
            if math.isfinite(self.t_min):
                d["t_min"] = self.t_min
            if math.isfinite(self.t_max):
                d["t_max"] = self.t_max
        return d

    @classmethod
    def from_dict(cls, d, base_dir: Path | None = None) -> Schedule:
        if isinstance(d, (int, float)) and not isinstance(d, bool):
            return cls.constant(d)
        if not isinstance(d, dict) or "kind" not in d:
            raise ValueError(f"schedule must be a number or a mapping with 'kind', got {d!r}")
        d = dict(d)
        kind = d.pop("kind")
        bounds = {k: float(d.pop(k)) for k in ("t_min", "t_max") if k in d}
        if kind == "tabulated" and "path" in d:
            path = Path(d.pop("path"))
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            sched = cls.from_file(path)
            return cls(sched.kind, sched.params, **bounds)
        required = {
            "constant": ("value",),
            "linear-ramp": ("start", "end", "t0", "t1"),
            "gaussian-pulse": ("amplitude", "center", "width"),
            "piecewise-linear": ("times", "values"),
            "tabulated": ("times", "values"),
        }.get(kind)
        if required is None:
            raise ValueError(f"unknown schedule kind {kind!r}")
        missing = [k for k in required if k not in d]
        if missing:
            raise ValueError(f"{kind} schedule missing {missing}")
        if kind == "gaussian-pulse":
            d.setdefault("offset", 0.0)
        extra = set(d) - set(required) - {"offset"}
        if extra:
            raise ValueError(f"{kind} schedule has unknown keys {sorted(extra)}")
        params = []
        for k in (*required, *(("offset",) if kind == "gaussian-pulse" else ())):
            v = d[k]
            params.append((k, tuple(float(x) for x in v) if isinstance(v, (list, tuple)) else float(v)))
        return cls(kind, tuple(params), **bounds)


def evaluate_schedule(s: Schedule, t: float) -> float:
    if not s._in_domain(t):
        raise ScheduleDomainError(f"t={t!r} outside {s.kind} schedule domain [{s.t_min}, {s.t_max}]")
    p = dict(s.params)
    if s.kind == "constant":
        return p["value"]
    if s.kind == "linear-ramp":
        frac = min(max((t - p["t0"]) / (p["t1"] - p["t0"]), 0.0), 1.0)
        return p["start"] + (p["end"] - p["start"]) * frac
    if s.kind == "gaussian-pulse":
        return p["offset"] + p["amplitude"] * math.exp(-0.5 * ((t - p["center"]) / p["width"]) ** 2)
    return float(np.interp(t, p["times"], p["values"]))


class HamiltonianKind(enum.Enum):
    ON_SITE_ONLY = "onsite"
    FULL_CORRECTIONS = "full"

    @classmethod
    def parse(cls, value) -> HamiltonianKind:
        if isinstance(value, cls):
            return value
        aliases = {"onsite": cls.ON_SITE_ONLY, "on-site": cls.ON_SITE_ONLY, "onsiteonly": cls.ON_SITE_ONLY,
                   "full": cls.FULL_CORRECTIONS, "fullcorrections": cls.FULL_CORRECTIONS}
        key = str(value).lower().replace("_", "")
        if key not in aliases:
            raise ValueError(f"unknown Hamiltonian kind {value!r}; use 'onsite' or 'full'")
        return aliases[key]


@dataclass(frozen=True)
class ModelParams:
    """Static couplings plus schedules for eps = eps_R - eps_L and the tunneling rate."""

    n_particles: int
    u0: float = 0.0
    ut: float = 0.0
    utt: float = 0.0
    eps_schedule: Schedule = field(default_factory=lambda: Schedule.constant(0.0))
    omega_schedule: Schedule = field(default_factory=lambda: Schedule.constant(1.0))

    def __post_init__(self):
        if isinstance(self.n_particles, bool) or int(self.n_particles) != self.n_particles or self.n_particles < 1:
            raise ValueError(f"n_particles must be an integer >= 1, got {self.n_particles!r}")
        object.__setattr__(self, "n_particles", int(self.n_particles))
        for name in ("u0", "ut", "utt"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        for name in ("eps_schedule", "omega_schedule"):
            s = getattr(self, name)
            if not isinstance(s, Schedule):
                object.__setattr__(self, name, Schedule.from_dict(s))

    @property
    def is_time_independent(self) -> bool:
        return self.eps_schedule.is_constant and self.omega_schedule.is_constant

    def effective_omega(self, t: float) -> float:
        return self.omega_schedule(t) + self.ut * (self.n_particles - 1)

    def check_covers(self, t0: float, t1: float):
        for name in ("eps_schedule", "omega_schedule"):
            s = getattr(self, name)
            if not s.covers(t0, t1):
                raise ScheduleDomainError(
                    f"{name} ({s.kind}) domain [{s.t_min}, {s.t_max}] does not cover [{t0}, {t1}]")

    def replace(self, **changes) -> ModelParams:
        d = {k: getattr(self, k) for k in ("n_particles", "u0", "ut", "utt", "eps_schedule", "omega_schedule")}
        d.update(changes)
        return ModelParams(**d)

    def to_dict(self) -> dict:
        return {"n_particles": self.n_particles, "u0": self.u0, "ut": self.ut, "utt": self.utt,
                "eps": self.eps_schedule.to_dict(), "omega": self.omega_schedule.to_dict()}

    @classmethod
    def from_dict(cls, d: dict, base_dir: Path | None = None) -> ModelParams:
        return cls(n_particles=d["n_particles"], u0=d.get("u0", 0.0), ut=d.get("ut", 0.0), utt=d.get("utt", 0.0),
                   eps_schedule=Schedule.from_dict(d.get("eps", 0.0), base_dir),
                   omega_schedule=Schedule.from_dict(d.get("omega", 1.0), base_dir))


@lru_cache(maxsize=64)
def operators_for(n_particles: int) -> OperatorSet:
    return build_operators(n_particles)


def _check_ops(params: ModelParams, ops: OperatorSet):
    if ops.n_particles != params.n_particles:
        raise ValueError(f"operators built for N={ops.n_particles} but params have N={params.n_particles}")


def static_part(params: ModelParams, ops: OperatorSet, kind: HamiltonianKind) -> np.ndarray:
    """Time-independent interaction terms (everything except eps*Jz and the 2*Omega(t)*Jx term).

    For the full Hamiltonian the U_t shift 2*U_t*(N-1)*Jx is *not* included here;
    it is folded into the tunneling coefficient so that (Omega, U_t) and
    Omega' = Omega + U_t*(N-1) produce identical floats.
    """
    _check_ops(params, ops)
    kind = HamiltonianKind.parse(kind)
    jz2 = ops.jz @ ops.jz
    if kind is HamiltonianKind.ON_SITE_ONLY:
        return params.u0 * jz2
    return (params.u0 - 2 * params.utt) * jz2 + params.utt * (ops.jx @ ops.jx - ops.jy @ ops.jy)


def tunneling_coefficient(params: ModelParams, t: float, kind: HamiltonianKind) -> float:
    if HamiltonianKind.parse(kind) is HamiltonianKind.ON_SITE_ONLY:
        return params.omega_schedule(t)
    return params.effective_omega(t)


def hamiltonian_at(params: ModelParams, ops: OperatorSet, t: float, kind: HamiltonianKind) -> np.ndarray:
    """H(t) in the Dicke basis with identity terms dropped.

    onsite: U0 Jz^2 + eps Jz + 2 Omega Jx
    full:   (U0 - 2 Utt) Jz^2 + eps Jz + 2 (Omega + Ut (N-1)) Jx + Utt (Jx^2 - Jy^2)
    """
    params.check_covers(t, t)
    return HamiltonianBuilder(params, kind, ops)(t)


class HamiltonianBuilder:
    """Caches the static part so H(t) costs two scaled additions per call."""

    def __init__(self, params: ModelParams, kind: HamiltonianKind, ops: OperatorSet | None = None):
        self.params = params
        self.kind = HamiltonianKind.parse(kind)
        self.ops = ops if ops is not None else operators_for(params.n_particles)
        self.static = static_part(params, self.ops, self.kind)
        self._frozen = None
        if params.is_time_independent:
            # constant schedules ignore t, so evaluate once
            t_any = min(max(0.0, params.eps_schedule.t_min, params.omega_schedule.t_min),
                        params.eps_schedule.t_max, params.omega_schedule.t_max)
            self._frozen = self._assemble(t_any)
            self._frozen.setflags(write=False)

    @property
    def is_time_independent(self) -> bool:
        return self.params.is_time_independent

    def __call__(self, t: float) -> np.ndarray:
        if self._frozen is not None:
            return self._frozen
        return self._assemble(t)

    def _assemble(self, t: float) -> np.ndarray:
        eps = self.params.eps_schedule(t)
        omega = tunneling_coefficient(self.params, t, self.kind)
        return self.static + eps * self.ops.jz + (2 * omega) * self.ops.jx


# ---------------------------------------------------------------------------
# independent construction from boson operators


def _boson_ops(n_particles: int):
    """a_L, a_R on the two-mode Fock space truncated at N quanta per mode."""
    cut = n_particles + 1
    a = np.diag(np.sqrt(np.arange(1, cut, dtype=float)), 1).astype(complex)
    eye = np.eye(cut)
    return np.kron(a, eye), np.kron(eye, a)


def boson_hamiltonian(n_particles: int, eps_left: float, eps_right: float, omega: float,
                      u0: float, ut: float = 0.0, utt: float = 0.0) -> np.ndarray:
    """Two-mode Hamiltonian written with a_L, a_R, projected on n_L + n_R = N.

    All products are normal ordered, so the per-mode cutoff at N quanta is exact
    on the N-particle sector. Rows/columns follow the Dicke order: index k has
    n_R = k, n_L = N - k (m = k - N/2).
    """
    aL, aR = _boson_ops(n_particles)
    dL, dR = aL.conj().T, aR.conj().T
    h = (eps_left * dL @ aL + eps_right * dR @ aR
         + omega * (dL @ aR + dR @ aL)
         + u0 / 2 * (dL @ dL @ aL @ aL + dR @ dR @ aR @ aR)
         + ut * (dL @ dL @ aL @ aR + dL @ dR @ aL @ aL
                 + dR @ dR @ aR @ aL + dR @ dL @ aR @ aR)
         + utt / 2 * (dL @ dL @ aR @ aR + 2 * dL @ dR @ aR @ aL
                      + dR @ dR @ aL @ aL + 2 * dR @ dL @ aL @ aR))
    cut = n_particles + 1
    idx = [(n_particles - k) * cut + k for k in range(cut)]
    return h[np.ix_(idx, idx)]


def second_quantized_check(params: ModelParams, t: float, kind: HamiltonianKind = HamiltonianKind.FULL_CORRECTIONS,
                           energy_sum: float = 0.0) -> np.ndarray:
    """H(t) built from boson operators, eps_L/R = (E -/+ eps)/2.

    Differs from :func:`hamiltonian_at` by identity terms only.
    """
    kind = HamiltonianKind.parse(kind)
    eps = params.eps_schedule(t)
    omega = params.omega_schedule(t)
    full = kind is HamiltonianKind.FULL_CORRECTIONS
    return boson_hamiltonian(params.n_particles, (energy_sum - eps) / 2, (energy_sum + eps) / 2, omega,
                             params.u0, params.ut if full else 0.0, params.utt if full else 0.0)


def dropped_constant(params: ModelParams, kind: HamiltonianKind, energy_sum: float = 0.0) -> float:
    """Identity coefficient separating the boson form from hamiltonian_at."""
    n = params.n_particles
    c = energy_sum * n / 2 + params.u0 * (n * n / 4 - n / 2)
    if HamiltonianKind.parse(kind) is HamiltonianKind.FULL_CORRECTIONS:
        c += params.utt * n * n / 2
    return c


def traceless(a: np.ndarray) -> np.ndarray:
    return a - np.trace(a) / a.shape[0] * np.eye(a.shape[0])
