"""Time-ordered propagation of the Dicke-basis state and equation-of-motion checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .model import HamiltonianBuilder, HamiltonianKind, ModelParams, operators_for
from .operators import QuantumState, commutator, expectation

METHODS = ("rk4", "magnus4")

_GAUSS_OFFSET = math.sqrt(3) / 6


class NormDriftError(RuntimeError):
    """The propagated norm left the accepted band; the step is too large."""


class FiniteDifferenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class PropagationConfig:
    """Fixed-step settings.

    ``dt`` is the largest allowed step; the interval is split into
    ceil((t_end - t_start)/dt) equal steps. ``method`` is 'rk4' (classical
    Runge-Kutta on i dpsi/dt = H psi) or 'magnus4' (two-point Gauss-Legendre
    Magnus with exact exponentials, unitary by construction).
    """

    t_start: float = 0.0
    t_end: float = 1.0
    dt: float = 1e-3
    record_stride: int = 1
    norm_tolerance: float = 1e-9
    method: str = "rk4"

    def __post_init__(self):
        for name in ("t_start", "t_end", "dt", "norm_tolerance"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not self.t_end > self.t_start:
            raise ValueError(f"t_end ({self.t_end}) must exceed t_start ({self.t_start})")
        if not 0 < self.dt <= (self.t_end - self.t_start) * (1 + 1e-12):
            raise ValueError(f"dt must satisfy 0 < dt <= t_end - t_start, got {self.dt}")
        if isinstance(self.record_stride, bool) or int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ValueError("record_stride must be an integer >= 1")
        if not self.norm_tolerance > 0:
            raise ValueError("norm_tolerance must be positive")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")

    @property
    def n_steps(self) -> int:
        return max(1, math.ceil((self.t_end - self.t_start) / self.dt - 1e-9))

    @property
    def step(self) -> float:
        return (self.t_end - self.t_start) / self.n_steps

    def time(self, k: int) -> float:
        # indexes from whichever end is closer so t_end is hit exactly
        n = self.n_steps
        if k == n:
            return self.t_end
        return self.t_start + k * self.step

    def to_dict(self) -> dict:
        return {"t_start": self.t_start, "t_end": self.t_end, "dt": self.dt, "record_stride": self.record_stride,
                "norm_tolerance": self.norm_tolerance, "method": self.method}

    @classmethod
    def from_dict(cls, d: dict) -> PropagationConfig:
        unknown = set(d) - set(cls().to_dict())
        if unknown:
            raise ValueError(f"unknown propagation keys {sorted(unknown)}")
        return cls(**d)


@dataclass
class TrajectoryRecord:
    times: np.ndarray
    jx_mean: np.ndarray
    jy_mean: np.ndarray
    jz_mean: np.ndarray
    jz_variance: np.ndarray
    norm: np.ndarray
    energy: np.ndarray
    final_state: np.ndarray = field(repr=False, default=None)

    COLUMNS = ("t", "jx", "jy", "jz", "var_jz", "norm", "energy")

    def __len__(self):
        return len(self.times)

    def columns(self) -> dict:
        return dict(zip(self.COLUMNS, (self.times, self.jx_mean, self.jy_mean, self.jz_mean,
                                       self.jz_variance, self.norm, self.energy)))


def _rk4_step(h_of_t, psi, t, h):
    h0 = h_of_t(t)
    hm = h_of_t(t + h / 2)
    h1 = h_of_t(t + h)
    k1 = -1j * (h0 @ psi)
    k2 = -1j * (hm @ (psi + h / 2 * k1))
    k3 = -1j * (hm @ (psi + h / 2 * k2))
    k4 = -1j * (h1 @ (psi + h * k3))
    return psi + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _rk4_matrix(hmat: np.ndarray, h: float) -> np.ndarray:
    """One RK4 step for constant H is the degree-4 Taylor polynomial of exp(-i h H)."""
    a = -1j * h * hmat
    out = np.eye(hmat.shape[0], dtype=complex)
    term = out
    for k in range(1, 5):
        term = term @ a / k
        out = out + term
    return out


def _expm_hermitian(k: np.ndarray, h: float = 1.0) -> np.ndarray:
    """exp(-i h K) for Hermitian K."""
    w, v = scipy.linalg.eigh(k)
    return (v * np.exp(-1j * h * w)) @ v.conj().T


def _magnus4_propagator(h_of_t, t, h):
    h1 = h_of_t(t + (0.5 - _GAUSS_OFFSET) * h)
    h2 = h_of_t(t + (0.5 + _GAUSS_OFFSET) * h)
    # exp(-i K) with K = h/2 (H1 + H2) - i sqrt(3)/12 h^2 [H2, H1]
    k = h / 2 * (h1 + h2) - 1j * (math.sqrt(3) / 12 * h * h) * commutator(h2, h1)
    return _expm_hermitian((k + k.conj().T) / 2)


class Propagator:
    """Steps a state vector under H(t); reused by propagate() and the FD oracle."""

    def __init__(self, builder: HamiltonianBuilder, method: str = "rk4"):
        if method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        self.builder = builder
        self.method = method
        self._cached = None

    def step(self, psi: np.ndarray, t: float, h: float) -> np.ndarray:
        if self.method == "rk4":
            if self.builder.is_time_independent:
                return self._constant_step(h, _rk4_matrix) @ psi
            return _rk4_step(self.builder, psi, t, h)
        if self.builder.is_time_independent:
            return self._constant_step(h, _expm_hermitian) @ psi
        return _magnus4_propagator(self.builder, t, h) @ psi

    def _constant_step(self, h, make):
        if self._cached is None or self._cached[0] != h:
            self._cached = (h, make(self.builder(0.0), h))
        return self._cached[1]

    def evolve(self, psi: np.ndarray, t0: float, t1: float, n_steps: int) -> np.ndarray:
        h = (t1 - t0) / n_steps
        for k in range(n_steps):
            psi = self.step(psi, t0 + k * h, h)
        return psi


def _observables(psi, builder, t):
    ops = builder.ops
    norm = float(np.vdot(psi, psi).real)
    phi = psi / math.sqrt(norm)
    jz_psi = ops.jz @ phi
    jz = np.vdot(phi, jz_psi).real
    return (
        expectation(phi, ops.jx).real,
        expectation(phi, ops.jy).real,
        jz,
        np.vdot(jz_psi, jz_psi).real - jz * jz,
        math.sqrt(norm),
        expectation(phi, builder(t)).real,
    )


def propagate(state0: QuantumState, params: ModelParams, kind: HamiltonianKind,
              cfg: PropagationConfig) -> TrajectoryRecord:
    """Integrate i dpsi/dt = H(t) psi on [t_start, t_end] with fixed steps.

    The evolving vector is never renormalized; recorded observables use the
    renormalized state and the raw norm is reported. Raises NormDriftError as
    soon as |norm - 1| exceeds ``cfg.norm_tolerance``.
    """
    if state0.n_particles != params.n_particles:
        raise ValueError(f"state has N={state0.n_particles}, params have N={params.n_particles}")
    params.check_covers(cfg.t_start, cfg.t_end)
    builder = HamiltonianBuilder(params, kind, operators_for(params.n_particles))
    prop = Propagator(builder, cfg.method)

    psi = state0.amplitudes.copy()
    rows = [(cfg.t_start, *_observables(psi, builder, cfg.t_start))]
    n, h = cfg.n_steps, cfg.step
    for k in range(n):
        t = cfg.time(k)
        psi = prop.step(psi, t, cfg.time(k + 1) - t if k == n - 1 else h)
        norm = math.sqrt(np.vdot(psi, psi).real)
        if not abs(norm - 1) <= cfg.norm_tolerance:
            raise NormDriftError(
                f"norm drift {norm - 1:+.3e} exceeds tolerance {cfg.norm_tolerance:.1e} at t={cfg.time(k + 1):.6g} "
                f"(step {k + 1}/{n}, dt={h:.3e}, method={cfg.method}); reduce dt")
        if (k + 1) % cfg.record_stride == 0 or k == n - 1:
            rows.append((cfg.time(k + 1), *_observables(psi, builder, cfg.time(k + 1))))
    cols = np.array(rows).T
    return TrajectoryRecord(*cols, final_state=psi)


def exact_evolution(state0: QuantumState, params: ModelParams, kind: HamiltonianKind, times) -> np.ndarray:
    """Eigendecomposition evolution for time-independent H; rows are states at ``times``."""
    if not params.is_time_independent:
        raise ValueError("exact_evolution needs constant schedules")
    t0 = float(times[0])
    w, v = scipy.linalg.eigh(HamiltonianBuilder(params, kind)(t0))
    coeffs = v.conj().T @ state0.amplitudes
    phases = np.exp(-1j * np.outer(np.asarray(times) - t0, w))
    return (phases * coeffs) @ v.T


# ---------------------------------------------------------------------------
# equation-of-motion oracle


def ehrenfest_rates(state, params: ModelParams, kind: HamiltonianKind, t: float) -> np.ndarray:
    """d<J_alpha>/dt = i <[H, J_alpha]> for alpha = x, y, z."""
    builder = HamiltonianBuilder(params, kind)
    psi = state.amplitudes if isinstance(state, QuantumState) else np.asarray(state)
    h = builder(t)
    return np.array([(1j * expectation(psi, commutator(h, builder.ops.component(a)))).real for a in "xyz"])


def _spin_means(psi, ops):
    return np.array([expectation(psi, ops.component(a)).real for a in "xyz"])


def finite_difference_rates(state, params: ModelParams, kind: HamiltonianKind, t: float, dt: float,
                            substeps: int = 4) -> np.ndarray:
    """Central difference of <J_alpha> along the trajectory through ``state`` at time t."""
    builder = HamiltonianBuilder(params, kind)
    prop = Propagator(builder, "magnus4")
    psi = state.amplitudes if isinstance(state, QuantumState) else np.asarray(state, dtype=complex)
    fwd = prop.evolve(psi, t, t + dt, substeps)
    bwd = prop.evolve(psi, t, t - dt, substeps)
    return (_spin_means(fwd, builder.ops) - _spin_means(bwd, builder.ops)) / (2 * dt)


def eom_residual(state: QuantumState, params: ModelParams, kind: HamiltonianKind, t: float,
                 dt: float = 1e-3, richardson_tol: float = 1e-3) -> np.ndarray:
    """|Ehrenfest rate - finite-difference rate| per component.

    The central difference at dt is compared with the one at dt/2; if they
    disagree by more than ``richardson_tol`` (scaled by the rate magnitude)
    dt is too coarse and FiniteDifferenceError is raised.
    """
    params.check_covers(t - dt, t + dt)
    exact = ehrenfest_rates(state, params, kind, t)
    coarse = finite_difference_rates(state, params, kind, t, dt)
    fine = finite_difference_rates(state, params, kind, t, dt / 2)
    scale = max(1.0, float(np.max(np.abs(exact))))
    if np.max(np.abs(coarse - fine)) > richardson_tol * scale:
        raise FiniteDifferenceError(
            f"finite-difference step dt={dt:g} too large: Richardson disagreement "
            f"{np.max(np.abs(coarse - fine)):.3e}")
    return np.abs(exact - coarse)


def convergence_order(state: QuantumState, params: ModelParams, kind: HamiltonianKind, t: float,
                      dts) -> tuple[np.ndarray, float]:
    """Residual norms over ``dts`` and the least-squares slope of log(residual) vs log(dt)."""
    dts = np.asarray(dts, dtype=float)
    res = np.array([np.max(eom_residual(state, params, kind, t, dt, richardson_tol=np.inf)) for dt in dts])
    slope = np.polyfit(np.log(dts), np.log(res), 1)[0]
    return res, float(slope)


# ---------------------------------------------------------------------------
# the printed operator equations of motion


def printed_eom_operators(params: ModelParams, kind: HamiltonianKind, t: float) -> list[np.ndarray]:
    """Right-hand sides of the published matrix equations of motion as operators.

    Matrix entries that are themselves operators (the eps + 2 U Jz terms and
    the Jx inside the Jz row) multiply the angular-momentum vector from the left.
    """
    kind = HamiltonianKind.parse(kind)
    ops = operators_for(params.n_particles)
    jx, jy, jz, one = ops.jx, ops.jy, ops.jz, ops.identity
    eps = params.eps_schedule(t)
    if kind is HamiltonianKind.ON_SITE_ONLY:
        u, om = params.u0, params.omega_schedule(t)
        return [
            -1j * u * jx - (eps * one + 2 * u * jz) @ jy,
            (eps * one + 2 * u * jz) @ jx - 1j * u * jy - 2 * om * jz,
            2 * om * jy,
        ]
    u0, utt, om = params.u0, params.utt, params.effective_omega(t)
    return [
        -1j * (u0 - utt) * jx - (eps * one + 2 * (u0 - utt) * jz) @ jy,
        (eps * one + 2 * (u0 - 3 * utt) * jz) @ jx - 1j * (u0 - 3 * utt) * jy - 2 * om * jz,
        2 * (om * one + 2 * utt * jx) @ jy - 2j * utt * jz,
    ]


def printed_eom_discrepancy(params: ModelParams, kind: HamiltonianKind, t: float = 0.0) -> np.ndarray:
    """max |printed RHS - i[H, J_alpha]| per component, as matrices."""
    builder = HamiltonianBuilder(params, kind)
    h = builder(t)
    printed = printed_eom_operators(params, kind, t)
    return np.array([np.max(np.abs(p - 1j * commutator(h, builder.ops.component(a))))
                     for p, a in zip(printed, "xyz")])


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TransportMetrics:
    fidelity: float
    z_min: float
    z_max: float
    self_trapped: bool

    def to_dict(self) -> dict:
        return {"fidelity": self.fidelity, "z_min": self.z_min, "z_max": self.z_max,
                "self_trapped": self.self_trapped}


def transport_metrics(record: TrajectoryRecord, n_particles: int) -> TransportMetrics:
    """Transfer fidelity to |N/2, N/2>, extremes of <Jz>/(N/2), and a self-trapping flag.

    The flag is true iff the scaled <Jz> stays strictly on the side of zero
    it started on.
    """
    if len(record) == 0:
        raise ValueError("empty trajectory")
    z = np.asarray(record.jz_mean) / (n_particles / 2)
    fidelity = float("nan")
    if record.final_state is not None:
        psi = record.final_state
        fidelity = float(abs(psi[-1]) ** 2 / np.vdot(psi, psi).real)
    trapped = bool(np.all(z < 0)) if z[0] < 0 else bool(np.all(z > 0)) if z[0] > 0 else False
    return TransportMetrics(fidelity, float(z.min()), float(z.max()), trapped)
