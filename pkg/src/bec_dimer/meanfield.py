"""Classical two-mode dynamics: Bloch vector and GP amplitudes.

Scaled correspondence with the quantum model: (u, v, w) ~ 2<J>/N with
Jz = (N_R - N_L)/2, so w = |c_R|^2 - |c_L|^2, u = 2 Re(c_L* c_R),
v = 2 Im(c_R* c_L).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import NormDriftError, PropagationConfig, TrajectoryRecord
from .model import ModelParams


@dataclass(frozen=True)
class BlochVector:
    u: float
    v: float
    w: float

    @property
    def norm(self) -> float:
        return math.sqrt(self.u ** 2 + self.v ** 2 + self.w ** 2)

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v, self.w])

    @classmethod
    def left_well(cls) -> BlochVector:
        return cls(0.0, 0.0, -1.0)


@dataclass(frozen=True)
class GPAmplitudes:
    c_left: complex
    c_right: complex

    @property
    def norm(self) -> float:
        return math.sqrt(abs(self.c_left) ** 2 + abs(self.c_right) ** 2)

    def to_bloch(self) -> BlochVector:
        cross = self.c_left.conjugate() * self.c_right
        return BlochVector(2 * cross.real, -2 * cross.imag, abs(self.c_right) ** 2 - abs(self.c_left) ** 2)

    @classmethod
    def left_well(cls) -> GPAmplitudes:
        return cls(1 + 0j, 0j)


def bloch_rhs(b, eps: float, omega_rabi: float, u_nl: float, u_tt_nl: float = 0.0):
    """Time derivative of (u, v, w).

    du/dt = -(eps + U w) v,  dv/dt = (eps + U w) u - 2 Omega w,  dw/dt = 2 Omega v,
    with ``omega_rabi`` the tunneling rate. ``u_tt_nl`` (= N U_tt) adds the
    classical image of U_tt (Jx^2 - Jy^2); it is zero for the plain equations.
    """
    u, v, w = (b.u, b.v, b.w) if isinstance(b, BlochVector) else b
    detuning = eps + u_nl * w
    du = -detuning * v
    dv = detuning * u - 2 * omega_rabi * w
    dw = 2 * omega_rabi * v
    if u_tt_nl:
        du -= u_tt_nl * v * w
        dv -= u_tt_nl * u * w
        dw += 2 * u_tt_nl * u * v
    if isinstance(b, BlochVector):
        return BlochVector(du, dv, dw)
    return (du, dv, dw)


def gp_rhs(c, eps_l: float, eps_r: float, u_l: float, u_r: float, omega_rabi: float):
    """dc/dt from i dc_L/dt = (eps_L + U_L |c_L|^2) c_L + Omega c_R (and L <-> R)."""
    cl, cr = (c.c_left, c.c_right) if isinstance(c, GPAmplitudes) else c
    dl = -1j * ((eps_l + u_l * abs(cl) ** 2) * cl + omega_rabi * cr)
    dr = -1j * ((eps_r + u_r * abs(cr) ** 2) * cr + omega_rabi * cl)
    if isinstance(c, GPAmplitudes):
        return GPAmplitudes(dl, dr)
    return (dl, dr)


@dataclass
class ClassicalTrajectory:
    times: np.ndarray
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    norm: np.ndarray
    # GP form only
    pop_left: np.ndarray | None = None
    pop_right: np.ndarray | None = None
    phase: np.ndarray | None = None
    form: str = "bloch"

    COLUMNS = ("t", "u", "v", "w", "norm")

    def __len__(self):
        return len(self.times)

    def columns(self) -> dict:
        return dict(zip(self.COLUMNS, (self.times, self.u, self.v, self.w, self.norm)))


def _rk4(f, y, t, h):
    k1 = f(t, y)
    k2 = f(t + h / 2, tuple(a + h / 2 * b for a, b in zip(y, k1)))
    k3 = f(t + h / 2, tuple(a + h / 2 * b for a, b in zip(y, k2)))
    k4 = f(t + h, tuple(a + h * b for a, b in zip(y, k3)))
    return tuple(a + h / 6 * (b1 + 2 * b2 + 2 * b3 + b4) for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4))


def integrate_meanfield(initial, params: ModelParams, cfg: PropagationConfig, u_nl: float | None = None,
                        include_corrections: bool = True) -> ClassicalTrajectory:
    """Fixed-step RK4 for a BlochVector or GPAmplitudes initial condition.

    Nonlinearity defaults to U = N U0. With ``include_corrections`` the tunneling
    rate is shifted to Omega + U_t (N - 1) and, for the Bloch form, U_tt enters
    as U -> N (U0 - 2 U_tt) plus the N U_tt (u^2 - v^2) term; the GP form
    carries no U_tt term and rejects U_tt != 0.
    """
    params.check_covers(cfg.t_start, cfg.t_end)
    n = params.n_particles
    ut = params.ut if include_corrections else 0.0
    utt = params.utt if include_corrections else 0.0
    u_onsite = n * params.u0 if u_nl is None else float(u_nl)
    shift = ut * (n - 1)
    eps_of, omega_of = params.eps_schedule, params.omega_schedule

    if isinstance(initial, BlochVector):
        y = (initial.u, initial.v, initial.w)
        u_eff, u_tt_nl = u_onsite - 2 * n * utt, n * utt

        def f(t, y):
            return bloch_rhs(y, eps_of(t), omega_of(t) + shift, u_eff, u_tt_nl)

        def norm_of(y):
            return math.sqrt(y[0] ** 2 + y[1] ** 2 + y[2] ** 2)

        def bloch_of(y):
            return y
    elif isinstance(initial, GPAmplitudes):
        if utt:
            raise ValueError("the GP amplitude form has no U_tt term; use a BlochVector initial condition")
        y = (complex(initial.c_left), complex(initial.c_right))

        def f(t, y):
            e = eps_of(t)
            return gp_rhs(y, -e / 2, e / 2, u_onsite, u_onsite, omega_of(t) + shift)

        def norm_of(y):
            return math.sqrt(abs(y[0]) ** 2 + abs(y[1]) ** 2)

        def bloch_of(y):
            return GPAmplitudes(*y).to_bloch().as_array()
    else:
        raise TypeError(f"initial must be BlochVector or GPAmplitudes, got {type(initial).__name__}")

    if abs(norm_of(y) - 1) > 1e-12:
        raise ValueError(f"initial condition not normalized (norm {norm_of(y)!r})")

    rows, states = [], []

    def record(t, y):
        rows.append((t, *bloch_of(y), norm_of(y)))
        states.append(y)

    record(cfg.t_start, y)
    nsteps, h = cfg.n_steps, cfg.step
    for k in range(nsteps):
        t = cfg.time(k)
        y = _rk4(f, y, t, cfg.time(k + 1) - t)
        nrm = norm_of(y)
        if not abs(nrm - 1) <= cfg.norm_tolerance:
            raise NormDriftError(
                f"mean-field norm drift {nrm - 1:+.3e} exceeds {cfg.norm_tolerance:.1e} at t={cfg.time(k + 1):.6g} "
                f"(dt={h:.3e}); reduce dt")
        if (k + 1) % cfg.record_stride == 0 or k == nsteps - 1:
            record(cfg.time(k + 1), y)

    cols = np.array(rows, dtype=float).T
    traj = ClassicalTrajectory(*cols)
    if isinstance(initial, GPAmplitudes):
        amps = np.array(states)
        traj.form = "gp"
        traj.pop_left = np.abs(amps[:, 0]) ** 2
        traj.pop_right = np.abs(amps[:, 1]) ** 2
        traj.phase = np.array([cmath.phase(cr * cl.conjugate()) for cl, cr in amps])
    return traj


def self_trapped(w: np.ndarray) -> bool:
    """True iff w never reaches zero from the side it started on."""
    w = np.asarray(w)
    if w[0] < 0:
        return bool(np.all(w < 0))
    if w[0] > 0:
        return bool(np.all(w > 0))
    return False


def lambda_ratio(params: ModelParams, t: float = 0.0) -> float:
    """N U0 / (2 |Omega|)."""
    return params.n_particles * params.u0 / (2 * abs(params.omega_schedule(t)))


@dataclass
class DeviationSeries:
    times: np.ndarray
    dev_x: np.ndarray
    dev_y: np.ndarray
    dev_z: np.ndarray
    max_deviation: float = field(init=False)
    mean_deviation: float = field(init=False)

    COLUMNS = ("t", "dev_x", "dev_y", "dev_z")

    def __post_init__(self):
        stacked = np.vstack([self.dev_x, self.dev_y, self.dev_z])
        self.max_deviation = float(stacked.max())
        self.mean_deviation = float(stacked.mean())

    def columns(self) -> dict:
        return dict(zip(self.COLUMNS, (self.times, self.dev_x, self.dev_y, self.dev_z)))

    def summary(self) -> dict:
        per_axis = {f"max_dev_{a}": float(np.max(d)) for a, d in zip("xyz", (self.dev_x, self.dev_y, self.dev_z))}
        return {"max_deviation": self.max_deviation, "mean_deviation": self.mean_deviation, **per_axis}


def compare_quantum_classical(quantum: TrajectoryRecord, classical: ClassicalTrajectory,
                              n_particles: int) -> DeviationSeries:
    """|2<J_alpha>/N - classical_alpha| on the quantum time grid.

    The classical series is linearly interpolated when the grids differ;
    quantum samples outside the classical time range are dropped.
    """
    qt = np.asarray(quantum.times)
    ct = np.asarray(classical.times)
    if qt.size == 0 or ct.size == 0:
        raise ValueError("empty trajectory")
    span = 1e-12 * max(1.0, abs(ct[-1]))
    keep = (qt >= ct[0] - span) & (qt <= ct[-1] + span)
    if not keep.any():
        raise ValueError(f"time ranges do not overlap: quantum [{qt[0]}, {qt[-1]}], classical [{ct[0]}, {ct[-1]}]")
    times = qt[keep]
    same_grid = ct.shape == qt.shape and np.array_equal(ct, qt)
    scale = 2 / n_particles
    devs = []
    for qcol, ccol in ((quantum.jx_mean, classical.u), (quantum.jy_mean, classical.v), (quantum.jz_mean, classical.w)):
        c = np.asarray(ccol) if same_grid else np.interp(times, ct, ccol)
        devs.append(np.abs(scale * np.asarray(qcol)[keep] - c))
    return DeviationSeries(times, *devs)
