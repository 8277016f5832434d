"""Dicke basis and Schwinger angular-momentum matrices for two bosonic modes.

Basis states |j, m> with j = N/2 are ordered by ascending m, so index 0 is
m = -N/2, i.e. every particle in the left well (Jz = (N_R - N_L)/2).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class DickeBasis:
    n_particles: int
    j: float = field(init=False)
    m_values: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if int(self.n_particles) != self.n_particles or self.n_particles < 1:
            raise ValueError(f"n_particles must be an integer >= 1, got {self.n_particles!r}")
        object.__setattr__(self, "j", self.n_particles / 2)
        m = np.arange(self.n_particles + 1, dtype=float) - self.n_particles / 2
        m.setflags(write=False)
        object.__setattr__(self, "m_values", m)

    @property
    def dim(self) -> int:
        return self.n_particles + 1

    def index(self, m: float) -> int:
        k = m + self.j
        if k != int(k) or not 0 <= k <= self.n_particles:
            raise ValueError(f"m={m} is not in the basis for j={self.j}")
        return int(k)


@dataclass(frozen=True)
class OperatorSet:
    basis: DickeBasis
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray
    jplus: np.ndarray
    jminus: np.ndarray

    @property
    def n_particles(self) -> int:
        return self.basis.n_particles

    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex)

    def component(self, axis: str) -> np.ndarray:
        return {"x": self.jx, "y": self.jy, "z": self.jz}[axis]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def build_operators(n_particles: int) -> OperatorSet:
    """Dense Jx, Jy, Jz, J+, J- on the (N+1)-dimensional Dicke basis."""
    basis = DickeBasis(n_particles)
    j, m = basis.j, basis.m_values
    dim = basis.dim
    # <j, m+1| J+ |j, m> sits one row below the diagonal in ascending-m order
    ladder = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))
    jplus = np.zeros((dim, dim), dtype=complex)
    jplus[np.arange(1, dim), np.arange(dim - 1)] = ladder
    jminus = jplus.conj().T.copy()
    jx = (jplus + jminus) / 2
    jy = (jplus - jminus) / 2j
    jz = np.diag(m).astype(complex)
    return OperatorSet(basis, *(_frozen(a) for a in (jx, jy, jz, jplus, jminus)))


@dataclass(frozen=True)
class QuantumState:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).copy()
        if amps.ndim != 1 or amps.size < 2:
            raise ValueError("amplitudes must be a 1-D vector of length N+1 >= 2")
        norm = np.vdot(amps, amps).real
        if abs(norm - 1) > 1e-12:
            raise ValueError(f"state is not normalized: <psi|psi> = {norm!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_particles(self) -> int:
        return self.amplitudes.size - 1

    @classmethod
    def normalized(cls, amplitudes) -> QuantumState:
        amps = np.asarray(amplitudes, dtype=complex)
        return cls(amps / np.linalg.norm(amps))


def dicke_state(n_particles: int, m: float) -> QuantumState:
    basis = DickeBasis(n_particles)
    amps = np.zeros(basis.dim, dtype=complex)
    amps[basis.index(m)] = 1
    return QuantumState(amps)


def left_well_state(n_particles: int) -> QuantumState:
    """All particles in the left well: |N/2, -N/2>."""
    return dicke_state(n_particles, -n_particles / 2)


def right_well_state(n_particles: int) -> QuantumState:
    return dicke_state(n_particles, n_particles / 2)


def expectation(state, operator: np.ndarray) -> complex:
    """<psi|A|psi> for a QuantumState or a raw amplitude vector (not renormalized)."""
    psi = state.amplitudes if isinstance(state, QuantumState) else np.asarray(state)
    operator = np.asarray(operator)
    if operator.shape != (psi.size, psi.size):
        raise ValueError(f"operator shape {operator.shape} does not match state dimension {psi.size}")
    return complex(np.vdot(psi, operator @ psi))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a
