"""Built-in oracle suites; every check reports value, tolerance and pass/fail."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .dynamics import (PropagationConfig, convergence_order, exact_evolution, printed_eom_discrepancy, propagate)
from .model import HamiltonianKind, ModelParams, Schedule, hamiltonian_at, operators_for, second_quantized_check, traceless
from .operators import QuantumState, commutator, left_well_state


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    value: float
    tolerance: float
    kind: str = "max"  # 'max': value < tolerance; 'min': value >= tolerance

    @property
    def passed(self) -> bool:
        if self.kind == "min":
            return bool(self.value >= self.tolerance)
        return bool(self.value < self.tolerance)

    def line(self) -> str:
        op = ">=" if self.kind == "min" else "<"
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.suite}/{self.name}: {self.value:.3e} {op} {self.tolerance:.1e}"


def couplings(n_sets: int, dim: int = 5, scale: float = 1.0) -> np.ndarray:
    """Deterministic low-discrepancy coupling sets in [-scale, scale]^dim (no RNG)."""
    pts = qmc.Halton(d=dim, scramble=False).random(n_sets + 1)[1:]
    return scale * (2 * pts - 1)


def _params(n, row) -> ModelParams:
    u0, ut, utt, eps, omega = row
    return ModelParams(n, u0, ut, utt, Schedule.constant(eps), Schedule.constant(omega))


def commutator_suite(n_max: int) -> list[Check]:
    worst_comm = worst_cas = worst_herm = 0.0
    for n in range(1, n_max + 1):
        ops = operators_for(n)
        j = n / 2
        for a, b, c in ((ops.jx, ops.jy, ops.jz), (ops.jy, ops.jz, ops.jx), (ops.jz, ops.jx, ops.jy)):
            worst_comm = max(worst_comm, np.max(np.abs(commutator(a, b) - 1j * c)))
        cas = ops.jx @ ops.jx + ops.jy @ ops.jy + ops.jz @ ops.jz - j * (j + 1) * np.eye(n + 1)
        worst_cas = max(worst_cas, np.max(np.abs(cas)))
        worst_herm = max(worst_herm, np.max(np.abs(ops.jplus - ops.jminus.conj().T)))
    return [Check("operators", f"[Ja,Jb]=iJc N<={n_max}", worst_comm, 1e-12),
            Check("operators", f"casimir N<={n_max}", worst_cas, 1e-10),
            Check("operators", f"J+=adj(J-) N<={n_max}", worst_herm, 1e-15)]


def reduction_suite(n_max: int, n_sets: int = 20) -> list[Check]:
    worst_red = worst_shift = 0.0
    for n in range(1, n_max + 1):
        ops = operators_for(n)
        for row in couplings(n_sets):
            p = _params(n, row)
            bare = p.replace(ut=0.0, utt=0.0)
            worst_red = max(worst_red, np.max(np.abs(hamiltonian_at(bare, ops, 0.0, "full")
                                                     - hamiltonian_at(bare, ops, 0.0, "onsite"))))
            shifted = p.replace(ut=0.0, omega_schedule=Schedule.constant(p.effective_omega(0.0)))
            worst_shift = max(worst_shift, np.max(np.abs(hamiltonian_at(p, ops, 0.0, "full")
                                                         - hamiltonian_at(shifted, ops, 0.0, "full"))))
    return [Check("hamiltonian", "full(Ut=Utt=0)=onsite", worst_red, 1e-14),
            Check("hamiltonian", "Ut shift Omega+Ut(N-1)", worst_shift, 1e-14)]


def second_quantized_suite(n_max: int, n_sets: int = 100) -> list[Check]:
    worst = 0.0
    for n in range(1, n_max + 1):
        ops = operators_for(n)
        for row in couplings(n_sets):
            p = _params(n, row)
            for kind in HamiltonianKind:
                diff = traceless(second_quantized_check(p, 0.0, kind)) - traceless(hamiltonian_at(p, ops, 0.0, kind))
                worst = max(worst, np.max(np.abs(diff)))
    return [Check("hamiltonian", f"boson form = Schwinger form N<={n_max} ({n_sets} sets)", worst, 1e-10)]


def _probe_state(n: int) -> QuantumState:
    re, im = couplings(1, dim=2 * (n + 1))[0].reshape(2, -1) + 0.1
    return QuantumState.normalized(re + 1j * im)


def ehrenfest_suite(n_particles: int) -> list[Check]:
    p = _params(n_particles, couplings(1)[0] * 0.5)
    state = _probe_state(n_particles)
    checks = []
    for kind in HamiltonianKind:
        res, order = convergence_order(state, p, kind, 0.0, [0.08, 0.04, 0.02, 0.01])
        checks.append(Check("ehrenfest", f"order {kind.value} N={n_particles}", order, 1.9, "min"))
        checks.append(Check("ehrenfest", f"printed EOM {kind.value} N={n_particles}",
                            float(np.max(printed_eom_discrepancy(p, kind))), 1e-10))
    return checks


def propagator_suite(n_particles: int) -> list[Check]:
    p = _params(n_particles, couplings(1)[0] * 0.2).replace(omega_schedule=Schedule.constant(1.0))
    t_end = np.pi
    state = left_well_state(n_particles)
    lam = np.max(np.abs(np.linalg.eigvalsh(hamiltonian_at(p, operators_for(n_particles), 0.0, "full"))))
    rec = propagate(state, p, "full", PropagationConfig(0.0, t_end, 0.01 / max(lam, 1.0), record_stride=10 ** 9))
    exact = exact_evolution(state, p, "full", [0.0, t_end])[-1]
    return [Check("propagator", f"rk4 vs exact N={n_particles}", float(np.linalg.norm(rec.final_state - exact)), 1e-8),
            Check("propagator", f"norm drift N={n_particles}", float(np.max(np.abs(rec.norm - 1))), 1e-9),
            Check("propagator", f"energy drift N={n_particles}",
                  float(np.ptp(rec.energy) / max(abs(rec.energy[0]), 1e-300)), 1e-8)]


def run_all(n_particles: int) -> list[Check]:
    checks = []
    checks += commutator_suite(n_particles)
    checks += reduction_suite(n_particles)
    checks += second_quantized_suite(n_particles)
    checks += ehrenfest_suite(n_particles)
    checks += propagator_suite(n_particles)
    return checks
