"""Localized two-mode basis and overlap integrals for a 1-D double well.

Units: hbar = 1; the single-particle Hamiltonian is -(1/2m) d^2/dx^2 + V(x),
discretized with the 3-point stencil and Dirichlet walls at x_min, x_max.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg
from scipy.integrate import trapezoid

POTENTIAL_KINDS = ("quartic", "double-gaussian", "tabulated")


class TwoModeError(ValueError):
    """The potential does not support a two-mode description."""


class GridTooCoarseError(RuntimeError):
    pass


class TwoModeValidityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Potential:
    """V(x) description.

    quartic          beta * (x^2 - a^2)^2
    double-gaussian  -depth * (exp(-(x - d)^2 / 2 s^2) + exp(-(x + d)^2 / 2 s^2)),
                     params depth, separation (= 2 d), width (= s)
    tabulated        linear interpolation of (x, V) samples; ``path`` or inline x/v
    """

    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in POTENTIAL_KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}; expected one of {POTENTIAL_KINDS}")

    @classmethod
    def quartic(cls, beta: float, a: float) -> Potential:
        return cls("quartic", (("beta", float(beta)), ("a", float(a))))

    @classmethod
    def double_gaussian(cls, depth: float, separation: float, width: float) -> Potential:
        return cls("double-gaussian", (("depth", float(depth)), ("separation", float(separation)),
                                       ("width", float(width))))

    @classmethod
    def tabulated(cls, x, v) -> Potential:
        x = tuple(map(float, x))
        v = tuple(map(float, v))
        if len(x) != len(v) or len(x) < 2 or np.any(np.diff(x) <= 0):
            raise ValueError("tabulated potential needs matching, strictly increasing samples")
        return cls("tabulated", (("x", x), ("v", v)))

    @classmethod
    def from_file(cls, path) -> Potential:
        data = np.loadtxt(path, ndmin=2)
        if data.shape[1] != 2:
            raise ValueError(f"{path}: expected two columns (x, V), got {data.shape[1]}")
        return cls.tabulated(data[:, 0], data[:, 1])

    @property
    def is_symmetric(self) -> bool:
        if self.kind != "tabulated":
            return True
        p = dict(self.params)
        x, v = np.array(p["x"]), np.array(p["v"])
        return bool(np.allclose(x, -x[::-1], rtol=0, atol=1e-12) and np.allclose(v, v[::-1], rtol=0, atol=1e-12))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        p = dict(self.params)
        x = np.asarray(x, dtype=float)
        if self.kind == "quartic":
            return p["beta"] * (x * x - p["a"] ** 2) ** 2
        if self.kind == "double-gaussian":
            d, s = p["separation"] / 2, p["width"]
            return -p["depth"] * (np.exp(-((x - d) ** 2) / (2 * s * s)) + np.exp(-((x + d) ** 2) / (2 * s * s)))
        tx, tv = np.array(p["x"]), np.array(p["v"])
        if x.min() < tx[0] - 1e-12 or x.max() > tx[-1] + 1e-12:
            raise ValueError(f"grid [{x.min()}, {x.max()}] exceeds tabulated range [{tx[0]}, {tx[-1]}]")
        return np.interp(x, tx, tv)

    def to_dict(self) -> dict:
        return {"kind": self.kind, **{k: list(v) if isinstance(v, tuple) else v for k, v in self.params}}

    @classmethod
    def from_dict(cls, d: dict, base_dir: Path | None = None) -> Potential:
        d = dict(d)
        kind = d.pop("kind", None)
        if kind == "quartic":
            return cls.quartic(d.pop("beta"), d.pop("a")) if not d.keys() - {"beta", "a"} else _extra(kind, d)
        if kind == "double-gaussian":
            keys = {"depth", "separation", "width"}
            if d.keys() != keys:
                raise ValueError(f"double-gaussian potential needs exactly {sorted(keys)}")
            return cls.double_gaussian(d["depth"], d["separation"], d["width"])
        if kind == "tabulated":
            if "path" in d:
                path = Path(d["path"])
                if base_dir is not None and not path.is_absolute():
                    path = base_dir / path
                return cls.from_file(path)
            return cls.tabulated(d["x"], d["v"])
        raise ValueError(f"unknown potential kind {kind!r}")


def _extra(kind, d):
    raise ValueError(f"{kind} potential has unknown keys {sorted(d)}")


@dataclass(frozen=True)
class WellSpec:
    potential: Potential
    x_min: float = -4.0
    x_max: float = 4.0
    n_points: int = 2001
    mass: float = 1.0
    g_1d: float = 1.0

    def __post_init__(self):
        if not isinstance(self.potential, Potential):
            raise TypeError("potential must be a Potential")
        if int(self.n_points) != self.n_points or self.n_points < 128:
            raise ValueError(f"n_points must be an integer >= 128, got {self.n_points}")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        if not math.isfinite(self.g_1d):
            raise ValueError("g_1d must be finite")
        v = self.potential(self.grid)
        if not np.all(np.isfinite(v)):
            raise ValueError("potential is not finite on the grid")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, int(self.n_points))

    @property
    def is_mirror_symmetric(self) -> bool:
        return bool(np.isclose(self.x_min, -self.x_max, rtol=0, atol=1e-12) and self.potential.is_symmetric)

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    def refined(self) -> WellSpec:
        """Same box with the grid spacing halved."""
        return WellSpec(self.potential, self.x_min, self.x_max, 2 * int(self.n_points) - 1, self.mass, self.g_1d)

    def to_dict(self) -> dict:
        return {"potential": self.potential.to_dict(),
                "grid": {"x_min": self.x_min, "x_max": self.x_max, "n_points": int(self.n_points)},
                "mass": self.mass, "g_1d": self.g_1d}

    @classmethod
    def from_dict(cls, d: dict, base_dir: Path | None = None) -> WellSpec:
        unknown = set(d) - {"potential", "grid", "mass", "g_1d"}
        if unknown:
            raise ValueError(f"unknown wells keys {sorted(unknown)}")
        grid = d.get("grid", {})
        return cls(Potential.from_dict(d["potential"], base_dir), float(grid.get("x_min", -4.0)),
                   float(grid.get("x_max", 4.0)), grid.get("n_points", 2001), float(d.get("mass", 1.0)),
                   float(d.get("g_1d", 1.0)))


@dataclass(frozen=True)
class ModeFunctions:
    x: np.ndarray = field(repr=False)
    phi_left: np.ndarray = field(repr=False)
    phi_right: np.ndarray = field(repr=False)
    e_sym: float
    e_asym: float
    e_third: float
    barrier: float


def _kinetic_coeff(spec: WellSpec) -> float:
    return 1 / (2 * spec.mass * spec.spacing ** 2)


def apply_h0(spec: WellSpec, phi: np.ndarray) -> np.ndarray:
    """3-point finite-difference H0 acting on phi (zero outside the box)."""
    c = _kinetic_coeff(spec)
    v = spec.potential(spec.grid)
    padded = np.concatenate(([0.0], phi, [0.0]))
    return c * (2 * phi - padded[:-2] - padded[2:]) + v * phi


def _barrier_top(x: np.ndarray, v: np.ndarray) -> float:
    interior = np.flatnonzero((v[1:-1] < v[:-2]) & (v[1:-1] <= v[2:])) + 1
    if interior.size < 2:
        raise TwoModeError("potential has fewer than two local minima on the grid; not a double well")
    lo, hi = np.sort(interior[np.argsort(v[interior])[:2]])
    return float(v[lo:hi + 1].max())


def _lowest_three(spec: WellSpec):
    x = spec.grid
    v = spec.potential(x)
    c = _kinetic_coeff(spec)
    # Dirichlet walls: unknowns live on the interior points only
    diag = 2 * c + v[1:-1]
    off = np.full(diag.size - 1, -c)
    vals, vecs = scipy.linalg.eigh_tridiagonal(diag, off, select="i", select_range=(0, 2))
    full = np.zeros((x.size, 3))
    full[1:-1] = vecs
    return x, v, vals, full


def solve_modes(spec: WellSpec, refine_tol: float | None = None, overlap_warn: float = 0.2) -> ModeFunctions:
    """Lowest symmetric/antisymmetric pair and the localized combinations.

    phi_L = (phi_s - phi_a)/sqrt(2) sits at x < 0 and phi_R = (phi_s + phi_a)/sqrt(2)
    at x > 0, with phi_s chosen positive. Without mirror symmetry the pair is
    instead rotated to diagonalize x within the doublet (same result when symmetric). If ``refine_tol`` is given the lowest two
    eigenvalues are recomputed on a grid with half the spacing and GridTooCoarseError
    is raised when either moves by more than refine_tol * max(1, |E|).
    """
    x, v, vals, vecs = _lowest_three(spec)
    barrier = _barrier_top(x, v)
    if vals[1] >= barrier:
        raise TwoModeError(f"second level {vals[1]:.6g} is not below the barrier top {barrier:.6g}")
    if refine_tol is not None:
        fine = _lowest_three(spec.refined())[2]
        change = np.abs(fine[:2] - vals[:2])
        if np.any(change > refine_tol * np.maximum(1.0, np.abs(vals[:2]))):
            raise GridTooCoarseError(f"lowest eigenvalues moved by {change.max():.3e} under grid refinement; "
                                     f"increase n_points (currently {spec.n_points})")

    sym, asym = vecs[:, 0], vecs[:, 1]
    if spec.is_mirror_symmetric:
        # the near-degenerate pair mixes at the solver's rounding level; project it
        # back onto exact parity sectors
        sym = (sym + sym[::-1]) / 2
        asym = (asym - asym[::-1]) / 2
    sym = sym / math.sqrt(trapezoid(sym ** 2, x))
    asym = asym / math.sqrt(trapezoid(asym ** 2, x))
    if trapezoid(sym, x) < 0:
        sym = -sym
    if trapezoid(x * sym * asym, x) < 0:
        asym = -asym
    if spec.is_mirror_symmetric:
        left = (sym - asym) / math.sqrt(2)
        right = (sym + asym) / math.sqrt(2)
    else:
        # maximally localized pair: eigenvectors of x restricted to the doublet
        xs = np.array([[trapezoid(x * sym * sym, x), trapezoid(x * sym * asym, x)],
                       [trapezoid(x * sym * asym, x), trapezoid(x * asym * asym, x)]])
        _, rot = np.linalg.eigh(xs)
        left, right = (rot[0, k] * sym + rot[1, k] * asym for k in (0, 1))
        left = left if trapezoid(left, x) > 0 else -left
        right = right if trapezoid(right, x) > 0 else -right

    overlap = trapezoid(np.abs(left * right), x)
    if overlap > overlap_warn:
        warnings.warn(f"localized modes overlap strongly (int |phi_L phi_R| = {overlap:.3g}); "
                      f"two-mode description is questionable", TwoModeValidityWarning, stacklevel=2)
    for a in (x, left, right):
        a.setflags(write=False)
    return ModeFunctions(x, left, right, float(vals[0]), float(vals[1]), float(vals[2]), barrier)


@dataclass(frozen=True)
class WellParameters:
    eps_left: float
    eps_right: float
    omega: float
    omega_reverse: float
    u0: float
    u0_right: float
    ut: float
    ut_right: float
    utt: float
    e_sym: float
    e_asym: float
    validity: dict

    @property
    def eps(self) -> float:
        """eps_R - eps_L."""
        return self.eps_right - self.eps_left

    def to_dict(self) -> dict:
        return {"eps_left": self.eps_left, "eps_right": self.eps_right, "eps": self.eps, "omega": self.omega,
                "omega_reverse": self.omega_reverse, "u0": self.u0, "u0_right": self.u0_right, "ut": self.ut,
                "ut_right": self.ut_right, "utt": self.utt, "e_sym": self.e_sym, "e_asym": self.e_asym,
                "validity": dict(self.validity)}


def compute_parameters(modes: ModeFunctions, spec: WellSpec) -> WellParameters:
    """Single-particle and interaction overlap integrals by composite trapezoid quadrature."""
    x, pl, pr = modes.x, modes.phi_left, modes.phi_right
    for name, phi in (("phi_left", pl), ("phi_right", pr)):
        nrm = trapezoid(phi * phi, x)
        if abs(nrm - 1) > 1e-8:
            raise ValueError(f"{name} not normalized (norm {nrm:.12g})")
    h_l, h_r = apply_h0(spec, pl), apply_h0(spec, pr)
    g = spec.g_1d
    lr = pl * pr
    u0 = g * trapezoid(pl ** 4, x)
    ut = g * trapezoid(pl * pl * lr, x)
    utt = g * trapezoid(lr * lr, x)
    omega = trapezoid(pl * h_r, x)
    eps_l, eps_r = trapezoid(pl * h_l, x), trapezoid(pr * h_r, x)
    validity = {
        "omega_over_gap": abs(omega) / (modes.e_third - (modes.e_sym + modes.e_asym) / 2),
        "ut_over_u0": ut / u0 if u0 else 0.0,
        "utt_over_u0": utt / u0 if u0 else 0.0,
        "density_overlap": trapezoid(np.abs(lr), x),
        "e_asym_below_barrier": modes.barrier - modes.e_asym,
    }
    return WellParameters(
        eps_left=eps_l, eps_right=eps_r, omega=omega, omega_reverse=trapezoid(pr * h_l, x),
        u0=u0, u0_right=g * trapezoid(pr ** 4, x), ut=ut, ut_right=g * trapezoid(pr * pr * lr, x), utt=utt,
        e_sym=modes.e_sym, e_asym=modes.e_asym, validity=validity)


def extract_parameters(spec: WellSpec, refine_tol: float | None = None) -> WellParameters:
    return compute_parameters(solve_modes(spec, refine_tol=refine_tol), spec)
