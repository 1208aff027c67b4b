"""Analytic potential families and their closed-form spectra.

Dimensionless families (``harmonic``, ``isotonic``, ``darboux``) live in the
units of ``-1/2 d^2/dxi^2 + U``. The truncated harmonic well is physical:
positions in nm, energies in meV, kinetic prefactor hbar^2/(2 m*).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
from scipy import constants
from scipy.special import eval_genlaguerre, gammaln

from .exact import RationalPolynomial
from .exceptions import GridError, SingularityError, UnsupportedFamilyError
from .numerics import Grid1D

__all__ = [
    "HBAR2_OVER_2ME",
    "UnitScale",
    "PotentialModel",
    "ClosedFormSpectrum",
    "evaluate",
    "reference_spectrum",
    "isotonic_state",
    "harmonic_state",
    "darboux_polynomial",
    "truncated_spacing",
    "v0_over_mstar_from_slope",
]

# hbar^2 / (2 m_e) in meV nm^2 (CODATA via scipy)
HBAR2_OVER_2ME = constants.hbar**2 / (2 * constants.m_e) / constants.e * 1e3 * 1e18

FAMILIES = ("harmonic", "truncated_harmonic", "isotonic", "darboux", "tabulated")
SIDES = ("full_line", "positive", "negative")


def truncated_spacing(v0_over_mstar_eV: float, d_nm: float) -> float:
    """Level spacing in meV of the truncated harmonic well.

    ``v0_over_mstar_eV`` is V0/m* in eV per electron mass. The spacing is
    ``(2 hbar/d) sqrt(2 V0/m*)``, i.e. ``(4/d) sqrt(V0/m* * hbar^2/(2 m_e))``.
    """
    if v0_over_mstar_eV <= 0 or d_nm <= 0:
        raise ValueError("V0/m* and d must be positive")
    return 4.0 / d_nm * math.sqrt(v0_over_mstar_eV * 1e3 * HBAR2_OVER_2ME)


def v0_over_mstar_from_slope(c_eV_nm: float) -> float:
    """Invert ``dE = C/d`` for V0/m* in eV/m_e: ``V0/m* = C^2 / (8 hbar^2)``."""
    if c_eV_nm <= 0:
        raise ValueError("slope must be positive")
    # hbar^2/m_e in eV nm^2
    hbar2_me = 2 * HBAR2_OVER_2ME * 1e-3
    return c_eV_nm**2 / (8 * hbar2_me)


@dataclass(frozen=True)
class UnitScale:
    """Maps dimensionless (xi, eps) to (nm, meV).

    ``x = sqrt(hbar / (m* omega)) xi`` and ``E = hbar omega eps``.
    """

    mass_ratio: float = 1.0
    hbar_omega_meV: float = 1.0

    def __post_init__(self):
        if not (self.mass_ratio > 0 and self.hbar_omega_meV > 0):
            raise ValueError("mass ratio and hbar*omega must be positive")

    @property
    def length_nm(self) -> float:
        return math.sqrt(2 * HBAR2_OVER_2ME / (self.mass_ratio * self.hbar_omega_meV))

    def position(self, xi):
        return np.asarray(xi, dtype=float) * self.length_nm

    def energy(self, eps):
        return np.asarray(eps, dtype=float) * self.hbar_omega_meV

    @classmethod
    def from_spacing(cls, eps_spacing: float, target_meV: float, mass_ratio: float = 1.0) -> "UnitScale":
        """Scale under which a dimensionless spacing maps to ``target_meV``."""
        return cls(mass_ratio, target_meV / eps_spacing)

    def to_dict(self) -> dict:
        return {
            "mass_ratio": self.mass_ratio,
            "hbar_omega_meV": self.hbar_omega_meV,
            "length_nm": self.length_nm,
        }


@dataclass(frozen=True)
class PotentialModel:
    """A named potential family with its parameters.

    Build instances through the classmethods; ``params`` is a plain dict and
    ``side`` restricts singular families to one half line.
    """

    family: str
    params: dict = field(default_factory=dict)
    side: str = "full_line"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}, got {self.side!r}")
        p = self.params
        if self.family == "truncated_harmonic":
            if not (p["v0"] > 0 and p["d"] > 0 and p["mass_ratio"] > 0):
                raise ValueError("truncated_harmonic needs V0 > 0, d > 0, m* > 0")
        elif self.family == "isotonic":
            if not p["A"] > 0:
                raise ValueError("isotonic needs A > 0")
            if self.side == "full_line":
                raise ValueError("isotonic potential is singular at 0: choose side 'positive' or 'negative'")
        elif self.family == "darboux":
            m = p["m"]
            if not (isinstance(m, int) and m >= 0):
                raise ValueError("darboux index must be a non-negative integer")
            if m % 2 and self.side == "full_line":
                raise ValueError("odd darboux index is singular at 0: choose a half line")

    # constructors -----------------------------------------------------

    @classmethod
    def harmonic(cls) -> "PotentialModel":
        return cls("harmonic")

    @classmethod
    def truncated_harmonic(cls, v0_meV: float, d_nm: float, mass_ratio: float = 1.0) -> "PotentialModel":
        return cls("truncated_harmonic", {"v0": float(v0_meV), "d": float(d_nm), "mass_ratio": float(mass_ratio)})

    @classmethod
    def truncated_from_ratio(cls, v0_over_mstar_eV: float, d_nm: float, mass_ratio: float = 1.0):
        """Truncated well from V0/m* (eV/m_e); the depth is ``ratio * mass_ratio``."""
        return cls.truncated_harmonic(v0_over_mstar_eV * mass_ratio * 1e3, d_nm, mass_ratio)

    @classmethod
    def isotonic(cls, A: float, side: str = "positive") -> "PotentialModel":
        return cls("isotonic", {"A": float(A)}, side)

    @classmethod
    def darboux(cls, m: int, side: Optional[str] = None) -> "PotentialModel":
        if side is None:
            side = "positive" if m % 2 else "full_line"
        return cls("darboux", {"m": int(m)}, side)

    @classmethod
    def tabulated(cls, grid: Grid1D, samples, *, kinetic: float = 0.5, label: str = "") -> "PotentialModel":
        samples = np.asarray(samples, dtype=float)
        if samples.shape != (grid.n_points,):
            raise GridError(f"expected {grid.n_points} samples, got {samples.shape}")
        samples = samples.copy()
        samples.setflags(write=False)
        return cls("tabulated", {"grid": grid, "samples": samples, "kinetic": float(kinetic), "label": label})

    # properties -------------------------------------------------------

    @property
    def kinetic(self) -> float:
        """Prefactor of ``-d^2/dx^2`` in the Hamiltonian."""
        if self.family == "truncated_harmonic":
            return HBAR2_OVER_2ME / self.params["mass_ratio"]
        if self.family == "tabulated":
            return self.params["kinetic"]
        return 0.5

    @property
    def units(self) -> str:
        return "nm/meV" if self.family == "truncated_harmonic" else "dimensionless"

    @property
    def singular_at_zero(self) -> bool:
        return self.family == "isotonic" or (self.family == "darboux" and self.params["m"] % 2 == 1)

    def __call__(self, x):
        return _values(self, np.asarray(x, dtype=float))

    def suggest_grid(self, h: float, energy_ceiling: float, margin: float = 6.0) -> Grid1D:
        """A grid wide enough that states below ``energy_ceiling`` decay
        before the Dirichlet walls. Singular families start at ``2h``."""
        f = self.family
        if f == "tabulated":
            return self.params["grid"]
        if f == "truncated_harmonic":
            p = self.params
            gap = max(p["v0"] - min(energy_ceiling, 0.95 * p["v0"]), 1e-12)
            kappa = math.sqrt(gap / self.kinetic)
            ext = p["d"] / 2 + max(p["d"] / 2, 12.0 / kappa)
            return Grid1D.from_spacing(-ext, ext, h)
        if f == "isotonic":
            turning = math.sqrt(8 * max(energy_ceiling, 1.0))
            return self._half_grid(turning + 2 * margin, h)
        turning = math.sqrt(2 * max(energy_ceiling, 1.0))
        if f == "darboux":
            turning += math.sqrt(2 * self.params["m"] + 1)
        return self._half_grid(turning + margin, h)

    def _half_grid(self, extent: float, h: float) -> Grid1D:
        if self.side == "positive":
            return Grid1D.from_spacing(2 * h, extent, h)
        if self.side == "negative":
            return Grid1D.from_spacing(-extent, -2 * h, h)
        return Grid1D.from_spacing(-extent, extent, h)

    def to_dict(self) -> dict:
        params = dict(self.params)
        if self.family == "tabulated":
            params = {"grid": params["grid"].to_dict(), "kinetic": params["kinetic"], "label": params["label"]}
        return {"family": self.family, "params": params, "side": self.side}


def darboux_polynomial(m: int) -> RationalPolynomial:
    """Exact polynomial ``P_m`` generating the Darboux family; parity of m."""
    if m < 0:
        raise ValueError("m must be non-negative")
    half, odd = divmod(m, 2)
    coeffs = [Fraction(0)] * (m + 1)
    for k in range(half + 1):
        power = 2 * k + odd
        coeffs[power] = Fraction(4**k, math.factorial(half - k) * math.factorial(power))
    return RationalPolynomial(coeffs)


def _darboux_values(m: int, x: np.ndarray) -> np.ndarray:
    p = darboux_polynomial(m)
    dp = p.derivative()
    pc = np.array([float(c) for c in reversed(p.coeffs)])
    dpc = np.array([float(c) for c in reversed(dp.coeffs)]) if dp.coeffs else np.zeros(1)
    ratio = np.polyval(dpc, x) / np.polyval(pc, x)
    return -0.5 * x**2 - 2.0 * (2 * m + 1) / 3.0 + (ratio + x) ** 2


def _values(model: PotentialModel, x: np.ndarray) -> np.ndarray:
    f, p = model.family, model.params
    if f == "harmonic":
        return 0.5 * x**2
    if f == "truncated_harmonic":
        half = p["d"] / 2
        return np.where(np.abs(x) >= half, p["v0"], p["v0"] * (x / half) ** 2)
    if f == "isotonic":
        return x**2 / 8 + p["A"] / x**2
    if f == "darboux":
        return _darboux_values(p["m"], x)
    g: Grid1D = p["grid"]
    if np.any(x < g.x_min - 1e-9 * g.h) or np.any(x > g.x_max + 1e-9 * g.h):
        raise GridError("evaluation points outside the tabulated range")
    return np.interp(x, g.nodes, p["samples"])


def evaluate(model: PotentialModel, grid: Grid1D) -> np.ndarray:
    """Potential sampled at every node of ``grid`` (walls included).

    Singular families require every node on the model's side and at least
    one spacing away from the origin.
    """
    x = grid.nodes
    if model.family == "tabulated":
        g = model.params["grid"]
        if g == grid:
            return np.array(model.params["samples"])
        return _values(model, x)
    if model.side != "full_line" or model.singular_at_zero:
        tol = grid.h * (1 - 1e-9)
        if model.side == "positive":
            bad = np.flatnonzero(x < tol)
        elif model.side == "negative":
            bad = np.flatnonzero(x > -tol)
        else:
            bad = np.flatnonzero(np.abs(x) < tol)
        if bad.size:
            i = int(bad[0])
            raise SingularityError(
                f"node {i} (x={x[i]:.6g}) is within one spacing of the singular point "
                f"or on the wrong side for side={model.side!r}",
                index=i,
            )
    return _values(model, x)


# ----------------------------------------------------------------------
# closed forms
# ----------------------------------------------------------------------


def harmonic_state(n: int, xi):
    """Normalized eigenfunction of ``-1/2 d^2 + xi^2/2`` (stable recurrence)."""
    xi = np.asarray(xi, dtype=float)
    prev = np.zeros_like(xi)
    cur = np.pi**-0.25 * np.exp(-0.5 * xi**2)
    for k in range(n):
        prev, cur = cur, math.sqrt(2.0 / (k + 1)) * xi * cur - math.sqrt(k / (k + 1)) * prev
    return cur


def isotonic_state(A: float, n: int, xi):
    """Normalized eigenfunction ``n`` of ``-1/2 d^2 + xi^2/8 + A/xi^2`` on xi > 0.

    Uses the Laguerre form of the finite series: with ``s = sqrt(1+8A)``,
    ``a = s/2`` and ``t = xi^2/2``, the polynomial factor equals
    ``n! Gamma(a+1)/Gamma(n+a+1) L_n^(a)(t)``.
    """
    if A <= 0:
        raise ValueError("A must be positive")
    if n < 0:
        raise ValueError("n must be non-negative")
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(xi_arr <= 0):
        raise ValueError("isotonic states are defined for xi > 0 only")
    s = math.sqrt(1 + 8 * A)
    a = s / 2
    t = xi_arr**2 / 2
    log_c = 0.5 * (0.5 * math.log(2) + gammaln(a + 1 + n) - gammaln(n + 1) - 2 * gammaln(a + 1))
    log_j = gammaln(n + 1) + gammaln(a + 1) - gammaln(n + a + 1)
    log_env = (1 + s) / 4 * np.log(t) - t / 2
    out = np.exp(log_c + log_j + log_env) * eval_genlaguerre(n, a, t)
    return float(out) if np.ndim(xi) == 0 else out


@dataclass(frozen=True)
class ClosedFormSpectrum:
    """Ladder description ``eps_n = offset + spacing * n`` (n >= 1 when a
    separate ``ground`` is given), with an optional state evaluator."""

    family: str
    spacing: float
    offset: float
    ground: Optional[float] = None
    n_max: int = 0
    units: str = "dimensionless"
    valid_below: Optional[float] = None
    evaluator: Optional[Callable] = field(default=None, compare=False, repr=False)
    note: str = ""

    def level(self, n: int) -> float:
        if n == 0 and self.ground is not None:
            return self.ground
        return self.offset + self.spacing * n

    def energies(self, n_max: Optional[int] = None) -> np.ndarray:
        n_max = self.n_max if n_max is None else n_max
        return np.array([self.level(n) for n in range(n_max + 1)])

    def state(self, n: int, x):
        if self.evaluator is None:
            raise UnsupportedFamilyError(f"no closed-form states for {self.family}")
        return self.evaluator(n, x)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "spacing": self.spacing,
            "offset": self.offset,
            "ground": self.ground,
            "n_max": self.n_max,
            "units": self.units,
            "valid_below": self.valid_below,
            "note": self.note,
        }


def reference_spectrum(model: PotentialModel, n_max: int) -> ClosedFormSpectrum:
    """Closed-form levels ``0..n_max`` for every family except ``tabulated``.

    For the truncated well the ladder is the untruncated one and ``n_max`` is
    clipped to the levels below ``0.9 V0``.
    """
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    f, p = model.family, model.params
    if f == "harmonic":
        return ClosedFormSpectrum("harmonic", 1.0, 0.5, n_max=n_max, evaluator=harmonic_state)
    if f == "isotonic":
        A = p["A"]
        sign = 1.0 if model.side == "positive" else -1.0

        def ev(n, x, A=A, sign=sign):
            return isotonic_state(A, n, sign * np.asarray(x, dtype=float))

        return ClosedFormSpectrum(
            "isotonic", 1.0, 0.5 + 0.25 * math.sqrt(1 + 8 * A), n_max=n_max, evaluator=ev
        )
    if f == "truncated_harmonic":
        de = 2 * math.sqrt(p["v0"] * model.kinetic) * 2 / p["d"]
        limit = 0.9 * p["v0"]
        count = int(math.floor((limit / de) - 0.5)) + 1 if limit > de / 2 else 0
        if count == 0:
            raise ValueError("no level lies below 0.9 V0")
        return ClosedFormSpectrum(
            "truncated_harmonic", de, de / 2, n_max=min(n_max, count - 1),
            units="nm/meV", valid_below=limit,
        )
    if f == "darboux":
        m = p["m"]
        # partner of the oscillator for a seed at mu = -(m + 1/2), shifted by -(2/3) mu
        if m % 2 == 0:
            return ClosedFormSpectrum(
                "darboux", 1.0, -1.0 / 6 + 2.0 * m / 3, ground=-1.0 / 6 - m / 3.0, n_max=n_max,
                note=f"ground state lowered: gap {1 + m} to the first excited level, then spacing 1",
            )
        return ClosedFormSpectrum(
            "darboux", 2.0, 1.5 + (2 * m + 1) / 3.0, n_max=n_max,
            note="half-line ladder with spacing 2 (spacing 1 after xi -> xi/2)",
        )
    raise UnsupportedFamilyError("tabulated potentials have no closed-form spectrum")
