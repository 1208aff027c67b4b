"""Film-thickness data: loading, inverse-law fits and truncated-well checks."""

from __future__ import annotations

import csv
import math
import os
import warnings
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from .exceptions import DatasetError
from .potentials import (
    HBAR2_OVER_2ME,
    PotentialModel,
    reference_spectrum,
    truncated_spacing,
    v0_over_mstar_from_slope,
)

__all__ = [
    "D_BL_NM",
    "FilmRecord",
    "FilmDataset",
    "load_dataset",
    "shipped_dataset_path",
    "synthetic_inverse",
    "synthetic_square_well",
    "InverseLawRegressor",
    "FitResult",
    "fit_inverse_law",
    "TruncatedCheck",
    "cross_validate_truncated",
]

D_BL_NM = 0.4
HEADER = ["source", "d_value", "d_unit", "dE_meV"]
UNITS = ("nm", "BL")


@dataclass(frozen=True)
class FilmRecord:
    source: str
    d_value: float
    d_unit: str
    dE_meV: float
    sigma_meV: Optional[float] = None


@dataclass(frozen=True)
class FilmDataset:
    """Records plus the bilayer thickness used to convert ``BL`` to nm."""

    records: tuple
    d_bl: float = D_BL_NM

    def __post_init__(self):
        if not self.d_bl > 0:
            raise DatasetError("bilayer thickness must be positive")
        if not self.records:
            raise DatasetError("no records")

    def __len__(self):
        return len(self.records)

    @property
    def d_nm(self) -> np.ndarray:
        return np.array([r.d_value * (self.d_bl if r.d_unit == "BL" else 1.0) for r in self.records])

    @property
    def dE_meV(self) -> np.ndarray:
        return np.array([r.dE_meV for r in self.records])

    @property
    def sigma_meV(self) -> Optional[np.ndarray]:
        if any(r.sigma_meV is None for r in self.records):
            return None
        return np.array([r.sigma_meV for r in self.records])

    @property
    def sources(self) -> list:
        return [r.source for r in self.records]

    @classmethod
    def from_arrays(cls, d, dE, *, unit="nm", source="synthetic", sigma=None, d_bl=D_BL_NM):
        d = np.atleast_1d(np.asarray(d, dtype=float))
        dE = np.atleast_1d(np.asarray(dE, dtype=float))
        if d.shape != dE.shape:
            raise DatasetError("thickness and spacing arrays differ in length")
        sig = [None] * len(d) if sigma is None else list(np.asarray(sigma, dtype=float))
        recs = []
        for i, (a, b, s) in enumerate(zip(d, dE, sig)):
            _check_positive(a, b, s, i + 1)
            recs.append(FilmRecord(source, float(a), unit, float(b), None if s is None else float(s)))
        return cls(tuple(recs), d_bl)


def _check_positive(d, dE, sigma, line):
    if not (math.isfinite(d) and d > 0):
        raise DatasetError(f"thickness must be positive, got {d}", line)
    if not (math.isfinite(dE) and dE > 0):
        raise DatasetError(f"energy spacing must be positive, got {dE}", line)
    if sigma is not None and not (math.isfinite(sigma) and sigma > 0):
        raise DatasetError(f"uncertainty must be positive, got {sigma}", line)


def load_dataset(path, d_bl: float = D_BL_NM) -> FilmDataset:
    """Read ``source,d_value,d_unit,dE_meV[,sigma_meV]`` CSV.

    Lines starting with ``#`` and blank lines are ignored; the first other
    line must be the header. ``d_unit`` is ``nm`` or ``BL``.
    """
    records = []
    header_seen = False
    has_sigma = False
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    with fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
                continue
            row = [c.strip() for c in row]
            if not header_seen:
                if row[:4] != HEADER or row[4:] not in ([], ["sigma_meV"]):
                    raise DatasetError(
                        f"header must be {','.join(HEADER)}[,sigma_meV], got {','.join(row)}", lineno
                    )
                has_sigma = len(row) == 5
                header_seen = True
                continue
            width = 5 if has_sigma else 4
            if len(row) != width:
                raise DatasetError(f"expected {width} fields, got {len(row)}", lineno)
            source, d_raw, unit, de_raw = row[:4]
            if unit not in UNITS:
                raise DatasetError(f"d_unit must be nm or BL, got {unit!r}", lineno)
            try:
                d = float(d_raw)
                de = float(de_raw)
                sigma = float(row[4]) if has_sigma and row[4] != "" else None
            except ValueError as exc:
                raise DatasetError(f"not a number: {exc}", lineno) from None
            _check_positive(d, de, sigma, lineno)
            records.append(FilmRecord(source, d, unit, de, sigma))
    if not records:
        raise DatasetError("no records")
    return FilmDataset(tuple(records), d_bl)


def shipped_dataset_path() -> str:
    """Path of the bundled reconstructed thickness series."""
    return str(resources.files("equispec").joinpath("data/film_gaps_reconstructed.csv"))


def synthetic_inverse(d_nm, c_eV_nm: float = 3.34 * D_BL_NM) -> np.ndarray:
    """``dE = C / d`` in meV."""
    return c_eV_nm * 1e3 / np.asarray(d_nm, dtype=float)


def synthetic_square_well(d_nm, mass_ratio: float = 1.0) -> np.ndarray:
    """Gap between the two lowest infinite-well levels, ``3 pi^2 hbar^2 / (2 m* d^2)``, in meV."""
    d = np.asarray(d_nm, dtype=float)
    return 3 * math.pi**2 * HBAR2_OVER_2ME / mass_ratio / d**2


# ----------------------------------------------------------------------
# regression
# ----------------------------------------------------------------------


class InverseLawRegressor(RegressorMixin, BaseEstimator):
    """Fit ``dE = C / d`` (``fixed_inverse``) or ``dE = C d^-alpha`` (``power_law``).

    ``X`` is thickness in nm (shape ``(n,)`` or ``(n, 1)``), ``y`` the spacing
    in meV. ``fixed_inverse`` is linear least squares in ``1/d`` through the
    origin; ``power_law`` is least squares in log-log space with a residual
    bootstrap interval for ``alpha``.
    """

    def __init__(self, model="fixed_inverse", n_bootstrap=1000, confidence=0.95, random_state=0):
        self.model = model
        self.n_bootstrap = n_bootstrap
        self.confidence = confidence
        self.random_state = random_state

    def fit(self, X, y, sample_weight=None):
        d = np.asarray(X, dtype=float).reshape(-1)
        e = np.asarray(y, dtype=float).reshape(-1)
        if d.shape != e.shape:
            raise ValueError("X and y differ in length")
        if np.any(d <= 0) or np.any(e <= 0):
            raise ValueError("thickness and spacing must be positive")
        w = np.ones_like(d) if sample_weight is None else np.asarray(sample_weight, dtype=float).reshape(-1)
        if w.shape != d.shape or np.any(w < 0) or not np.any(w > 0):
            raise ValueError("invalid sample weights")
        if self.model == "fixed_inverse":
            if len(d) < 3:
                raise ValueError("fixed_inverse needs at least 3 records")
            x = 1.0 / d
            denom = np.sum(w * x * x)
            if denom == 0:
                raise np.linalg.LinAlgError("singular design matrix")
            self.C_ = float(np.sum(w * x * e) / denom)
            self.alpha_ = 1.0
            self.alpha_interval_ = None
        elif self.model == "power_law":
            if len(d) < 4:
                raise ValueError("power_law needs at least 4 records")
            lx, ly = np.log(d), np.log(e)
            # relative uncertainties map to log space unchanged
            design = np.column_stack([np.ones_like(lx), -lx])
            sw = np.sqrt(w)
            if np.linalg.matrix_rank(design * sw[:, None]) < 2:
                raise np.linalg.LinAlgError("singular design matrix: thicknesses must differ")
            beta = np.linalg.lstsq(design * sw[:, None], ly * sw, rcond=None)[0]
            self.C_ = float(math.exp(beta[0]))
            self.alpha_ = float(beta[1])
            self.alpha_interval_ = self._bootstrap(design, ly, sw, beta)
        else:
            raise ValueError(f"model must be 'fixed_inverse' or 'power_law', got {self.model!r}")
        pred = self.predict(d)
        ss_res = float(np.sum(w * (e - pred) ** 2))
        mean = float(np.sum(w * e) / np.sum(w))
        ss_tot = float(np.sum(w * (e - mean) ** 2))
        self.r_squared_ = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
        self.rms_ = float(np.sqrt(np.mean((e - pred) ** 2)))
        self.n_samples_ = len(d)
        return self

    def _bootstrap(self, design, ly, sw, beta):
        if not self.n_bootstrap:
            return None
        rng = np.random.default_rng(self.random_state)
        fitted = design @ beta
        resid = ly - fitted
        alphas = np.empty(self.n_bootstrap)
        for i in range(self.n_bootstrap):
            ys = fitted + rng.choice(resid, size=len(resid), replace=True)
            alphas[i] = np.linalg.lstsq(design * sw[:, None], ys * sw, rcond=None)[0][1]
        tail = (1 - self.confidence) / 2
        return (float(np.quantile(alphas, tail)), float(np.quantile(alphas, 1 - tail)))

    def predict(self, X):
        if not hasattr(self, "C_"):
            raise AttributeError("InverseLawRegressor is not fitted yet; call fit first")
        d = np.asarray(X, dtype=float).reshape(-1)
        return self.C_ * d ** (-self.alpha_)


@dataclass(frozen=True)
class FitResult:
    """Fitted law; ``C_eV_nm`` is in eV nm^alpha, V0/m* (eV/m_e) only for the 1/d law."""

    model: str
    C_eV_nm: float
    alpha: float
    V0_over_mstar_eV: Optional[float]
    r_squared: float
    n_records: int
    rms_meV: float
    alpha_interval: Optional[tuple] = None
    weighted: bool = False
    d_bl: float = D_BL_NM

    @property
    def C_in_bilayers_eV(self) -> float:
        """Slope expressed as ``C' `` in ``dE = C' d_BL / d``."""
        return self.C_eV_nm / self.d_bl

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "C_eV_nm": self.C_eV_nm,
            "alpha": self.alpha,
            "V0_over_mstar_eV": self.V0_over_mstar_eV,
            "r_squared": self.r_squared,
            "alpha_interval": None if self.alpha_interval is None else list(self.alpha_interval),
            "n_records": self.n_records,
            "rms_meV": self.rms_meV,
            "weighted": self.weighted,
            "d_bl_nm": self.d_bl,
        }


def fit_inverse_law(
    data: FilmDataset,
    model: str = "fixed_inverse",
    *,
    weights: Optional[Sequence[float]] = None,
    n_bootstrap: int = 1000,
    random_state: int = 0,
) -> FitResult:
    """Fit the thickness law; weights default to ``1/sigma^2`` when every
    record has an uncertainty, otherwise uniform."""
    d = data.d_nm
    e = data.dE_meV
    weighted = False
    if weights is not None:
        w = np.asarray(weights, dtype=float)
        weighted = True
    elif data.sigma_meV is not None:
        sig = data.sigma_meV
        # power law is fitted in log space, where sigma/dE is the scale
        w = (e / sig) ** 2 if model == "power_law" else 1.0 / sig**2
        weighted = True
    else:
        w = None
    reg = InverseLawRegressor(model, n_bootstrap=n_bootstrap, random_state=random_state)
    reg.fit(d, e, sample_weight=w)
    c = reg.C_ * 1e-3  # meV -> eV
    v0m = v0_over_mstar_from_slope(c) if model == "fixed_inverse" else None
    return FitResult(
        model, c, reg.alpha_, v0m, reg.r_squared_, reg.n_samples_, reg.rms_,
        reg.alpha_interval_, weighted, data.d_bl,
    )


# ----------------------------------------------------------------------
# truncated-well cross-check
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class TruncatedCheck:
    v0_over_mstar_eV: float
    d_nm: float
    mass_ratio: float
    dE_formula_meV: float
    dE_numeric_meV: float
    levels_meV: tuple
    n_levels: int
    max_relative_deviation: float
    warning: str = ""
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "v0_over_mstar_eV": self.v0_over_mstar_eV,
            "d_nm": self.d_nm,
            "mass_ratio": self.mass_ratio,
            "dE_formula_meV": self.dE_formula_meV,
            "dE_numeric_meV": self.dE_numeric_meV,
            "levels_meV": list(self.levels_meV),
            "n_levels": self.n_levels,
            "max_relative_deviation": self.max_relative_deviation,
            "warning": self.warning,
            **self.metadata,
        }


def cross_validate_truncated(
    v0_over_mstar_eV: float, d_nm: float, *, mass_ratio: float = 1.0, h: float = 0.005
) -> TruncatedCheck:
    """Solve the truncated well and compare every spacing below 0.9 V0 with
    the untruncated formula. The well depth is ``V0/m* * mass_ratio``."""
    from .spectral import solve_potential  # local: spectral imports this package's potentials

    if not (v0_over_mstar_eV > 0 and d_nm > 0 and mass_ratio > 0):
        raise ValueError("V0/m*, d and m* must be positive")
    model = PotentialModel.truncated_from_ratio(v0_over_mstar_eV, d_nm, mass_ratio)
    de = truncated_spacing(v0_over_mstar_eV, d_nm)
    limit = 0.9 * model.params["v0"]
    try:
        expected = reference_spectrum(model, 10**6).n_max + 1
    except ValueError:
        expected = 0
    k = max(expected + 2, 2)
    grid = model.suggest_grid(h, limit)
    with warnings.catch_warnings():
        # levels above the rim are not confined by design
        warnings.simplefilter("ignore", RuntimeWarning)
        sol = solve_potential(model, grid, k=k)
    levels = sol.energies[sol.energies < limit]
    warning = ""
    if len(levels) < 2:
        warning = "fewer than 2 levels below 0.9 V0"
        return TruncatedCheck(
            v0_over_mstar_eV, d_nm, mass_ratio, de, float("nan"), tuple(levels.tolist()),
            len(levels), float("nan"), warning, {"grid": grid.to_dict()},
        )
    sp = np.diff(levels)
    dev = float(np.max(np.abs(sp / de - 1)))
    return TruncatedCheck(
        v0_over_mstar_eV, d_nm, mass_ratio, de, float(sp.mean()), tuple(levels.tolist()),
        len(levels), dev, warning, {"grid": grid.to_dict(), "h_nm": h},
    )
