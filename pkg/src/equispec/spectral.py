"""Solve pipeline and spectrum analytics."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from sklearn.base import BaseEstimator

from .exceptions import UnsupportedFamilyError
from .numerics import (
    EigenSolution,
    Grid1D,
    build_hamiltonian,
    check_boundary_confinement,
    eigensolve,
    fd_derivative,
)
from .potentials import PotentialModel, UnitScale, evaluate, reference_spectrum
from .shift_ode import GeneratedPotential

__all__ = [
    "solve_potential",
    "SchrodingerSolver",
    "SpectrumReport",
    "spacing_report",
    "polynomial_fit",
    "StateClassification",
    "classify_states",
    "ShiftOverlap",
    "apply_shift_operator",
    "spectrum_rows",
    "rows_to_csv",
]

Source = Union[PotentialModel, GeneratedPotential]


def _ceiling_for(model: PotentialModel, k: int) -> float:
    try:
        spec = reference_spectrum(model, k - 1)
        top = float(spec.energies(k - 1).max())
        return top + 2 * spec.spacing
    except (UnsupportedFamilyError, ValueError):
        return float(k)


def solve_potential(
    source: Source,
    grid: Optional[Grid1D] = None,
    *,
    k: int = 20,
    h: float = 0.01,
    scale: Optional[UnitScale] = None,
    method: str = "lapack",
    energy_ceiling: Optional[float] = None,
) -> EigenSolution:
    """Lowest ``k`` levels of ``-c d^2/dx^2 + U`` with hard walls at the grid ends.

    A :class:`GeneratedPotential` is solved on its own (pole-trimmed) grid
    unless ``grid`` is given, in which case it is interpolated. For analytic
    families without a grid, one is chosen so that the potential at the walls
    exceeds the requested levels. With ``scale`` the dimensionless result is
    mapped to nm / meV.
    """
    if isinstance(source, GeneratedPotential):
        model = source.to_model()
        boundary = "dirichlet; walls next to marked singularities" if source.singularities else "dirichlet"
        extra = {"singularities": list(source.singularities), "generator": source.problem.to_dict()}
    else:
        model = source
        boundary = "dirichlet"
        extra = {}
    if grid is None:
        if model.family == "tabulated":
            grid = model.params["grid"]
        else:
            ceiling = energy_ceiling if energy_ceiling is not None else _ceiling_for(model, k)
            grid = model.suggest_grid(h, ceiling)
    samples = evaluate(model, grid)
    ham = build_hamiltonian(samples, grid, model.kinetic)
    raw = eigensolve(ham, k, spacing=grid.h, method=method)
    states = np.zeros((grid.n_points, k))
    states[1:-1] = raw.states
    check_boundary_confinement(samples, raw.energies)

    meta = {
        "family": model.family,
        "side": model.side,
        "units": model.units,
        "kinetic": model.kinetic,
        "grid": grid.to_dict(),
        "boundary": boundary,
        "scale": None,
        **raw.metadata,
        **extra,
    }
    energies = raw.energies
    if scale is not None:
        if model.units != "dimensionless":
            raise ValueError("a unit scale only applies to dimensionless potentials")
        ell = scale.length_nm
        grid = Grid1D(grid.x_min * ell, grid.x_max * ell, grid.n_points)
        states = states / math.sqrt(ell)
        energies = scale.energy(energies)
        meta["scale"] = scale.to_dict()
        meta["units"] = "nm/meV"
    return EigenSolution(energies, states, grid, meta)


class SchrodingerSolver(BaseEstimator):
    """Estimator wrapper around :func:`solve_potential`.

    ``fit`` takes a potential model or generated potential; ``predict``
    returns the energies of the requested level indices.
    """

    def __init__(self, k=20, h=0.01, method="lapack", mass_ratio=None, hbar_omega_meV=None):
        self.k = k
        self.h = h
        self.method = method
        self.mass_ratio = mass_ratio
        self.hbar_omega_meV = hbar_omega_meV

    def _scale(self):
        if self.hbar_omega_meV is None:
            return None
        return UnitScale(self.mass_ratio if self.mass_ratio is not None else 1.0, self.hbar_omega_meV)

    def fit(self, X, y=None):
        if not isinstance(self.k, (int, np.integer)) or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")
        if not self.h > 0:
            raise ValueError(f"h must be positive, got {self.h!r}")
        self.solution_ = solve_potential(X, k=int(self.k), h=self.h, method=self.method, scale=self._scale())
        self.energies_ = self.solution_.energies
        return self

    def predict(self, n):
        if not hasattr(self, "solution_"):
            raise AttributeError("SchrodingerSolver is not fitted yet; call fit first")
        n = np.asarray(n, dtype=int)
        if np.any(n < 0) or np.any(n >= len(self.energies_)):
            raise IndexError("level index outside the solved range")
        return self.energies_[n]


# ----------------------------------------------------------------------
# spacings
# ----------------------------------------------------------------------


def polynomial_fit(n, energies, degree: int = 1):
    """Least-squares polynomial of E vs n; returns (coefficients high->low, R^2)."""
    n = np.asarray(n, dtype=float)
    e = np.asarray(energies, dtype=float)
    coef = np.polyfit(n, e, degree)
    fit = np.polyval(coef, n)
    ss_res = float(np.sum((e - fit) ** 2))
    ss_tot = float(np.sum((e - e.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return coef, r2


def _stats(spacings: np.ndarray) -> dict:
    if spacings.size == 0:
        return {"count": 0, "mean": None, "cv": None}
    mean = float(spacings.mean())
    cv = float(spacings.std() / abs(mean)) if mean != 0 else float("inf")
    return {"count": int(spacings.size), "mean": mean, "cv": cv}


@dataclass(frozen=True)
class SpectrumReport:
    """Spacing statistics over a window of levels.

    ``per_class`` maps a class label to the spacings between consecutive
    states of that class and their mean / CV.
    """

    n: np.ndarray
    energies: np.ndarray
    spacings: np.ndarray
    mean_spacing: float
    cv: float
    slope: float
    intercept: float
    r_squared: float
    labels: Optional[np.ndarray] = None
    per_class: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n": self.n.tolist(),
            "energies": self.energies.tolist(),
            "spacings": self.spacings.tolist(),
            "mean_spacing": self.mean_spacing,
            "cv": self.cv,
            "linear_fit": {"slope": self.slope, "intercept": self.intercept, "r_squared": self.r_squared},
            "labels": None if self.labels is None else [str(v) for v in self.labels],
            "per_class": {
                k: {**v, "spacings": list(v["spacings"])} for k, v in self.per_class.items()
            },
        }


def spacing_report(
    sol: Union[EigenSolution, Sequence[float]],
    window: Optional[Sequence[int]] = None,
    labels: Optional[Sequence] = None,
) -> SpectrumReport:
    """Spacings, mean, CV and linear fit of E_n vs n over ``window = (lo, hi)``
    (inclusive). ``labels`` (one per solved level) adds per-class spacings."""
    e_all = np.asarray(sol.energies if isinstance(sol, EigenSolution) else sol, dtype=float)
    lo, hi = (0, len(e_all) - 1) if window is None else (int(window[0]), int(window[1]))
    if lo < 0 or hi >= len(e_all) or hi < lo:
        raise ValueError(f"window {lo}..{hi} outside the solved range 0..{len(e_all) - 1}")
    if hi - lo + 1 < 3:
        raise ValueError("window must contain at least 3 levels")
    n = np.arange(lo, hi + 1)
    e = e_all[lo : hi + 1]
    sp = np.diff(e)
    st = _stats(sp)
    (slope, intercept), r2 = polynomial_fit(n, e, 1)
    lab = None
    per_class = {}
    if labels is not None:
        lab_all = np.asarray(labels).astype(str)
        if len(lab_all) != len(e_all):
            raise ValueError("need one label per level")
        lab = lab_all[lo : hi + 1]
        for c in sorted(set(lab.tolist())):
            sel = e[lab == c]
            csp = np.diff(sel)
            per_class[c] = {"spacings": csp.tolist(), **_stats(csp)}
    return SpectrumReport(n, e, sp, st["mean"], st["cv"], float(slope), float(intercept), r2, lab, per_class)


# ----------------------------------------------------------------------
# classification
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class StateClassification:
    """Per-state localization features and a two-class split.

    ``labels`` is ``"1"`` (localized in potential minima) or ``"2"``
    (delocalized); with ``split`` False every state is ``"2"``. ``region``
    tags class-1 states ``"left"``/``"right"`` of the class-2 centre.
    """

    ipr: np.ndarray
    mean_x: np.ndarray
    spread: np.ndarray
    forbidden: np.ndarray
    labels: np.ndarray
    region: np.ndarray
    split: bool
    confidence: float
    thresholds: dict

    @property
    def n_classes(self) -> int:
        return len(set(self.labels.tolist()))

    def combined_labels(self) -> np.ndarray:
        """Class label with the class-1 region appended (``1-left``...)."""
        return np.array(
            [f"{c}-{r}" if r else c for c, r in zip(self.labels, self.region)]
        )

    def to_dict(self) -> dict:
        return {
            "split": self.split,
            "n_classes": self.n_classes,
            "confidence": self.confidence,
            "thresholds": self.thresholds,
            "labels": self.labels.tolist(),
            "region": self.region.tolist(),
        }


def _two_means(values: np.ndarray):
    """Otsu split of 1-D values: threshold maximizing between-group variance."""
    v = np.sort(values)
    best, thr = -1.0, None
    for i in range(1, len(v)):
        if v[i] == v[i - 1]:
            continue
        a, b = v[:i], v[i:]
        score = len(a) * len(b) * (a.mean() - b.mean()) ** 2
        if score > best:
            best, thr = score, 0.5 * (v[i - 1] + v[i])
    return thr


def _resolve_pairs(e, forbidden, mean_x, labels, region, fraction, reference) -> int:
    """One class-1 and one class-2 member per near-degenerate pair."""
    c1 = np.flatnonzero(labels == "1")
    if fraction <= 0 or len(c1) < 3:
        return 0
    gap = fraction * float(np.median(np.diff(e[c1])))
    sides = sorted(set(region[c1].tolist()))
    changed = 0
    i = 0
    while i < len(e) - 1:
        a, b = i, i + 1
        if e[b] - e[a] >= gap:
            i += 1
            continue
        if labels[a] == labels[b] == "1" and region[a] != region[b]:
            i += 2
            continue
        keep, drop = (a, b) if forbidden[a] >= forbidden[b] else (b, a)
        if labels[keep] != "1" or labels[drop] != "2":
            changed += 1
        labels[drop], region[drop] = "2", ""
        if labels[keep] != "1":
            labels[keep] = "1"
            if len(sides) == 1:
                region[keep] = sides[0]
            else:
                region[keep] = "left" if mean_x[keep] < reference else "right"
        i += 2
    return changed


def classify_states(
    sol: EigenSolution,
    potential_samples,
    *,
    min_fraction: float = 0.2,
    min_states: int = 3,
    min_coverage: float = 0.5,
    pair_fraction: float = 0.5,
) -> StateClassification:
    """Split states into localized (class 1) and delocalized (class 2).

    The feature is the probability in the classically forbidden region
    (``U > E``): states trapped in the small wells of an oscillating potential
    tunnel through many barriers and carry a large forbidden fraction, while
    states spanning the wide well carry very little. A two-means threshold on
    that feature is accepted only when the smaller class holds at least
    ``min_fraction`` of the states (and ``min_states``) and each class covers
    ``min_coverage`` of the energy window; otherwise one class is reported.

    Class-1 states are tagged left/right of the median class-2 position;
    a side needs ``min_states`` class-1 states further out than the median
    class-2 spread, otherwise all class-1 states share one tag. Two adjacent
    levels closer than ``pair_fraction`` times the median class-1 spacing are
    a hybridized pair (an avoided crossing): the more localized member is
    class 1 and the other class 2, unless both are class-1 states on
    different sides.
    """
    if sol.grid is None:
        raise ValueError("classification needs a solution with a grid")
    psi = np.asarray(sol.states)
    if psi.shape[1] < 2:
        raise ValueError("need at least 2 states")
    u = np.asarray(potential_samples, dtype=float)
    if u.shape != (sol.grid.n_points,):
        raise ValueError("potential samples must align with the solution grid")
    h = sol.grid.h
    x = sol.grid.nodes
    e = np.asarray(sol.energies)
    dens = h * psi**2
    norm = dens.sum(axis=0)
    dens = dens / norm
    ipr = (psi**4).sum(axis=0) * h / norm**2
    mean_x = (dens * x[:, None]).sum(axis=0)
    spread = np.sqrt(np.maximum((dens * x[:, None] ** 2).sum(axis=0) - mean_x**2, 0.0))
    forbidden = (dens * (u[:, None] > e[None, :])).sum(axis=0)

    thr = _two_means(forbidden)
    labels = np.full(len(e), "2", dtype=object)
    split = False
    confidence = 0.0
    if thr is not None:
        hi = forbidden > thr
        n1, n2 = int(hi.sum()), int((~hi).sum())
        span = e.max() - e.min()
        cover = lambda s: (e[s].max() - e[s].min()) / span if span > 0 else 0.0  # noqa: E731
        enough = min(n1, n2) >= max(min_states, min_fraction * len(e))
        if enough and cover(hi) >= min_coverage and cover(~hi) >= min_coverage:
            split = True
            labels[hi] = "1"
            a, b = forbidden[hi], forbidden[~hi]
            confidence = float((a.mean() - b.mean()) / (a.std() + b.std() + 1e-300))
    region = np.full(len(e), "", dtype=object)
    reference = None
    n_pairs = 0
    if split:
        c1 = labels == "1"
        c2 = ~c1
        reference = float(np.median(mean_x[c2]))
        width = float(np.median(spread[c2]))
        n_left = int(np.sum(c1 & (mean_x < reference - width)))
        n_right = int(np.sum(c1 & (mean_x > reference + width)))
        if n_left >= min_states and n_right >= min_states:
            region[c1 & (mean_x < reference)] = "left"
            region[c1 & (mean_x >= reference)] = "right"
        else:
            region[c1] = "left" if n_left > n_right else "right"
        n_pairs = _resolve_pairs(e, forbidden, mean_x, labels, region, pair_fraction, reference)
    thresholds = {
        "feature": "forbidden_fraction",
        "threshold": thr,
        "min_fraction": min_fraction,
        "min_states": min_states,
        "min_coverage": min_coverage,
        "region_reference_x": reference,
        "pair_fraction": pair_fraction,
        "pairs_resolved": n_pairs,
    }
    return StateClassification(
        ipr, mean_x, spread, forbidden, labels.astype(str), region.astype(str), split, confidence, thresholds
    )


# ----------------------------------------------------------------------
# shift operators
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class ShiftOverlap:
    """``overlaps[n] = |<psi_{n+1}, L psi_n>| / (||L psi_n|| ||psi_{n+1}||)``;
    ``ground_annihilation = ||L^dagger psi_0|| / ||psi_0||``."""

    order: int
    overlaps: np.ndarray
    ground_annihilation: float
    threshold: float = 0.999

    @property
    def passed(self) -> np.ndarray:
        return self.overlaps >= self.threshold


def _potential_jet(context, grid: Grid1D) -> np.ndarray:
    """Columns U, U', U'', U''' on ``grid`` for the third-order operator."""
    if isinstance(context, GeneratedPotential):
        if context.grid != grid:
            raise ValueError("generated potential and solution grid differ")
        return context.potential_derivatives()
    if isinstance(context, PotentialModel) and context.family in ("harmonic", "darboux", "isotonic"):
        u = evaluate(context, grid)
        cols = [u] + [fd_derivative(u, grid, k, accuracy=6) for k in (1, 2, 3)]
        return np.column_stack(cols)
    if context is not None and not isinstance(context, PotentialModel):
        arr = np.asarray(context, dtype=float)
        if arr.shape == (grid.n_points, 4):
            return arr
    raise ValueError("third-order shift operator needs U and its first three derivatives")


def apply_shift_operator(
    sol: EigenSolution,
    order: int,
    context=None,
    *,
    threshold: float = 0.999,
    accuracy: int = 4,
) -> ShiftOverlap:
    """Apply the raising operator of the given order to every state.

    ``order`` 1 is the oscillator ladder ``-xi + d/dxi``; 2 is the isotonic
    operator (``context`` is the isotonic model or its ``A``); 3 is built
    from ``U`` and its derivatives (``context`` is a generated potential, an
    analytic model or an ``(n, 4)`` array of ``U, U', U'', U'''``).
    Derivatives of the states use finite differences on the solution grid.
    """
    if sol.grid is None:
        raise ValueError("solution must carry its grid")
    grid = sol.grid
    x = grid.nodes
    psi = np.asarray(sol.states)
    d1 = fd_derivative(psi, grid, 1, accuracy)
    d2 = fd_derivative(psi, grid, 2, accuracy)
    X = x[:, None]
    if order == 1:
        up = -X * psi + d1
        down = X * psi + d1
    elif order == 2:
        A = context.params["A"] if isinstance(context, PotentialModel) else context
        if A is None:
            raise ValueError("second-order operator needs the isotonic constant A")
        # alpha_1 = -xi forces alpha_2 = +1 in the coefficient equations
        base = 0.25 * X**2 - 2.0 * float(A) / X**2
        up = (base - 0.5) * psi - X * d1 + d2
        down = (base + 0.5) * psi + X * d1 + d2
    elif order == 3:
        jet = _potential_jet(context, grid)
        U, U1, _, U3 = (jet[:, i][:, None] for i in range(4))
        d3 = fd_derivative(psi, grid, 3, accuracy)
        a0 = 3.0 * U * U1 - 0.25 * U3 - 0.5 * (X**2 + 3.0) * U1
        up = (a0 + 0.5 * X) * psi + (0.5 * X**2 - 3.0 * U - 1.0) * d1 - X * d2 + d3
        down = -(a0 - 0.5 * X) * psi + (0.5 * X**2 - 3.0 * U + 1.0) * d1 + X * d2 + d3
    else:
        raise ValueError("order must be 1, 2 or 3")
    # only interior nodes carry the discrete states
    up[[0, -1]] = 0.0
    down[[0, -1]] = 0.0
    norms = np.sqrt(grid.inner(psi, psi))
    up_norms = np.sqrt(grid.inner(up, up))
    overlaps = np.empty(psi.shape[1] - 1)
    for n in range(psi.shape[1] - 1):
        denom = up_norms[n] * norms[n + 1]
        overlaps[n] = abs(grid.inner(psi[:, n + 1], up[:, n])) / denom if denom > 0 else 0.0
    ground = float(math.sqrt(grid.inner(down[:, 0], down[:, 0])) / norms[0])
    return ShiftOverlap(order, overlaps, ground, threshold)


# ----------------------------------------------------------------------
# tables
# ----------------------------------------------------------------------


def spectrum_rows(sol: EigenSolution, classification: Optional[StateClassification] = None) -> list:
    """Rows ``n, E, dE, class, ipr, mean_x`` (``dE`` to the next level)."""
    e = np.asarray(sol.energies)
    if classification is None and sol.grid is not None:
        psi = np.asarray(sol.states)
        h = sol.grid.h
        ipr = h * (psi**4).sum(axis=0)
        mean_x = h * (psi**2 * sol.grid.nodes[:, None]).sum(axis=0)
        labels = [""] * len(e)
    elif classification is not None:
        ipr, mean_x = classification.ipr, classification.mean_x
        labels = classification.combined_labels().tolist()
    else:
        ipr = mean_x = [float("nan")] * len(e)
        labels = [""] * len(e)
    rows = []
    for i in range(len(e)):
        de = float(e[i + 1] - e[i]) if i + 1 < len(e) else float("nan")
        rows.append(
            {"n": i, "E": float(e[i]), "dE": de, "class": labels[i], "ipr": float(ipr[i]), "mean_x": float(mean_x[i])}
        )
    return rows


def rows_to_csv(rows: list, columns: Sequence[str], fmt: str = "%.12g") -> str:
    """CSV text with floats printed as ``fmt``; NaN becomes an empty cell."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        out = []
        for c in columns:
            v = r[c]
            if isinstance(v, float):
                out.append("" if math.isnan(v) else fmt % v)
            else:
                out.append(v)
        w.writerow(out)
    return buf.getvalue()
