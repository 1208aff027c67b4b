"""Potentials from the third-order shift-operator condition.

With ``U = W + xi^2/2`` the condition on ``W`` is the fourth-order ODE

    W'''' = 4 [ 3 (W'^2 + W W'') + xi^2 W'' + 3 xi W' ]

which has two first integrals with constants A and B:

    3 xi W W' - 3/2 W^2 - 1/4 xi W''' + 1/4 W'' + xi^3 W' = A
    -1/2 Q^2 - 1/2 W^3 + 1/8 W'^2 = A W + B,   Q = (A + 3/2 W^2 - 1/4 W'') / xi

The first integrals only build the initial jet and certify the trajectory;
integration always uses the regular fourth-order form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .exceptions import (
    BranchInfeasibleError,
    IntegrationError,
    NonFiniteError,
    ResidualError,
)
from .numerics import Grid1D, OdeState, RKControls, integrate_rk
from .potentials import PotentialModel

__all__ = [
    "ShiftOdeProblem",
    "GeneratedPotential",
    "PRESETS",
    "preset",
    "derive_initial_jet",
    "generate",
    "check_residual",
    "fourth_order_rhs",
]

FORMS = ("full_fourth_order", "first_integral_A", "first_integral_AB")
_JET_LEN = {"full_fourth_order": 4, "first_integral_A": 3, "first_integral_AB": 2}


@dataclass(frozen=True)
class ShiftOdeProblem:
    """Initial-value problem for ``W``.

    ``jet`` holds the prescribed initial values at ``xi0``: ``(W, W', W'')``
    for ``first_integral_A``, ``(W, W')`` for ``first_integral_AB`` (the
    second derivative then follows from the B integral on ``branch``) and
    ``(W, W', W'', W''')`` for ``full_fourth_order``.
    """

    form: str = "first_integral_A"
    A: float = 0.0
    B: Optional[float] = None
    xi0: float = 1.0
    jet: tuple = (0.0, 0.0, 0.0)
    branch: Optional[str] = None
    xi_range: tuple = (-10.0, 10.0)

    def __post_init__(self):
        if self.form not in FORMS:
            raise ValueError(f"form must be one of {FORMS}")
        jet = tuple(float(v) for v in self.jet)
        object.__setattr__(self, "jet", jet)
        object.__setattr__(self, "xi_range", tuple(float(v) for v in self.xi_range))
        if len(jet) != _JET_LEN[self.form]:
            raise ValueError(f"{self.form} needs {_JET_LEN[self.form]} initial values, got {len(jet)}")
        lo, hi = self.xi_range
        if not lo < hi:
            raise ValueError("xi_range must be increasing")
        if not lo <= self.xi0 <= hi:
            raise ValueError("anchor xi0 must lie inside xi_range")
        if self.form != "full_fourth_order" and self.xi0 == 0:
            raise ValueError("anchor xi0 = 0 is not allowed for the first-integral forms")
        if self.form == "first_integral_AB":
            if self.B is None:
                raise ValueError("first_integral_AB needs B")
            if self.branch not in ("plus", "minus"):
                raise ValueError("first_integral_AB needs branch 'plus' or 'minus'")
        elif self.branch is not None:
            raise ValueError("branch only applies to first_integral_AB")

    def to_dict(self) -> dict:
        return {
            "form": self.form,
            "A": self.A,
            "B": self.B,
            "xi0": self.xi0,
            "jet": list(self.jet),
            "branch": self.branch,
            "xi_range": list(self.xi_range),
        }


PRESETS = {
    "type1": ShiftOdeProblem("first_integral_A", A=-0.4, xi0=1.0, jet=(0, 0, 0), xi_range=(-10, 10)),
    "type2": ShiftOdeProblem("first_integral_A", A=-0.001, xi0=1.0, jet=(0, 0, 0), xi_range=(-40, 10)),
    "type3": ShiftOdeProblem(
        "first_integral_AB", A=0.0, B=-1.0, xi0=1.0, jet=(0, 0), branch="plus", xi_range=(-10, 40)
    ),
}


def preset(name: str, **overrides) -> ShiftOdeProblem:
    try:
        base = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return replace(base, **overrides) if overrides else base


def fourth_order_rhs(x, y):
    w, w1, w2, w3 = y
    return (w1, w2, w3, 4.0 * (3.0 * (w1 * w1 + w * w2) + x * x * w2 + 3.0 * x * w1))


def _third_from_A(A, x, w, w1, w2):
    return 4.0 / x * (3 * x * w * w1 - 1.5 * w * w + 0.25 * w2 + x**3 * w1 - A)


def _a_value(x, w, w1, w2, w3):
    return 3 * x * w * w1 - 1.5 * w * w - 0.25 * x * w3 + 0.25 * w2 + x**3 * w1


def _b_value(A, x, w, w1, w2):
    q = (A + 1.5 * w * w - 0.25 * w2) / x
    return -0.5 * q * q - 0.5 * w**3 + 0.125 * w1 * w1 - A * w


def derive_initial_jet(problem: ShiftOdeProblem) -> tuple:
    """``(W, W', W'', W''')`` at the anchor."""
    p = problem
    x = p.xi0
    if p.form == "full_fourth_order":
        return p.jet
    if p.form == "first_integral_A":
        w, w1, w2 = p.jet
        return (w, w1, w2, _third_from_A(p.A, x, w, w1, w2))
    w, w1 = p.jet
    rad = 0.25 * w1 * w1 - w**3 - 2 * p.A * w - 2 * p.B
    if rad < 0:
        raise BranchInfeasibleError(
            f"branch infeasible at anchor: radicand {rad:.6g} < 0 at xi0={x}"
        )
    sigma = 1.0 if p.branch == "plus" else -1.0
    w2 = 4.0 * (p.A + 1.5 * w * w - sigma * x * math.sqrt(rad))
    return (w, w1, w2, _third_from_A(p.A, x, w, w1, w2))


def integral_constants(problem: ShiftOdeProblem) -> tuple:
    """``(A, B)`` carried by the trajectory; the ones not prescribed are
    read off the initial jet."""
    jet = derive_initial_jet(problem)
    x = problem.xi0
    A = problem.A if problem.form != "full_fourth_order" else _a_value(x, *jet)
    if problem.B is not None and problem.form == "first_integral_AB":
        B = problem.B
    elif x != 0:
        B = _b_value(A, x, *jet[:3])
    else:
        B = None
    return A, B


def check_residual(xi, derivs, A: float, B: Optional[float] = None, origin_floor: float = 1e-6) -> dict:
    """Local relative residual of both first integrals per node.

    ``derivs`` has columns ``W, W', W'', W'''``. Each residual is
    ``|sum of terms - constant|`` over the largest absolute term at that node
    (the constant counts as a term; 0/0 gives 0). The B integral is used in
    its ``xi^2``-multiplied form, which is regular at ``xi = 0``; within
    ``origin_floor`` of the origin it degenerates to the A integral and its
    residual is reported as 0.
    """
    xi = np.asarray(xi, dtype=float)
    d = np.asarray(derivs, dtype=float)
    w, w1, w2, w3 = d[:, 0], d[:, 1], d[:, 2], d[:, 3]
    terms_a = np.stack(
        [3 * xi * w * w1, -1.5 * w * w, -0.25 * xi * w3, 0.25 * w2, xi**3 * w1, np.full_like(xi, -A)]
    )
    out = {"A": _relative(terms_a)}
    if B is not None:
        n = A + 1.5 * w * w - 0.25 * w2
        x2 = xi * xi
        terms_b = np.stack(
            [-0.5 * n * n, -0.5 * x2 * w**3, 0.125 * x2 * w1 * w1, -A * x2 * w, -B * x2]
        )
        out["B"] = np.where(np.abs(xi) < origin_floor, 0.0, _relative(terms_b))
    return out


def _relative(terms: np.ndarray) -> np.ndarray:
    total = np.abs(terms.sum(axis=0))
    scale = np.abs(terms).max(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(scale > 0, total / np.where(scale > 0, scale, 1.0), 0.0)
    return r


@dataclass(frozen=True)
class GeneratedPotential:
    """Sampled ``U = W + xi^2/2`` on the part of the grid the trajectory reached.

    ``singularities`` lists estimated pole positions where ``|W|`` exceeded the
    cap; their neighbourhoods are masked out in ``excluded``. ``accepted`` is
    False when the residual exceeds the tolerance elsewhere, ``partial`` when
    integration stopped early for a reason other than a pole.
    """

    problem: ShiftOdeProblem
    grid: Grid1D
    derivs: np.ndarray
    U: np.ndarray
    residual_A: np.ndarray
    residual_B: Optional[np.ndarray]
    excluded: np.ndarray
    singularities: tuple
    A: float
    B: Optional[float]
    accepted: bool
    partial: bool
    tolerance: float
    metadata: dict = field(default_factory=dict)

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def W(self) -> np.ndarray:
        return self.derivs[:, 0]

    @property
    def residual(self) -> np.ndarray:
        if self.residual_B is None:
            return self.residual_A
        return np.maximum(self.residual_A, self.residual_B)

    @property
    def max_residual(self) -> float:
        r = self.residual[~self.excluded]
        return float(r.max()) if r.size else 0.0

    def worst_node(self) -> int:
        r = np.where(self.excluded, -1.0, self.residual)
        return int(np.argmax(r))

    def potential_derivatives(self) -> np.ndarray:
        """Columns ``U, U', U'', U'''`` from the integrated jet."""
        x = self.x
        d = self.derivs
        return np.column_stack([self.U, d[:, 1] + x, d[:, 2] + 1.0, d[:, 3]])

    def to_model(self) -> PotentialModel:
        return PotentialModel.tabulated(self.grid, self.U, label="shift_ode")

    def summary(self) -> dict:
        return {
            "problem": self.problem.to_dict(),
            "A": self.A,
            "B": self.B,
            "grid": self.grid.to_dict(),
            "singularities": list(self.singularities),
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "accepted": self.accepted,
            "partial": self.partial,
            **self.metadata,
        }


def _integrate_side(jet, x0, x_end, nodes, controls, cap):
    """One direction; returns (x, y, pole estimate or None, partial flag)."""
    stop = lambda x, y: abs(y[0]) > cap  # noqa: E731
    start = OdeState(x0, tuple(jet))
    try:
        tr = integrate_rk(fourth_order_rhs, start, x_end, controls, out_x=nodes, stop=stop)
    except NonFiniteError as exc:
        # blew through the cap within one step
        last = exc.x if exc.x is not None else x0
        tr = integrate_rk(fourth_order_rhs, start, last, controls, out_x=[v for v in nodes if (v - last) * (x_end - x0) <= 0])
        return tr.x, tr.y, float(last), False
    except IntegrationError as exc:
        keep = [v for v in nodes if (v - exc.last_x) * (x_end - x0) <= 0]
        tr = integrate_rk(fourth_order_rhs, start, exc.last_x, RKControls(), out_x=keep)
        return tr.x, tr.y, None, True
    pole = None
    if tr.stopped:
        w_end = tr.end.y[0]
        direction = 1.0 if x_end > x0 else -1.0
        pole = tr.end.x + direction / math.sqrt(abs(w_end))
    return tr.x, tr.y, pole, False


def generate(
    problem: ShiftOdeProblem,
    grid: Optional[Grid1D] = None,
    *,
    controls: RKControls = RKControls(),
    cap: float = 1e6,
    tolerance: float = 1e-4,
    pole_exclusion: float = 0.05,
    certify: bool = True,
) -> GeneratedPotential:
    """Integrate outward from the anchor in both directions and sample U.

    The output grid defaults to spacing 0.005 over ``problem.xi_range``.
    Nodes beyond a pole are dropped, so the returned grid ends next to it;
    nodes within ``pole_exclusion`` of a pole are excluded from the residual
    certificate. With ``certify`` a residual above ``tolerance`` raises
    :class:`ResidualError`; otherwise the result is returned unaccepted.
    """
    if grid is None:
        grid = Grid1D.from_spacing(problem.xi_range[0], problem.xi_range[1], 0.005)
    jet = derive_initial_jet(problem)
    A, B = integral_constants(problem)
    x0 = problem.xi0
    nodes = grid.nodes

    right = nodes[nodes >= x0]
    left = nodes[nodes < x0][::-1]
    xr, yr, pole_r, part_r = _integrate_side(jet, x0, grid.x_max, right.tolist(), controls, cap)
    xl, yl, pole_l, part_l = _integrate_side(jet, x0, grid.x_min, left.tolist(), controls, cap)

    xs = np.concatenate([xl[::-1], xr])
    ys = np.vstack([yl[::-1], yr]) if len(xl) else yr
    ok = np.abs(ys[:, 0]) <= cap
    # keep the contiguous stretch around the anchor
    i_anchor = len(xl)
    lo = i_anchor
    while lo > 0 and ok[lo - 1]:
        lo -= 1
    hi = i_anchor
    while hi < len(xs) and ok[hi]:
        hi += 1
    first = int(round((xs[lo] - grid.x_min) / grid.h))
    sub = grid.subgrid(first, first + (hi - lo))
    ys = ys[lo:hi]
    x = sub.nodes

    poles = tuple(p for p in (pole_l, pole_r) if p is not None)
    excluded = np.zeros(len(x), dtype=bool)
    for p in poles:
        excluded |= np.abs(x - p) < pole_exclusion

    res = check_residual(x, ys, A, B)
    U = ys[:, 0] + 0.5 * x * x
    gen = GeneratedPotential(
        problem=problem,
        grid=sub,
        derivs=ys,
        U=U,
        residual_A=res["A"],
        residual_B=res.get("B"),
        excluded=excluded,
        singularities=poles,
        A=A,
        B=B,
        accepted=True,
        partial=part_l or part_r,
        tolerance=tolerance,
        metadata={"controls": controls.to_dict(), "cap": cap, "pole_exclusion": pole_exclusion},
    )
    worst = gen.max_residual
    if worst >= tolerance:
        gen = replace(gen, accepted=False)
        if certify:
            i = gen.worst_node()
            raise ResidualError(
                f"residual {worst:.3e} exceeds {tolerance:g} at xi={x[i]:.6g}",
                worst_index=i,
                worst_x=float(x[i]),
                worst_value=worst,
            )
    return gen
