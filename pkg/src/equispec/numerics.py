"""Numerical kernels: uniform grids, finite differences, the tridiagonal
Hamiltonian, its eigen-decomposition and explicit Runge-Kutta integration.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .exceptions import (
    EigenSolveError,
    GridError,
    IntegrationError,
    NonFiniteError,
    StepUnderflowError,
)

__all__ = [
    "Grid1D",
    "TridiagonalSym",
    "EigenSolution",
    "OdeState",
    "Trajectory",
    "RKControls",
    "build_hamiltonian",
    "eigensolve",
    "tridiagonal_ql",
    "integrate_rk",
    "fd_derivative",
    "fd_weights",
]


# --------------------------------------------------------------------------
# grids
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid ``x_min + i*h`` for ``i = 0 .. n_points-1``."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise GridError("grid bounds must be finite")
        if not self.x_min < self.x_max:
            raise GridError(f"x_min={self.x_min} must be < x_max={self.x_max}")
        if int(self.n_points) != self.n_points or self.n_points < 3:
            raise GridError(f"n_points must be an integer >= 3, got {self.n_points}")
        object.__setattr__(self, "n_points", int(self.n_points))

    @classmethod
    def from_spacing(cls, x_min: float, x_max: float, h: float) -> "Grid1D":
        """Grid starting at ``x_min`` with spacing ``h`` and the last node at or
        just past ``x_max`` (so the requested extent is always covered)."""
        if not h > 0:
            raise GridError(f"spacing must be positive, got {h}")
        n_int = math.ceil((x_max - x_min) / h - 1e-9)
        return cls(x_min, x_min + n_int * h, n_int + 1)

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def nodes(self) -> np.ndarray:
        return self.x_min + self.h * np.arange(self.n_points)

    def index_of(self, x: float) -> int:
        """Nearest node index to ``x`` (clipped to the grid)."""
        i = int(round((x - self.x_min) / self.h))
        return min(max(i, 0), self.n_points - 1)

    def subgrid(self, start: int, stop: int) -> "Grid1D":
        """Nodes ``start .. stop-1`` as a new grid with identical spacing."""
        if not 0 <= start < stop <= self.n_points or stop - start < 3:
            raise GridError(f"invalid subgrid range [{start}, {stop})")
        h = self.h
        return Grid1D(self.x_min + start * h, self.x_min + (stop - 1) * h, stop - start)

    def inner(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Grid inner product ``h * sum(u_i v_i)`` (along axis 0)."""
        return self.h * np.sum(np.asarray(u) * np.asarray(v), axis=0)

    def to_dict(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max, "n_points": self.n_points}


# --------------------------------------------------------------------------
# tridiagonal Hamiltonian
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TridiagonalSym:
    """Symmetric tridiagonal matrix stored as diagonal and off-diagonal."""

    diagonal: np.ndarray
    off_diagonal: np.ndarray

    def __post_init__(self):
        d = np.array(self.diagonal, dtype=float)
        e = np.array(self.off_diagonal, dtype=float)
        if d.ndim != 1 or e.ndim != 1 or len(e) != max(len(d) - 1, 0):
            raise ValueError("off_diagonal must have length len(diagonal) - 1")
        d.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "diagonal", d)
        object.__setattr__(self, "off_diagonal", e)

    @property
    def n(self) -> int:
        return len(self.diagonal)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        out = self.diagonal[:, None] * v if v.ndim == 2 else self.diagonal * v
        e = self.off_diagonal if v.ndim == 1 else self.off_diagonal[:, None]
        out[:-1] += e * v[1:]
        out[1:] += e * v[:-1]
        return out

    def to_dense(self) -> np.ndarray:
        return (
            np.diag(self.diagonal)
            + np.diag(self.off_diagonal, 1)
            + np.diag(self.off_diagonal, -1)
        )

    def norm_inf(self) -> float:
        a = np.abs(self.diagonal).copy()
        a[:-1] += np.abs(self.off_diagonal)
        a[1:] += np.abs(self.off_diagonal)
        return float(a.max())


def build_hamiltonian(potential_samples, grid: Grid1D, kinetic: float = 0.5) -> TridiagonalSym:
    """Three-point discretization of ``-kinetic * d^2/dx^2 + V`` with hard walls.

    ``potential_samples`` holds V at every grid node; the two end nodes are
    the Dirichlet walls, so the matrix acts on the ``n_points - 2`` interior
    nodes. ``kinetic`` is 1/2 in dimensionless units or hbar^2/(2 m*) in
    physical ones. End nodes may be ``+inf`` (hard wall); every other sample
    must be finite.
    """
    v = np.asarray(potential_samples, dtype=float)
    if v.shape != (grid.n_points,):
        raise GridError(
            f"expected {grid.n_points} potential samples aligned with the grid, got shape {v.shape}"
        )
    if not kinetic > 0 or not math.isfinite(kinetic):
        raise ValueError(f"kinetic scale must be positive and finite, got {kinetic}")
    interior = v[1:-1]
    bad = np.flatnonzero(~np.isfinite(interior))
    if bad.size:
        i = int(bad[0]) + 1
        raise NonFiniteError(f"non-finite potential sample at node {i}", index=i, x=float(grid.nodes[i]))
    for i in (0, grid.n_points - 1):
        if not (math.isfinite(v[i]) or v[i] == math.inf):
            raise NonFiniteError(f"non-finite potential sample at node {i}", index=i, x=float(grid.nodes[i]))
    c = kinetic / grid.h**2
    return TridiagonalSym(2.0 * c + interior, np.full(len(interior) - 1, -c))


# --------------------------------------------------------------------------
# eigen-decomposition
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EigenSolution:
    """Sorted eigenvalues with grid-orthonormal eigenvectors (columns).

    ``states`` has one row per grid node when ``grid`` is set (walls carry
    zeros), otherwise one row per matrix index.
    """

    energies: np.ndarray
    states: np.ndarray
    grid: Optional[Grid1D] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        e = np.array(self.energies, dtype=float)
        s = np.array(self.states, dtype=float)
        e.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "states", s)

    @property
    def k(self) -> int:
        return len(self.energies)

    @property
    def x(self) -> Optional[np.ndarray]:
        return None if self.grid is None else self.grid.nodes


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    # first component above 1e-8 * max|v| made positive
    amax = np.max(np.abs(vectors), axis=0)
    first = np.argmax(np.abs(vectors) > 1e-8 * amax, axis=0)
    signs = np.sign(vectors[first, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def tridiagonal_ql(t: TridiagonalSym, max_iter: int = 60):
    """Implicit QL with Wilkinson shifts; returns all eigenpairs, ascending.

    Reference implementation independent of LAPACK, meant for moderate n.
    Raises :class:`EigenSolveError` carrying the index whose eigenvalue did
    not converge within ``max_iter`` sweeps.
    """
    n = t.n
    d = np.array(t.diagonal, dtype=float)
    e = np.zeros(n)
    e[: n - 1] = t.off_diagonal
    z = np.eye(n)
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= np.finfo(float).eps * dd:
                    break
                m += 1
            if m == l:
                break
            if it == max_iter:
                raise EigenSolveError(f"QL iteration did not converge for eigenvalue {l}", index=l)
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi1 = z[:, i + 1].copy()
                z[:, i + 1] = s * z[:, i] + c * zi1
                z[:, i] = c * z[:, i] - s * zi1
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    order = np.argsort(d, kind="stable")
    return d[order], z[:, order]


def eigensolve(
    t: TridiagonalSym,
    k: int,
    *,
    spacing: float = 1.0,
    method: str = "lapack",
    residual_tol: float = 1e-8,
    max_iter: int = 60,
) -> EigenSolution:
    """Lowest ``k`` eigenpairs of ``t``.

    Vectors are normalized so that ``spacing * sum(v**2) == 1`` and signed so
    that their first significant component is positive. Each pair is checked
    against ``||H v - lambda v|| / ||v|| <= residual_tol * max(1, ||H||_inf)``.
    """
    n = t.n
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= {n}, got {k}")
    if method == "lapack":
        try:
            w, v = eigh_tridiagonal(
                t.diagonal, t.off_diagonal, select="i", select_range=(0, k - 1)
            )
        except LinAlgError as exc:
            raise EigenSolveError(f"LAPACK tridiagonal solver failed: {exc}") from exc
    elif method == "ql":
        w, v = tridiagonal_ql(t, max_iter=max_iter)
        w, v = w[:k], v[:, :k]
    else:
        raise ValueError(f"unknown eigensolver method {method!r}")

    order = np.argsort(w, kind="stable")
    w, v = w[order], v[:, order]
    v = v / np.linalg.norm(v, axis=0)
    res = np.linalg.norm(t.matvec(v) - v * w, axis=0)
    tol = residual_tol * max(1.0, t.norm_inf())
    bad = np.flatnonzero(~(res <= tol))
    if bad.size:
        i = int(bad[0])
        raise EigenSolveError(f"eigenpair {i} residual {res[i]:.3e} exceeds {tol:.3e}", index=i)
    v = _fix_signs(v) / math.sqrt(spacing)
    return EigenSolution(w, v, metadata={"method": method, "max_residual": float(res.max())})


# --------------------------------------------------------------------------
# Runge-Kutta integration
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class OdeState:
    """Position and state vector of an ODE system."""

    x: float
    y: tuple

    def __post_init__(self):
        y = tuple(float(v) for v in self.y)
        if not math.isfinite(self.x) or not all(math.isfinite(v) for v in y):
            raise NonFiniteError(f"non-finite ODE state at x={self.x}", x=self.x)
        object.__setattr__(self, "y", y)


@dataclass(frozen=True)
class RKControls:
    """Integrator settings.

    ``method`` is ``"rk4"`` (classic, fixed ``step``) or ``"dopri5"``
    (Dormand-Prince 5(4) with error control; ``step`` is the first trial
    step). ``min_step`` guards the adaptive method against singularities.
    """

    method: str = "rk4"
    step: float = 1e-4
    rtol: float = 1e-10
    atol: float = 1e-12
    min_step: float = 1e-12
    max_step: float = 0.05
    max_steps: int = 50_000_000

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "step": self.step,
            "rtol": self.rtol,
            "atol": self.atol,
            "min_step": self.min_step,
            "max_step": self.max_step,
        }


@dataclass
class Trajectory:
    """Integration result.

    ``x``/``y``/``dydx`` are sampled at the requested output nodes that were
    reached; ``stopped`` is True when the ``stop`` predicate fired at
    ``end_x`` before the target.
    """

    x: np.ndarray
    y: np.ndarray
    dydx: np.ndarray
    end: OdeState
    stopped: bool
    n_steps: int
    controls: RKControls

    @property
    def end_x(self) -> float:
        return self.end.x


_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_E = (
    71 / 57600,
    0.0,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)


def _rk4_step(f, x, y, h, k1):
    k2 = f(x + 0.5 * h, [a + 0.5 * h * b for a, b in zip(y, k1)])
    k3 = f(x + 0.5 * h, [a + 0.5 * h * b for a, b in zip(y, k2)])
    k4 = f(x + h, [a + h * b for a, b in zip(y, k3)])
    h6 = h / 6.0
    return [a + h6 * (b + 2.0 * c + 2.0 * d + e) for a, b, c, d, e in zip(y, k1, k2, k3, k4)]


def _dopri_step(f, x, y, h, k1):
    ks = [k1]
    for s in range(1, 7):
        a = _DP_A[s]
        yi = [y[i] + h * sum(a[j] * ks[j][i] for j in range(s)) for i in range(len(y))]
        ks.append(f(x + _DP_C[s] * h, yi))
    y5 = [y[i] + h * sum(_DP_B[j] * ks[j][i] for j in range(6)) for i in range(len(y))]
    err = [h * sum(_DP_E[j] * ks[j][i] for j in range(7)) for i in range(len(y))]
    return y5, err, ks[6]


def _hermite(x0, y0, f0, x1, y1, f1, xs):
    h = x1 - x0
    t = (xs - x0) / h
    t2 = t * t
    t3 = t2 * t
    h00 = 2 * t3 - 3 * t2 + 1
    h10 = t3 - 2 * t2 + t
    h01 = -2 * t3 + 3 * t2
    h11 = t3 - t2
    y0 = np.asarray(y0)
    y1 = np.asarray(y1)
    f0 = np.asarray(f0)
    f1 = np.asarray(f1)
    val = np.outer(h00, y0) + np.outer(h10 * h, f0) + np.outer(h01, y1) + np.outer(h11 * h, f1)
    dh00 = (6 * t2 - 6 * t) / h
    dh10 = 3 * t2 - 4 * t + 1
    dh01 = (-6 * t2 + 6 * t) / h
    dh11 = 3 * t2 - 2 * t
    der = np.outer(dh00, y0) + np.outer(dh10, f0) + np.outer(dh01, y1) + np.outer(dh11, f1)
    return val, der


def integrate_rk(
    rhs: Callable[[float, Sequence[float]], Sequence[float]],
    start: OdeState,
    x_end: float,
    controls: RKControls = RKControls(),
    *,
    out_x: Optional[Sequence[float]] = None,
    stop: Optional[Callable[[float, Sequence[float]], bool]] = None,
) -> Trajectory:
    """Integrate ``y' = rhs(x, y)`` from ``start`` to ``x_end``.

    ``rhs`` receives ``y`` as a list of floats and returns a sequence.
    Output is interpolated (cubic Hermite, using the right-hand side as
    derivative) at ``out_x``, which must be monotone in the direction of
    integration; by default the two end points are reported. ``stop(x, y)``
    returning True ends the integration after that step without error.

    Raises :class:`NonFiniteError` if the derivative becomes non-finite and
    :class:`StepUnderflowError` if the adaptive step collapses below
    ``controls.min_step``; both carry the last good abscissa.
    """
    x0 = float(start.x)
    y = list(start.y)
    span = float(x_end) - x0
    direction = 1.0 if span >= 0 else -1.0
    if out_x is None:
        out = np.array([x0, float(x_end)]) if span != 0 else np.array([x0])
    else:
        out = np.asarray(out_x, dtype=float)
        if out.size > 1 and np.any(np.diff(out) * direction < 0):
            raise ValueError("out_x must be monotone in the integration direction")

    def f(x, yy):
        d = rhs(x, yy)
        d = [float(v) for v in d]
        if not all(math.isfinite(v) for v in d):
            raise NonFiniteError(f"non-finite derivative at x={x}", x=x)
        return d

    xs_out: list = []
    ys_out: list = []
    ds_out: list = []
    j = 0  # next output node

    def emit_until(xa, ya, fa, xb, yb, fb):
        nonlocal j
        lo = j
        while j < out.size and (out[j] - xb) * direction <= 1e-14 * max(1.0, abs(xb)):
            j += 1
        if j > lo:
            pts = out[lo:j]
            if xb == xa:
                val = np.tile(np.asarray(yb), (len(pts), 1))
                der = np.tile(np.asarray(fb), (len(pts), 1))
            else:
                val, der = _hermite(xa, ya, fa, xb, yb, fb, pts)
            xs_out.extend(pts.tolist())
            ys_out.append(val)
            ds_out.append(der)

    fx = f(x0, y)
    # nodes behind the start are skipped
    while j < out.size and (out[j] - x0) * direction < -1e-14 * max(1.0, abs(x0)):
        j += 1
    emit_until(x0, y, fx, x0, y, fx)

    stopped = False
    n_steps = 0
    x = x0
    if span == 0:
        pass
    elif controls.method == "rk4":
        n = max(1, math.ceil(abs(span) / controls.step - 1e-9))
        h = span / n
        for i in range(n):
            try:
                ynew = _rk4_step(f, x, y, h, fx)
            except NonFiniteError as exc:
                raise NonFiniteError(str(exc), x=x) from exc
            xnew = x0 + (i + 1) * h if i + 1 < n else float(x_end)
            if not all(math.isfinite(v) for v in ynew):
                raise NonFiniteError(f"non-finite state after step from x={x}", x=x)
            fnew = f(xnew, ynew)
            emit_until(x, y, fx, xnew, ynew, fnew)
            x, y, fx = xnew, ynew, fnew
            n_steps += 1
            if stop is not None and stop(x, y):
                stopped = True
                break
    elif controls.method == "dopri5":
        h = direction * min(controls.step, abs(span))
        while (float(x_end) - x) * direction > 0:
            if n_steps >= controls.max_steps:
                raise IntegrationError("maximum number of steps exceeded", last_x=x)
            if abs(h) < controls.min_step:
                raise StepUnderflowError(
                    f"step size {abs(h):.3e} below minimum near x={x}", last_x=x
                )
            if (x + h - float(x_end)) * direction > 0:
                h = float(x_end) - x
            try:
                ynew, err, fnew = _dopri_step(f, x, y, h, fx)
            except NonFiniteError:
                h *= 0.25
                continue
            sc = [controls.atol + controls.rtol * max(abs(a), abs(b)) for a, b in zip(y, ynew)]
            enorm = math.sqrt(sum((e / s) ** 2 for e, s in zip(err, sc)) / len(y))
            if not math.isfinite(enorm):
                h *= 0.25
                continue
            if enorm <= 1.0:
                xnew = x + h if abs(float(x_end) - (x + h)) > 1e-15 * max(1.0, abs(x)) else float(x_end)
                emit_until(x, y, fx, xnew, ynew, fnew)
                x, y, fx = xnew, ynew, fnew
                n_steps += 1
                if stop is not None and stop(x, y):
                    stopped = True
                    break
                fac = 5.0 if enorm == 0 else min(5.0, max(0.2, 0.9 * enorm ** -0.2))
                h = direction * min(abs(h) * fac, controls.max_step)
            else:
                h *= max(0.2, 0.9 * enorm ** -0.2)
    else:
        raise ValueError(f"unknown Runge-Kutta method {controls.method!r}")

    if xs_out:
        y_arr = np.vstack(ys_out)
        d_arr = np.vstack(ds_out)
    else:
        y_arr = np.empty((0, len(y)))
        d_arr = np.empty((0, len(y)))
    return Trajectory(
        x=np.asarray(xs_out, dtype=float),
        y=y_arr,
        dydx=d_arr,
        end=OdeState(x, tuple(y)),
        stopped=stopped,
        n_steps=n_steps,
        controls=controls,
    )


# --------------------------------------------------------------------------
# finite differences
# --------------------------------------------------------------------------


def fd_weights(x0: float, xs: Sequence[float], order: int) -> np.ndarray:
    """Finite-difference weights for the ``order``-th derivative at ``x0``
    on the stencil ``xs`` (Fornberg's recursion)."""
    xs = np.asarray(xs, dtype=float)
    n = len(xs)
    c = np.zeros((n, order + 1))
    c1, c4 = 1.0, xs[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2, c5, c4 = 1.0, c4, xs[i] - x0
        for j in range(i):
            c3 = xs[i] - xs[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def fd_derivative(samples, grid: Grid1D, order: int, accuracy: int = 2) -> np.ndarray:
    """Derivative of grid samples by finite differences.

    Centered stencils of formal accuracy ``accuracy`` (even) in the interior,
    shifted one-sided stencils with the same number of points near the ends.
    Exact for polynomials up to the stencil degree.
    """
    if order not in (1, 2, 3, 4):
        raise ValueError(f"order must be 1..4, got {order}")
    if accuracy < 2 or accuracy % 2:
        raise ValueError("accuracy must be an even integer >= 2")
    f = np.asarray(samples, dtype=float)
    if f.shape[0] != grid.n_points:
        raise GridError(f"expected {grid.n_points} samples, got {f.shape[0]}")
    width = 2 * ((order + 1) // 2) - 1 + accuracy
    if grid.n_points < width:
        raise GridError(
            f"grid with {grid.n_points} points too small for order-{order} stencil of width {width}"
        )
    half = width // 2
    h = grid.h
    offsets = np.arange(-half, half + 1)
    w_center = fd_weights(0.0, offsets, order) / h**order
    n = grid.n_points
    out = np.empty_like(f)
    inner = slice(half, n - half)
    acc = np.zeros_like(f[inner])
    for w, o in zip(w_center, offsets):
        acc = acc + w * f[half + o : n - half + o]
    out[inner] = acc
    for i in list(range(half)) + list(range(n - half, n)):
        start = min(max(i - half, 0), n - width)
        idx = np.arange(start, start + width)
        w = fd_weights(float(i), idx.astype(float), order) / h**order
        out[i] = np.tensordot(w, f[idx], axes=(0, 0))
    return out


def check_boundary_confinement(potential_samples, energies, *, stacklevel: int = 3) -> bool:
    """Warn when the potential at a wall lies below the highest energy.

    Returns True when both walls confine all requested levels.
    """
    v = np.asarray(potential_samples, dtype=float)
    e_max = float(np.max(energies))
    ok = bool(min(v[0], v[-1]) > e_max)
    if not ok:
        warnings.warn(
            f"boundary potential {min(v[0], v[-1]):.6g} does not exceed the highest "
            f"requested eigenvalue {e_max:.6g}; enlarge the domain",
            RuntimeWarning,
            stacklevel=stacklevel,
        )
    return ok
