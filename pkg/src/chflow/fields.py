"""Scalar fields with explicit derivative channels on a uniform 1-D grid.

The solver state lives in spaces of C1 functions on the real line that are
square integrable and whose derivative decays at infinity.  On a truncated
domain [x_min, x_max] such a function is carried as paired samples
(u(x_k), u'(x_k)).  The derivative channel is data, not something recomputed
by finite differences: the sup norm of u' is part of the topology the solver
works in, and every operator in the package produces that channel from an
analytic identity.

Two containers are provided:

* ScalarField1 - value + derivative samples (velocity fields, displacements,
  tangent vectors, operator outputs),
* ScalarField0 - value samples only (continuous decaying source terms).

Off-grid evaluation of a ScalarField1 uses cubic Hermite interpolation on the
containing cell, which consumes exactly the (value, derivative) pairs carried
and reproduces cubic polynomials.  Outside the truncated domain every field
is zero by the decay convention; truncation is justified because admissible
data and the exponential kernels used downstream decay at least exponentially
fast relative to the domain margin.

The norm used throughout is

    ||u||_{1,1} = sup|u| + sup|u'| + sqrt( int u^2 + int u'^2 ),

the sum of the C1 and H1 norms, with the integrals evaluated by composite
trapezoid on the grid.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, NamedTuple

import numpy as np

from .errors import GridMismatch, ParseError

__all__ = [
    "Grid",
    "ScalarField1",
    "ScalarField0",
    "NormComponents",
    "norm_components",
    "norm_11",
    "MembershipReport",
    "check_membership",
    "derivative_consistency",
    "reflect",
    "write_field_csv",
    "read_field_csv",
]

DEFAULT_TAIL_TOL = 1e-8


@dataclass(frozen=True)
class Grid:
    """Uniform sampling x_k = x_min + k*h, k = 0 .. n-1."""

    x_min: float
    h: float
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.x_min) and np.isfinite(self.h)):
            raise ValueError("grid endpoints must be finite")
        if self.h <= 0:
            raise ValueError(f"grid spacing must be positive, got {self.h}")
        if self.n < 2:
            raise ValueError(f"grid needs at least two samples, got {self.n}")

    @classmethod
    def from_interval(cls, x_min: float, x_max: float, n: int) -> "Grid":
        if not x_min < x_max:
            raise ValueError(f"empty interval [{x_min}, {x_max}]")
        if n < 2:
            raise ValueError(f"grid needs at least two samples, got {n}")
        return cls(x_min, (x_max - x_min) / (n - 1), n)

    @property
    def x_max(self) -> float:
        return self.x_min + self.h * (self.n - 1)

    @cached_property
    def x(self) -> np.ndarray:
        xs = self.x_min + self.h * np.arange(self.n)
        xs.setflags(write=False)
        return xs

    def is_symmetric(self) -> bool:
        return abs(self.x_min + self.x_max) <= 1e-12 * (self.x_max - self.x_min)


def _own_array(values, n: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True).reshape(-1)
    if arr.shape != (n,):
        raise ValueError(f"{name} must have {n} samples, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


def _trapz(y: np.ndarray, h: float) -> float:
    return h * (y.sum() - 0.5 * (y[0] + y[-1]))


def _hermite_eval(grid: Grid, u: np.ndarray, du: np.ndarray, x):
    """Cubic Hermite value/derivative at x; (0, 0) outside the domain."""
    xa = np.asarray(x, dtype=float)
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    if not np.isfinite(xa).all():
        raise ValueError("evaluation points must be finite")
    inside = (xa >= grid.x_min) & (xa <= grid.x_max)
    xc = np.clip(xa, grid.x_min, grid.x_max)
    idx = np.clip(((xc - grid.x_min) / grid.h).astype(int), 0, grid.n - 2)
    h = grid.h
    t = (xc - (grid.x_min + idx * h)) / h
    t2 = t * t
    t3 = t2 * t
    u0, u1 = u[idx], u[idx + 1]
    m0, m1 = du[idx], du[idx + 1]
    val = ((2 * t3 - 3 * t2 + 1) * u0 + (t3 - 2 * t2 + t) * h * m0
           + (-2 * t3 + 3 * t2) * u1 + (t3 - t2) * h * m1)
    der = ((6 * t2 - 6 * t) / h * u0 + (3 * t2 - 4 * t + 1) * m0
           + (6 * t - 6 * t2) / h * u1 + (3 * t2 - 2 * t) * m1)
    val = np.where(inside, val, 0.0)
    der = np.where(inside, der, 0.0)
    if scalar:
        return float(val[0]), float(der[0])
    return val, der


@dataclass
class ScalarField1:
    """C1-grade field: value and derivative samples on a shared grid."""

    grid: Grid
    u: np.ndarray
    du: np.ndarray

    def __post_init__(self):
        self.u = _own_array(self.u, self.grid.n, "u")
        self.du = _own_array(self.du, self.grid.n, "du")

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField1":
        z = np.zeros(grid.n)
        return cls(grid, z, z)

    @classmethod
    def from_callable(cls, grid: Grid, f: Callable, df: Callable) -> "ScalarField1":
        return cls(grid, f(grid.x), df(grid.x))

    def eval(self, x):
        """Value and derivative at x (scalar or array); zero outside the domain."""
        return _hermite_eval(self.grid, self.u, self.du, x)

    def _check_same_grid(self, other: "ScalarField1"):
        if self.grid != other.grid:
            raise GridMismatch("fields live on different grids")

    def __add__(self, other: "ScalarField1") -> "ScalarField1":
        self._check_same_grid(other)
        return ScalarField1(self.grid, self.u + other.u, self.du + other.du)

    def __sub__(self, other: "ScalarField1") -> "ScalarField1":
        self._check_same_grid(other)
        return ScalarField1(self.grid, self.u - other.u, self.du - other.du)

    def __mul__(self, c: float) -> "ScalarField1":
        return ScalarField1(self.grid, c * self.u, c * self.du)

    __rmul__ = __mul__

    def __neg__(self) -> "ScalarField1":
        return ScalarField1(self.grid, -self.u, -self.du)


@dataclass
class ScalarField0:
    """Continuous decaying source term: value samples only."""

    grid: Grid
    g: np.ndarray

    def __post_init__(self):
        self.g = _own_array(self.g, self.grid.n, "g")

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField0":
        return cls(grid, np.zeros(grid.n))

    def eval(self, x):
        """Cubic Lagrange interpolation of the value samples; zero outside."""
        xa = np.asarray(x, dtype=float)
        scalar = xa.ndim == 0
        xa = np.atleast_1d(xa)
        if not np.isfinite(xa).all():
            raise ValueError("evaluation points must be finite")
        grid = self.grid
        if grid.n < 4:
            val, _ = _hermite_eval(grid, self.g, np.zeros(grid.n), xa)
            return float(val[0]) if scalar else val
        inside = (xa >= grid.x_min) & (xa <= grid.x_max)
        xc = np.clip(xa, grid.x_min, grid.x_max)
        cell = np.clip(((xc - grid.x_min) / grid.h).astype(int), 0, grid.n - 2)
        base = np.clip(cell - 1, 0, grid.n - 4)
        s = (xc - (grid.x_min + base * grid.h)) / grid.h
        g = self.g
        val = (-(s - 1) * (s - 2) * (s - 3) / 6.0 * g[base]
               + s * (s - 2) * (s - 3) / 2.0 * g[base + 1]
               - s * (s - 1) * (s - 3) / 2.0 * g[base + 2]
               + s * (s - 1) * (s - 2) / 6.0 * g[base + 3])
        val = np.where(inside, val, 0.0)
        return float(val[0]) if scalar else val


class NormComponents(NamedTuple):
    sup_u: float
    sup_du: float
    l2_u: float
    l2_du: float


def norm_components(f: ScalarField1) -> NormComponents:
    """Sup norms of both channels and trapezoidal L2 norms of both channels."""
    return NormComponents(
        float(np.abs(f.u).max()),
        float(np.abs(f.du).max()),
        float(np.sqrt(_trapz(f.u * f.u, f.grid.h))),
        float(np.sqrt(_trapz(f.du * f.du, f.grid.h))),
    )


def norm_11(f: ScalarField1) -> float:
    """C1 + H1 norm: sup|u| + sup|u'| + sqrt(int u^2 + int u'^2)."""
    c = norm_components(f)
    return c.sup_u + c.sup_du + float(np.hypot(c.l2_u, c.l2_du))


@dataclass
class MembershipReport:
    """Measured admissibility conditions for a candidate velocity field.

    Conditions mirror the function space the solver works in: a finite C1
    bound, finite L2 norms of value and derivative, and decay of both
    channels at the truncation boundary (the grid surrogate for vanishing
    at infinity).
    """

    sup_u: float
    sup_du: float
    l2_u: float
    l2_du: float
    boundary_value: float
    boundary_deriv: float
    tail_tol: float
    bounded_ok: bool
    square_integrable_ok: bool
    boundary_decay_ok: bool

    @property
    def ok(self) -> bool:
        return self.bounded_ok and self.square_integrable_ok and self.boundary_decay_ok

    def conditions(self):
        yield ("c1_bound_finite", max(self.sup_u, self.sup_du), self.bounded_ok)
        yield ("l2_norms_finite", max(self.l2_u, self.l2_du), self.square_integrable_ok)
        yield ("boundary_decay", max(self.boundary_value, self.boundary_deriv),
               self.boundary_decay_ok)

    def failures(self) -> list[str]:
        return [name for name, _, passed in self.conditions() if not passed]


def check_membership(f: ScalarField1, tail_tol: float = DEFAULT_TAIL_TOL) -> MembershipReport:
    """Report whether f qualifies as admissible C1 + H1 data on this grid."""
    c = norm_components(f)
    bval = float(max(abs(f.u[0]), abs(f.u[-1])))
    bder = float(max(abs(f.du[0]), abs(f.du[-1])))
    return MembershipReport(
        sup_u=c.sup_u,
        sup_du=c.sup_du,
        l2_u=c.l2_u,
        l2_du=c.l2_du,
        boundary_value=bval,
        boundary_deriv=bder,
        tail_tol=tail_tol,
        bounded_ok=bool(np.isfinite([c.sup_u, c.sup_du]).all()),
        square_integrable_ok=bool(np.isfinite([c.l2_u, c.l2_du]).all()),
        boundary_decay_ok=bool(max(bval, bder) <= tail_tol),
    )


def derivative_consistency(f: ScalarField1) -> float:
    """Max deviation between the derivative channel and centered differences.

    Diagnostic only: O(h^2) for smooth consistent fields.  Boundary nodes use
    one-sided second-order stencils.
    """
    fd = np.gradient(f.u, f.grid.h, edge_order=2)
    return float(np.abs(fd - f.du).max())


def reflect(f: ScalarField1) -> ScalarField1:
    """The field x -> -f(-x); requires a symmetric grid."""
    if not f.grid.is_symmetric():
        raise GridMismatch("reflection needs a grid symmetric about zero")
    return ScalarField1(f.grid, -f.u[::-1], f.du[::-1])


def write_field_csv(f: ScalarField1, path, header=("x", "u", "du")) -> None:
    """Serialize as CSV with 17 significant digits per value."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for x, u, du in zip(f.grid.x, f.u, f.du):
            w.writerow([f"{x:.17g}", f"{u:.17g}", f"{du:.17g}"])


def read_field_csv(path, header=("x", "u", "du")) -> ScalarField1:
    """Read a field CSV produced by write_field_csv; grid is inferred from x."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path}: empty file")
    if [c.strip() for c in rows[0]] != list(header):
        raise ParseError(f"{path}: expected columns {','.join(header)}, "
                         f"got {','.join(rows[0])}")
    try:
        data = np.array([[float(v) for v in row] for row in rows[1:]], dtype=float)
    except ValueError as exc:
        raise ParseError(f"{path}: non-numeric entry ({exc})") from None
    if data.ndim != 2 or data.shape[1] != 3 or data.shape[0] < 2:
        raise ParseError(f"{path}: need at least two rows of three columns")
    x = data[:, 0]
    h = x[1] - x[0]
    if h <= 0 or np.abs(np.diff(x) - h).max() > 1e-9 * max(1.0, abs(h)):
        raise ParseError(f"{path}: x column is not a uniform increasing grid")
    grid = Grid(float(x[0]), float(h), len(x))
    return ScalarField1(grid, data[:, 1], data[:, 2])
