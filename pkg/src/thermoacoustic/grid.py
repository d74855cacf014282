"""Staggered 1D grid, discrete operators, inner products and a tridiagonal kernel.

The domain is Omega = (0, L) with homogeneous Dirichlet conditions on the
node-centred unknowns.  Scalar fields (pressure, temperature) live at the N
interior nodes x_j = j*dx, j = 1..N; flux-like fields live at the N+1 cell
faces x_{j+1/2} = (j+1/2)*dx, j = 0..N, with dx = L/(N+1).  The two boundary
values of a node field are implicitly zero and are never stored.

The discrete gradient (nodes -> faces, with the zero boundary closure) and
the discrete divergence (faces -> nodes) are exact negative adjoints with
respect to the plain dx-weighted Euclidean inner products defined here:

    <div w, v>_nodes = -<w, grad v>_faces     for all w, v,

to rounding error.  This summation-by-parts identity is what makes the
semi-discrete energy balances of the heat and wave steppers exact in space,
and it pins the quadrature: every node and every face carries the full
weight dx (the faces are strictly interior points of the domain, so no
boundary half-weighting applies; total face weight is (N+1)*dx = L).

The same quadrature makes the discrete Parseval identities exact: for the
eigenpair u_j = sin(k*pi*x_j/L) the discrete Laplacian returns
-lambda_h(k) * u with lambda_h(k) = (4/dx^2) sin^2(k*pi*dx/(2L)), and
||sin||^2 = ||cos||^2 = L/2 exactly (up to rounding).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid1D",
    "NodeField",
    "FaceField",
    "GridMismatch",
    "SingularSystem",
    "gradient_to_faces",
    "divergence_from_faces",
    "laplacian_dirichlet",
    "interior_gradient",
    "l2_inner",
    "l2_norm",
    "linf_norm",
    "h1_seminorm",
    "solve_tridiagonal",
]


class GridMismatch(ValueError):
    """Fields living on different grids (or of different kinds) were combined."""


class SingularSystem(ArithmeticError):
    """Tridiagonal elimination met a vanishing pivot."""


@dataclass(frozen=True)
class Grid1D:
    """Uniform staggered grid on (0, L) with N interior nodes.

    dx = L/(N+1); nodes at j*dx (j = 1..N), faces at (j+1/2)*dx (j = 0..N).
    """

    L: float
    N: int

    def __post_init__(self) -> None:
        if self.N < 2:
            raise ValueError(f"need at least 2 interior nodes, got N={self.N}")
        if not self.L > 0.0:
            raise ValueError(f"domain length must be positive, got L={self.L}")

    @property
    def dx(self) -> float:
        return self.L / (self.N + 1)

    def nodes(self) -> np.ndarray:
        """Coordinates of the interior nodes, length N."""
        return np.arange(1, self.N + 1, dtype=float) * self.dx

    def faces(self) -> np.ndarray:
        """Coordinates of the cell faces, length N+1."""
        return (np.arange(0, self.N + 1, dtype=float) + 0.5) * self.dx

    def laplacian_eigenvalue(self, k: int) -> float:
        """Eigenvalue lambda_h(k) of -Delta_h for the mode sin(k*pi*x/L)."""
        s = math.sin(k * math.pi * self.dx / (2.0 * self.L))
        return 4.0 / self.dx**2 * s * s

    def node_field(self, values) -> "NodeField":
        return NodeField(self, values)

    def face_field(self, values) -> "FaceField":
        return FaceField(self, values)

    def zero_node_field(self) -> "NodeField":
        return NodeField(self, np.zeros(self.N))

    def zero_face_field(self) -> "FaceField":
        return FaceField(self, np.zeros(self.N + 1))


class _Field:
    """Shared machinery of NodeField / FaceField: validation and arithmetic."""

    __slots__ = ("grid", "values")

    _length_offset = 0  # number of entries minus N

    def __init__(self, grid: Grid1D, values) -> None:
        vals = np.asarray(values, dtype=float)
        expected = grid.N + self._length_offset
        if vals.shape != (expected,):
            raise ValueError(
                f"{type(self).__name__} on N={grid.N} needs shape ({expected},), "
                f"got {vals.shape}"
            )
        if not np.isfinite(vals).all():
            raise ValueError(f"{type(self).__name__} contains non-finite entries")
        self.grid = grid
        self.values = vals

    def _check_compatible(self, other: "_Field") -> None:
        if type(self) is not type(other):
            raise GridMismatch(
                f"cannot combine {type(self).__name__} with {type(other).__name__}"
            )
        if self.grid != other.grid:
            raise GridMismatch("fields live on different grids")

    def __add__(self, other):
        self._check_compatible(other)
        return type(self)(self.grid, self.values + other.values)

    def __sub__(self, other):
        self._check_compatible(other)
        return type(self)(self.grid, self.values - other.values)

    def __mul__(self, scalar):
        return type(self)(self.grid, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return type(self)(self.grid, -self.values)

    def copy(self):
        return type(self)(self.grid, self.values.copy())

    def __repr__(self) -> str:
        return f"{type(self).__name__}(N={self.grid.N}, values={self.values!r})"


class NodeField(_Field):
    """Real field at the N interior nodes; boundary values are implicitly 0."""

    _length_offset = 0


class FaceField(_Field):
    """Real field at the N+1 cell faces."""

    _length_offset = 1


def gradient_to_faces(u: NodeField) -> FaceField:
    """Difference quotient (u_{j+1} - u_j)/dx with the zero Dirichlet closure."""
    vals = np.diff(u.values, prepend=0.0, append=0.0) / u.grid.dx
    return FaceField(u.grid, vals)


def divergence_from_faces(w: FaceField) -> NodeField:
    """Difference quotient (w_{j+1/2} - w_{j-1/2})/dx at the nodes."""
    return NodeField(w.grid, np.diff(w.values) / w.grid.dx)


def laplacian_dirichlet(u: NodeField) -> NodeField:
    """Standard 3-point Laplacian; by construction div(grad(u)) bit for bit."""
    return divergence_from_faces(gradient_to_faces(u))


def interior_gradient(u: NodeField) -> np.ndarray:
    """One-sided gradient on the N-1 interior faces, without boundary closure.

    For fields that do not vanish on the boundary (frozen coefficients such
    as the wave-speed field): the Dirichlet closure of gradient_to_faces
    would fabricate O(1/dx) boundary gradients for them.
    """
    return np.diff(u.values) / u.grid.dx


def _quadrature_dot(a: np.ndarray, b: np.ndarray, dx: float) -> float:
    return dx * float(np.dot(a, b))


def l2_inner(u: _Field, v: _Field) -> float:
    """dx-weighted Euclidean inner product of two same-kind, same-grid fields."""
    u._check_compatible(v)
    return _quadrature_dot(u.values, v.values, u.grid.dx)


def l2_norm(u: _Field) -> float:
    return math.sqrt(_quadrature_dot(u.values, u.values, u.grid.dx))


def linf_norm(u: _Field) -> float:
    return float(np.max(np.abs(u.values)))


def h1_seminorm(u: NodeField) -> float:
    """L2 norm of the Dirichlet gradient."""
    return l2_norm(gradient_to_faces(u))


_PIVOT_RTOL = 1e-14


def _thomas(diag, lower, upper, rhs):
    """Thomas elimination on Python lists; returns the solution as a list.

    Raises SingularSystem when a pivot falls below _PIVOT_RTOL times the
    max-abs row scale of the original matrix row.
    """
    n = len(diag)
    d = [0.0] * n
    y = [0.0] * n
    piv = diag[0]
    scale = abs(diag[0]) + (abs(upper[0]) if n > 1 else 0.0)
    if scale == 0.0 or abs(piv) < _PIVOT_RTOL * scale:
        raise SingularSystem(f"vanishing pivot at row 0 (pivot={piv!r})")
    d[0] = piv
    y[0] = rhs[0]
    for i in range(1, n):
        w = lower[i - 1] / d[i - 1]
        piv = diag[i] - w * upper[i - 1]
        scale = abs(lower[i - 1]) + abs(diag[i]) + (abs(upper[i]) if i < n - 1 else 0.0)
        if scale == 0.0 or abs(piv) < _PIVOT_RTOL * scale:
            raise SingularSystem(f"vanishing pivot at row {i} (pivot={piv!r})")
        d[i] = piv
        y[i] = rhs[i] - w * y[i - 1]
    x = [0.0] * n
    x[n - 1] = y[n - 1] / d[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = (y[i] - upper[i] * x[i + 1]) / d[i]
    return x


def solve_tridiagonal(diag, lower, upper, rhs: NodeField) -> NodeField:
    """Solve the tridiagonal system A x = rhs for a node field.

    diag has length N, lower/upper length N-1 (lower[i] sits on row i+1).
    Intended for the diagonally dominant systems assembled by the implicit
    steppers; the residual then satisfies ||A x - rhs||_inf <= 1e-10
    ||rhs||_inf.  Raises SingularSystem on a vanishing pivot.
    """
    n = rhs.grid.N
    dg = np.asarray(diag, dtype=float)
    lo = np.asarray(lower, dtype=float)
    up = np.asarray(upper, dtype=float)
    if dg.shape != (n,) or lo.shape != (n - 1,) or up.shape != (n - 1,):
        raise ValueError("tridiagonal bands have inconsistent lengths")
    x = _thomas(dg.tolist(), lo.tolist(), up.tolist(), rhs.values.tolist())
    return NodeField(rhs.grid, np.asarray(x))
