"""Domain types for linear first-order ODE boundary-value problems.

A problem is the system y'(t) + A(t) y(t) = f(t) on a finite interval
together with l scalar boundary conditions B y = c.  Coefficients are
modelled as time-dependent complex matrix/vector functions with derivative
access up to a declared order, and the graded sup-norms of n-times
continuously differentiable functions are approximated on sampling grids.
"""

import numbers
from dataclasses import dataclass

import numpy as np

from .errors import DerivativeOrderError, ValidationError

__all__ = [
    "Interval",
    "ProblemDims",
    "MatrixFunction",
    "VectorFunction",
    "ConstantMatrix",
    "ConstantVector",
    "CallableMatrix",
    "CallableVector",
    "Problem",
    "sample_grid",
    "cn_norm",
    "matrix_cn_norm",
    "vec_norm",
    "mat_norm",
]


@dataclass(frozen=True)
class Interval:
    """Closed interval [a, b] of the real line with a < b."""

    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (np.isfinite(a) and np.isfinite(b)):
            raise ValidationError("interval endpoints must be finite numbers")
        if not a < b:
            raise ValidationError(f"interval requires a < b, got [{a}, {b}]")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def length(self) -> float:
        return self.b - self.a

    def contains(self, t: float, slack: float = 0.0) -> bool:
        return self.a - slack <= t <= self.b + slack


@dataclass(frozen=True)
class ProblemDims:
    """System dimension m, condition count l, and smoothness class n.

    The boundary condition is overdetermined when l > m, underdetermined
    when l < m, and square when l = m.
    """

    m: int
    l: int
    n: int

    def __post_init__(self):
        for name in ("m", "l", "n"):
            value = getattr(self, name)
            if not isinstance(value, numbers.Integral) or value < 1:
                raise ValidationError(f"dims.{name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))

    @property
    def classification(self) -> str:
        if self.l > self.m:
            return "overdetermined"
        if self.l < self.m:
            return "underdetermined"
        return "square"


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


class MatrixFunction:
    """Time-dependent complex matrix with derivative evaluation.

    Subclasses implement ``eval(t, j)`` returning the value of the j-th
    derivative at t as a (rows, cols) complex array.  ``max_deriv_order``
    is the highest supported j; ``None`` means every order is available
    (smooth by construction).
    """

    rows: int
    cols: int
    max_deriv_order: "int | None" = None

    def eval(self, t: float, j: int = 0) -> np.ndarray:
        raise NotImplementedError

    def check_order(self, j: int) -> None:
        if j < 0:
            raise ValidationError("derivative order must be >= 0")
        if self.max_deriv_order is not None and j > self.max_deriv_order:
            raise DerivativeOrderError(
                f"derivative order {j} unavailable (supported up to {self.max_deriv_order})"
            )

    def column(self, c: int) -> "VectorFunction":
        return _MatrixColumn(self, c)


class VectorFunction:
    """Time-dependent complex vector with derivative evaluation.

    Same conventions as :class:`MatrixFunction`, with values of shape (dim,).
    """

    dim: int
    max_deriv_order: "int | None" = None

    def eval(self, t: float, j: int = 0) -> np.ndarray:
        raise NotImplementedError

    def check_order(self, j: int) -> None:
        if j < 0:
            raise ValidationError("derivative order must be >= 0")
        if self.max_deriv_order is not None and j > self.max_deriv_order:
            raise DerivativeOrderError(
                f"derivative order {j} unavailable (supported up to {self.max_deriv_order})"
            )


class _MatrixColumn(VectorFunction):
    def __init__(self, parent: MatrixFunction, c: int):
        if not 0 <= c < parent.cols:
            raise ValidationError(f"column index {c} out of range for {parent.cols} columns")
        self._parent = parent
        self._c = c
        self.dim = parent.rows
        self.max_deriv_order = parent.max_deriv_order

    def eval(self, t, j=0):
        return self._parent.eval(t, j)[:, self._c]


class ConstantMatrix(MatrixFunction):
    """Constant coefficient matrix; all derivatives of order >= 1 vanish."""

    def __init__(self, values):
        arr = np.array(values, dtype=complex)
        if arr.ndim != 2:
            raise ValidationError("constant matrix must be two-dimensional")
        self.values = _readonly(arr)
        self.rows, self.cols = arr.shape
        self.max_deriv_order = None
        self._zero = _readonly(np.zeros_like(arr))

    def eval(self, t, j=0):
        self.check_order(j)
        return self.values if j == 0 else self._zero


class ConstantVector(VectorFunction):
    """Constant vector; all derivatives of order >= 1 vanish."""

    def __init__(self, values):
        arr = np.array(values, dtype=complex)
        if arr.ndim != 1:
            raise ValidationError("constant vector must be one-dimensional")
        self.values = _readonly(arr)
        self.dim = arr.shape[0]
        self.max_deriv_order = None
        self._zero = _readonly(np.zeros_like(arr))

    def eval(self, t, j=0):
        self.check_order(j)
        return self.values if j == 0 else self._zero


class CallableMatrix(MatrixFunction):
    """Matrix function backed by a callable ``fn(t, j) -> array``."""

    def __init__(self, rows, cols, fn, max_deriv_order=None):
        self.rows = rows
        self.cols = cols
        self._fn = fn
        self.max_deriv_order = max_deriv_order

    def eval(self, t, j=0):
        self.check_order(j)
        return np.asarray(self._fn(t, j), dtype=complex)


class CallableVector(VectorFunction):
    """Vector function backed by a callable ``fn(t, j) -> array``."""

    def __init__(self, dim, fn, max_deriv_order=None):
        self.dim = dim
        self._fn = fn
        self.max_deriv_order = max_deriv_order

    def eval(self, t, j=0):
        self.check_order(j)
        return np.atleast_1d(np.asarray(self._fn(t, j), dtype=complex))


@dataclass(frozen=True)
class Problem:
    """Boundary-value problem y' + A(t) y = f(t) on [a, b] with B y = c.

    ``B`` is a boundary operator mapping sufficiently smooth vector
    functions to complex l-vectors (see :mod:`charbvp.boundary`).
    """

    interval: Interval
    dims: ProblemDims
    A: MatrixFunction
    f: VectorFunction
    B: object
    c: np.ndarray

    def __post_init__(self):
        m, l, n = self.dims.m, self.dims.l, self.dims.n
        if (self.A.rows, self.A.cols) != (m, m):
            raise ValidationError(
                f"A must be {m}x{m}, got {self.A.rows}x{self.A.cols}"
            )
        if self.A.max_deriv_order is not None and self.A.max_deriv_order < n - 1:
            raise ValidationError(
                f"A must provide derivatives up to order n-1 = {n - 1}"
            )
        if self.f.dim != m:
            raise ValidationError(f"f must have dimension {m}, got {self.f.dim}")
        if self.f.max_deriv_order is not None and self.f.max_deriv_order < n - 1:
            raise ValidationError(
                f"f must provide derivatives up to order n-1 = {n - 1}"
            )
        if getattr(self.B, "output_dim", None) != l:
            raise ValidationError(
                f"boundary operator must produce {l} conditions, got {getattr(self.B, 'output_dim', None)}"
            )
        if getattr(self.B, "input_dim", None) != m:
            raise ValidationError(
                f"boundary operator must act on dimension {m}, got {getattr(self.B, 'input_dim', None)}"
            )
        if self.B.input_smoothness > n:
            raise ValidationError(
                f"boundary operator needs derivatives up to order {self.B.input_smoothness}, "
                f"but solutions are only C^{n}"
            )
        validate = getattr(self.B, "validate_for", None)
        if callable(validate):
            validate(self.dims, self.interval)
        c = np.array(self.c, dtype=complex)
        if c.shape != (l,):
            raise ValidationError(f"c must be a vector of length {l}, got shape {c.shape}")
        object.__setattr__(self, "c", _readonly(c))


def sample_grid(interval: Interval, num: int = 1001, include=()) -> np.ndarray:
    """Uniform grid of ``num`` points on the interval, endpoints included,
    merged with any extra anchor points (e.g. boundary-term points)."""
    if num < 2:
        raise ValidationError("sampling grid needs at least 2 points")
    pts = np.linspace(interval.a, interval.b, num)
    if len(include):
        extra = np.asarray(list(include), dtype=float)
        if extra.size and (extra.min() < interval.a or extra.max() > interval.b):
            raise ValidationError("grid anchor points must lie inside the interval")
        pts = np.unique(np.concatenate([pts, extra]))
    return pts


def vec_norm(v) -> float:
    """Largest entry magnitude of a numeric vector (or any array)."""
    v = np.asarray(v)
    return float(np.max(np.abs(v))) if v.size else 0.0


def mat_norm(M) -> float:
    """Largest entry magnitude of a numeric matrix; equals the maximum over
    columns of the per-column entrywise max, mirroring the function-space
    convention."""
    return vec_norm(M)


def cn_norm(x: VectorFunction, n: int, grid) -> float:
    """Grid-sampled analogue of the graded C^(n) sup-norm.

    Returns the sum over derivative orders 0..n of the largest entry
    magnitude of x^(j) seen on the grid.  This is a lower bound of the true
    sup-based norm and converges to it as the grid refines.
    """
    x.check_order(n)
    grid = np.asarray(grid, dtype=float)
    if grid.size < 2:
        raise ValidationError("norm grid needs at least 2 points")
    total = 0.0
    for j in range(n + 1):
        total += max(float(np.max(np.abs(x.eval(t, j)))) for t in grid)
    return total


def matrix_cn_norm(Z: MatrixFunction, n: int, grid) -> float:
    """Maximum over columns of :func:`cn_norm` applied to each column."""
    Z.check_order(n)
    grid = np.asarray(grid, dtype=float)
    if grid.size < 2:
        raise ValidationError("norm grid needs at least 2 points")
    col_max = np.zeros((n + 1, Z.cols))
    for j in range(n + 1):
        for t in grid:
            col_max[j] = np.maximum(col_max[j], np.abs(Z.eval(t, j)).max(axis=0))
    return float(col_max.sum(axis=0).max())
