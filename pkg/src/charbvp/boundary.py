"""Boundary operators: finite sums of point-derivative terms, weighted
integral terms, and right-sided Caputo fractional-derivative terms.

Each term maps a sufficiently smooth m-dimensional vector function to a
complex l-vector; an operator is the sum of its terms, applied in
declaration order (no reordering, so floating-point results are
reproducible).  Operators act columnwise on matrix trajectories.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import quad_vec

from .errors import QuadratureError, ValidationError
from .expr import MatrixExpr
from .model import Interval, ProblemDims

__all__ = [
    "PointDerivTerm",
    "IntegralTerm",
    "CaputoTerm",
    "BoundaryOperator",
    "apply",
    "apply_columnwise",
    "caputo_right",
]

_DEFAULT_QUAD_TOL = 1e-9


def _as_coeff(values) -> np.ndarray:
    arr = np.array(values, dtype=complex)
    if arr.ndim != 2:
        raise ValidationError("term coefficient must be an l x m matrix")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class PointDerivTerm:
    """coeff @ y^(order)(point)."""

    coeff: np.ndarray
    point: float
    order: int = 0

    def __post_init__(self):
        object.__setattr__(self, "coeff", _as_coeff(self.coeff))
        object.__setattr__(self, "point", float(self.point))
        if not isinstance(self.order, int) or self.order < 0:
            raise ValidationError("point-term derivative order must be an integer >= 0")

    @property
    def output_dim(self):
        return self.coeff.shape[0]

    @property
    def input_dim(self):
        return self.coeff.shape[1]

    @property
    def required_order(self):
        return self.order


@dataclass(frozen=True, eq=False)
class IntegralTerm:
    """integral over [a, b] of weight(t) @ y(t) dt, weight an l x m matrix
    of expressions."""

    weight: MatrixExpr
    quad_tol: float = _DEFAULT_QUAD_TOL

    def __post_init__(self):
        if not isinstance(self.weight, MatrixExpr):
            raise ValidationError("integral weight must be a MatrixExpr")
        if self.quad_tol <= 0:
            raise ValidationError("quadrature tolerance must be positive")

    @property
    def output_dim(self):
        return self.weight.rows

    @property
    def input_dim(self):
        return self.weight.cols

    @property
    def required_order(self):
        return 0


@dataclass(frozen=True, eq=False)
class CaputoTerm:
    """coeff @ (right-sided Caputo derivative of order alpha of y)(point).

    Real orders alpha >= 0 only; alpha = 0 is the identity, integer alpha
    reduces to the classical derivative with sign (-1)^alpha.
    """

    coeff: np.ndarray
    point: float
    order: float
    quad_tol: float = _DEFAULT_QUAD_TOL

    def __post_init__(self):
        object.__setattr__(self, "coeff", _as_coeff(self.coeff))
        object.__setattr__(self, "point", float(self.point))
        order = float(self.order)
        if not math.isfinite(order) or order < 0:
            raise ValidationError("fractional order must be a real number >= 0")
        object.__setattr__(self, "order", order)
        if self.quad_tol <= 0:
            raise ValidationError("quadrature tolerance must be positive")

    @property
    def output_dim(self):
        return self.coeff.shape[0]

    @property
    def input_dim(self):
        return self.coeff.shape[1]

    @property
    def required_order(self):
        if self.order == 0:
            return 0
        return math.ceil(self.order)


@dataclass(frozen=True, eq=False)
class BoundaryOperator:
    """Finite sum of boundary terms, all sharing output dim l and input dim m."""

    terms: tuple
    output_dim: int = field(init=False)
    input_dim: int = field(init=False)

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise ValidationError("boundary operator needs at least one term")
        object.__setattr__(self, "terms", terms)
        l, m = terms[0].output_dim, terms[0].input_dim
        for k, term in enumerate(terms):
            if (term.output_dim, term.input_dim) != (l, m):
                raise ValidationError(
                    f"boundary term {k} has shape {term.output_dim}x{term.input_dim}, "
                    f"expected {l}x{m}"
                )
        object.__setattr__(self, "output_dim", l)
        object.__setattr__(self, "input_dim", m)

    @property
    def input_smoothness(self) -> int:
        return max(term.required_order for term in self.terms)

    def validate_for(self, dims: ProblemDims, interval: Interval) -> None:
        """Check the operator against a problem's dimensions and interval."""
        if self.output_dim != dims.l or self.input_dim != dims.m:
            raise ValidationError(
                f"boundary operator is {self.output_dim}x{self.input_dim}, "
                f"problem needs {dims.l}x{dims.m}"
            )
        for k, term in enumerate(self.terms):
            if isinstance(term, (PointDerivTerm, CaputoTerm)):
                if not interval.contains(term.point):
                    raise ValidationError(
                        f"boundary term {k}: point {term.point} outside "
                        f"[{interval.a}, {interval.b}]"
                    )
            if isinstance(term, PointDerivTerm) and term.order > dims.n:
                raise ValidationError(
                    f"boundary term {k}: derivative order {term.order} exceeds n = {dims.n}"
                )
            if isinstance(term, CaputoTerm) and math.floor(term.order) > dims.n - 1:
                raise ValidationError(
                    f"boundary term {k}: fractional order {term.order} violates "
                    f"floor(order) <= n-1 = {dims.n - 1}"
                )

    def with_coeff_offsets(self, offsets, scale: float) -> "BoundaryOperator":
        """New operator with coeff + scale*offset per term (None leaves a term
        unchanged; integral terms only accept None)."""
        if len(offsets) != len(self.terms):
            raise ValidationError(
                f"expected {len(self.terms)} coefficient offsets, got {len(offsets)}"
            )
        new_terms = []
        for k, (term, delta) in enumerate(zip(self.terms, offsets)):
            if delta is None:
                new_terms.append(term)
                continue
            if isinstance(term, IntegralTerm):
                raise ValidationError(
                    f"boundary term {k}: integral terms cannot take coefficient offsets"
                )
            delta = np.asarray(delta, dtype=complex)
            if delta.shape != term.coeff.shape:
                raise ValidationError(
                    f"boundary term {k}: offset shape {delta.shape} does not match "
                    f"coefficient shape {term.coeff.shape}"
                )
            new_terms.append(replace(term, coeff=term.coeff + scale * delta))
        return BoundaryOperator(tuple(new_terms))


def caputo_right(y, alpha: float, t: float, b: float, tol: float = _DEFAULT_QUAD_TOL):
    """Right-sided Caputo fractional derivative of y of real order alpha at t,
    anchored at the right endpoint b.

    For non-integer alpha with nu = floor(alpha) + 1 this is

        (-1)^nu / Gamma(nu - alpha) * integral_t^b (s-t)^(nu-alpha-1) y^(nu)(s) ds;

    integer alpha = nu gives (-1)^nu y^(nu)(t), and alpha = 0 is the identity.
    The weakly singular kernel is removed exactly by substituting
    s = t + (b-t) u^(1/(nu-alpha)) before adaptive quadrature.
    """
    alpha = float(alpha)
    if alpha < 0:
        raise ValidationError("fractional order must be >= 0")
    if alpha == 0:
        return np.asarray(y.eval(t, 0))
    if alpha == math.floor(alpha):
        nu = int(alpha)
        return ((-1.0) ** nu) * np.asarray(y.eval(t, nu))
    nu = math.floor(alpha) + 1
    gamma_exp = nu - alpha  # in (0, 1)
    width = b - t
    if width <= 0:
        return np.zeros_like(np.asarray(y.eval(t, 0)))
    inv = 1.0 / gamma_exp

    def integrand(u):
        s = t + width * u ** inv
        return np.asarray(y.eval(min(s, b), nu))

    value, err = quad_vec(integrand, 0.0, 1.0, epsabs=tol, epsrel=tol)
    if not np.all(np.isfinite(value)):
        raise QuadratureError("fractional-derivative quadrature produced non-finite values")
    factor = ((-1.0) ** nu) / math.gamma(gamma_exp) * width ** gamma_exp / gamma_exp
    return factor * value


def _apply_term(term, y, interval: Interval):
    if isinstance(term, PointDerivTerm):
        return term.coeff @ np.asarray(y.eval(term.point, term.order))
    if isinstance(term, CaputoTerm):
        value = caputo_right(y, term.order, term.point, interval.b, term.quad_tol)
        return term.coeff @ value
    if isinstance(term, IntegralTerm):
        weight = term.weight

        def integrand(t):
            return weight.eval(t) @ np.asarray(y.eval(t, 0))

        value, err = quad_vec(
            integrand, interval.a, interval.b, epsabs=term.quad_tol, epsrel=term.quad_tol
        )
        if not np.all(np.isfinite(value)):
            raise QuadratureError("integral-term quadrature produced non-finite values")
        return value
    raise ValidationError(f"unknown boundary term type {type(term).__name__}")


def apply(B: BoundaryOperator, y, interval: Interval) -> np.ndarray:
    """Apply the operator to a vector function with derivative access,
    summing term values in declaration order."""
    out = np.zeros(B.output_dim, dtype=complex)
    for term in B.terms:
        out = out + _apply_term(term, y, interval)
    return out


def apply_columnwise(B: BoundaryOperator, Y, interval: Interval) -> np.ndarray:
    """Apply the operator to every column of a matrix trajectory; column j of
    the result is B applied to column j of Y."""
    m = Y.cols
    out = np.zeros((B.output_dim, m), dtype=complex)
    for c in range(m):
        out[:, c] = apply(B, Y.column(c), interval)
    return out
