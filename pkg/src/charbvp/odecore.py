"""Fundamental-matrix and particular-solution integration with dense output.

The integrator is an adaptive embedded Runge-Kutta 5(4) pair with quartic
dense output (scipy's RK45).  Derivatives of computed trajectories always
come from the differential recurrence with exact coefficient derivatives,
never from differentiating the interpolant, so their accuracy does not
degrade with the derivative order.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegrationError, ValidationError
from .model import Interval, MatrixFunction, VectorFunction

__all__ = [
    "IntegratorConfig",
    "DEFAULT_CONFIG",
    "Trajectory",
    "fundamental_matrix",
    "particular_solution",
    "derive_via_system",
    "ode_residual",
]


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_steps: int = 10 ** 6
    method: str = "RK45"
    per_column: bool = False

    def __post_init__(self):
        if not (0.0 < self.abs_tol <= self.rel_tol < 1.0):
            raise ValidationError(
                "integrator tolerances must satisfy 0 < abs_tol <= rel_tol < 1"
            )
        if self.max_steps < 1:
            raise ValidationError("max_steps must be positive")


DEFAULT_CONFIG = IntegratorConfig()

# RK45 uses 6 stages plus one extra evaluation per accepted/rejected step;
# the eval budget below caps runaway integrations at roughly max_steps steps.
_EVALS_PER_STEP = 8


class Trajectory:
    """Dense-output solution of y' + A(t) y = g (vector) or Y' + A Y = 0
    (matrix, one column per initial basis vector).

    ``eval(t, 0)`` interpolates the integrator's dense output; ``eval(t, j)``
    for j >= 1 applies :func:`derive_via_system`.  Immutable after
    construction.
    """

    def __init__(self, interval, shape, sols, A, f, config, step_count):
        self.interval = interval
        self.shape = tuple(shape)
        self._sols = sols
        self.A = A
        self.f = f
        self.config = config
        self.step_count = step_count
        self.achieved_tolerance = config.rel_tol

    @property
    def is_matrix(self) -> bool:
        return len(self.shape) == 2

    @property
    def dim(self) -> int:
        return self.shape[0]

    @property
    def rows(self) -> int:
        return self.shape[0]

    @property
    def cols(self) -> int:
        return self.shape[1] if self.is_matrix else 1

    @property
    def max_deriv_order(self):
        orders = []
        if self.A.max_deriv_order is not None:
            orders.append(self.A.max_deriv_order + 1)
        if self.f is not None and self.f.max_deriv_order is not None:
            orders.append(self.f.max_deriv_order + 1)
        return min(orders) if orders else None

    def check_order(self, j: int) -> None:
        if j < 0:
            raise ValidationError("derivative order must be >= 0")
        limit = self.max_deriv_order
        if limit is not None and j > limit:
            raise ValidationError(
                f"trajectory supports derivatives up to order {limit}, got {j}"
            )

    def _value(self, t: float) -> np.ndarray:
        if len(self._sols) == 1:
            v = self._sols[0](t)
            return v.reshape(self.shape) if self.is_matrix else v
        return np.stack([sol(t) for sol in self._sols], axis=1)

    def _value_column(self, t: float, c: int) -> np.ndarray:
        if len(self._sols) == 1:
            return self._sols[0](t).reshape(self.shape)[:, c]
        return self._sols[c](t)

    def eval(self, t: float, j: int = 0) -> np.ndarray:
        if j == 0:
            return self._value(float(t))
        self.check_order(j)
        return derive_via_system(self, self.A, self.f, float(t), j)

    def column(self, c: int) -> "VectorFunction":
        if not self.is_matrix:
            raise ValidationError("column access requires a matrix trajectory")
        return _TrajectoryColumn(self, c)


class _TrajectoryColumn(VectorFunction):
    """Column view of a matrix trajectory; derivatives run the vector
    recurrence directly on the column."""

    def __init__(self, parent: Trajectory, c: int):
        if not 0 <= c < parent.cols:
            raise ValidationError(f"column index {c} out of range")
        self._parent = parent
        self._c = c
        self.dim = parent.rows
        self.max_deriv_order = parent.max_deriv_order

    def eval(self, t, j=0):
        if j == 0:
            return self._parent._value_column(float(t), self._c)
        self.check_order(j)
        return derive_via_system(self, self._parent.A, None, float(t), j)


def derive_via_system(source, A: MatrixFunction, f, t: float, j: int):
    """j-th derivative of a solution from its value, via the recurrence
    obtained by repeatedly differentiating y' = f - A y (Leibniz rule):

        y^(r) = f^(r-1) - sum_{i=0}^{r-1} C(r-1, i) A^(i) y^(r-1-i)

    ``source`` only needs ``eval(t, 0)``; ``f`` may be ``None`` for
    homogeneous systems.  Works unchanged for matrix-valued sources.
    """
    if j < 0:
        raise ValidationError("derivative order must be >= 0")
    values = [np.asarray(source.eval(t, 0), dtype=complex)]
    for r in range(1, j + 1):
        if f is not None:
            total = np.array(f.eval(t, r - 1), dtype=complex)
        else:
            total = np.zeros_like(values[0])
        for i in range(r):
            total = total - math.comb(r - 1, i) * (A.eval(t, i) @ values[r - 1 - i])
        values.append(total)
    return values[j]


def _integrate(rhs, span, y0, config):
    budget = config.max_steps * _EVALS_PER_STEP
    evals = [0]

    def counted(t, y):
        evals[0] += 1
        if evals[0] > budget:
            raise IntegrationError(
                f"step budget exceeded ({config.max_steps} steps)"
            )
        return rhs(t, y)

    result = solve_ivp(
        counted,
        span,
        y0,
        method=config.method,
        dense_output=True,
        rtol=config.rel_tol,
        atol=config.abs_tol,
    )
    if not result.success:
        raise IntegrationError(f"integration failed: {result.message}")
    if len(result.t) - 1 > config.max_steps:
        raise IntegrationError(
            f"step budget exceeded: {len(result.t) - 1} > {config.max_steps}"
        )
    return result


def fundamental_matrix(A: MatrixFunction, interval: Interval, config=None) -> Trajectory:
    """Solve the matrix Cauchy problem Y' + A(t) Y = 0, Y(a) = I.

    Columns are coupled through shared step control by default (one m^2
    system, identical dense mesh for all columns); ``config.per_column``
    integrates columns independently instead.
    """
    config = config or DEFAULT_CONFIG
    if A.rows != A.cols:
        raise ValidationError("coefficient matrix must be square")
    m = A.rows
    span = (interval.a, interval.b)
    if config.per_column:
        sols, steps = [], 0
        for c in range(m):
            e = np.zeros(m, dtype=complex)
            e[c] = 1.0
            result = _integrate(lambda t, y: -(A.eval(t) @ y), span, e, config)
            sols.append(result.sol)
            steps += len(result.t) - 1
        return Trajectory(interval, (m, m), sols, A, None, config, steps)

    def rhs(t, u):
        return (-(A.eval(t) @ u.reshape(m, m))).reshape(-1)

    y0 = np.eye(m, dtype=complex).reshape(-1)
    result = _integrate(rhs, span, y0, config)
    return Trajectory(interval, (m, m), [result.sol], A, None, config, len(result.t) - 1)


def particular_solution(
    A: MatrixFunction, f: VectorFunction, interval: Interval, config=None
) -> Trajectory:
    """One solution of y' + A(t) y = f(t) with y(a) = 0."""
    config = config or DEFAULT_CONFIG
    if A.rows != A.cols:
        raise ValidationError("coefficient matrix must be square")
    if f.dim != A.rows:
        raise ValidationError(
            f"right-hand side dimension {f.dim} does not match system dimension {A.rows}"
        )
    m = A.rows

    def rhs(t, y):
        return f.eval(t) - A.eval(t) @ y

    y0 = np.zeros(m, dtype=complex)
    result = _integrate(rhs, (interval.a, interval.b), y0, config)
    return Trajectory(interval, (m,), [result.sol], A, f, config, len(result.t) - 1)


def ode_residual(y, A: MatrixFunction, f, interval: Interval, num: int = 201, h: float = 1e-6) -> float:
    """Largest entry magnitude of y' + A y - f on a verification grid.

    The derivative is measured by central differences of the order-0
    evaluation, independently of the derivative recurrence, so the result is
    an honest consistency check of the dense output against the equation.
    """
    h = min(h, interval.length / 16)
    ts = np.linspace(interval.a + h, interval.b - h, num)
    worst = 0.0
    for t in ts:
        dy = (np.asarray(y.eval(t + h)) - np.asarray(y.eval(t - h))) / (2 * h)
        residual = dy + A.eval(t) @ np.asarray(y.eval(t))
        if f is not None:
            residual = residual - f.eval(t)
        worst = max(worst, float(np.max(np.abs(residual))))
    return worst
