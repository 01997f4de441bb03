"""Characteristic-matrix computation and rank analysis.

The characteristic matrix of a problem is the l x m complex matrix whose
j-th column is the boundary operator applied to the j-th column of the
fundamental matrix.  Its rank determines the kernel and cokernel dimensions
of the problem operator: dim ker = m - rank, dim coker = l - rank, so the
index is always m - l.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .boundary import apply_columnwise
from .model import Problem
from .odecore import IntegratorConfig, fundamental_matrix

__all__ = [
    "CharReport",
    "characteristic_matrix",
    "numerical_rank",
    "rank_tolerance",
    "d_characteristics",
    "kernel_basis_matrix",
    "analyze_problem",
]

_REL_RANK_TOL = 1e-10
_ABS_RANK_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class CharReport:
    """Rank analysis of a characteristic matrix.

    ``rank_tolerance`` is the threshold actually used; ``rank_uncertain``
    flags singular values within a factor 10 of it, since kernel/cokernel
    dimensions are only semicontinuous in the data and borderline cases
    must be surfaced rather than silently resolved.
    """

    matrix: np.ndarray
    singular_values: np.ndarray
    rank: int
    dim_ker: int
    dim_coker: int
    index: int
    invertible: bool
    rank_tolerance: float
    rank_uncertain: bool


def _checked(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise NumericalError("rank analysis needs a two-dimensional matrix")
    if not np.all(np.isfinite(M)):
        raise NumericalError("matrix has non-finite entries")
    return M


def rank_tolerance(shape, singular_values, tol=None) -> float:
    """Threshold for treating a singular value as zero: the caller's tol if
    given, otherwise max(l, m) * sigma_max * 1e-10, falling back to an
    absolute 1e-12 when sigma_max = 0."""
    if tol is not None:
        if tol <= 0:
            raise NumericalError("rank tolerance must be positive")
        return float(tol)
    smax = float(singular_values[0]) if len(singular_values) else 0.0
    if smax == 0.0:
        return _ABS_RANK_TOL
    return max(shape) * smax * _REL_RANK_TOL


def numerical_rank(M, tol=None):
    """Numerical rank via SVD thresholding; returns (rank, singular_values)."""
    M = _checked(M)
    s = np.linalg.svd(M, compute_uv=False)
    tau = rank_tolerance(M.shape, s, tol)
    return int(np.count_nonzero(s > tau)), s


def d_characteristics(M, tol=None) -> CharReport:
    """Kernel/cokernel dimensions, index, and invertibility verdict of the
    operator represented by the matrix."""
    M = _checked(M)
    l, m = M.shape
    s = np.linalg.svd(M, compute_uv=False)
    tau = rank_tolerance(M.shape, s, tol)
    rank = int(np.count_nonzero(s > tau))
    uncertain = bool(np.any((s >= tau / 10.0) & (s <= tau * 10.0)))
    matrix = M.copy()
    matrix.flags.writeable = False
    sing = s.copy()
    sing.flags.writeable = False
    return CharReport(
        matrix=matrix,
        singular_values=sing,
        rank=rank,
        dim_ker=m - rank,
        dim_coker=l - rank,
        index=(m - rank) - (l - rank),
        invertible=bool(l == m and rank == m),
        rank_tolerance=tau,
        rank_uncertain=uncertain,
    )


def kernel_basis_matrix(M, tol=None) -> np.ndarray:
    """Orthonormal columns spanning the (numerical) nullspace of M: the right
    singular vectors whose singular values fall at or below the threshold."""
    M = _checked(M)
    _, s, vh = np.linalg.svd(M, full_matrices=True)
    tau = rank_tolerance(M.shape, s, tol)
    rank = int(np.count_nonzero(s > tau))
    return vh[rank:].conj().T


def characteristic_matrix(problem: Problem, config: IntegratorConfig = None) -> np.ndarray:
    """The l x m matrix whose j-th column is the boundary operator applied to
    the j-th column of the fundamental matrix."""
    Y = fundamental_matrix(problem.A, problem.interval, config)
    return apply_columnwise(problem.B, Y, problem.interval)


def analyze_problem(problem: Problem, config: IntegratorConfig = None, rank_tol=None) -> CharReport:
    """Characteristic matrix plus its full rank report."""
    return d_characteristics(characteristic_matrix(problem, config), rank_tol)
