"""Dense LP solves for the two l1 problems the method needs.

``solve_l1_program`` minimizes ``||Bx||_1`` subject to pinning one
coordinate of ``Bx`` to 1; ``min_l1_gain`` computes the exact minimum of
``||Ax||_1 / ||x||_1``.  Both reduce to small dense linear programs that
are handed to the HiGHS dual simplex, which returns vertex solutions --
exact recovery then shows up as the planted vector being returned to
machine precision rather than merely approximated.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .exceptions import FaceLimitError, NumericalFailureError
from .linalg import extreme_singular_values
from .validation import check_index, check_matrix

#: Widest matrix accepted by exact face enumeration (2**(k-1) sign faces).
K_MAX = 16

#: Absolute feasibility tolerance on the pinned coordinate.
FEASIBILITY_TOL = 1e-9

#: Relative optimality tolerance certified by the solver's termination test.
OPTIMALITY_TOL = 1e-8

_HIGHS_OPTIONS = {
    "primal_feasibility_tolerance": FEASIBILITY_TOL,
    "dual_feasibility_tolerance": FEASIBILITY_TOL,
}


class SolveStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass(frozen=True, eq=False)
class L1ProgramSolution:
    """Outcome of one coordinate-normalized l1 minimization.

    Attributes
    ----------
    x : coefficient vector in the basis (length d); zeros unless OPTIMAL
    z : ambient vector B @ x (length n)
    objective : ||z||_1 at the solution (0 unless OPTIMAL)
    status : OPTIMAL, INFEASIBLE, or NUMERICAL_FAILURE
    iterations : simplex pivots performed
    """

    x: np.ndarray
    z: np.ndarray
    objective: float
    status: SolveStatus
    iterations: int

    @property
    def optimal(self) -> bool:
        return self.status is SolveStatus.OPTIMAL


def _failed(n: int, d: int, status: SolveStatus, iterations: int = 0) -> L1ProgramSolution:
    return L1ProgramSolution(np.zeros(d), np.zeros(n), 0.0, status, iterations)


def solve_l1_program(B, i) -> L1ProgramSolution:
    """Minimize ``||B x||_1`` subject to ``(B x)[i] == 1``.

    The program is solved through its epigraph form with variables
    ``(x, t)``: minimize ``sum(t)`` subject to ``-t <= B x <= t`` and the
    pinning equality.  When the optimum is not unique, any optimizer may
    be returned.  The returned solution is rescaled so the pinned
    coordinate equals 1 exactly.

    Parameters
    ----------
    B : array, shape (n, d) with d <= n
    i : 0-based coordinate to pin

    Returns
    -------
    L1ProgramSolution
        ``status`` is INFEASIBLE iff row ``i`` of ``B`` is identically
        zero, and NUMERICAL_FAILURE if the pivot cap ``50 * (n + d)`` is
        exhausted or the solver otherwise fails.
    """
    B = check_matrix(B, "B")
    n, d = B.shape
    if d > n:
        raise ValueError(f"B must have at most as many columns as rows, got {B.shape}")
    i = check_index(i, n, "i")

    if not np.any(B[i]):
        return _failed(n, d, SolveStatus.INFEASIBLE)

    c = np.concatenate([np.zeros(d), np.ones(n)])
    A_ub = np.block([[B, -np.eye(n)], [-B, -np.eye(n)]])
    b_ub = np.zeros(2 * n)
    A_eq = np.concatenate([B[i], np.zeros(n)])[None, :]
    bounds = [(None, None)] * d + [(0, None)] * n
    res = linprog(
        c,
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=[1.0],
        bounds=bounds,
        method="highs-ds",
        options={**_HIGHS_OPTIONS, "maxiter": 50 * (n + d)},
    )

    if res.status == 2:
        # Row i is nonzero, so the program is feasible in exact arithmetic;
        # an infeasibility report here is a numerical breakdown.
        return _failed(n, d, SolveStatus.NUMERICAL_FAILURE, res.nit)
    if res.status != 0:
        return _failed(n, d, SolveStatus.NUMERICAL_FAILURE, res.nit)

    x = res.x[:d]
    z = B @ x
    zi = z[i]
    if abs(zi - 1.0) > 1e-6:
        return _failed(n, d, SolveStatus.NUMERICAL_FAILURE, res.nit)
    # Rescale so the pinned coordinate is exactly 1; this stays in range(B)
    # and moves the objective by at most the feasibility tolerance.
    x = x / zi
    z = z / zi
    return L1ProgramSolution(x, z, float(np.abs(z).sum()), SolveStatus.OPTIMAL, int(res.nit))


def _face_min(A: np.ndarray) -> float:
    """Minimum of ||A y||_1 over the simplex {y >= 0, sum(y) = 1}."""
    n, k = A.shape
    c = np.concatenate([np.zeros(k), np.ones(n)])
    A_ub = np.block([[A, -np.eye(n)], [-A, -np.eye(n)]])
    b_ub = np.zeros(2 * n)
    A_eq = np.concatenate([np.ones(k), np.zeros(n)])[None, :]
    res = linprog(
        c,
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=[1.0],
        bounds=[(0, None)] * (k + n),
        method="highs-ds",
        options={**_HIGHS_OPTIONS, "maxiter": 50 * (n + k)},
    )
    if res.status != 0:
        raise NumericalFailureError(f"face LP failed with solver status {res.status}")
    z = A @ res.x[:k]
    return float(np.abs(z).sum())


def min_l1_gain(A) -> float:
    """Exact minimum of ``||A x||_1 / ||x||_1`` over x != 0.

    The l1 unit sphere decomposes into sign faces; on the face with sign
    pattern ``sigma`` the problem is a dense LP over the simplex reached by
    the substitution ``x = sigma * y``.  By the symmetry x -> -x only the
    2**(k-1) faces with positive first sign need solving.

    Raises
    ------
    FaceLimitError
        If ``A`` has more than ``K_MAX`` columns; use
        :func:`min_l1_gain_lower_bound` instead.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[1] < 1:
        raise ValueError(f"A must be 2-D with at least one column, got shape {A.shape}")
    n, k = A.shape
    if k > K_MAX:
        raise FaceLimitError(f"exact gain supports at most {K_MAX} columns, got {k}")
    if n == 0:
        return 0.0
    if not np.all(np.isfinite(A)):
        raise ValueError("A contains non-finite entries")

    best = np.inf
    for signs in itertools.product((1.0, -1.0), repeat=k - 1):
        sigma = np.array((1.0,) + signs)
        best = min(best, _face_min(A * sigma))
    return best


def min_l1_gain_lower_bound(A) -> float:
    """Lower bound ``sigma_min(A) / sqrt(k)`` on :func:`min_l1_gain`.

    Valid for any column count: ``||Ax||_1 >= ||Ax||_2 >= sigma_min ||x||_2
    >= sigma_min ||x||_1 / sqrt(k)``.
    """
    A = check_matrix(A, "A")
    smin, _ = extreme_singular_values(A)
    return smin / float(np.sqrt(A.shape[1]))
