"""The recovery method: n pinned l1 programs, sparsity selection, certificates.

Given a basis W of a subspace of R^n, one linear program per coordinate
pins that coordinate to 1 and minimizes the l1 norm over the subspace.  A
selector then picks the output that looks sparsest.  The certificate
functions decide, from the ground-truth decomposition, whether the pinned
program at the peak coordinate provably returns the planted vector
(exactly, or within explicit bounds).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import FaceLimitError, SelectionError
from .linalg import l1_operator_norm
from .lp import K_MAX, L1ProgramSolution, SolveStatus, min_l1_gain, solve_l1_program
from .subspaces import projector_diagonal, top_support
from .validation import check_index, check_matrix, check_support, check_vector

SELECTOR_KINDS = ("oracle", "l1linf", "l1l2", "thresholded_l0", "strict_l0")

#: Success threshold on ||z_hat - v / v(i*)||_2.
DEFAULT_SUCCESS_TOL = 0.01

#: Level below which an LP output coordinate counts as zero for strict-l0
#: scoring; strict support counting is ill-posed on floating-point solver
#: output without such a cutoff.
DEFAULT_ZERO_TOL = 1e-6

#: Default magnitude level for thresholded-l0 scoring.
DEFAULT_EPSILON = 0.01


@dataclass(frozen=True)
class SelectorSpec:
    """Which sparsity measure picks the winner among the n candidates."""

    kind: str
    epsilon: float = DEFAULT_EPSILON
    zero_tol: float = DEFAULT_ZERO_TOL

    def __post_init__(self):
        if self.kind not in SELECTOR_KINDS:
            raise ValueError(f"unknown selector kind {self.kind!r}, expected one of {SELECTOR_KINDS}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.zero_tol <= 0:
            raise ValueError(f"zero_tol must be positive, got {self.zero_tol}")


@dataclass(frozen=True, eq=False)
class CandidateSolution:
    """Output of the program that pins coordinate ``index``."""

    index: int
    solution: L1ProgramSolution


@dataclass(frozen=True, eq=False)
class TrialOutcome:
    """Selected output of one recovery trial, scored against the truth."""

    chosen_index: int
    z_hat: np.ndarray
    error: float
    success: bool
    per_candidate_scores: np.ndarray


def recover_all(W) -> list[CandidateSolution]:
    """Solve the n pinned programs on basis ``W``, one per coordinate.

    Infeasible or numerically failed programs are carried through with
    their status; they are skipped by selectors rather than aborting the
    batch.
    """
    W = check_matrix(W, "W")
    n = W.shape[0]
    return [CandidateSolution(i, solve_l1_program(W, i)) for i in range(n)]


def sparsity_score(z, selector: SelectorSpec) -> float:
    """Score of a vector under ``selector``; lower means sparser.

    Ratio measures require a nonzero vector; the oracle selector does not
    score at all (selection bypasses scoring).
    """
    z = check_vector(z)
    kind = selector.kind
    if kind == "oracle":
        raise ValueError("the oracle selector does not define a sparsity score")
    if kind == "thresholded_l0":
        return float(np.count_nonzero(np.abs(z) >= selector.epsilon))
    if kind == "strict_l0":
        return float(np.count_nonzero(np.abs(z) > selector.zero_tol))
    peak = np.abs(z).max()
    if peak == 0.0:
        raise ValueError(f"{kind} score undefined for the zero vector")
    # Normalize at the peak first so extreme scales cannot overflow or
    # underflow the sums; the ratios are scale invariant anyway.
    w = np.abs(z / peak)
    if kind == "l1linf":
        return float(w.sum())
    if kind == "l1l2":
        return float(w.sum() / np.linalg.norm(w))
    raise ValueError(f"unknown selector kind {kind!r}")


def select(
    candidates: list[CandidateSolution],
    selector: SelectorSpec,
    oracle_index: int | None = None,
) -> tuple[int, np.ndarray, np.ndarray]:
    """Pick one candidate; returns (chosen_index, z_hat, per-candidate scores).

    Non-optimal candidates never win and carry NaN scores.  Ties go to the
    lowest candidate index.  The oracle selector returns the candidate at
    ``oracle_index`` and leaves all scores NaN.
    """
    n = len(candidates)
    scores = np.full(n, np.nan)
    if selector.kind == "oracle":
        if oracle_index is None:
            raise ValueError("oracle selection requires oracle_index")
        oracle_index = check_index(oracle_index, n, "oracle_index")
        cand = candidates[oracle_index]
        if not cand.solution.optimal:
            raise SelectionError(
                f"oracle candidate {oracle_index} is {cand.solution.status.value}"
            )
        return cand.index, cand.solution.z, scores

    best = None
    for cand in candidates:
        if not cand.solution.optimal:
            continue
        score = sparsity_score(cand.solution.z, selector)
        scores[cand.index] = score
        if best is None or score < scores[best]:
            best = cand.index
    if best is None:
        raise SelectionError("no optimal candidate to select from")
    return best, candidates[best].solution.z, scores


def evaluate_success(z_hat, v, tau: float = DEFAULT_SUCCESS_TOL) -> tuple[float, bool]:
    """l2 error of ``z_hat`` against ``v`` normalized at its peak coordinate.

    Returns ``(error, error <= tau)`` where the reference is ``v / v[i*]``
    with i* the lowest-index coordinate of maximal |v|.
    """
    z_hat = check_vector(z_hat)
    v = check_vector(v)
    if z_hat.shape != v.shape:
        raise ValueError(f"shape mismatch: {z_hat.shape} vs {v.shape}")
    if not np.any(v):
        raise ValueError("v must be nonzero")
    i_star = int(np.argmax(np.abs(v)))
    error = float(np.linalg.norm(z_hat - v / v[i_star]))
    return error, error <= tau


def evaluate_trial(
    candidates: list[CandidateSolution],
    selector: SelectorSpec,
    v,
    tau: float = DEFAULT_SUCCESS_TOL,
    oracle_index: int | None = None,
) -> TrialOutcome:
    """Select from ``candidates`` and score the pick against the truth ``v``."""
    chosen, z_hat, scores = select(candidates, selector, oracle_index=oracle_index)
    error, success = evaluate_success(z_hat, v, tau)
    return TrialOutcome(chosen, z_hat, error, success, scores)


def necessary_condition_value(vtilde, i_star) -> float:
    """Minimum l1 norm in the purely random span with coordinate i* pinned to 1.

    Exact recovery of a planted v at i* is possible only when
    ``||v||_1 / ||v||_inf`` does not exceed this value: the purely random
    span is a subset of the planted span, so anything cheaper inside it
    would beat v.

    Raises
    ------
    SelectionError
        If the program is infeasible or fails numerically.
    """
    vtilde = check_matrix(vtilde, "vtilde")
    i_star = check_index(i_star, vtilde.shape[0], "i_star")
    sol = solve_l1_program(vtilde, i_star)
    if not sol.optimal:
        raise SelectionError(f"necessary-condition program is {sol.status.value}")
    return sol.objective


def _normalized_parts(v, vtilde, S):
    """Shared setup for the certificates: rescale v, split rows by S."""
    v = check_vector(v)
    vtilde = check_matrix(vtilde, "vtilde")
    n, k = vtilde.shape
    if v.shape[0] != n:
        raise ValueError(f"v has length {v.shape[0]}, vtilde has {n} rows")
    if k > K_MAX:
        raise FaceLimitError(f"certificates need the exact gain, limited to {K_MAX} columns")
    if not np.any(v):
        raise ValueError("v must be nonzero")
    S = check_support(S, n, "S")
    i_star = int(np.argmax(np.abs(v)))
    w = v / v[i_star]
    mask = np.zeros(n, dtype=bool)
    mask[S] = True
    a = vtilde[i_star]
    return w, mask, a, vtilde[mask], vtilde[~mask], len(S)


def certify_exact(v, vtilde, S) -> bool:
    """Deterministic sufficient condition for exact recovery at i*.

    After rescaling v so its peak coordinate is 1, the pinned program at
    i* provably returns v exactly when the on-support block of the random
    columns has l1->l1 norm at most 2s and the off-support block has l1
    gain at least ``(2 ||a||_inf + 2) s``, where ``a`` is row i* of the
    random columns.  Requires supp(v) inside S.
    """
    w, mask, a, rows_S, rows_Sc, s = _normalized_parts(v, vtilde, S)
    if np.any(w[~mask] != 0.0):
        raise ValueError("certify_exact requires supp(v) to be contained in S")
    if l1_operator_norm(rows_S) > 2.0 * s:
        return False
    gain = min_l1_gain(rows_Sc) if rows_Sc.shape[0] > 0 else 0.0
    return bool(gain >= (2.0 * np.abs(a).max() + 2.0) * s)


def certify_stable(v, vtilde, S, alpha: float) -> tuple[float, float] | None:
    """Deterministic stability certificate; returns error bounds or None.

    With ``delta`` the l1 mass of the rescaled v off S, the certificate
    hypotheses are the on-support bound of :func:`certify_exact` and an
    off-support gain of at least ``(2 ||a||_inf + 2 + alpha) s``.  When
    they hold, any minimizer of the pinned program at i*, expressed in
    [v | vtilde] coordinates as (x1, xt), satisfies
    ``|x1 - 1| <= b1 = 2 delta / s`` and
    ``||xt||_1 <= b2 = 2 delta / (s (||a||_inf + alpha))``.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    w, mask, a, rows_S, rows_Sc, s = _normalized_parts(v, vtilde, S)
    delta = float(np.abs(w[~mask]).sum())
    if l1_operator_norm(rows_S) > 2.0 * s:
        return None
    a_inf = float(np.abs(a).max())
    gain = min_l1_gain(rows_Sc) if rows_Sc.shape[0] > 0 else 0.0
    if gain < (2.0 * a_inf + 2.0 + alpha) * s:
        return None
    return 2.0 * delta / s, 2.0 * delta / (s * (a_inf + alpha))


def diagonal_threshold_support(W, s: int) -> np.ndarray:
    """Support estimate: coordinates of the s largest projector diagonal entries.

    The simple spectral baseline; ties go to the lowest index.
    """
    W = check_matrix(W, "W")
    if not 1 <= s <= W.shape[0]:
        raise ValueError(f"need 1 <= s <= n, got s={s}, n={W.shape[0]}")
    return top_support(projector_diagonal(W), s)
