"""Dense linear algebra kernels.

Matrices are plain float64 numpy arrays in row-major layout; vectors are
1-D arrays.  Everything here is a pure function of its inputs.
"""

from __future__ import annotations

import numpy as np

from .exceptions import NumericalFailureError
from .validation import check_matrix, check_vector

#: Relative cutoff (times the largest singular value) below which singular
#: values are treated as zero when computing numerical rank.
RANK_RTOL = 1e-10

_NORM_KINDS = ("l1", "l2", "linf")


def matvec(A, x) -> np.ndarray:
    """Matrix-vector product with shape checking."""
    A = check_matrix(A)
    x = check_vector(x)
    if A.shape[1] != x.shape[0]:
        raise ValueError(f"dimension mismatch: A is {A.shape}, x has length {x.shape[0]}")
    return A @ x


def norm(x, kind: str = "l2") -> float:
    """Vector norm: ``kind`` is one of ``l1``, ``l2``, ``linf``."""
    x = check_vector(x)
    if kind == "l1":
        return float(np.abs(x).sum())
    if kind == "l2":
        return float(np.linalg.norm(x))
    if kind == "linf":
        return float(np.abs(x).max())
    raise ValueError(f"unknown norm kind {kind!r}, expected one of {_NORM_KINDS}")


def l1_operator_norm(A) -> float:
    """The l1 -> l1 operator norm, i.e. the largest column l1 norm.

    For a matrix with no rows or no columns the norm is 0.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"A must be 2-D, got shape {A.shape}")
    if A.size == 0:
        return 0.0
    if not np.all(np.isfinite(A)):
        raise ValueError("A contains non-finite entries")
    return float(np.abs(A).sum(axis=0).max())


def extreme_singular_values(A) -> tuple[float, float]:
    """Smallest and largest singular values of a tall matrix.

    Parameters
    ----------
    A : array, shape (n, k) with k <= n

    Returns
    -------
    (sigma_min, sigma_max)

    Raises
    ------
    NumericalFailureError
        If the underlying eigensolver exhausts its iteration budget.
    """
    A = check_matrix(A)
    n, k = A.shape
    if k > n:
        raise ValueError(f"A must be tall (rows >= cols), got {A.shape}")
    try:
        s = np.linalg.svd(A, compute_uv=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails here
        raise NumericalFailureError(f"singular value computation failed: {exc}") from exc
    return float(s[-1]), float(s[0])


def orthonormal_basis(A, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis for the column span of ``A``.

    Returns an (n, r) matrix with orthonormal columns, where r is the
    numerical rank of ``A`` at relative tolerance ``rtol`` (singular values
    below ``rtol * sigma_max`` count as zero).  A zero or empty input yields
    r = 0.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"A must be 2-D, got shape {A.shape}")
    n = A.shape[0]
    if A.size == 0:
        return np.zeros((n, 0))
    if not np.all(np.isfinite(A)):
        raise ValueError("A contains non-finite entries")
    try:
        U, s, _ = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericalFailureError(f"orthonormalization failed: {exc}") from exc
    if s.size == 0 or s[0] <= 0.0:
        return np.zeros((n, 0))
    r = int(np.sum(s > rtol * s[0]))
    return U[:, :r]
