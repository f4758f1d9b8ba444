"""Scikit-learn style estimators wrapping the recovery method.

These are thin fit-shaped adapters over :mod:`sparsespan.recovery` so the
method composes with sklearn tooling (``get_params`` / ``set_params``,
cloning, pipelines that pass a basis matrix through).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .recovery import (
    DEFAULT_EPSILON,
    DEFAULT_ZERO_TOL,
    SelectorSpec,
    diagonal_threshold_support,
    recover_all,
    select,
)
from .subspaces import projector_diagonal
from .validation import check_matrix


class SparsestVectorLP(BaseEstimator):
    """Estimate the sparsest vector in the column span of a basis matrix.

    ``fit(W)`` solves one pinned l1 program per coordinate of the ambient
    space and keeps the output the configured selector ranks sparsest.

    Parameters
    ----------
    selector : str, one of "oracle", "l1linf", "l1l2", "thresholded_l0", "strict_l0"
        Sparsity measure used to pick among the n program outputs.  The
        oracle selector needs ``oracle_index`` passed to ``fit``.
    epsilon : float
        Magnitude level for thresholded-l0 scoring.
    zero_tol : float
        Zero cutoff for strict-l0 scoring.

    Attributes
    ----------
    vector_ : ndarray, shape (n,)
        The selected subspace element (its pinned coordinate equals 1).
    chosen_index_ : int
        Coordinate whose program produced ``vector_``.
    candidates_ : list of CandidateSolution
        All n program outputs, including failed ones.
    scores_ : ndarray, shape (n,)
        Per-candidate sparsity scores (NaN for failed candidates and for
        the oracle selector).
    """

    def __init__(
        self,
        selector: str = "thresholded_l0",
        epsilon: float = DEFAULT_EPSILON,
        zero_tol: float = DEFAULT_ZERO_TOL,
    ):
        self.selector = selector
        self.epsilon = epsilon
        self.zero_tol = zero_tol

    def fit(self, W, y=None, oracle_index: int | None = None):
        W = check_matrix(W, "W")
        spec = SelectorSpec(self.selector, epsilon=self.epsilon, zero_tol=self.zero_tol)
        self.candidates_ = recover_all(W)
        chosen, z_hat, scores = select(self.candidates_, spec, oracle_index=oracle_index)
        self.chosen_index_ = chosen
        self.vector_ = z_hat
        self.scores_ = scores
        self.n_features_in_ = W.shape[1]
        return self


class DiagonalThresholding(BaseEstimator):
    """Support estimation by thresholding the subspace projector diagonal.

    The cheap baseline: ``fit(W)`` keeps the ``support_size`` coordinates
    with the largest diagonal entries of the orthogonal projector onto the
    span of W.
    """

    def __init__(self, support_size: int = 1):
        self.support_size = support_size

    def fit(self, W, y=None):
        W = check_matrix(W, "W")
        self.diagonal_ = projector_diagonal(W)
        self.support_ = diagonal_threshold_support(W, self.support_size)
        self.n_features_in_ = W.shape[1]
        return self

    def transform(self, W):
        """Mask of shape (n,) marking the estimated support."""
        W = check_matrix(W, "W")
        mask = np.zeros(W.shape[0], dtype=bool)
        mask[self.support_] = True
        return mask
