import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sparsespan.linalg import (
    extreme_singular_values,
    l1_operator_norm,
    matvec,
    norm,
    orthonormal_basis,
)
from sparsespan.rng import RngStream

from oracles import extreme_singular_values_2cols, l1_opnorm_by_vertices, matvec_naive

finite_floats = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)


def vectors(min_len=1, max_len=12):
    return st.integers(min_len, max_len).flatmap(
        lambda n: arrays(np.float64, n, elements=finite_floats)
    )


def matrices(max_rows=8, max_cols=6):
    return st.tuples(st.integers(1, max_rows), st.integers(1, max_cols)).flatmap(
        lambda shape: arrays(np.float64, shape, elements=finite_floats)
    )


class TestMatvec:
    def test_identity(self):
        assert np.array_equal(matvec(np.eye(3), [1.0, 2.0, 3.0]), [1.0, 2.0, 3.0])

    def test_hand_product(self):
        A = np.array([[1.0, 0.0], [1.0, 1.0]])
        assert np.array_equal(matvec(A, [1.0, 1.0]), [1.0, 2.0])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            matvec(np.eye(3), [1.0, 2.0])

    def test_against_naive_loop(self, rng):
        A = rng.standard_normal((5, 3))
        x = rng.standard_normal(3)
        got = matvec(A, x)
        want = matvec_naive(A, x)
        assert np.linalg.norm(got - want) <= 1e-12 * max(1.0, np.linalg.norm(want))

    def test_rejects_nan(self):
        with pytest.raises(ValueError, match="non-finite"):
            matvec(np.array([[np.nan, 0.0]]), [1.0, 1.0])


class TestNorm:
    def test_hand_values(self):
        x = [3.0, -4.0]
        assert norm(x, "l1") == 7.0
        assert norm(x, "l2") == 5.0
        assert norm(x, "linf") == 4.0

    def test_zero_vector(self):
        z = np.zeros(4)
        assert norm(z, "l1") == norm(z, "l2") == norm(z, "linf") == 0.0

    def test_all_ones(self):
        x = np.ones(9)
        assert norm(x, "l1") == 9.0
        assert norm(x, "l2") == pytest.approx(3.0)
        assert norm(x, "linf") == 1.0

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown norm kind"):
            norm([1.0], "l3")

    @given(vectors())
    def test_norm_chain(self, x):
        n = x.shape[0]
        linf, l2, l1 = norm(x, "linf"), norm(x, "l2"), norm(x, "l1")
        slack = 1e-9 * (1.0 + l1)
        assert linf <= l2 + slack
        assert l2 <= l1 + slack
        assert l1 <= np.sqrt(n) * l2 + slack
        assert np.sqrt(n) * l2 <= n * linf + slack

    @given(vectors())
    def test_zero_iff_zero_vector(self, x):
        assert (norm(x, "l1") == 0.0) == (not np.any(x))


class TestL1OperatorNorm:
    def test_identity(self):
        assert l1_operator_norm(np.eye(4)) == 1.0

    def test_hand_columns(self):
        A = np.column_stack([[1.0, 3.0], [-2.0, 4.0]])
        assert l1_operator_norm(A) == 6.0

    def test_equals_vertex_enumeration(self, rng):
        A = rng.standard_normal((6, 3))
        assert l1_operator_norm(A) == pytest.approx(l1_opnorm_by_vertices(A), rel=1e-12)

    @given(matrices(), st.data())
    def test_bounds_every_product(self, A, data):
        x = data.draw(arrays(np.float64, A.shape[1], elements=finite_floats))
        bound = l1_operator_norm(A) * np.abs(x).sum()
        assert np.abs(A @ x).sum() <= bound + 1e-6 * (1.0 + bound)


class TestExtremeSingularValues:
    def test_identity(self):
        assert extreme_singular_values(np.eye(5)) == (pytest.approx(1.0), pytest.approx(1.0))

    def test_embedded_diagonal(self):
        A = np.zeros((3, 2))
        A[0, 0], A[1, 1] = 2.0, 5.0
        smin, smax = extreme_singular_values(A)
        assert smin == pytest.approx(2.0)
        assert smax == pytest.approx(5.0)

    def test_against_closed_form_2x2(self, rng):
        A = rng.standard_normal((4, 2))
        smin, smax = extreme_singular_values(A)
        lo, hi = extreme_singular_values_2cols(A)
        assert smin == pytest.approx(lo, rel=1e-8)
        assert smax == pytest.approx(hi, rel=1e-8)

    def test_rejects_wide(self):
        with pytest.raises(ValueError, match="tall"):
            extreme_singular_values(np.ones((2, 3)))

    @given(matrices(max_rows=8, max_cols=8), st.data())
    @settings(max_examples=50)
    def test_sandwich_bound(self, A, data):
        if A.shape[1] > A.shape[0]:
            A = A.T
        x = data.draw(arrays(np.float64, A.shape[1], elements=finite_floats))
        smin, smax = extreme_singular_values(A)
        xl2 = np.linalg.norm(x)
        axl2 = np.linalg.norm(A @ x)
        slack = 1e-8 * (1.0 + smax * xl2)
        assert smin * xl2 <= axl2 + slack
        assert axl2 <= smax * xl2 + slack


class TestOrthonormalBasis:
    def test_single_column_rescale(self):
        A = np.zeros((4, 1))
        A[0, 0] = 2.0
        Q = orthonormal_basis(A)
        assert Q.shape == (4, 1)
        assert np.allclose(np.abs(Q[:, 0]), [1.0, 0.0, 0.0, 0.0])

    def test_duplicated_column_rank_one(self, rng):
        a = rng.standard_normal(5)
        Q = orthonormal_basis(np.column_stack([a, a]))
        assert Q.shape == (5, 1)

    def test_projection_residual(self, rng):
        A = rng.standard_normal((6, 3))
        Q = orthonormal_basis(A)
        assert np.linalg.norm(Q.T @ Q - np.eye(3)) <= 1e-10
        assert np.linalg.norm(A - Q @ (Q.T @ A)) <= 1e-9 * np.linalg.norm(A)

    def test_zero_input_rank_zero(self):
        assert orthonormal_basis(np.zeros((3, 2))).shape == (3, 0)


def test_random_subspace_l1_l2_equivalence():
    # Unit-l2 vectors y in a random k-dim subspace with k = n/16 satisfy
    # c*sqrt(n) <= ||y||_1 <= sqrt(n) uniformly; calibrated c is conservative
    # (observed min ratio ~0.75 at this seed).
    n, k = 64, 4
    stream = RngStream(2024)
    Q = orthonormal_basis(stream.derive("basis").normal(size=(n, k)))
    C = stream.derive("coef").normal(size=(k, 1000))
    C /= np.linalg.norm(C, axis=0)
    ratios = np.abs(Q @ C).sum(axis=0) / np.sqrt(n)
    assert ratios.min() >= 0.3
    assert ratios.max() <= 1.0 + 1e-12
