import numpy as np
import pytest
from scipy import stats

from sparsespan.rng import RngStream
from sparsespan.subspaces import (
    MIX_CONDITION_LIMIT,
    PlantedInstance,
    TestVectorSpec,
    bernoulli_gaussian,
    load_instance,
    make_test_vector,
    planted_random,
    projector_diagonal,
    pure_random_basis,
    read_matrix,
    save_instance,
    top_support,
    write_matrix,
)

from oracles import sparsest_direction_count


def stream(*labels):
    return RngStream(1444).derive(*labels)


class TestMakeTestVector:
    def test_zero_noise_gives_indicator(self):
        v = make_test_vector(TestVectorSpec(10, 3, 0.0), stream("a"))
        want = np.zeros(10)
        want[:3] = 1.0
        assert np.array_equal(v, want)

    def test_noise_mass_is_delta(self):
        for delta in (1e-3, 0.01, 0.3):
            v = make_test_vector(TestVectorSpec(50, 5, delta), stream("b"))
            indicator = np.zeros(50)
            indicator[:5] = 1.0
            assert np.abs(v - indicator).sum() == pytest.approx(delta, abs=1e-12)

    def test_entry_bounds(self):
        v = make_test_vector(TestVectorSpec(100, 10, 0.01), stream("c"))
        assert np.all(np.abs(v[10:]) <= 0.01)
        assert np.all(v[:10] >= 0.99 - 1e-12)

    def test_peak_on_support_for_small_delta(self):
        for t in range(20):
            v = make_test_vector(TestVectorSpec(30, 4, 0.4, support=(5, 9, 11, 20)), stream("d", t))
            assert int(np.argmax(np.abs(v))) in (5, 9, 11, 20)

    def test_custom_support(self):
        v = make_test_vector(TestVectorSpec(8, 2, 0.0, support=(1, 6)), stream("e"))
        assert set(np.nonzero(v)[0]) == {1, 6}

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            TestVectorSpec(5, 0, 0.0)
        with pytest.raises(ValueError):
            TestVectorSpec(5, 6, 0.0)
        with pytest.raises(ValueError):
            TestVectorSpec(5, 2, -0.1)
        with pytest.raises(ValueError):
            TestVectorSpec(5, 2, 0.0, support=(0,))
        with pytest.raises(ValueError):
            TestVectorSpec(5, 2, 0.0, support=(0, 7))


class TestPlantedRandom:
    def test_unmixed_keeps_v_first(self):
        v = make_test_vector(TestVectorSpec(12, 2, 0.01), stream("f"))
        inst = planted_random(v, 3, stream("g"), mixed=False)
        assert np.array_equal(inst.W[:, 0], v)
        assert np.array_equal(inst.mix, np.eye(4))

    def test_mixed_preserves_span(self):
        v = make_test_vector(TestVectorSpec(20, 3, 0.01), stream("h"))
        inst = planted_random(v, 4, stream("i"), support_size=3)
        from sparsespan.linalg import orthonormal_basis

        Q = orthonormal_basis(inst.W)
        resid = np.linalg.norm(v - Q @ (Q.T @ v))
        assert resid <= 1e-8 * np.linalg.norm(v)

    def test_mix_conditioning(self):
        for t in range(10):
            inst = planted_random(np.ones(9), 2, stream("j", t))
            assert np.linalg.cond(inst.mix) <= MIX_CONDITION_LIMIT

    def test_k_bounds(self):
        v = np.ones(6)
        planted_random(v, 5, stream("k"))  # k = n - 1 accepted
        with pytest.raises(ValueError):
            planted_random(v, 6, stream("k2"))
        with pytest.raises(ValueError):
            planted_random(v, 0, stream("k3"))

    def test_i_star_lowest_argmax(self):
        v = np.array([0.0, 2.0, -2.0, 1.0])
        inst = planted_random(v, 1, stream("l"))
        assert inst.i_star == 1

    def test_support_field(self):
        v = np.array([0.5, 0.0, 2.0, -1.0, 0.0])
        inst = planted_random(v, 1, stream("m"), support_size=2)
        assert list(inst.S) == [2, 3]
        inst_full = planted_random(v, 1, stream("n"))
        assert list(inst_full.S) == [0, 2, 3]

    def test_rejects_zero_vector(self):
        with pytest.raises(ValueError):
            planted_random(np.zeros(5), 1, stream("o"))

    def test_planted_vector_is_sparsest_direction(self):
        # Grid over coefficient directions: nothing in the span beats v's
        # thresholded support count when ||v||_0 < n - k.
        for t in range(3):
            v = make_test_vector(TestVectorSpec(8, 2, 0.0), stream("p", t))
            inst = planted_random(v, 2, stream("q", t), support_size=2)
            V = np.column_stack([v, inst.vtilde])
            assert sparsest_direction_count(V, zero_level=1e-6) >= 2


class TestTopSupport:
    def test_ties_to_lowest_index(self):
        assert list(top_support(np.array([1.0, 1.0, 1.0]), 2)) == [0, 1]

    def test_magnitude_order(self):
        assert list(top_support(np.array([0.1, -5.0, 2.0, 0.0]), 2)) == [1, 2]


class TestPureRandomBasis:
    def test_determinism(self):
        a = pure_random_basis(10, 3, stream("r"))
        b = pure_random_basis(10, 3, stream("r"))
        assert np.array_equal(a, b)

    def test_k_equal_n_allowed(self):
        assert pure_random_basis(4, 4, stream("s")).shape == (4, 4)
        with pytest.raises(ValueError):
            pure_random_basis(4, 5, stream("s2"))

    def test_column_length_concentration(self):
        # ||a||_2^2 is chi-square with n degrees of freedom; the mean over
        # 1000 draws concentrates within 5 standard errors.
        n, draws = 16, 1000
        sq = np.array(
            [np.sum(pure_random_basis(n, 1, stream("t", i)) ** 2) for i in range(draws)]
        )
        se = np.sqrt(2.0 * n / draws)
        assert abs(sq.mean() - n) <= 5 * se

    def test_entry_moments(self):
        x = pure_random_basis(500, 200, stream("u")).ravel()
        assert abs(x.mean()) <= 0.02
        assert abs(x.var() - 1.0) <= 0.02


class TestBernoulliGaussian:
    def test_theta_one_has_no_zeros(self):
        M = bernoulli_gaussian(40, 25, 1.0, stream("v"))
        assert np.count_nonzero(M) == M.size

    def test_sparsity_fraction(self):
        M = bernoulli_gaussian(100, 100, 0.1, stream("w"))
        frac = np.count_nonzero(M) / M.size
        assert abs(frac - 0.1) <= 0.02

    def test_determinism(self):
        a = bernoulli_gaussian(7, 7, 0.4, stream("x"))
        b = bernoulli_gaussian(7, 7, 0.4, stream("x"))
        assert np.array_equal(a, b)

    def test_theta_validation(self):
        with pytest.raises(ValueError):
            bernoulli_gaussian(3, 3, 0.0, stream("y"))
        with pytest.raises(ValueError):
            bernoulli_gaussian(3, 3, 1.5, stream("z"))


class TestProjectorDiagonal:
    def test_coordinate_subspace(self):
        W = np.zeros((5, 1))
        W[1, 0] = 3.0
        assert np.allclose(projector_diagonal(W), np.eye(5)[1])

    def test_full_space(self, rng):
        W = rng.standard_normal((6, 6))
        assert np.allclose(projector_diagonal(W), np.ones(6), atol=1e-9)

    def test_against_normal_equations(self, rng):
        W = rng.standard_normal((6, 2))
        P = W @ np.linalg.solve(W.T @ W, W.T)
        assert np.allclose(projector_diagonal(W), np.diag(P), atol=1e-9)

    def test_range_and_sum(self, rng):
        W = rng.standard_normal((9, 4))
        d = projector_diagonal(W)
        assert np.all(d >= -1e-12) and np.all(d <= 1.0 + 1e-12)
        assert d.sum() == pytest.approx(4.0, abs=1e-8)


class TestPersistence:
    def test_matrix_round_trip(self, rng, tmp_path):
        A = rng.standard_normal((4, 3)) * 10.0 ** rng.integers(-8, 8, size=(4, 3))
        path = tmp_path / "m.txt"
        write_matrix(path, A)
        assert np.array_equal(read_matrix(path), A)

    def test_malformed_header(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("3\n1 2 3\n")
        with pytest.raises(ValueError, match="header"):
            read_matrix(path)

    def test_shape_mismatch(self, tmp_path):
        path = tmp_path / "short.txt"
        path.write_text("2 2\n1 2\n")
        with pytest.raises(ValueError):
            read_matrix(path)

    def test_instance_round_trip(self, tmp_path):
        v = make_test_vector(TestVectorSpec(10, 2, 0.01), stream("p1"))
        inst = planted_random(v, 2, stream("p2"), support_size=2)
        save_instance(inst, tmp_path / "inst")
        back = load_instance(tmp_path / "inst")
        assert isinstance(back, PlantedInstance)
        assert back.n == inst.n and back.k == inst.k and back.i_star == inst.i_star
        for field in ("v", "vtilde", "W", "mix", "S"):
            assert np.array_equal(getattr(back, field), getattr(inst, field))


def test_mixed_and_unmixed_share_objectives():
    # The pinned programs depend only on the span, so the mixed basis must
    # give the same objectives as the raw [v | vtilde] basis.
    from sparsespan.lp import solve_l1_program

    v = make_test_vector(TestVectorSpec(10, 2, 0.01), stream("q1"))
    mixed = planted_random(v, 2, stream("q2"), support_size=2)
    plain = np.column_stack([v, mixed.vtilde])
    for i in range(10):
        a = solve_l1_program(mixed.W, i).objective
        b = solve_l1_program(plain, i).objective
        assert a == pytest.approx(b, rel=1e-7)
