import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp

from gflasso.problem import (
    AdmmConfig,
    PenaltyConfig,
    as_signal,
    build_difference_operator,
    build_latent_layout,
    build_partition,
    fusion_penalty,
    lgf_objective,
    mse,
    sgf_objective,
)

from oracles import lgf_objective_direct, sgf_objective_direct

signals = hnp.arrays(
    np.float64,
    st.integers(2, 32),
    elements=st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False, width=64),
)


class TestDifferenceOperator:
    def test_constant_signal(self):
        d = build_difference_operator(3)
        np.testing.assert_array_equal(d.apply(np.array([1.0, 1.0, 1.0])), [0.0, 0.0, 1.0])

    def test_direct_evaluation(self):
        d = build_difference_operator(3)
        np.testing.assert_array_equal(d.apply(np.array([1.0, 2.0, 4.0])), [1.0, 2.0, 4.0])

    def test_gram_diagonal_n4(self):
        # oracle: explicit matrix product for n=4
        d4 = build_difference_operator(4)
        dense = d4.to_dense()
        np.testing.assert_allclose(d4.gram(), dense.T @ dense, atol=1e-15)
        np.testing.assert_array_equal(np.diag(d4.gram()), [1.0, 2.0, 2.0, 2.0])

    def test_rejects_small_n(self):
        with pytest.raises(ValueError):
            build_difference_operator(1)

    def test_exactly_2n_minus_1_nonzeros(self):
        for n in (2, 5, 17):
            dense = build_difference_operator(n).to_dense()
            assert np.count_nonzero(dense) == 2 * n - 1

    def test_transpose_apply_matches_dense(self):
        rng = np.random.default_rng(0)
        for n in (2, 3, 9, 30):
            d = build_difference_operator(n)
            z = rng.normal(size=n)
            np.testing.assert_allclose(d.apply_transpose(z), d.to_dense().T @ z, atol=1e-12)

    def test_invertibility_roundtrip(self):
        rng = np.random.default_rng(1)
        for n in (2, 7, 33, 64):
            d = build_difference_operator(n)
            x = rng.normal(size=n)
            recovered = np.linalg.solve(d.to_dense(), d.apply(x))
            np.testing.assert_allclose(recovered, x, atol=1e-10)


class TestFusionPenalty:
    def test_examples(self):
        assert fusion_penalty(np.array([5.0, 5.0, 5.0])) == 0.0
        assert fusion_penalty(np.array([0.0, 1.0, 0.0])) == 2.0
        assert fusion_penalty(np.array([1.0, 2.0, 4.0, 4.0])) == 3.0

    @given(signals)
    def test_equals_operator_l1_minus_last(self, x):
        d = build_difference_operator(x.size)
        lhs = fusion_penalty(x)
        rhs = np.abs(d.apply(x)).sum() - abs(x[-1])
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


class TestGroupPartition:
    def test_reference_sizes(self):
        p = build_partition(140, 14)
        assert p.g == 14 and p.group_size == 10

    def test_singleton_groups(self):
        p = build_partition(6, 6)
        assert p.group_size == 1

    def test_non_divisor_rejected(self):
        with pytest.raises(ValueError):
            build_partition(10, 3)

    def test_groups_disjoint_and_cover(self):
        p = build_partition(24, 6)
        seen = np.concatenate([np.arange(s.start, s.stop) for s in p.slices()])
        np.testing.assert_array_equal(np.sort(seen), np.arange(24))
        assert len(seen) == len(set(seen.tolist()))


class TestLatentGroupLayout:
    def test_reference_group_count(self):
        assert build_latent_layout(140, 10, 5).g_tilde == 27

    def test_reference_membership_counts(self):
        lay = build_latent_layout(140, 10, 5)
        counts = lay.membership_counts()
        np.testing.assert_array_equal(counts[:5], np.ones(5))
        np.testing.assert_array_equal(counts[-5:], np.ones(5))
        np.testing.assert_array_equal(counts[5:-5], np.full(130, 2.0))

    def test_zero_overlap_rejected(self):
        with pytest.raises(ValueError):
            build_latent_layout(140, 10, 0)

    def test_stride_mismatch_rejected(self):
        with pytest.raises(ValueError):
            build_latent_layout(11, 4, 2)

    def test_consecutive_groups_share_k(self):
        lay = build_latent_layout(22, 6, 2)
        groups = lay.groups()
        for a, b in zip(groups, groups[1:]):
            assert len(set(a.tolist()) & set(b.tolist())) == lay.k

    def test_counts_match_explicit_selector_gram(self):
        for n, gs, k in ((22, 6, 2), (40, 8, 4), (13, 4, 1)):
            lay = build_latent_layout(n, gs, k)
            w = np.zeros((lay.stacked_size, n))
            for row, j in enumerate(np.concatenate(lay.groups())):
                w[row, j] = 1.0
            np.testing.assert_array_equal(np.diag(w.T @ w), lay.membership_counts())
            assert sum(len(g) for g in lay.groups()) == lay.g_tilde * lay.group_size

    def test_gather_scatter_are_adjoint(self):
        rng = np.random.default_rng(5)
        lay = build_latent_layout(15, 5, 3)
        x = rng.normal(size=15)
        s = rng.normal(size=lay.stacked_size)
        assert lay.gather(x) @ s == pytest.approx(x @ lay.scatter(s), rel=1e-12)


class TestConfigs:
    def test_penalties_validate(self):
        PenaltyConfig(0.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            PenaltyConfig(lambda_e=-0.1)
        with pytest.raises(ValueError):
            PenaltyConfig(lambda_g=np.inf)

    def test_admm_validates(self):
        AdmmConfig()
        with pytest.raises(ValueError):
            AdmmConfig(c_u=0.0)
        with pytest.raises(ValueError):
            AdmmConfig(c_z=-1.0)
        with pytest.raises(ValueError):
            AdmmConfig(max_iter=0)
        with pytest.raises(ValueError):
            AdmmConfig(tol=0.0)


class TestObjectives:
    def setup_method(self):
        rng = np.random.default_rng(99)
        self.n, self.m = 6, 4
        self.phi = rng.normal(size=(self.m, self.n))
        self.y = rng.normal(size=self.m)
        self.x = rng.normal(size=self.n)
        self.pen = PenaltyConfig(0.7, 1.3, 0.4)

    def test_trivial_values(self):
        part = build_partition(self.n, 2)
        zero = np.zeros(self.n)
        assert sgf_objective(zero, np.zeros(self.m), self.phi, part, self.pen) == 0.0
        assert sgf_objective(zero, self.y, self.phi, part, self.pen) == pytest.approx(
            0.5 * self.y @ self.y
        )
        lay = build_latent_layout(self.n, 4, 2)
        assert lgf_objective(zero, self.y, self.phi, lay, self.pen) == pytest.approx(
            0.5 * self.y @ self.y
        )

    def test_sgf_matches_independent_evaluator(self):
        part = build_partition(self.n, 2)
        expected = sgf_objective_direct(
            self.x, self.y, self.phi, [slice(0, 3), slice(3, 6)], 0.7, 1.3, 0.4
        )
        got = sgf_objective(self.x, self.y, self.phi, part, self.pen)
        assert got == pytest.approx(expected, rel=1e-12)

    def test_lgf_matches_independent_evaluator(self):
        lay = build_latent_layout(self.n, 4, 2)
        expected = lgf_objective_direct(
            self.x, self.y, self.phi, [[0, 1, 2, 3], [2, 3, 4, 5]], 1.3, 0.4
        )
        got = lgf_objective(self.x, self.y, self.phi, lay, self.pen)
        assert got == pytest.approx(expected, rel=1e-12)

    def test_lgf_counts_overlapping_element_once_per_group(self):
        lay = build_latent_layout(self.n, 4, 2)
        x = np.zeros(self.n)
        x[2] = 1.0  # inside both groups
        pen = PenaltyConfig(0.0, 1.0, 0.0)
        val = lgf_objective(x, np.zeros(self.m), np.zeros((self.m, self.n)), lay, pen)
        assert val == pytest.approx(2.0)

    def test_sgf_reduces_to_lasso(self):
        part = build_partition(self.n, 2)
        pen = PenaltyConfig(0.7, 0.0, 0.0)
        expected = 0.5 * np.sum((self.y - self.phi @ self.x) ** 2) + 0.7 * np.abs(self.x).sum()
        assert sgf_objective(self.x, self.y, self.phi, part, pen) == pytest.approx(expected)

    def test_dimension_mismatch(self):
        part = build_partition(self.n, 2)
        with pytest.raises(ValueError):
            sgf_objective(self.x, self.y[:-1], self.phi, part, self.pen)
        with pytest.raises(ValueError):
            sgf_objective(self.x[:-1], self.y, self.phi, part, self.pen)

    def test_convexity_along_segments(self):
        rng = np.random.default_rng(123)
        part = build_partition(self.n, 3)
        lay = build_latent_layout(self.n, 4, 2)
        for _ in range(200):
            x1 = rng.normal(0, 2, self.n)
            x2 = rng.normal(0, 2, self.n)
            t = rng.uniform()
            xm = t * x1 + (1 - t) * x2
            for f in (
                lambda x: sgf_objective(x, self.y, self.phi, part, self.pen),
                lambda x: lgf_objective(x, self.y, self.phi, lay, self.pen),
            ):
                assert f(xm) <= t * f(x1) + (1 - t) * f(x2) + 1e-12


class TestMse:
    def test_examples(self):
        x = np.array([1.0, 2.0])
        assert mse(x, x) == 0.0
        assert mse(np.array([1.0, 1.0]), np.array([0.0, 0.0])) == 1.0
        assert mse(np.array([2.0, 0.0, 0.0, 0.0]), np.zeros(4)) == 1.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            mse(np.zeros(3), np.zeros(4))


class TestAsSignal:
    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            as_signal([1.0])
        with pytest.raises(ValueError):
            as_signal([1.0, np.nan])
        with pytest.raises(ValueError):
            as_signal(np.zeros((2, 2)))
