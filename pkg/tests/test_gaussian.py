"""Tests for the Monte Carlo gaussian field and the checks built on it."""

import math

import numpy as np
import pytest

from schurlab.core.errors import InvalidExponentError, PreconditionError
from schurlab.core.gaussian import (
    GaussianSampler,
    MCEstimate,
    empirical_covariance,
    gaussian_moment,
    khintchine_growth,
    khintchine_ratio,
    philox_stream,
    projection_coefficient,
    sample_field,
    sgn_covariance,
    sign_multiplier_check,
    square_function_check,
)
from schurlab.core.hilbert import VectorFamily, gram
from schurlab.core.linalg import random_complex_matrix
from schurlab.core.symbols import random_family


def unit_family(vectors: list[list[float]]) -> VectorFamily:
    arr = np.asarray(vectors, dtype=np.float64)
    return VectorFamily.from_vectors(arr / np.linalg.norm(arr, axis=1, keepdims=True))


class TestMoments:
    """Tests for gaussian_moment and MCEstimate."""

    def test_closed_forms(self) -> None:
        assert gaussian_moment(2.0) == pytest.approx(1.0)
        assert gaussian_moment(1.0) == pytest.approx(math.sqrt(2.0 / math.pi))
        assert gaussian_moment(4.0) == pytest.approx(3.0**0.25)

    def test_estimate_interval(self) -> None:
        est = MCEstimate(value=1.0, stderr=0.1, target=1.25)

        assert est.lower == pytest.approx(0.7)
        assert est.upper == pytest.approx(1.3)
        assert est.covers_target
        assert not MCEstimate(value=1.0, stderr=0.0, target=1.1).covers_target
        assert MCEstimate(value=1.0, stderr=0.0).covers_target


class TestSampler:
    """Tests for GaussianSampler."""

    def test_streams_are_keyed(self) -> None:
        a = philox_stream(3, 1, 0).standard_normal(4)
        b = philox_stream(3, 1, 0).standard_normal(4)
        c = philox_stream(3, 2, 0).standard_normal(4)

        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_chunked_shape_and_determinism(self) -> None:
        F = random_family(3, 2, np.random.default_rng(0), real=True)
        S = GaussianSampler(F, seed=5, samples=250, chunk_rows=100)

        W = sample_field(S, trial=1)

        assert W.shape == (250, 3)
        np.testing.assert_array_equal(W, sample_field(S, trial=1))
        assert not np.array_equal(W, sample_field(S, trial=2))

    def test_covariance_converges(self) -> None:
        F = unit_family([[1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 1.0]])
        S = GaussianSampler(F, seed=1, samples=20_000)

        C = empirical_covariance(S)

        assert np.max(np.abs(C - gram(F).real)) <= 4.0 * math.sqrt(2.0 / S.samples)

    def test_repeated_and_opposite_vectors(self) -> None:
        F = VectorFamily.from_vectors(np.array([[1.0, 0.0], [1.0, 0.0], [-1.0, 0.0]]))
        W = sample_field(GaussianSampler(F, seed=2, samples=50))

        np.testing.assert_allclose(W[:, 1], W[:, 0], atol=1e-6)
        np.testing.assert_allclose(W[:, 2], -W[:, 0], atol=1e-6)

    def test_complex_family_is_realified(self) -> None:
        F = random_family(3, 2, np.random.default_rng(3))
        S = GaussianSampler(F, samples=10)

        assert S.family.dim == 4
        np.testing.assert_allclose(S.gram, gram(F).real, atol=1e-12)

    def test_rejects_empty_sample(self) -> None:
        with pytest.raises(PreconditionError, match="positive"):
            GaussianSampler(random_family(2, 1, np.random.default_rng(4)), samples=0)


class TestIdentities:
    """Tests for the sgn covariance and the projection coefficient."""

    def test_sgn_covariance_of_identical_vectors(self) -> None:
        F = unit_family([[1.0, 2.0], [1.0, 2.0]])
        est = sgn_covariance(GaussianSampler(F, seed=6, samples=2000), 0, 1)

        assert est.value == pytest.approx(1.0)
        assert est.covers_target

    def test_sgn_covariance_matches_arcsin(self) -> None:
        t = 0.5
        F = unit_family([[1.0, 0.0], [t, math.sqrt(1.0 - t * t)]])
        est = sgn_covariance(GaussianSampler(F, seed=7, samples=40_000), 0, 1)

        assert est.target == pytest.approx(2.0 / math.pi * math.asin(t))
        assert abs(est.value - est.target) <= 4.0 * est.stderr

    def test_sgn_covariance_needs_unit_vectors(self) -> None:
        F = VectorFamily.from_vectors(np.array([[2.0, 0.0], [0.0, 1.0]]))

        with pytest.raises(PreconditionError, match="unit"):
            sgn_covariance(GaussianSampler(F, samples=10), 0, 1)

    def test_projection_coefficient(self) -> None:
        F = random_family(2, 3, np.random.default_rng(8), real=True)
        est = projection_coefficient(GaussianSampler(F, seed=8, samples=40_000), 0, 1)

        assert est.target == pytest.approx(math.sqrt(2.0 / math.pi))
        assert abs(est.value - est.target) <= 4.0 * est.stderr

    def test_projection_needs_distinct_vectors(self) -> None:
        F = unit_family([[1.0, 0.0], [1.0, 0.0]])

        with pytest.raises(PreconditionError, match="projection undefined"):
            projection_coefficient(GaussianSampler(F, samples=10), 0, 1)


class TestKhintchine:
    """Tests for khintchine_ratio."""

    @pytest.mark.parametrize("p", [1.5, 3.0])
    def test_single_term_gives_moment(self, p: float) -> None:
        F = unit_family([[3.0, 4.0]])
        x = random_complex_matrix((3, 3), np.random.default_rng(9))

        report = khintchine_ratio([x], F, p, GaussianSampler(F, seed=9, samples=20_000))

        assert report.gamma_p == pytest.approx(gaussian_moment(p))
        assert abs(report.ratio - report.gamma_p) <= 4.0 * report.stderr + 1e-9

    def test_random_combination_within_window(self) -> None:
        rng = np.random.default_rng(10)
        F = random_family(4, 2, rng, real=True)
        xs = [random_complex_matrix((3, 3), rng) for _ in range(4)]

        report = khintchine_ratio(xs, F, 3.0, GaussianSampler(F, seed=10, samples=5000), trial=2)

        assert report.window[0] == pytest.approx(0.25)
        assert report.window[1] == pytest.approx(4.0 * math.sqrt(3.0))
        assert report.within_window

    def test_family_must_match_sampler(self) -> None:
        F = random_family(2, 2, np.random.default_rng(11), real=True)
        other = random_family(3, 2, np.random.default_rng(12), real=True)

        with pytest.raises(PreconditionError, match="sampler"):
            khintchine_ratio([np.eye(2)] * 2, F, 3.0, GaussianSampler(other, samples=10))


class TestKhintchineGrowth:
    """Tests for khintchine_growth."""

    def test_fixed_instance_across_p(self) -> None:
        rng = np.random.default_rng(30)
        F = random_family(3, 2, rng, real=True)
        xs = [random_complex_matrix((3, 3), rng) for _ in range(3)]
        S = GaussianSampler(F, seed=30, samples=4000)
        ps = [1.5, 2.0, 4.0, 8.0]

        result = khintchine_growth(xs, F, ps, S, trial=1)

        assert [r.p for r in result.reports] == ps
        # same x_k, family and stream as evaluating each p on its own
        assert result.reports[2].ratio == khintchine_ratio(xs, F, 4.0, S, trial=1).ratio
        assert result.growth == pytest.approx(max(r.ratio / math.sqrt(r.p) for r in result.reports))
        assert result.worst.ratio / math.sqrt(result.worst.p) == result.growth
        assert result.growth <= 4.0
        assert not result.violation

    def test_violation_above_constant(self) -> None:
        rng = np.random.default_rng(31)
        F = random_family(2, 2, rng, real=True)
        xs = [random_complex_matrix((2, 2), rng) for _ in range(2)]

        result = khintchine_growth(xs, F, [2.0, 3.0], GaussianSampler(F, seed=31, samples=1000), b_emp=1e-3)

        assert result.violation

    def test_empty_grid(self) -> None:
        F = random_family(2, 2, np.random.default_rng(32), real=True)

        with pytest.raises(PreconditionError, match="empty"):
            khintchine_growth([np.eye(2)] * 2, F, [], GaussianSampler(F, samples=10))


class TestSignEquivalence:
    """Tests for sign_multiplier_check."""

    def test_ratio_within_window(self) -> None:
        rng = np.random.default_rng(13)
        F = random_family(4, 2, rng, real=True)
        x = random_complex_matrix((4, 4), rng)

        report = sign_multiplier_check(F, x, 3.0, GaussianSampler(F, seed=13, samples=500), 300, k=8.0)

        assert report.samples == 300
        assert report.per_sample.shape == (300,)
        assert report.c_p == pytest.approx(3.0)
        assert report.within_window

    def test_two_points_preserve_norm_at_two(self) -> None:
        # two indices: every sign pattern is unimodular entrywise
        F = VectorFamily.from_vectors(np.array([[1.0], [-1.0]]))
        x = np.array([[1.0, 2.0], [3.0, 4.0]])

        report = sign_multiplier_check(F, x, 2.0, GaussianSampler(F, seed=14, samples=50), 50)

        assert report.ratio == pytest.approx(1.0)

    def test_rejects_zero(self) -> None:
        F = random_family(2, 1, np.random.default_rng(15), real=True)

        with pytest.raises(PreconditionError, match="x = 0"):
            sign_multiplier_check(F, np.zeros((2, 2)), 2.0, GaussianSampler(F, samples=10))


class TestSquareFunction:
    """Tests for square_function_check."""

    @pytest.mark.parametrize("p", [2.0, 4.0])
    def test_matches_exact_norms(self, p: float) -> None:
        rng = np.random.default_rng(16)
        F = random_family(3, 2, rng, real=True)
        xs = [random_complex_matrix((3, 3), rng) for _ in range(3)]

        report = square_function_check(xs, F, p, GaussianSampler(F, seed=16, samples=40_000))

        assert report.row_error < 0.05
        assert report.column_error < 0.05

    def test_requires_p_at_least_two(self) -> None:
        F = random_family(2, 1, np.random.default_rng(17), real=True)

        with pytest.raises(InvalidExponentError, match="outside"):
            square_function_check([np.eye(2)] * 2, F, 1.5, GaussianSampler(F, samples=10))
