"""
Unit tests for the similarity functions.
"""

import numpy as np
import pytest

from patch_rank.config.settings import SimilarityMetric
from patch_rank.core.similarity import COSMUL_EPSILON, cosine, cosmul, score
from patch_rank.utils.exceptions import SimilarityError


class TestCosine:
    """Tests for cosine."""

    @pytest.mark.parametrize(
        "u, v, expected",
        [
            ((1, 0), (1, 0), 1.0),
            ((1, 0), (0, 1), 0.0),
            ((1, 0), (-1, 0), -1.0),
            ((3, 4), (6, 8), 1.0),
        ],
    )
    def test_known_values(self, u, v, expected):
        assert cosine(u, v) == pytest.approx(expected)

    def test_symmetric(self):
        rng = np.random.default_rng(1)
        for dim in (2, 16, 256):
            for _ in range(100):
                u, v = rng.normal(size=dim), rng.normal(size=dim)
                assert cosine(u, v) == cosine(v, u)

    def test_stays_in_range(self):
        v = np.full(64, 0.1)
        assert -1.0 <= cosine(v, v) <= 1.0

    def test_zero_vector(self):
        with pytest.raises(SimilarityError, match="zero-norm"):
            cosine((0, 0), (1, 0))

    def test_length_mismatch(self):
        with pytest.raises(SimilarityError, match="lengths differ"):
            cosine((1, 0), (1, 0, 0))


class TestCosmul:
    """Tests for cosmul."""

    def test_identity(self):
        assert cosmul((1, 0), [(1, 0)]) == pytest.approx(1.0 / (1.0 + COSMUL_EPSILON))

    def test_orthogonal(self):
        assert cosmul((1, 0), [(0, 1)]) == pytest.approx(0.5 / (1.0 + COSMUL_EPSILON))

    def test_with_negative(self):
        value = cosmul((1, 0), [(1, 0)], [(0, 1)])
        assert value == pytest.approx(1.0 / (0.5 + 1e-6), abs=1e-9)
        assert value == pytest.approx(1.999996, abs=1e-6)

    def test_scale_invariance(self):
        rng = np.random.default_rng(5)
        c, p, n = rng.normal(size=(3, 8))
        base = cosmul(c, [p], [n])
        assert cosmul(3.0 * c, [0.2 * p], [7.5 * n]) == pytest.approx(base, rel=1e-9)

    def test_non_negative(self):
        assert cosmul((1, 0), [(-1, 0)]) == pytest.approx(0.0)

    def test_agrees_with_cosine_ranking(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            reference = rng.normal(size=8)
            candidates = rng.normal(size=(6, 8))
            by_cosine = sorted(range(6), key=lambda i: -cosine(candidates[i], reference))
            by_cosmul = sorted(range(6), key=lambda i: -cosmul(candidates[i], [reference]))
            assert by_cosine == by_cosmul

    def test_empty_positives(self):
        with pytest.raises(SimilarityError):
            cosmul((1, 0), [])

    def test_zero_vector(self):
        with pytest.raises(SimilarityError):
            cosmul((0, 0), [(1, 0)])

    def test_epsilon_must_be_positive(self):
        with pytest.raises(SimilarityError):
            cosmul((1, 0), [(1, 0)], epsilon=0.0)


class TestScore:
    """Tests for metric dispatch."""

    def test_cosine_metric(self):
        assert score(SimilarityMetric.COSINE, np.array([1.0, 0.0]), [np.array([0.0, 1.0])]) == 0.0

    def test_cosmul_metric(self):
        value = score(SimilarityMetric.COSMUL, np.array([1.0, 0.0]), [np.array([0.0, 1.0])])
        assert value == pytest.approx(0.5, rel=1e-5)

    def test_cosine_without_reference(self):
        with pytest.raises(SimilarityError):
            score(SimilarityMetric.COSINE, np.array([1.0, 0.0]), [])
