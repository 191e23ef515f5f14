"""
Vector similarity functions.

``cosmul`` is the multiplicative combination used for analogy queries:
each cosine is shifted into [0, 1] and positive similarities are
multiplied together, then divided by the product over negatives.
"""

from __future__ import annotations


from typing import Sequence

import numpy as np

from patch_rank.config.settings import SimilarityMetric
from patch_rank.utils.exceptions import SimilarityError

COSMUL_EPSILON = 1e-6


def _as_vector(value: np.ndarray | Sequence[float], name: str) -> np.ndarray:
    vector = np.asarray(value, dtype=np.float64)
    if vector.ndim != 1:
        raise SimilarityError(f"{name} must be one-dimensional", details={"shape": vector.shape})
    return vector


def cosine(u: np.ndarray | Sequence[float], v: np.ndarray | Sequence[float]) -> float:
    """
    Cosine of the angle between u and v, in [-1, 1].

    Raises:
        SimilarityError: On a length mismatch or a zero vector
    """
    a, b = _as_vector(u, "u"), _as_vector(v, "v")
    if a.shape != b.shape:
        raise SimilarityError(
            "vector lengths differ", details={"u": a.shape[0], "v": b.shape[0]}
        )
    norm = float(np.linalg.norm(a) * np.linalg.norm(b))
    if norm == 0.0:
        raise SimilarityError("zero-norm vector")
    return float(np.clip(np.dot(a, b) / norm, -1.0, 1.0))


def _shifted(candidate: np.ndarray, others: Sequence[np.ndarray]) -> np.ndarray:
    return np.array([(1.0 + cosine(candidate, o)) / 2.0 for o in others], dtype=np.float64)


def cosmul(
    candidate: np.ndarray | Sequence[float],
    positives: Sequence[np.ndarray],
    negatives: Sequence[np.ndarray] = (),
    epsilon: float = COSMUL_EPSILON,
) -> float:
    """
    Multiplicative combination of shifted cosines.

    Computes prod((1+cos(c,p))/2 for p in positives) divided by
    prod((1+cos(c,n))/2 for n in negatives) + epsilon. The empty product
    over negatives is 1.

    Raises:
        SimilarityError: If positives is empty or any vector is unusable
    """
    if len(positives) == 0:
        raise SimilarityError("cosmul needs at least one positive vector")
    if epsilon <= 0:
        raise SimilarityError("epsilon must be positive", details={"epsilon": epsilon})
    c = _as_vector(candidate, "candidate")
    numerator = float(np.prod(_shifted(c, positives)))
    denominator = float(np.prod(_shifted(c, negatives))) + epsilon
    return numerator / denominator


def score(
    metric: SimilarityMetric,
    candidate: np.ndarray,
    positives: Sequence[np.ndarray],
    negatives: Sequence[np.ndarray] = (),
) -> float:
    """Score a candidate under the chosen metric. Cosine uses the first positive."""
    if metric == SimilarityMetric.COSINE:
        if len(positives) == 0:
            raise SimilarityError("cosine needs a reference vector")
        return cosine(candidate, positives[0])
    return cosmul(candidate, positives, negatives)
