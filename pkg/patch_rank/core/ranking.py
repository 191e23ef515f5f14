"""
Similarity ranking of patch variants.

Every candidate and the developer fix is scored against the original
snippet's document vector and sorted by descending score. Exact ties put
the developer fix first, then order by doc id.
"""

from __future__ import annotations


import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from patch_rank.config.settings import SimilarityMetric
from patch_rank.core.embedding import EmbeddingModel
from patch_rank.core.models import BugCase, CorpusManifest, RankedEntry, RankedList, VariantKind
from patch_rank.core.similarity import score
from patch_rank.utils.exceptions import (
    PatchRankError,
    RankingError,
    SimilarityError,
    UnknownDocumentError,
)
from patch_rank.utils.logger import get_logger

logger = get_logger(__name__)

KIND_ORDER = {VariantKind.DEVELOPER_FIX: 0, VariantKind.CANDIDATE: 1}


@dataclass
class RankingOutcome:
    """Rankings that succeeded plus the per-bug errors."""

    rankings: list[RankedList] = field(default_factory=list)
    errors: dict[str, PatchRankError] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.errors


def _vector(model: EmbeddingModel, bug_id: str, doc_id: str) -> np.ndarray:
    try:
        return model.doc_vector(doc_id)
    except UnknownDocumentError as e:
        raise RankingError("Missing document vector", bug_id=bug_id, doc_id=doc_id) from e


def rank_bug(
    model: EmbeddingModel,
    bug: BugCase,
    metric: SimilarityMetric = SimilarityMetric.COSMUL,
) -> RankedList:
    """
    Rank the developer fix and all candidates of a bug.

    Args:
        model: Model trained on a corpus containing the bug's snippets
        bug: The bug to rank
        metric: Scoring function; cosmul uses the original as sole positive

    Raises:
        RankingError: If a doc vector is missing or cannot be scored
    """
    original = _vector(model, bug.bug_id, bug.original_doc_id)

    scored: list[tuple[float, VariantKind, str]] = []
    variants = [(bug.developer_doc_id, VariantKind.DEVELOPER_FIX)] + [
        (bug.candidate_doc_id(c.candidate_id), VariantKind.CANDIDATE) for c in bug.candidates
    ]
    for doc_id, kind in variants:
        vector = _vector(model, bug.bug_id, doc_id)
        try:
            value = score(metric, vector, [original])
        except SimilarityError as e:
            raise RankingError(
                f"Cannot score variant: {e.message}", bug_id=bug.bug_id, doc_id=doc_id
            ) from e
        if not math.isfinite(value):
            raise RankingError("Non-finite score", bug_id=bug.bug_id, doc_id=doc_id)
        scored.append((value, kind, doc_id))

    scored.sort(key=lambda item: (-item[0], KIND_ORDER[item[1]], item[2]))
    entries = tuple(
        RankedEntry(doc_id=doc_id, kind=kind, score=value, rank=rank)
        for rank, (value, kind, doc_id) in enumerate(scored, start=1)
    )
    ranked = RankedList(bug_id=bug.bug_id, metric=metric.value, entries=entries)
    logger.debug(
        "Ranked bug",
        bug_id=bug.bug_id,
        entries=len(entries),
        developer_rank=ranked.developer_rank(),
    )
    return ranked


def rank_all(
    models: Mapping[str, EmbeddingModel],
    manifest: CorpusManifest,
    metric: SimilarityMetric = SimilarityMetric.COSMUL,
) -> RankingOutcome:
    """
    Rank every bug of the manifest, in manifest order.

    A bug without a model, or whose ranking fails, is recorded in
    ``errors`` and the remaining bugs are still ranked.
    """
    outcome = RankingOutcome()
    for bug in manifest.bugs:
        model = models.get(bug.bug_id)
        if model is None:
            error = RankingError("No model for bug", bug_id=bug.bug_id)
            logger.error(str(error), bug_id=bug.bug_id)
            outcome.errors[bug.bug_id] = error
            continue
        try:
            outcome.rankings.append(rank_bug(model, bug, metric))
        except RankingError as e:
            logger.error(f"Ranking failed: {e}", bug_id=bug.bug_id)
            outcome.errors[bug.bug_id] = e
    return outcome
