"""
Relevance annotations and ranking quality metrics.

Implements DCG with the exponential gain ``2**rel - 1`` and a
``log2(i + 1)`` discount, its ideal value over the descending-sorted
relevances, and their ratio nDCG. Relevance scores may be half steps in
[-1, 3], so the gain uses the real-valued power.
"""

from __future__ import annotations


import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from pydantic import ValidationError

from patch_rank.core.models import (
    SYNTACTIC_RELEVANCE,
    AnnotationSet,
    EvalFlag,
    EvalResult,
    RankedList,
)
from patch_rank.core.tokenizer import normalize_whitespace
from patch_rank.utils.exceptions import AnnotationError, EvaluationError
from patch_rank.utils.logger import get_logger

logger = get_logger(__name__)


def syntactic_match(a: str, b: str) -> bool:
    """True when the two texts are equal once all whitespace is removed."""
    return normalize_whitespace(a) == normalize_whitespace(b)


def _check_cutoff(relevances: Sequence[float], p: int) -> None:
    if not 1 <= p <= len(relevances):
        raise EvaluationError(
            f"cutoff p={p} outside 1..{len(relevances)}",
            details={"p": p, "length": len(relevances)},
        )


def dcg(relevances: Sequence[float], p: int) -> float:
    """
    Discounted cumulative gain of the first p relevances.

    Raises:
        EvaluationError: If p is outside 1..len(relevances)
    """
    _check_cutoff(relevances, p)
    rel = np.asarray(relevances[:p], dtype=np.float64)
    gains = np.power(2.0, rel) - 1.0
    discounts = np.log2(np.arange(2, p + 2, dtype=np.float64))
    return float(np.sum(gains / discounts))


def idcg(relevances: Sequence[float], p: int) -> float:
    """DCG of the relevances sorted in descending order, cut at p."""
    _check_cutoff(relevances, p)
    return dcg(sorted(relevances, reverse=True), p)


@dataclass(frozen=True)
class NdcgValue:
    """nDCG with the DCG and IDCG it was computed from."""

    p: int
    dcg: float
    idcg: float
    ndcg: float
    flags: frozenset[EvalFlag] = field(default_factory=frozenset)


def ndcg(ranked_relevances: Sequence[float], p: int) -> NdcgValue:
    """
    Normalized DCG.

    When the ideal DCG is not positive the ratio is undefined; nDCG is
    then reported as 0.0 and flagged IdcgNonPositive.
    """
    actual = dcg(ranked_relevances, p)
    ideal = idcg(ranked_relevances, p)
    if ideal > 0:
        return NdcgValue(p=p, dcg=actual, idcg=ideal, ndcg=actual / ideal)
    return NdcgValue(
        p=p,
        dcg=actual,
        idcg=ideal,
        ndcg=0.0,
        flags=frozenset({EvalFlag.IDCG_NON_POSITIVE}),
    )


def evaluate_bug(ranked: RankedList, annotations: AnnotationSet) -> EvalResult:
    """
    Evaluate one ranked list against its annotations over the whole list.

    Raises:
        AnnotationError: If a ranked doc id has no relevance score
        EvaluationError: If the ranking is empty
    """
    if annotations.bug_id != ranked.bug_id:
        raise AnnotationError(
            f"Annotations belong to bug {annotations.bug_id}", bug_id=ranked.bug_id
        )
    if not ranked.entries:
        raise EvaluationError("Cannot evaluate an empty ranking", details={"bug_id": ranked.bug_id})

    missing = annotations.missing(ranked.doc_ids())
    if missing:
        raise AnnotationError("Unannotated documents", bug_id=ranked.bug_id, doc_ids=missing)

    relevances = [annotations.scores[d] for d in ranked.doc_ids()]
    value = ndcg(relevances, len(relevances))
    flags = set(value.flags)
    if any(r == SYNTACTIC_RELEVANCE for r in relevances):
        flags.add(EvalFlag.SYNTACTIC_MATCH_PRESENT)

    result = EvalResult(
        bug_id=ranked.bug_id,
        p=value.p,
        dcg=value.dcg,
        idcg=value.idcg,
        ndcg=value.ndcg,
        flags=frozenset(flags),
    )
    logger.debug("Evaluated bug", bug_id=ranked.bug_id, ndcg=f"{result.ndcg:.6f}")
    return result


def merge_annotations(
    a: AnnotationSet,
    b: AnnotationSet,
    arbiter: AnnotationSet | None = None,
) -> AnnotationSet:
    """
    Combine two annotators' judgments.

    Agreeing scores are kept; disagreements take the arbiter's score.

    Raises:
        AnnotationError: If the sets cover different docs or a disagreement
            has no arbiter score
    """
    if a.bug_id != b.bug_id or (arbiter is not None and arbiter.bug_id != a.bug_id):
        raise AnnotationError("Annotation sets belong to different bugs", bug_id=a.bug_id)
    if set(a.scores) != set(b.scores):
        raise AnnotationError(
            "Annotation sets cover different documents",
            bug_id=a.bug_id,
            doc_ids=set(a.scores) ^ set(b.scores),
        )

    merged: dict[str, float] = {}
    unresolved: list[str] = []
    for doc_id, value in a.scores.items():
        other = b.scores[doc_id]
        if value == other:
            merged[doc_id] = value
        elif arbiter is not None and doc_id in arbiter.scores:
            merged[doc_id] = arbiter.scores[doc_id]
        else:
            unresolved.append(doc_id)
    if unresolved:
        raise AnnotationError("Disagreements without arbiter score", bug_id=a.bug_id, doc_ids=unresolved)

    annotator = f"{a.annotator}+{b.annotator}"
    if arbiter is not None:
        annotator += f"/{arbiter.annotator}"
    return AnnotationSet(bug_id=a.bug_id, annotator=annotator, scores=merged)


def load_annotations(path: Path | str, bug_id: str | None = None) -> AnnotationSet:
    """
    Read an annotations file.

    Args:
        path: annotations.json
        bug_id: Expected bug id; the file's own bug_id must match when given

    Raises:
        AnnotationError: If the file is unreadable or invalid
    """
    source = Path(path)
    try:
        data = json.loads(source.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise AnnotationError(f"Cannot read annotations: {e}", bug_id=bug_id) from e
    if isinstance(data, dict) and bug_id is not None:
        data.setdefault("bug_id", bug_id)
    try:
        annotations = AnnotationSet.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise AnnotationError(
            f"Invalid annotations in {source.name}: {first['msg']}", bug_id=bug_id
        ) from e
    if bug_id is not None and annotations.bug_id != bug_id:
        raise AnnotationError(
            f"Annotations name bug {annotations.bug_id}", bug_id=bug_id
        )
    return annotations


def save_annotations(annotations: AnnotationSet, path: Path | str) -> Path:
    """Write annotations with sorted keys."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(
        json.dumps(annotations.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return target

