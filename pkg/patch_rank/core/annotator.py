"""
Interactive relevance annotation.

Walks the unannotated candidates of a bug, shows the faulty line, the
developer fix and the candidate as diffs against the original, and asks
for a relevance score. Candidates that match the developer fix once
whitespace is removed are scored 2 without asking.
"""

from __future__ import annotations

import difflib
import re
from typing import Any, Callable

import click

from patch_rank.core.evaluation import syntactic_match
from patch_rank.core.models import (
    SYNTACTIC_RELEVANCE,
    AnnotationSet,
    BugCase,
    split_lines,
)
from patch_rank.utils.logger import get_logger

logger = get_logger(__name__)

UNKNOWN_ANNOTATOR = "unknown"
SCORE_HELP = "3 dev fix, 2 syntactic, 1 semantic, 0 uncertain, -1 incorrect (half steps allowed)"


class RelevanceType(click.ParamType):
    """Click parameter type for half-step scores in [-1, 3]."""

    name = "relevance"

    def convert(self, value: Any, param: click.Parameter | None, ctx: click.Context | None) -> float:
        try:
            number = float(value)
        except (TypeError, ValueError):
            self.fail(f"{value!r} is not a number", param, ctx)
        if not -1.0 <= number <= 3.0 or number * 2 != int(number * 2):
            self.fail(f"{value} must be a multiple of 0.5 in [-1, 3]", param, ctx)
        return number


RELEVANCE = RelevanceType()


def unified_diff(original: str, patched: str, label: str) -> str:
    """Unified diff of a patched file against the original."""
    return "\n".join(
        difflib.unified_diff(
            split_lines(original),
            split_lines(patched),
            fromfile="original",
            tofile=label,
            lineterm="",
            n=2,
        )
    )


class Annotator:
    """Collects relevance scores for one bug at a time."""

    def __init__(
        self,
        annotator_id: str = UNKNOWN_ANNOTATOR,
        auto_syntactic: bool = True,
        prompt: Callable[..., Any] = click.prompt,
        echo: Callable[..., Any] = click.echo,
    ) -> None:
        self.annotator_id = annotator_id
        self.auto_syntactic = auto_syntactic
        self._prompt = prompt
        self._echo = echo

    def annotate_bug(self, bug: BugCase, existing: AnnotationSet | None = None) -> AnnotationSet:
        """
        Score every candidate that has no score yet.

        Args:
            bug: Bug whose candidates are judged
            existing: Scores to keep; only missing candidates are asked for

        Returns:
            AnnotationSet covering the developer fix and all candidates
        """
        scores: dict[str, float] = dict(existing.scores) if existing else {}
        pending = [c for c in bug.candidates if bug.candidate_doc_id(c.candidate_id) not in scores]
        if not pending:
            logger.info("Nothing to annotate", bug_id=bug.bug_id)

        original_lines = split_lines(bug.original_source)
        for index, candidate in enumerate(pending, start=1):
            doc_id = bug.candidate_doc_id(candidate.candidate_id)
            if self.auto_syntactic and syntactic_match(candidate.source, bug.developer_fix_source):
                scores[doc_id] = SYNTACTIC_RELEVANCE
                logger.info("Syntactic match scored 2", bug_id=bug.bug_id, doc_id=doc_id)
                continue

            self._echo(f"\n[{index}/{len(pending)}] {doc_id}", err=True)
            self._echo(
                f"faulty line {bug.faulty_line}: {original_lines[bug.faulty_line - 1]}", err=True
            )
            self._echo(unified_diff(bug.original_source, bug.developer_fix_source, "developer"), err=True)
            self._echo(unified_diff(bug.original_source, candidate.source, candidate.candidate_id), err=True)
            scores[doc_id] = self._prompt(f"Relevance ({SCORE_HELP})", type=RELEVANCE, err=True)

        annotator = self._combined_id(existing.annotator if existing else None)
        return AnnotationSet(bug_id=bug.bug_id, annotator=annotator, scores=scores)

    def _combined_id(self, previous: str | None) -> str:
        """Earlier annotator ids followed by this one, joined with '+'."""
        if not previous or previous == UNKNOWN_ANNOTATOR:
            return self.annotator_id
        if self.annotator_id == UNKNOWN_ANNOTATOR:
            return previous
        if self.annotator_id in re.split(r"[+/]", previous):
            return previous
        return f"{previous}+{self.annotator_id}"
