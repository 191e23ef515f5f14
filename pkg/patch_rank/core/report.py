"""
Report artifacts: nDCG and similarity charts, the summary CSV, the
summary JSON and the console table.

Charts are static SVG rendered with the Agg backend. Glyphs are emitted as
paths and the SVG id salt and date are pinned, so identical inputs give
byte-identical files.
"""

from __future__ import annotations


import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402
from matplotlib.lines import Line2D  # noqa: E402
from rich.console import Console  # noqa: E402
from rich.table import Table  # noqa: E402

from patch_rank.core.evaluation import syntactic_match  # noqa: E402
from patch_rank.core.models import (  # noqa: E402
    SEMANTIC_RELEVANCE,
    AnnotationSet,
    BugCase,
    EvalResult,
    RankedList,
    VariantKind,
)
from patch_rank.utils.exceptions import ReportError  # noqa: E402
from patch_rank.utils.logger import get_logger  # noqa: E402

logger = get_logger(__name__)

CSV_COLUMNS = (
    "bug_id",
    "candidates",
    "dev_fix_rank",
    "dcg",
    "idcg",
    "ndcg",
    "syntactic_matches",
    "semantic_matches",
)

SVG_RC = {
    "svg.hashsalt": "patch-rank",
    "svg.fonttype": "path",
    "font.family": "DejaVu Sans",
}
SVG_METADATA = {"Date": None}

BAR_COLOR = "#4C72B0"
BAND_STYLES = {
    "syntactic": ("#2ca02c", "o", "syntactic match (2)"),
    "semantic": ("#1f77b4", "o", "semantic match (1)"),
    "uncertain": ("#7f7f7f", "s", "uncertain (0)"),
    "incorrect": ("#d62728", "v", "incorrect (-1)"),
    "unannotated": ("#000000", "x", "unannotated"),
}
DEVELOPER_STYLE = ("#ff7f0e", "*", "developer fix")


@dataclass(frozen=True)
class BugSummary:
    """Corpus facts about one bug needed by the reports."""

    bug_id: str
    candidates: int
    syntactic_matches: int
    semantic_matches: int | None = None

    @classmethod
    def from_bug(cls, bug: BugCase, annotations: AnnotationSet | None = None) -> "BugSummary":
        syntactic = sum(
            1 for c in bug.candidates if syntactic_match(c.source, bug.developer_fix_source)
        )
        semantic = None
        if annotations is not None:
            semantic = sum(
                1
                for c in bug.candidates
                if annotations.scores.get(bug.candidate_doc_id(c.candidate_id))
                == SEMANTIC_RELEVANCE
            )
        return cls(
            bug_id=bug.bug_id,
            candidates=bug.candidate_count(),
            syntactic_matches=syntactic,
            semantic_matches=semantic,
        )


@dataclass
class ReportBundle:
    """Everything a report is rendered from."""

    rankings: list[RankedList] = field(default_factory=list)
    evals: list[EvalResult] = field(default_factory=list)
    bugs: dict[str, BugSummary] = field(default_factory=dict)
    annotations: dict[str, AnnotationSet] = field(default_factory=dict)

    def __post_init__(self) -> None:
        ranked = {r.bug_id for r in self.rankings}
        orphans = sorted(e.bug_id for e in self.evals if e.bug_id not in ranked)
        if orphans:
            raise ReportError(
                "Evaluation without ranking", details={"bugs": ", ".join(orphans)}
            )

    def ranking(self, bug_id: str) -> RankedList | None:
        return next((r for r in self.rankings if r.bug_id == bug_id), None)

    def evaluation(self, bug_id: str) -> EvalResult | None:
        return next((e for e in self.evals if e.bug_id == bug_id), None)

    @property
    def bug_count(self) -> int:
        return len(self.rankings)

    @property
    def candidate_count(self) -> int:
        return sum(self._summary(r).candidates for r in self.rankings)

    @property
    def syntactic_match_count(self) -> int:
        return sum(self._summary(r).syntactic_matches for r in self.rankings)

    @property
    def semantic_match_count(self) -> int:
        return sum(self._summary(r).semantic_matches or 0 for r in self.rankings)

    def developer_rank_count(self, rank: int) -> int:
        """Number of bugs whose developer fix sits at the given rank."""
        return sum(1 for r in self.rankings if r.developer_rank() == rank)

    def rows(self) -> Iterator[dict[str, Any]]:
        """Summary rows in ranking order."""
        for ranked in self.rankings:
            summary = self._summary(ranked)
            result = self.evaluation(ranked.bug_id)
            yield {
                "bug_id": ranked.bug_id,
                "candidates": summary.candidates,
                "dev_fix_rank": ranked.developer_rank(),
                "dcg": result.dcg if result else None,
                "idcg": result.idcg if result else None,
                "ndcg": result.ndcg if result else None,
                "syntactic_matches": summary.syntactic_matches,
                "semantic_matches": summary.semantic_matches,
            }

    def _summary(self, ranked: RankedList) -> BugSummary:
        summary = self.bugs.get(ranked.bug_id)
        if summary is None:
            # no corpus facts: count candidates off the ranking
            return BugSummary(
                bug_id=ranked.bug_id,
                candidates=len(ranked.entries) - 1,
                syntactic_matches=0,
            )
        return summary


def build_bundle(
    bugs: Sequence[BugCase],
    rankings: Sequence[RankedList],
    evals: Sequence[EvalResult] = (),
    annotations: Mapping[str, AnnotationSet] | None = None,
) -> ReportBundle:
    """Assemble a bundle, computing per-bug corpus facts."""
    annotations = dict(annotations or {})
    return ReportBundle(
        rankings=list(rankings),
        evals=list(evals),
        bugs={b.bug_id: BugSummary.from_bug(b, annotations.get(b.bug_id)) for b in bugs},
        annotations=annotations,
    )


# ---------------------------------------------------------------------------
# Charts
# ---------------------------------------------------------------------------


def build_ndcg_figure(evals: Sequence[EvalResult]) -> Figure:
    """One bar per bug with its nDCG, labelled to two decimals."""
    if not evals:
        raise ReportError("No evaluations to chart")
    with matplotlib.rc_context(SVG_RC):
        fig, ax = plt.subplots(figsize=(max(4.0, 0.8 * len(evals) + 2.0), 4.0))
        names = [e.bug_id for e in evals]
        bars = ax.bar(range(len(evals)), [e.ndcg for e in evals], color=BAR_COLOR, width=0.6)
        ax.bar_label(bars, fmt="%.2f", padding=2, fontsize=8)
        ax.set_xticks(range(len(evals)))
        ax.set_xticklabels(names, rotation=45, ha="right", fontsize=8)
        # nDCG drops below 0 when negative gains dominate
        lowest = min(0.0, min(e.ndcg for e in evals))
        ax.set_ylim(lowest * 1.1 if lowest < 0 else 0.0, 1.0)
        ax.set_ylabel("nDCG")
        ax.set_title("nDCG per bug")
        ax.yaxis.grid(True, linestyle="-", alpha=0.3)
        ax.set_axisbelow(True)
        fig.tight_layout()
    return fig


def _band(value: float | None) -> str:
    if value is None:
        return "unannotated"
    if value >= 2:
        return "syntactic"
    if value >= 1:
        return "semantic"
    if value >= 0:
        return "uncertain"
    return "incorrect"


def build_similarity_figure(ranked: RankedList, annotations: AnnotationSet | None = None) -> Figure:
    """
    Score of every variant in rank order.

    The developer fix is drawn as a star; candidates are colored by the
    relevance band of their annotation.
    """
    if not ranked.entries:
        raise ReportError("Empty ranking", details={"bug_id": ranked.bug_id})
    scores = annotations.scores if annotations is not None else {}
    with matplotlib.rc_context(SVG_RC):
        fig, ax = plt.subplots(figsize=(max(4.0, 0.4 * len(ranked.entries) + 2.0), 4.0))
        ax.plot(
            [e.rank for e in ranked.entries],
            [e.score for e in ranked.entries],
            color="#cccccc",
            linewidth=1,
            zorder=1,
        )
        used: list[tuple[str, str, str]] = []
        for entry in ranked.entries:
            if entry.kind == VariantKind.DEVELOPER_FIX:
                style = DEVELOPER_STYLE
                size = 160
            else:
                style = BAND_STYLES[_band(scores.get(entry.doc_id))]
                size = 50
            color, marker, label = style
            ax.scatter([entry.rank], [entry.score], c=color, marker=marker, s=size, zorder=2)
            if style not in used:
                used.append(style)
        ax.set_xticks([e.rank for e in ranked.entries])
        ax.set_xlabel("rank")
        ax.set_ylabel(f"similarity ({ranked.metric})")
        ax.set_title(f"{ranked.bug_id}: variants ranked by similarity to the original")
        ax.legend(
            handles=[
                Line2D([], [], color=c, marker=m, linestyle="none", label=lbl) for c, m, lbl in used
            ],
            fontsize=8,
            frameon=False,
        )
        fig.tight_layout()
    return fig


def _save_figure(fig: Figure, path: Path | str) -> Path:
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        with matplotlib.rc_context(SVG_RC):
            fig.savefig(target, format="svg", metadata=SVG_METADATA)
    except OSError as e:
        raise ReportError(f"Cannot write chart: {e}", path=str(target)) from e
    finally:
        plt.close(fig)
    logger.debug("Chart written", path=str(target))
    return target


def emit_ndcg_chart(evals: Sequence[EvalResult], path: Path | str) -> Path:
    """Write the per-bug nDCG bar chart as SVG."""
    return _save_figure(build_ndcg_figure(evals), path)


def emit_similarity_chart(
    ranked: RankedList,
    annotations: AnnotationSet | None,
    path: Path | str,
) -> Path:
    """Write the similarity chart of one bug as SVG."""
    return _save_figure(build_similarity_figure(ranked, annotations), path)


# ---------------------------------------------------------------------------
# Tabular output
# ---------------------------------------------------------------------------


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def emit_summary_csv(bundle: ReportBundle, path: Path | str) -> Path:
    """
    Write one row per bug.

    Columns, in order: bug_id, candidates, dev_fix_rank, dcg, idcg, ndcg,
    syntactic_matches, semantic_matches. Reals carry six decimals; cells of
    bugs without annotations are empty.
    """
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        with target.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for row in bundle.rows():
                writer.writerow([_cell(row[c]) for c in CSV_COLUMNS])
    except OSError as e:
        raise ReportError(f"Cannot write CSV: {e}", path=str(target)) from e
    return target


def read_summary_csv(path: Path | str) -> list[dict[str, Any]]:
    """Parse a summary CSV back into typed rows."""
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    parsed = []
    for row in rows:
        parsed.append(
            {
                "bug_id": row["bug_id"],
                "candidates": int(row["candidates"]),
                "dev_fix_rank": int(row["dev_fix_rank"]) if row["dev_fix_rank"] else None,
                "dcg": float(row["dcg"]) if row["dcg"] else None,
                "idcg": float(row["idcg"]) if row["idcg"] else None,
                "ndcg": float(row["ndcg"]) if row["ndcg"] else None,
                "syntactic_matches": int(row["syntactic_matches"]),
                "semantic_matches": int(row["semantic_matches"]) if row["semantic_matches"] else None,
            }
        )
    return parsed


def summary_payload(bundle: ReportBundle) -> dict[str, Any]:
    """Corpus-level summary written to summary.json."""
    ndcgs = [e.ndcg for e in bundle.evals]
    return {
        "bugs": bundle.bug_count,
        "candidates": bundle.candidate_count,
        "syntactic_matches": bundle.syntactic_match_count,
        "semantic_matches": bundle.semantic_match_count,
        "evaluated_bugs": len(bundle.evals),
        "mean_ndcg": round(sum(ndcgs) / len(ndcgs), 6) if ndcgs else None,
        "developer_fix": {
            "first": bundle.developer_rank_count(1),
            "second": bundle.developer_rank_count(2),
        },
        "per_bug": [
            {
                "bug_id": row["bug_id"],
                "candidates": row["candidates"],
                "dev_fix_rank": row["dev_fix_rank"],
                "ndcg": round(row["ndcg"], 6) if row["ndcg"] is not None else None,
            }
            for row in bundle.rows()
        ],
    }


def write_json(payload: Any, path: Path | str) -> Path:
    """Write JSON with sorted keys and a trailing newline."""
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as e:
        raise ReportError(f"Cannot write file: {e}", path=str(target)) from e
    return target


def emit_summary_json(bundle: ReportBundle, path: Path | str) -> Path:
    return write_json(summary_payload(bundle), path)


def print_summary_table(bundle: ReportBundle, console: Console) -> None:
    """Render the per-bug summary as a rich table."""
    table = Table(title="Patch ranking summary")
    table.add_column("Bug", style="blue bold")
    table.add_column("Candidates", justify="right")
    table.add_column("Dev fix rank", justify="right", style="green")
    table.add_column("nDCG", justify="right")
    for row in bundle.rows():
        table.add_row(
            row["bug_id"],
            str(row["candidates"]),
            str(row["dev_fix_rank"] or "-"),
            f"{row['ndcg']:.2f}" if row["ndcg"] is not None else "-",
        )
    console.print(table)
    console.print(
        f"bugs={bundle.bug_count} candidates={bundle.candidate_count} "
        f"syntactic={bundle.syntactic_match_count} "
        f"dev fix first={bundle.developer_rank_count(1)}",
        highlight=False,
    )
