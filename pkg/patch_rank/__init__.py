"""
patch-rank - Similarity ranking of plausible patches against the original program.

Embeds the snippet around a bug's faulty line for the original program, the
developer fix and every candidate patch with paragraph vectors, ranks the
patches by similarity to the original and scores the rankings with nDCG
against human relevance annotations.

Key Features:
- Corpus ingestion with per-bug validation
- From-scratch PV-DM training with negative sampling, seeded and reproducible
- Cosine and multiplicative-cosine ranking
- DCG/IDCG/nDCG evaluation and annotation merging
- Deterministic SVG charts and CSV summaries
"""

from __future__ import annotations


__version__ = "1.0.0"

from patch_rank.utils.exceptions import (
    PatchRankError,
    ConfigurationError,
    CorpusError,
    TrainingError,
    RankingError,
    AnnotationError,
)

__all__ = [
    "__version__",
    "PatchRankError",
    "ConfigurationError",
    "CorpusError",
    "TrainingError",
    "RankingError",
    "AnnotationError",
]
