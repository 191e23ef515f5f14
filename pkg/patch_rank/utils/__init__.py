"""Utility modules for patch-rank."""

from __future__ import annotations


from patch_rank.utils.logger import get_logger, setup_logging
from patch_rank.utils.exceptions import (
    PatchRankError,
    ConfigurationError,
    CorpusError,
    SnippetError,
    VocabularyError,
    TrainingError,
    UnknownDocumentError,
    ModelFormatError,
    SimilarityError,
    RankingError,
    AnnotationError,
    EvaluationError,
    ReportError,
    ArtifactError,
)

__all__ = [
    "get_logger",
    "setup_logging",
    "PatchRankError",
    "ConfigurationError",
    "CorpusError",
    "SnippetError",
    "VocabularyError",
    "TrainingError",
    "UnknownDocumentError",
    "ModelFormatError",
    "SimilarityError",
    "RankingError",
    "AnnotationError",
    "EvaluationError",
    "ReportError",
    "ArtifactError",
]
