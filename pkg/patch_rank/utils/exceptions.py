"""
Custom exception hierarchy for patch-rank.

All exceptions inherit from PatchRankError to allow catching
all application-specific errors with a single except clause.
"""

from __future__ import annotations


from typing import Any, Iterable


class PatchRankError(Exception):
    """Base exception for all patch-rank errors."""

    def __init__(self, message: str, details: dict[str, Any] | None = None) -> None:
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def __str__(self) -> str:
        if self.details:
            detail_str = ", ".join(f"{k}={v}" for k, v in self.details.items())
            return f"{self.message} ({detail_str})"
        return self.message


class ConfigurationError(PatchRankError):
    """Raised when configuration is invalid or missing."""

    pass


class CorpusError(PatchRankError):
    """Raised when a bug directory does not match the corpus layout."""

    def __init__(
        self,
        message: str,
        bug_id: str | None = None,
        path: str | None = None,
        field: str | None = None,
        line: int | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        details = details or {}
        if bug_id:
            details["bug_id"] = bug_id
        if path:
            details["path"] = path
        if field:
            details["field"] = field
        if line is not None:
            details["line"] = line
        super().__init__(message, details)
        self.bug_id = bug_id
        self.path = path
        self.field = field
        self.line = line


class SnippetError(PatchRankError):
    """Raised when a snippet window cannot be extracted."""

    pass


class VocabularyError(PatchRankError):
    """Raised when no usable vocabulary can be built."""

    pass


class TrainingError(PatchRankError):
    """Raised when embedding training diverges or is misconfigured."""

    pass


class UnknownDocumentError(PatchRankError):
    """Raised when a document id has no trained vector."""

    def __init__(self, doc_id: str, details: dict[str, Any] | None = None) -> None:
        details = details or {}
        details["doc_id"] = doc_id
        super().__init__("Unknown document", details)
        self.doc_id = doc_id


class ModelFormatError(PatchRankError):
    """Raised when a model file cannot be read back."""

    def __init__(
        self,
        message: str,
        path: str | None = None,
        reason: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        details = details or {}
        if path:
            details["path"] = path
        if reason:
            details["reason"] = reason
        super().__init__(message, details)
        self.path = path
        self.reason = reason


class SimilarityError(PatchRankError):
    """Raised when vectors cannot be compared."""

    pass


class RankingError(PatchRankError):
    """Raised when a bug cannot be ranked."""

    def __init__(
        self,
        message: str,
        bug_id: str | None = None,
        doc_id: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        details = details or {}
        if bug_id:
            details["bug_id"] = bug_id
        if doc_id:
            details["doc_id"] = doc_id
        super().__init__(message, details)
        self.bug_id = bug_id
        self.doc_id = doc_id


class AnnotationError(PatchRankError):
    """Raised when relevance annotations are invalid or incomplete."""

    def __init__(
        self,
        message: str,
        bug_id: str | None = None,
        doc_ids: Iterable[str] | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        details = details or {}
        self.doc_ids = sorted(doc_ids) if doc_ids else []
        if bug_id:
            details["bug_id"] = bug_id
        if self.doc_ids:
            details["doc_ids"] = ", ".join(self.doc_ids)
        super().__init__(message, details)
        self.bug_id = bug_id


class EvaluationError(PatchRankError):
    """Raised when a ranking metric cannot be computed."""

    pass


class ReportError(PatchRankError):
    """Raised when a report artifact cannot be written."""

    def __init__(
        self,
        message: str,
        path: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        details = details or {}
        if path:
            details["path"] = path
        super().__init__(message, details)
        self.path = path


class ArtifactError(PatchRankError):
    """Raised when an intermediate artifact is missing or unreadable."""

    def __init__(
        self,
        message: str,
        path: str | None = None,
        bug_id: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        details = details or {}
        if bug_id:
            details["bug_id"] = bug_id
        if path:
            details["path"] = path
        super().__init__(message, details)
        self.path = path
        self.bug_id = bug_id
