"""
Shared data models for the patch ranking pipeline.

Pydantic models for bugs, snippet windows, token sequences, ranked lists,
relevance annotations and evaluation results.
"""

from __future__ import annotations


from enum import Enum
from pathlib import Path
from typing import Annotated, Any

from pydantic import AfterValidator, BaseModel, Field, field_validator, model_validator


ORIGINAL_VARIANT = "original"
DEVELOPER_VARIANT = "developer"
RESERVED_VARIANTS = frozenset({ORIGINAL_VARIANT, DEVELOPER_VARIANT})


def split_lines(text: str) -> list[str]:
    """
    Split source text into lines.

    Splits on LF, strips one trailing CR per line and ignores the empty
    remainder after a final newline.
    """
    if not text:
        return []
    lines = text.split("\n")
    if lines[-1] == "":
        lines.pop()
    return [line[:-1] if line.endswith("\r") else line for line in lines]


def make_doc_id(bug_id: str, variant: str) -> str:
    """Document id of a program variant."""
    return f"{bug_id}/{variant}"


class VariantKind(str, Enum):
    """Which program variant a document was cut from."""

    ORIGINAL = "Original"
    DEVELOPER_FIX = "DeveloperFix"
    CANDIDATE = "Candidate"
    AUXILIARY = "Auxiliary"


class Candidate(BaseModel):
    """A plausible patch: the full patched file."""

    model_config = {"frozen": True}

    candidate_id: str = Field(..., min_length=1, description="File stem of the candidate")
    source: str = Field(..., description="Full text of the patched file")

    @field_validator("candidate_id")
    @classmethod
    def validate_candidate_id(cls, v: str) -> str:
        if "/" in v or "\\" in v:
            raise ValueError(f"candidate id '{v}' must not contain path separators")
        if v in RESERVED_VARIANTS:
            raise ValueError(f"candidate id '{v}' is reserved")
        return v


class AuxiliaryFile(BaseModel):
    """Extra project file used only as training material."""

    model_config = {"frozen": True}

    name: str
    source: str


class BugCase(BaseModel):
    """One bug: faulty file, developer fix and the plausible patches."""

    model_config = {"frozen": True}

    bug_id: str = Field(..., min_length=1)
    project: str = Field(default="")
    original_source: str
    faulty_line: int = Field(..., ge=1, description="1-based faulty line in original_source")
    developer_fix_source: str
    candidates: tuple[Candidate, ...] = Field(..., min_length=1)
    annotation_ref: Path | None = None
    auxiliary: tuple[AuxiliaryFile, ...] = Field(default=())

    @model_validator(mode="after")
    def check_invariants(self) -> "BugCase":
        line_count = len(split_lines(self.original_source))
        if self.faulty_line > line_count:
            raise ValueError(
                f"faulty_line {self.faulty_line} exceeds line count {line_count} of the original file"
            )
        seen: set[str] = set()
        for candidate in self.candidates:
            if candidate.candidate_id in seen:
                raise ValueError(f"duplicate candidate id '{candidate.candidate_id}'")
            seen.add(candidate.candidate_id)
        return self

    @property
    def original_doc_id(self) -> str:
        return make_doc_id(self.bug_id, ORIGINAL_VARIANT)

    @property
    def developer_doc_id(self) -> str:
        return make_doc_id(self.bug_id, DEVELOPER_VARIANT)

    def candidate_doc_id(self, candidate_id: str) -> str:
        return make_doc_id(self.bug_id, candidate_id)

    def ranked_doc_ids(self) -> list[str]:
        """Developer fix followed by every candidate, in input order."""
        return [self.developer_doc_id] + [
            self.candidate_doc_id(c.candidate_id) for c in self.candidates
        ]

    def candidate_count(self) -> int:
        return len(self.candidates)


class SnippetWindow(BaseModel):
    """The lines around a center line that get embedded."""

    model_config = {"frozen": True}

    doc_id: str
    variant_kind: VariantKind
    center_line: int = Field(..., ge=1)
    first_line: int = Field(..., ge=1)
    text: str
    radius: int = Field(default=3, ge=0)

    @model_validator(mode="after")
    def check_bounds(self) -> "SnippetWindow":
        count = self.line_count()
        if not self.first_line <= self.center_line <= self.first_line + count - 1:
            raise ValueError(
                f"center line {self.center_line} outside window starting at "
                f"{self.first_line} with {count} lines"
            )
        if count > 2 * self.radius + 1:
            raise ValueError(f"window has {count} lines, more than 2*{self.radius}+1")
        return self

    def line_count(self) -> int:
        # text is lines joined by LF; an empty center line still counts
        return self.text.count("\n") + 1

    @property
    def last_line(self) -> int:
        return self.first_line + self.line_count() - 1


class CorpusManifest(BaseModel):
    """All bugs read from one corpus root."""

    model_config = {"frozen": True}

    root: Path
    radius: int = Field(default=3, ge=0)
    bugs: tuple[BugCase, ...] = Field(default=())

    @field_validator("bugs")
    @classmethod
    def validate_unique_ids(cls, v: tuple[BugCase, ...]) -> tuple[BugCase, ...]:
        ids = [b.bug_id for b in v]
        duplicates = sorted({i for i in ids if ids.count(i) > 1})
        if duplicates:
            raise ValueError(f"duplicate bug ids: {', '.join(duplicates)}")
        return v

    def get_bug(self, bug_id: str) -> BugCase | None:
        for bug in self.bugs:
            if bug.bug_id == bug_id:
                return bug
        return None

    def bug_count(self) -> int:
        return len(self.bugs)

    def candidate_count(self) -> int:
        return sum(b.candidate_count() for b in self.bugs)


class TokenSequence(BaseModel):
    """Tokens of one document."""

    model_config = {"frozen": True}

    doc_id: str
    tokens: tuple[str, ...] = Field(default=())

    @field_validator("tokens")
    @classmethod
    def validate_tokens(cls, v: tuple[str, ...]) -> tuple[str, ...]:
        for token in v:
            if not token or any(ch.isspace() for ch in token):
                raise ValueError(f"invalid token {token!r}")
        return v

    def __len__(self) -> int:
        return len(self.tokens)


class RankedEntry(BaseModel):
    """One variant in a ranked list."""

    model_config = {"frozen": True}

    doc_id: str
    kind: VariantKind
    score: float
    rank: int = Field(..., ge=1)


class RankedList(BaseModel):
    """Variants of a bug ordered by similarity to the original snippet."""

    model_config = {"frozen": True}

    bug_id: str
    metric: str = "cosmul"
    entries: tuple[RankedEntry, ...] = Field(default=())

    @model_validator(mode="after")
    def check_order(self) -> "RankedList":
        for position, entry in enumerate(self.entries, start=1):
            if entry.rank != position:
                raise ValueError(f"rank {entry.rank} at position {position}")
            if entry.kind == VariantKind.ORIGINAL:
                raise ValueError("the original program is never ranked")
        for before, after in zip(self.entries, self.entries[1:]):
            if after.score > before.score:
                raise ValueError(f"entries not sorted by score at rank {after.rank}")
        return self

    def doc_ids(self) -> list[str]:
        return [e.doc_id for e in self.entries]

    def developer_rank(self) -> int | None:
        for entry in self.entries:
            if entry.kind == VariantKind.DEVELOPER_FIX:
                return entry.rank
        return None

    def to_dict(self) -> dict[str, Any]:
        """Rankings file payload, scores at full precision."""
        return {
            "bug_id": self.bug_id,
            "metric": self.metric,
            "entries": [
                {"doc_id": e.doc_id, "kind": e.kind.value, "score": e.score, "rank": e.rank}
                for e in self.entries
            ],
        }


def _check_relevance(value: float) -> float:
    if not -1.0 <= value <= 3.0:
        raise ValueError(f"relevance {value} outside [-1, 3]")
    if (value * 2) != int(value * 2):
        raise ValueError(f"relevance {value} is not a multiple of 0.5")
    return float(value)


RelevanceScore = Annotated[float, AfterValidator(_check_relevance)]

DEVELOPER_RELEVANCE = 3.0
SYNTACTIC_RELEVANCE = 2.0
SEMANTIC_RELEVANCE = 1.0


class AnnotationSet(BaseModel):
    """Relevance judgments of one annotator for one bug."""

    model_config = {"frozen": True}

    bug_id: str
    annotator: str = Field(default="unknown")
    scores: dict[str, RelevanceScore] = Field(default_factory=dict)

    @model_validator(mode="before")
    @classmethod
    def qualify_doc_ids(cls, data: Any) -> Any:
        """Bare variant ids become '<bug>/<variant>'; the developer fix defaults to 3."""
        if not isinstance(data, dict) or "bug_id" not in data:
            return data
        bug_id = data["bug_id"]
        scores = {}
        for key, value in (data.get("scores") or {}).items():
            doc_id = key if "/" in key else make_doc_id(bug_id, key)
            scores[doc_id] = value
        scores.setdefault(make_doc_id(bug_id, DEVELOPER_VARIANT), DEVELOPER_RELEVANCE)
        return {**data, "scores": scores}

    @model_validator(mode="after")
    def check_developer_score(self) -> "AnnotationSet":
        developer = make_doc_id(self.bug_id, DEVELOPER_VARIANT)
        if self.scores[developer] != DEVELOPER_RELEVANCE:
            raise ValueError(
                f"developer fix must carry relevance 3, got {self.scores[developer]}"
            )
        return self

    def missing(self, doc_ids: list[str]) -> list[str]:
        return [d for d in doc_ids if d not in self.scores]

    def to_dict(self) -> dict[str, Any]:
        return {
            "bug_id": self.bug_id,
            "annotator": self.annotator,
            "scores": dict(sorted(self.scores.items())),
        }


class EvalFlag(str, Enum):
    """Conditions worth noting next to an nDCG value."""

    SYNTACTIC_MATCH_PRESENT = "SyntacticMatchPresent"
    IDCG_NON_POSITIVE = "IdcgNonPositive"


class EvalResult(BaseModel):
    """nDCG evaluation of one ranked list."""

    model_config = {"frozen": True}

    bug_id: str
    p: int = Field(..., ge=1)
    dcg: float
    idcg: float
    ndcg: float
    flags: frozenset[EvalFlag] = Field(default_factory=frozenset)

    @model_validator(mode="after")
    def check_ratio(self) -> "EvalResult":
        if self.idcg > 0 and abs(self.ndcg - self.dcg / self.idcg) > 1e-12:
            raise ValueError("ndcg must equal dcg/idcg when idcg > 0")
        return self

    def to_dict(self) -> dict[str, Any]:
        return {
            "bug_id": self.bug_id,
            "p": self.p,
            "dcg": self.dcg,
            "idcg": self.idcg,
            "ndcg": self.ndcg,
            "flags": sorted(f.value for f in self.flags),
        }
