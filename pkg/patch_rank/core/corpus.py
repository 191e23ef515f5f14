"""
Bug corpus ingestion and snippet extraction.

Reads the on-disk corpus layout::

    <root>/<bug-id>/meta.json        {"project": str, "faulty_line": int}
    <root>/<bug-id>/original.js
    <root>/<bug-id>/developer.js
    <root>/<bug-id>/candidates/<candidate-id>.js
    <root>/<bug-id>/annotations.json  (optional)
    <root>/<bug-id>/aux/*.js          (optional, training material only)

and cuts the snippet windows that get embedded.
"""

from __future__ import annotations


import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from patch_rank.core.models import (
    AuxiliaryFile,
    BugCase,
    Candidate,
    CorpusManifest,
    SnippetWindow,
    VariantKind,
    make_doc_id,
    split_lines,
)
from patch_rank.utils.exceptions import CorpusError, SnippetError
from patch_rank.utils.logger import get_logger

logger = get_logger(__name__)

META_FILE = "meta.json"
ORIGINAL_FILE = "original.js"
DEVELOPER_FILE = "developer.js"
CANDIDATES_DIR = "candidates"
ANNOTATIONS_FILE = "annotations.json"
AUX_DIR = "aux"
SOURCE_SUFFIX = ".js"


@dataclass
class CorpusScan:
    """Result of a lenient scan: the valid bugs plus per-bug failures."""

    manifest: CorpusManifest
    failures: dict[str, CorpusError] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures


def extract_snippet(
    source: str,
    center_line: int,
    radius: int,
    doc_id: str,
    variant_kind: VariantKind,
) -> SnippetWindow:
    """
    Cut the window of lines around center_line.

    The window is lines [max(1, center-radius) .. min(L, center+radius)],
    without padding at file boundaries.

    Raises:
        SnippetError: If center_line is outside the file or radius is negative
    """
    if radius < 0:
        raise SnippetError("radius must be non-negative", details={"radius": radius})
    lines = split_lines(source)
    if not 1 <= center_line <= len(lines):
        raise SnippetError(
            f"center line {center_line} outside 1..{len(lines)}",
            details={"doc_id": doc_id},
        )
    first = max(1, center_line - radius)
    last = min(len(lines), center_line + radius)
    return SnippetWindow(
        doc_id=doc_id,
        variant_kind=variant_kind,
        center_line=center_line,
        first_line=first,
        text="\n".join(lines[first - 1 : last]),
        radius=radius,
    )


def locate_patched_line(original_source: str, patched_source: str, faulty_line: int) -> int:
    """
    Find where a patched file first diverges from the original.

    Returns the 1-based index of the first line that differs, or
    faulty_line when the two files are line-wise identical.
    """
    original = split_lines(original_source)
    patched = split_lines(patched_source)
    for index, (before, after) in enumerate(zip(original, patched), start=1):
        if before != after:
            return index
    if len(original) != len(patched):
        return min(len(original), len(patched)) + 1
    return faulty_line


def patched_window(
    original_source: str,
    patched_source: str,
    faulty_line: int,
    radius: int,
    doc_id: str,
    variant_kind: VariantKind,
) -> SnippetWindow:
    """Window of a patched file centered on its first divergent line."""
    center = locate_patched_line(original_source, patched_source, faulty_line)
    # a trailing deletion diverges one past the patched file's end
    center = min(center, max(1, len(split_lines(patched_source))))
    return extract_snippet(patched_source, center, radius, doc_id, variant_kind)


def bug_windows(bug: BugCase, radius: int) -> list[SnippetWindow]:
    """Windows for the original, the developer fix and every candidate, in that order."""
    windows = [
        extract_snippet(
            bug.original_source,
            bug.faulty_line,
            radius,
            bug.original_doc_id,
            VariantKind.ORIGINAL,
        ),
        patched_window(
            bug.original_source,
            bug.developer_fix_source,
            bug.faulty_line,
            radius,
            bug.developer_doc_id,
            VariantKind.DEVELOPER_FIX,
        ),
    ]
    for candidate in bug.candidates:
        windows.append(
            patched_window(
                bug.original_source,
                candidate.source,
                bug.faulty_line,
                radius,
                bug.candidate_doc_id(candidate.candidate_id),
                VariantKind.CANDIDATE,
            )
        )
    return windows


def auxiliary_windows(bug: BugCase, radius: int) -> list[SnippetWindow]:
    """Cut auxiliary files into consecutive chunks of 2*radius+1 lines."""
    size = 2 * radius + 1
    windows: list[SnippetWindow] = []
    for aux in bug.auxiliary:
        lines = split_lines(aux.source)
        for chunk, start in enumerate(range(0, len(lines), size)):
            part = lines[start : start + size]
            windows.append(
                SnippetWindow(
                    doc_id=make_doc_id(bug.bug_id, f"aux/{aux.name}#{chunk}"),
                    variant_kind=VariantKind.AUXILIARY,
                    center_line=start + 1 + (len(part) - 1) // 2,
                    first_line=start + 1,
                    text="\n".join(part),
                    radius=radius,
                )
            )
    return windows


class CorpusLoader:
    """
    Reads bug directories into validated BugCase objects.

    Ingestion is single-threaded; the resulting manifest is immutable.
    """

    def __init__(self, root: Path | str, radius: int = 3) -> None:
        """
        Initialize the loader.

        Args:
            root: Corpus root directory
            radius: Snippet radius recorded in the manifest
        """
        self.root = Path(root)
        self.radius = radius

    def bug_dirs(self) -> list[Path]:
        """Bug directories in lexicographic order."""
        if not self.root.is_dir():
            raise CorpusError("Corpus root is not a directory", path=str(self.root))
        return sorted(p for p in self.root.iterdir() if p.is_dir() and not p.name.startswith("."))

    def load_bug(self, bug_dir: Path) -> BugCase:
        """
        Read one bug directory.

        Raises:
            CorpusError: If a required file is missing or malformed
        """
        bug_id = bug_dir.name
        meta = self._read_meta(bug_dir, bug_id)
        original = self._read_required(bug_dir / ORIGINAL_FILE, bug_id)
        developer = self._read_required(bug_dir / DEVELOPER_FILE, bug_id)
        candidates = self._read_candidates(bug_dir, bug_id)
        auxiliary = tuple(
            AuxiliaryFile(name=p.stem, source=self._read_text(p, bug_id))
            for p in sorted((bug_dir / AUX_DIR).glob(f"*{SOURCE_SUFFIX}"))
        )
        annotation_path = bug_dir / ANNOTATIONS_FILE

        try:
            bug = BugCase(
                bug_id=bug_id,
                project=meta["project"],
                original_source=original,
                faulty_line=meta["faulty_line"],
                developer_fix_source=developer,
                candidates=candidates,
                annotation_ref=annotation_path if annotation_path.exists() else None,
                auxiliary=auxiliary,
            )
        except ValidationError as e:
            first = e.errors()[0]
            location = ".".join(str(part) for part in first.get("loc", ())) or None
            raise CorpusError(
                f"Invalid bug {bug_id}: {first['msg']}",
                bug_id=bug_id,
                field=location,
            ) from e

        logger.debug(
            "Loaded bug",
            bug_id=bug_id,
            candidates=bug.candidate_count(),
            faulty_line=bug.faulty_line,
        )
        return bug

    def scan(self) -> CorpusScan:
        """Load every bug, collecting failures instead of stopping at the first."""
        bugs: list[BugCase] = []
        failures: dict[str, CorpusError] = {}
        for bug_dir in self.bug_dirs():
            try:
                bugs.append(self.load_bug(bug_dir))
            except CorpusError as e:
                logger.error(f"Skipping bug: {e}", bug_id=bug_dir.name)
                failures[bug_dir.name] = e
        manifest = CorpusManifest(root=self.root, radius=self.radius, bugs=tuple(bugs))
        logger.info(
            "Corpus scanned",
            bugs=manifest.bug_count(),
            candidates=manifest.candidate_count(),
            failures=len(failures),
        )
        return CorpusScan(manifest=manifest, failures=failures)

    def _read_meta(self, bug_dir: Path, bug_id: str) -> dict[str, Any]:
        path = bug_dir / META_FILE
        text = self._read_required(path, bug_id)
        try:
            meta = json.loads(text)
        except json.JSONDecodeError as e:
            raise CorpusError(
                f"Malformed meta file: {e.msg}",
                bug_id=bug_id,
                path=str(path),
                line=e.lineno,
            ) from e
        if not isinstance(meta, dict):
            raise CorpusError("Meta file must hold a JSON object", bug_id=bug_id, path=str(path))
        faulty_line = meta.get("faulty_line")
        if isinstance(faulty_line, bool) or not isinstance(faulty_line, int):
            raise CorpusError(
                "Meta field must be an integer",
                bug_id=bug_id,
                path=str(path),
                field="faulty_line",
            )
        project = meta.get("project", "")
        if not isinstance(project, str):
            raise CorpusError(
                "Meta field must be a string", bug_id=bug_id, path=str(path), field="project"
            )
        return {"project": project, "faulty_line": faulty_line}

    def _read_candidates(self, bug_dir: Path, bug_id: str) -> tuple[Candidate, ...]:
        directory = bug_dir / CANDIDATES_DIR
        if not directory.is_dir():
            raise CorpusError("Missing candidates directory", bug_id=bug_id, path=str(directory))
        paths = sorted(directory.glob(f"*{SOURCE_SUFFIX}"))
        if not paths:
            raise CorpusError("Empty candidates directory", bug_id=bug_id, path=str(directory))
        candidates = []
        for path in paths:
            try:
                candidates.append(
                    Candidate(candidate_id=path.stem, source=self._read_text(path, bug_id))
                )
            except ValidationError as e:
                raise CorpusError(
                    f"Invalid candidate: {e.errors()[0]['msg']}",
                    bug_id=bug_id,
                    path=str(path),
                ) from e
        return tuple(candidates)

    def _read_required(self, path: Path, bug_id: str) -> str:
        if not path.is_file():
            raise CorpusError(f"Missing {path.name}", bug_id=bug_id, path=str(path))
        return self._read_text(path, bug_id)

    @staticmethod
    def _read_text(path: Path, bug_id: str) -> str:
        try:
            return path.read_text(encoding="utf-8")
        except UnicodeDecodeError as e:
            raise CorpusError("File is not valid UTF-8", bug_id=bug_id, path=str(path)) from e


def ingest_corpus(root: Path | str, radius: int = 3) -> CorpusManifest:
    """
    Read and validate a whole corpus.

    Args:
        root: Corpus root directory
        radius: Snippet radius recorded in the manifest

    Returns:
        CorpusManifest with one BugCase per bug directory

    Raises:
        CorpusError: On the first malformed bug
    """
    loader = CorpusLoader(root, radius)
    bugs = tuple(loader.load_bug(d) for d in loader.bug_dirs())
    try:
        return CorpusManifest(root=loader.root, radius=radius, bugs=bugs)
    except ValidationError as e:
        raise CorpusError(f"Invalid manifest: {e.errors()[0]['msg']}", path=str(root)) from e


def scan_corpus(root: Path | str, radius: int = 3) -> CorpusScan:
    """Lenient ingestion used by the pipeline: bad bugs are reported, not fatal."""
    return CorpusLoader(root, radius).scan()
