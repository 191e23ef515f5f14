"""
Sample corpus fixtures for testing.

FIXTURE_CORPUS is a small three-bug corpus in the on-disk layout, with
annotations for every bug. The factories below write synthetic bugs and
build in-memory objects for unit tests.
"""

import json
import random
import shutil
from pathlib import Path

import numpy as np

from patch_rank.config.settings import EmbeddingConfig
from patch_rank.core.embedding import EmbeddingModel, Vocabulary
from patch_rank.core.models import BugCase, Candidate, TokenSequence

FIXTURE_CORPUS = Path(__file__).parent / "corpus"

FIXTURE_BUGS = ("eslint-1", "eslint-217", "eslint-47")
FIXTURE_CANDIDATE_COUNT = 12
FIXTURE_SYNTACTIC_MATCHES = 2

SIMPLE_ORIGINAL = """var a = 1;
var b = 2;
function add(x, y) {
    return x - y;
}
module.exports = add;
"""


def copy_fixture_corpus(dest: Path) -> Path:
    """Copy the bundled corpus to dest and return the new root."""
    target = dest / "corpus"
    shutil.copytree(FIXTURE_CORPUS, target)
    return target


def replace_line(source: str, line: int, text: str) -> str:
    """Return source with 1-based line replaced by text."""
    lines = source.split("\n")
    lines[line - 1] = text
    return "\n".join(lines)


def write_bug(
    root: Path,
    bug_id: str,
    original: str = SIMPLE_ORIGINAL,
    developer: str | None = None,
    candidates: dict[str, str] | None = None,
    faulty_line: int = 4,
    annotations: dict | None = None,
    aux: dict[str, str] | None = None,
    project: str = "sample",
) -> Path:
    """
    Write one bug directory.

    Defaults give a bug whose developer fix turns ``x - y`` into ``x + y``
    with two candidates.
    """
    bug_dir = root / bug_id
    (bug_dir / "candidates").mkdir(parents=True)
    if developer is None:
        developer = replace_line(original, faulty_line, "    return x + y;")
    if candidates is None:
        candidates = {
            "p1": replace_line(original, faulty_line, "    return y + x;"),
            "p2": replace_line(original, faulty_line, "    return x * y;"),
        }
    (bug_dir / "meta.json").write_text(
        json.dumps({"project": project, "faulty_line": faulty_line}), encoding="utf-8"
    )
    (bug_dir / "original.js").write_text(original, encoding="utf-8")
    (bug_dir / "developer.js").write_text(developer, encoding="utf-8")
    for candidate_id, source in candidates.items():
        (bug_dir / "candidates" / f"{candidate_id}.js").write_text(source, encoding="utf-8")
    if annotations is not None:
        (bug_dir / "annotations.json").write_text(
            json.dumps({"bug_id": bug_id, "annotator": "tester", "scores": annotations}),
            encoding="utf-8",
        )
    if aux:
        (bug_dir / "aux").mkdir()
        for name, source in aux.items():
            (bug_dir / "aux" / f"{name}.js").write_text(source, encoding="utf-8")
    return bug_dir


def make_bug(
    bug_id: str = "bug-1",
    original: str = SIMPLE_ORIGINAL,
    faulty_line: int = 4,
    candidates: dict[str, str] | None = None,
) -> BugCase:
    """
    In-memory BugCase with the same defaults as write_bug.

    Variants are edited at faulty_line clamped to the file, so an out of
    range faulty_line reaches BugCase validation.
    """
    edit_line = min(faulty_line, len(original.split("\n")))
    if candidates is None:
        candidates = {
            "p1": replace_line(original, edit_line, "    return y + x;"),
            "p2": replace_line(original, edit_line, "    return x * y;"),
        }
    return BugCase(
        bug_id=bug_id,
        project="sample",
        original_source=original,
        faulty_line=faulty_line,
        developer_fix_source=replace_line(original, edit_line, "    return x + y;"),
        candidates=tuple(Candidate(candidate_id=k, source=v) for k, v in candidates.items()),
    )


def two_cluster_corpus(
    docs_per_cluster: int = 20, length: int = 30, seed: int = 7
) -> list[TokenSequence]:
    """
    Documents drawn from two disjoint vocabularies.

    Cluster ``x`` uses tokens x1..x5 and cluster ``y`` uses y1..y5.
    """
    rng = random.Random(seed)
    corpus = []
    for cluster in ("x", "y"):
        vocabulary = [f"{cluster}{i}" for i in range(1, 6)]
        for n in range(docs_per_cluster):
            tokens = tuple(rng.choice(vocabulary) for _ in range(length))
            corpus.append(TokenSequence(doc_id=f"{cluster}/{n}", tokens=tokens))
    return corpus


def planted_model(vectors: dict[str, list[float]]) -> EmbeddingModel:
    """EmbeddingModel whose doc vectors are exactly the given ones."""
    doc_ids = list(vectors)
    dim = len(vectors[doc_ids[0]])
    return EmbeddingModel(
        config=EmbeddingConfig(dim=dim, min_count=1),
        vocab=Vocabulary.from_counts({"t": 1}, min_count=1),
        word_vectors=np.zeros((1, dim), dtype=np.float32),
        context_weights=np.zeros((1, dim), dtype=np.float32),
        doc_vectors=np.array([vectors[d] for d in doc_ids], dtype=np.float32),
        doc_index={d: i for i, d in enumerate(doc_ids)},
    )
