"""
Paragraph-vector (PV-DM) document embeddings trained from scratch.

Each update predicts a center token from the mean of its context word
vectors and the document vector, using negative sampling against noise
tokens drawn from the unigram distribution raised to 0.75. The error at
the hidden layer is applied in full to the document vector and to every
context vector. The learning rate decays linearly over all updates.

With ``deterministic=True`` training is single-threaded and a pure
function of corpus order and config. Otherwise documents are sharded
across threads that update the shared matrices without locks.
"""

from __future__ import annotations

import struct
import zlib
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from pydantic import ValidationError

from patch_rank.config.settings import EmbeddingConfig
from patch_rank.core.models import TokenSequence
from patch_rank.utils.exceptions import (
    ModelFormatError,
    TrainingError,
    UnknownDocumentError,
    VocabularyError,
)
from patch_rank.utils.logger import get_logger

logger = get_logger(__name__)

REAL = np.float32
NOISE_POWER = 0.75
SIGMOID_CLAMP = 6.0

MODEL_MAGIC = b"PVDM"
MODEL_FORMAT_VERSION = 1


def sigmoid(x: np.ndarray) -> np.ndarray:
    """Logistic function on a clamped argument."""
    return 1.0 / (1.0 + np.exp(-np.clip(x, -SIGMOID_CLAMP, SIGMOID_CLAMP)))


@dataclass(frozen=True, eq=False)
class Vocabulary:
    """Retained tokens with their counts and the noise distribution."""

    tokens: tuple[str, ...]
    counts: np.ndarray
    min_count: int = 1
    index: dict[str, int] = field(init=False, repr=False)
    noise: np.ndarray = field(init=False, repr=False)
    _cumulative: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not self.tokens:
            raise VocabularyError("empty vocabulary")
        counts = np.asarray(self.counts, dtype=np.int64)
        weights = counts.astype(np.float64) ** NOISE_POWER
        noise = weights / weights.sum()
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.tokens)})
        object.__setattr__(self, "noise", noise)
        object.__setattr__(self, "_cumulative", np.cumsum(noise))

    @classmethod
    def from_counts(cls, counts: Mapping[str, int], min_count: int) -> "Vocabulary":
        """Keep tokens seen at least min_count times, most frequent first."""
        kept = sorted(
            ((t, c) for t, c in counts.items() if c >= min_count),
            key=lambda item: (-item[1], item[0]),
        )
        if not kept:
            raise VocabularyError("empty vocabulary", details={"min_count": min_count})
        return cls(
            tokens=tuple(t for t, _ in kept),
            counts=np.array([c for _, c in kept], dtype=np.int64),
            min_count=min_count,
        )

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: object) -> bool:
        return token in self.index

    @property
    def total_count(self) -> int:
        """Number of retained token occurrences in the corpus."""
        return int(self.counts.sum())

    def frequency(self, token: str) -> int:
        return int(self.counts[self.index[token]])

    def encode(self, tokens: Sequence[str]) -> np.ndarray:
        """Indices of in-vocabulary tokens, dropping the rest."""
        return np.array([self.index[t] for t in tokens if t in self.index], dtype=np.int64)

    def draw_noise(self, rng: np.random.Generator, k: int) -> np.ndarray:
        """k token indices from the noise distribution."""
        picks = np.searchsorted(self._cumulative, rng.random(k), side="right")
        return np.minimum(picks, len(self.tokens) - 1)


def build_vocabulary(corpus: Sequence[TokenSequence], min_count: int = 2) -> Vocabulary:
    """
    Count tokens over the corpus and drop the rare ones.

    Raises:
        VocabularyError: If the corpus is empty or nothing survives min_count
    """
    if not corpus:
        raise VocabularyError("empty corpus")
    counts: Counter[str] = Counter()
    for doc in corpus:
        counts.update(doc.tokens)
    vocab = Vocabulary.from_counts(counts, min_count)
    logger.debug(
        "Vocabulary built",
        retained=len(vocab),
        dropped=len(counts) - len(vocab),
        min_count=min_count,
    )
    return vocab


def pvdm_gradients(
    doc_vector: np.ndarray,
    context_vectors: np.ndarray,
    output_rows: np.ndarray,
    labels: np.ndarray,
) -> tuple[float, np.ndarray, np.ndarray]:
    """
    Negative-sampling loss of one PV-DM prediction and its gradients.

    Args:
        doc_vector: Document vector, shape (dim,)
        context_vectors: Context word vectors, shape (c, dim), c may be 0
        output_rows: Output weights of the target then the noise tokens, shape (k+1, dim)
        labels: 1 for the target, 0 for noise, shape (k+1,)

    Returns:
        (loss, gradient for each input vector, gradient for output_rows).
        The hidden layer is the mean of the inputs, so the doc vector and
        every context vector share the same input gradient.
    """
    n_inputs = 1 + len(context_vectors)
    hidden = (doc_vector + context_vectors.sum(axis=0)) / n_inputs
    logits = output_rows @ hidden
    probs = sigmoid(logits)
    signs = 2.0 * labels - 1.0
    loss = float(-np.sum(np.log(sigmoid(signs * logits))))
    errors = probs - labels
    grad_hidden = errors @ output_rows
    return loss, grad_hidden / n_inputs, np.outer(errors, hidden)


@dataclass(frozen=True, eq=False)
class EmbeddingModel:
    """Trained word, output and document matrices. Immutable once built."""

    config: EmbeddingConfig
    vocab: Vocabulary
    word_vectors: np.ndarray
    context_weights: np.ndarray
    doc_vectors: np.ndarray
    doc_index: Mapping[str, int]
    training_loss: float | None = None

    def __post_init__(self) -> None:
        vocab_size, dim = len(self.vocab), self.config.dim
        for name, matrix, rows in (
            ("word_vectors", self.word_vectors, vocab_size),
            ("context_weights", self.context_weights, vocab_size),
            ("doc_vectors", self.doc_vectors, len(self.doc_index)),
        ):
            if matrix.shape != (rows, dim):
                raise TrainingError(
                    f"{name} has shape {matrix.shape}, expected {(rows, dim)}"
                )
            if not np.all(np.isfinite(matrix)):
                raise TrainingError(f"{name} holds non-finite values")
            matrix.setflags(write=False)
        if sorted(self.doc_index.values()) != list(range(len(self.doc_index))):
            raise TrainingError("doc_index must map onto 0..D-1")

    @property
    def dim(self) -> int:
        return self.config.dim

    def doc_ids(self) -> list[str]:
        """Document ids in row order."""
        return sorted(self.doc_index, key=self.doc_index.__getitem__)

    def has_doc(self, doc_id: str) -> bool:
        return doc_id in self.doc_index

    def doc_vector(self, doc_id: str) -> np.ndarray:
        """
        Trained vector of a document.

        Raises:
            UnknownDocumentError: If doc_id was not in the training corpus
        """
        row = self.doc_index.get(doc_id)
        if row is None:
            raise UnknownDocumentError(doc_id)
        return self.doc_vectors[row].copy()


class PVDMTrainer:
    """
    Trains PV-DM document vectors with negative sampling.

    The context of a center token is the in-vocabulary tokens within
    ``window`` positions on each side, after out-of-vocabulary tokens are
    removed from the document.
    """

    def __init__(self, config: EmbeddingConfig) -> None:
        self.config = config

    def train(self, corpus: Sequence[TokenSequence]) -> EmbeddingModel:
        """
        Build the vocabulary and train all matrices.

        Raises:
            VocabularyError: If no vocabulary can be built
            TrainingError: If duplicate doc ids are given or training diverges
        """
        cfg = self.config
        vocab = build_vocabulary(corpus, cfg.min_count)

        doc_index: dict[str, int] = {}
        for row, doc in enumerate(corpus):
            if doc.doc_id in doc_index:
                raise TrainingError("duplicate doc id in corpus", details={"doc_id": doc.doc_id})
            doc_index[doc.doc_id] = row

        rng = np.random.default_rng(cfg.seed)
        scale = 1.0 / cfg.dim
        # uniform in [-0.5/dim, 0.5/dim)
        word_vectors = ((rng.random((len(vocab), cfg.dim)) - 0.5) * scale).astype(REAL)
        context_weights = ((rng.random((len(vocab), cfg.dim)) - 0.5) * scale).astype(REAL)
        doc_vectors = ((rng.random((len(corpus), cfg.dim)) - 0.5) * scale).astype(REAL)

        encoded = [vocab.encode(doc.tokens) for doc in corpus]
        positions_per_epoch = sum(len(e) for e in encoded)
        total_updates = cfg.epochs * positions_per_epoch

        state = _TrainingState(
            vocab=vocab,
            word_vectors=word_vectors,
            context_weights=context_weights,
            doc_vectors=doc_vectors,
            window=cfg.window,
            negative=cfg.negative_samples,
            alpha_start=cfg.alpha_start,
            alpha_end=cfg.alpha_end,
            total_updates=total_updates,
        )

        logger.info(
            "Training PV-DM",
            docs=len(corpus),
            vocab=len(vocab),
            dim=cfg.dim,
            epochs=cfg.epochs,
            deterministic=cfg.deterministic,
        )

        epoch_loss = 0.0
        for epoch in range(cfg.epochs):
            offset = epoch * positions_per_epoch
            if cfg.deterministic or cfg.workers == 1:
                epoch_loss = state.run_shard(list(enumerate(encoded)), rng, offset, stride=1)
            else:
                epoch_loss = self._parallel_epoch(state, encoded, epoch, offset)

            if not (
                np.all(np.isfinite(word_vectors))
                and np.all(np.isfinite(context_weights))
                and np.all(np.isfinite(doc_vectors))
            ):
                raise TrainingError("non-finite values during training", details={"epoch": epoch + 1})
            logger.debug("Epoch finished", epoch=epoch + 1, loss=f"{epoch_loss:.4f}")

        return EmbeddingModel(
            config=cfg,
            vocab=vocab,
            word_vectors=word_vectors,
            context_weights=context_weights,
            doc_vectors=doc_vectors,
            doc_index=doc_index,
            training_loss=epoch_loss,
        )

    def _parallel_epoch(
        self,
        state: "_TrainingState",
        encoded: list[np.ndarray],
        epoch: int,
        offset: int,
    ) -> float:
        workers = self.config.workers
        items = list(enumerate(encoded))
        shards = [items[w::workers] for w in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(
                    state.run_shard,
                    shard,
                    np.random.default_rng([self.config.seed, epoch, w]),
                    offset,
                    workers,
                )
                for w, shard in enumerate(shards)
                if shard
            ]
            return sum(f.result() for f in futures)


@dataclass
class _TrainingState:
    vocab: Vocabulary
    word_vectors: np.ndarray
    context_weights: np.ndarray
    doc_vectors: np.ndarray
    window: int
    negative: int
    alpha_start: float
    alpha_end: float
    total_updates: int

    def alpha_at(self, update: int) -> float:
        span = max(1, self.total_updates - 1)
        progress = min(update, span) / span
        return self.alpha_start - (self.alpha_start - self.alpha_end) * progress

    def run_shard(
        self,
        docs: list[tuple[int, np.ndarray]],
        rng: np.random.Generator,
        offset: int,
        stride: int,
    ) -> float:
        """Train over docs; update counts advance by stride to spread the decay across shards."""
        loss = 0.0
        update = offset
        for row, indices in docs:
            for position in range(len(indices)):
                loss += self.train_position(row, indices, position, self.alpha_at(update), rng)
                update += stride
        return loss

    def train_position(
        self,
        row: int,
        indices: np.ndarray,
        position: int,
        alpha: float,
        rng: np.random.Generator,
    ) -> float:
        target = int(indices[position])
        context = np.concatenate(
            (
                indices[max(0, position - self.window) : position],
                indices[position + 1 : position + 1 + self.window],
            )
        )
        noise = self.vocab.draw_noise(rng, self.negative)
        noise = noise[noise != target]
        targets = np.concatenate(([target], noise))
        labels = np.zeros(len(targets), dtype=REAL)
        labels[0] = 1.0

        loss, grad_input, grad_output = pvdm_gradients(
            self.doc_vectors[row],
            self.word_vectors[context],
            self.context_weights[targets],
            labels,
        )
        # each input takes the whole hidden-layer error, not its 1/n share
        input_step = (-alpha * (1 + len(context)) * grad_input).astype(REAL)
        # add.at accumulates repeated indices
        np.add.at(self.context_weights, targets, (-alpha * grad_output).astype(REAL))
        if len(context):
            np.add.at(
                self.word_vectors,
                context,
                np.broadcast_to(input_step, (len(context), input_step.shape[0])),
            )
        self.doc_vectors[row] += input_step
        return loss


def train(corpus: Sequence[TokenSequence], config: EmbeddingConfig) -> EmbeddingModel:
    """Train a PV-DM model over the corpus."""
    return PVDMTrainer(config).train(corpus)


def doc_vector(model: EmbeddingModel, doc_id: str) -> np.ndarray:
    """Trained vector of doc_id."""
    return model.doc_vector(doc_id)


# ---------------------------------------------------------------------------
# Model files: magic, u32 version, config JSON, vocabulary, doc ids,
# three little-endian float32 matrices, CRC-32 trailer.
# ---------------------------------------------------------------------------


def _pack_str(value: str) -> bytes:
    raw = value.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw


def _pack_matrix(matrix: np.ndarray) -> bytes:
    rows, cols = matrix.shape
    return struct.pack("<II", rows, cols) + np.ascontiguousarray(matrix, dtype="<f4").tobytes()


def serialize_model(model: EmbeddingModel) -> bytes:
    """Encode a model into the versioned binary format."""
    parts = [MODEL_MAGIC, struct.pack("<I", MODEL_FORMAT_VERSION)]
    parts.append(_pack_str(model.config.model_dump_json()))
    parts.append(struct.pack("<I", len(model.vocab)))
    for token, count in zip(model.vocab.tokens, model.vocab.counts):
        parts.append(_pack_str(token) + struct.pack("<Q", int(count)))
    doc_ids = model.doc_ids()
    parts.append(struct.pack("<I", len(doc_ids)))
    parts.extend(_pack_str(d) for d in doc_ids)
    for matrix in (model.word_vectors, model.context_weights, model.doc_vectors):
        parts.append(_pack_matrix(matrix))
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


class _Reader:
    def __init__(self, data: bytes, path: str) -> None:
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, size: int) -> bytes:
        if self.pos + size > len(self.data):
            raise ModelFormatError("Model file is truncated", path=self.path, reason="truncated")
        chunk = self.data[self.pos : self.pos + size]
        self.pos += size
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def text(self) -> str:
        try:
            return self.take(self.u32()).decode("utf-8")
        except UnicodeDecodeError as e:
            raise ModelFormatError("Model file is corrupted", path=self.path, reason="bad text") from e

    def matrix(self) -> np.ndarray:
        rows, cols = self.u32(), self.u32()
        raw = self.take(rows * cols * 4)
        return np.frombuffer(raw, dtype="<f4").astype(REAL).reshape(rows, cols)


def deserialize_model(data: bytes, path: str = "<memory>") -> EmbeddingModel:
    """
    Decode a model produced by serialize_model.

    Raises:
        ModelFormatError: On bad magic, unsupported version, checksum
            mismatch or truncation
    """
    if len(data) < 12:
        raise ModelFormatError("Model file is truncated", path=path, reason="truncated")
    if data[:4] != MODEL_MAGIC:
        raise ModelFormatError("Not a model file", path=path, reason="bad magic")
    version = struct.unpack("<I", data[4:8])[0]
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            "unsupported version", path=path, details={"version": version}
        )
    body, trailer = data[:-4], data[-4:]
    if struct.unpack("<I", trailer)[0] != zlib.crc32(body):
        raise ModelFormatError("Model file is corrupted", path=path, reason="checksum mismatch")

    reader = _Reader(body, path)
    reader.take(8)
    try:
        config = EmbeddingConfig.model_validate_json(reader.text())
    except ValidationError as e:
        raise ModelFormatError("Model config block is invalid", path=path) from e

    tokens, counts = [], []
    for _ in range(reader.u32()):
        tokens.append(reader.text())
        counts.append(reader.u64())
    doc_ids = [reader.text() for _ in range(reader.u32())]
    word_vectors = reader.matrix()
    context_weights = reader.matrix()
    doc_vectors = reader.matrix()
    if reader.pos != len(body):
        raise ModelFormatError("Trailing bytes in model file", path=path, reason="trailing data")

    try:
        return EmbeddingModel(
            config=config,
            vocab=Vocabulary(
                tokens=tuple(tokens),
                counts=np.array(counts, dtype=np.int64),
                min_count=config.min_count,
            ),
            word_vectors=word_vectors,
            context_weights=context_weights,
            doc_vectors=doc_vectors,
            doc_index={d: i for i, d in enumerate(doc_ids)},
        )
    except (TrainingError, VocabularyError) as e:
        raise ModelFormatError(f"Model file is inconsistent: {e.message}", path=path) from e


def save_model(model: EmbeddingModel, path: Path | str) -> Path:
    """Write a model file, creating parent directories."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(serialize_model(model))
    logger.debug("Model saved", path=str(target), docs=len(model.doc_index))
    return target


def load_model(path: Path | str) -> EmbeddingModel:
    """
    Read a model file.

    Raises:
        ModelFormatError: If the file is missing, corrupted or of another version
    """
    source = Path(path)
    try:
        data = source.read_bytes()
    except OSError as e:
        raise ModelFormatError("Cannot read model file", path=str(source), reason=str(e)) from e
    return deserialize_model(data, str(source))
