"""Core modules for patch-rank."""

from __future__ import annotations


from patch_rank.core.corpus import CorpusLoader, extract_snippet, ingest_corpus, scan_corpus
from patch_rank.core.tokenizer import normalize_whitespace, tokenize
from patch_rank.core.embedding import (
    EmbeddingModel,
    PVDMTrainer,
    Vocabulary,
    build_vocabulary,
    doc_vector,
    load_model,
    save_model,
    train,
)
from patch_rank.core.similarity import cosine, cosmul
from patch_rank.core.ranking import RankingOutcome, rank_all, rank_bug
from patch_rank.core.evaluation import (
    dcg,
    evaluate_bug,
    idcg,
    load_annotations,
    merge_annotations,
    ndcg,
    save_annotations,
    syntactic_match,
)
from patch_rank.core.report import (
    ReportBundle,
    build_bundle,
    emit_ndcg_chart,
    emit_similarity_chart,
    emit_summary_csv,
)
from patch_rank.core.annotator import Annotator
from patch_rank.core.pipeline import ArtifactStore, PatchRankingPipeline, RunResult, Stage

__all__ = [
    "CorpusLoader",
    "extract_snippet",
    "ingest_corpus",
    "scan_corpus",
    "normalize_whitespace",
    "tokenize",
    "EmbeddingModel",
    "PVDMTrainer",
    "Vocabulary",
    "build_vocabulary",
    "doc_vector",
    "load_model",
    "save_model",
    "train",
    "cosine",
    "cosmul",
    "RankingOutcome",
    "rank_all",
    "rank_bug",
    "dcg",
    "evaluate_bug",
    "idcg",
    "load_annotations",
    "merge_annotations",
    "ndcg",
    "save_annotations",
    "syntactic_match",
    "ReportBundle",
    "build_bundle",
    "emit_ndcg_chart",
    "emit_similarity_chart",
    "emit_summary_csv",
    "Annotator",
    "ArtifactStore",
    "PatchRankingPipeline",
    "RunResult",
    "Stage",
]
