"""Configuration management for patch-rank."""

from __future__ import annotations

from patch_rank.config.settings import (
    Settings,
    EmbeddingConfig,
    RunConfig,
    SimilarityMetric,
    load_settings,
)

__all__ = [
    "Settings",
    "EmbeddingConfig",
    "RunConfig",
    "SimilarityMetric",
    "load_settings",
]
