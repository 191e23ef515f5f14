"""
Configuration settings for patch-rank.

Uses Pydantic for validation and environment variable loading.
Supports YAML configuration files with environment variable overrides.
"""

from __future__ import annotations


import json
import os
from enum import Enum
from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from patch_rank.utils.exceptions import ConfigurationError


class SimilarityMetric(str, Enum):
    """Scoring functions available for ranking."""

    COSINE = "cosine"
    COSMUL = "cosmul"

    @classmethod
    def from_string(cls, value: str) -> "SimilarityMetric":
        """Parse metric from string."""
        normalized = value.lower().strip()
        for metric in cls:
            if metric.value == normalized:
                return metric
        valid = ", ".join(m.value for m in cls)
        raise ValueError(f"Invalid metric '{value}'. Valid options: {valid}")


class EmbeddingConfig(BaseModel):
    """Paragraph-vector training hyperparameters."""

    model_config = {"frozen": True}

    dim: int = Field(default=256, ge=1, description="Vector dimensionality")
    window: int = Field(default=5, ge=1, description="Context positions on each side")
    min_count: int = Field(default=2, ge=1, description="Minimum token frequency")
    epochs: int = Field(default=50, ge=1, description="Training passes over the corpus")
    negative_samples: int = Field(default=5, ge=0, description="Noise draws per update")
    alpha_start: float = Field(default=0.025, gt=0, description="Initial learning rate")
    alpha_end: float = Field(default=0.0001, gt=0, description="Final learning rate")
    seed: int = Field(default=42, ge=0, lt=2**64, description="Random seed")
    deterministic: bool = Field(default=True, description="Single-threaded reproducible training")
    workers: int = Field(default=1, ge=1, le=64, description="Threads when not deterministic")

    @model_validator(mode="after")
    def check_learning_rate(self) -> "EmbeddingConfig":
        """Learning rate must decay, never grow."""
        if self.alpha_end > self.alpha_start:
            raise ValueError(
                f"alpha_end ({self.alpha_end}) must not exceed alpha_start ({self.alpha_start})"
            )
        return self


class RunConfig(BaseModel):
    """Fully resolved settings for one pipeline run."""

    corpus_root: Path = Field(..., description="Corpus directory")
    output_root: Path = Field(..., description="Output directory")
    embedding: EmbeddingConfig = Field(default_factory=EmbeddingConfig)
    radius: int = Field(default=3, ge=0, description="Snippet lines on each side of the center")
    metric: SimilarityMetric = Field(default=SimilarityMetric.COSMUL)
    with_aux: bool = Field(default=False, description="Train on auxiliary project files too")

    @property
    def seed(self) -> int:
        """Seed used for training."""
        return self.embedding.seed

    @property
    def parallel(self) -> bool:
        """Whether per-bug stages may run concurrently."""
        return not self.embedding.deterministic

    def to_json(self) -> str:
        """Stable JSON rendering for the provenance echo."""
        payload = self.model_dump(mode="json")
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


class Settings(BaseSettings):
    """Main application settings."""

    model_config = SettingsConfigDict(
        env_prefix="PATCH_RANK_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Embedding
    embedding_dim: int = Field(default=256)
    embedding_window: int = Field(default=5)
    embedding_min_count: int = Field(default=2)
    embedding_epochs: int = Field(default=50)
    embedding_negative: int = Field(default=5)
    embedding_alpha_start: float = Field(default=0.025)
    embedding_alpha_end: float = Field(default=0.0001)
    embedding_workers: int = Field(default=4)
    embedding_seed: int = Field(default=42)

    # Corpus
    corpus_radius: int = Field(default=3)
    corpus_with_aux: bool = Field(default=False)

    # Ranking
    ranking_metric: str = Field(default="cosmul")

    # Logging
    log_level: str = Field(default="WARNING")
    log_json: bool = Field(default=False)

    def get_embedding_config(self, **overrides: Any) -> EmbeddingConfig:
        """Build EmbeddingConfig from settings, applying non-None overrides."""
        values: dict[str, Any] = {
            "dim": self.embedding_dim,
            "window": self.embedding_window,
            "min_count": self.embedding_min_count,
            "epochs": self.embedding_epochs,
            "negative_samples": self.embedding_negative,
            "alpha_start": self.embedding_alpha_start,
            "alpha_end": self.embedding_alpha_end,
            "seed": self.embedding_seed,
            "workers": self.embedding_workers,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return EmbeddingConfig(**values)
        except ValidationError as e:
            raise ConfigurationError(f"Invalid embedding settings: {e}") from e

    def get_run_config(
        self,
        corpus_root: Path,
        output_root: Path,
        radius: int | None = None,
        metric: str | None = None,
        with_aux: bool | None = None,
        **embedding_overrides: Any,
    ) -> RunConfig:
        """Build the resolved RunConfig for a CLI invocation."""
        try:
            return RunConfig(
                corpus_root=corpus_root,
                output_root=output_root,
                embedding=self.get_embedding_config(**embedding_overrides),
                radius=self.corpus_radius if radius is None else radius,
                metric=SimilarityMetric.from_string(metric or self.ranking_metric),
                with_aux=self.corpus_with_aux if with_aux is None else with_aux,
            )
        except (ValidationError, ValueError) as e:
            raise ConfigurationError(f"Invalid run configuration: {e}") from e


def load_settings(config_path: str | Path | None = None) -> Settings:
    """
    Load settings from YAML file and environment variables.

    Args:
        config_path: Optional path to YAML configuration file.
                    Environment variables always take precedence.

    Returns:
        Settings instance with merged configuration.
    """
    config_data: dict[str, Any] = {}

    if config_path:
        path = Path(config_path)
        if not path.exists():
            raise ConfigurationError("Configuration file not found", details={"path": str(path)})
        with open(path, encoding="utf-8") as f:
            try:
                yaml_config = yaml.safe_load(f)
            except yaml.YAMLError as e:
                raise ConfigurationError(f"Malformed YAML: {e}", details={"path": str(path)}) from e
        if yaml_config:
            config_data = _flatten_config(yaml_config)

    try:
        # init kwargs outrank env in pydantic-settings, so drop keys the env already sets
        env_keys = {k for k in Settings.model_fields if _env_has(k)}
        config_data = {k: v for k, v in config_data.items() if k not in env_keys}
        return Settings(**config_data)
    except ValidationError as e:
        raise ConfigurationError(f"Failed to load settings: {e}") from e


def _env_has(field_name: str) -> bool:
    key = f"PATCH_RANK_{field_name}".upper()
    return any(k.upper() == key for k in os.environ)


def _flatten_config(config: dict[str, Any], prefix: str = "") -> dict[str, Any]:
    """Flatten nested YAML config to match Settings field names."""
    result: dict[str, Any] = {}

    for key, value in config.items():
        if isinstance(value, dict):
            # sections like 'embedding', 'corpus', 'ranking'
            nested_prefix = f"{key}_" if not prefix else f"{prefix}{key}_"
            result.update(_flatten_config(value, nested_prefix))
        else:
            full_key = f"{prefix}{key}" if prefix else key
            result[full_key] = value

    # the logging section maps onto top-level log_* fields
    if not prefix:
        for short in ("level", "json"):
            if f"logging_{short}" in result:
                result[f"log_{short}"] = result.pop(f"logging_{short}")
    return result
