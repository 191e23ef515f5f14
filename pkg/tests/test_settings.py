"""
Unit tests for configuration loading.
"""

from pathlib import Path

import pytest
from pydantic import ValidationError

from patch_rank.config.settings import (
    EmbeddingConfig,
    SimilarityMetric,
    load_settings,
)
from patch_rank.utils.exceptions import ConfigurationError

DEFAULT_YAML = Path(__file__).parent.parent / "patch_rank" / "config" / "default.yaml"


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text(
        "embedding:\n"
        "  dim: 64\n"
        "  epochs: 5\n"
        "corpus:\n"
        "  radius: 2\n"
        "ranking:\n"
        "  metric: cosine\n"
        "logging:\n"
        "  level: DEBUG\n",
        encoding="utf-8",
    )
    return path


class TestEmbeddingConfig:
    """Tests for EmbeddingConfig validation."""

    def test_defaults(self):
        config = EmbeddingConfig()
        assert (config.dim, config.window, config.min_count, config.epochs) == (256, 5, 2, 50)
        assert config.negative_samples == 5
        assert config.seed == 42
        assert config.deterministic

    def test_learning_rate_must_decay(self):
        with pytest.raises(ValidationError):
            EmbeddingConfig(alpha_start=0.01, alpha_end=0.1)

    @pytest.mark.parametrize("field", ["dim", "window", "min_count", "epochs"])
    def test_positive_fields(self, field):
        with pytest.raises(ValidationError):
            EmbeddingConfig(**{field: 0})

    def test_frozen(self):
        with pytest.raises(ValidationError):
            EmbeddingConfig().dim = 8


class TestSimilarityMetric:
    """Tests for metric parsing."""

    def test_from_string(self):
        assert SimilarityMetric.from_string(" CosMul ") == SimilarityMetric.COSMUL

    def test_unknown(self):
        with pytest.raises(ValueError, match="Valid options"):
            SimilarityMetric.from_string("euclid")


class TestLoadSettings:
    """Tests for load_settings."""

    def test_yaml_values(self, config_file):
        settings = load_settings(config_file)
        assert settings.embedding_dim == 64
        assert settings.embedding_epochs == 5
        assert settings.corpus_radius == 2
        assert settings.ranking_metric == "cosine"
        assert settings.log_level == "DEBUG"

    def test_bundled_defaults(self):
        settings = load_settings(DEFAULT_YAML)
        config = settings.get_embedding_config()
        assert config == EmbeddingConfig(workers=4)

    def test_environment_wins(self, config_file, monkeypatch):
        monkeypatch.setenv("PATCH_RANK_EMBEDDING_DIM", "32")
        assert load_settings(config_file).embedding_dim == 32

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="not found"):
            load_settings(tmp_path / "absent.yaml")

    def test_malformed_yaml(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("embedding: [dim: 4\n", encoding="utf-8")
        with pytest.raises(ConfigurationError, match="Malformed YAML"):
            load_settings(path)


class TestRunConfig:
    """Tests for resolving a RunConfig."""

    def test_overrides(self, config_file, tmp_path):
        run = load_settings(config_file).get_run_config(
            corpus_root=tmp_path / "corpus",
            output_root=tmp_path / "out",
            dim=8,
            seed=None,
        )
        assert run.embedding.dim == 8
        assert run.embedding.epochs == 5
        assert run.seed == 42
        assert run.radius == 2
        assert run.metric == SimilarityMetric.COSINE
        assert not run.parallel

    def test_flag_metric_beats_file(self, config_file, tmp_path):
        run = load_settings(config_file).get_run_config(
            corpus_root=tmp_path, output_root=tmp_path, metric="cosmul"
        )
        assert run.metric == SimilarityMetric.COSMUL

    def test_nondeterministic(self, config_file, tmp_path):
        run = load_settings(config_file).get_run_config(
            corpus_root=tmp_path, output_root=tmp_path, deterministic=False
        )
        assert run.parallel

    def test_invalid_override(self, config_file, tmp_path):
        with pytest.raises(ConfigurationError):
            load_settings(config_file).get_run_config(
                corpus_root=tmp_path, output_root=tmp_path, dim=0
            )

    def test_invalid_metric(self, config_file, tmp_path):
        with pytest.raises(ConfigurationError):
            load_settings(config_file).get_run_config(
                corpus_root=tmp_path, output_root=tmp_path, metric="euclid"
            )

    def test_json_echo(self, config_file, tmp_path):
        text = load_settings(config_file).get_run_config(
            corpus_root=tmp_path, output_root=tmp_path
        ).to_json()
        assert text.endswith("\n")
        assert '"metric": "cosine"' in text
