"""
Tests for the patch-rank command line.
"""

import json
import time

import pytest
from click.testing import CliRunner

from patch_rank import __version__
from patch_rank.main import cli
from tests.fixtures.sample_corpus import FIXTURE_BUGS, copy_fixture_corpus

FAST_FLAGS = ["--dim", "16", "--epochs", "5"]


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def corpus(tmp_path):
    return copy_fixture_corpus(tmp_path)


def invoke(runner, *args, **kwargs):
    return runner.invoke(cli, [str(a) for a in args], catch_exceptions=False, **kwargs)


def snapshot(root):
    return {
        str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()
    }


class TestVersion:
    """Tests for the version option."""

    def test_version(self, runner):
        result = invoke(runner, "--version")
        assert result.exit_code == 0
        assert __version__ in result.output


class TestPipelineCommand:
    """Tests for `patch-rank pipeline`."""

    def test_full_output_tree(self, runner, corpus, tmp_path):
        out = tmp_path / "out"
        result = invoke(runner, "pipeline", "--corpus", corpus, "--out", out, *FAST_FLAGS)
        assert result.exit_code == 0, result.output

        files = set(snapshot(out))
        assert {"run-config.json", "ndcg.csv", "summary.json", "charts/ndcg.svg"} <= files
        for bug_id in FIXTURE_BUGS:
            assert f"rankings/{bug_id}.json" in files
            assert f"charts/{bug_id}.svg" in files
            assert f"models/{bug_id}.pvdm" in files

        rows = (out / "ndcg.csv").read_text(encoding="utf-8").splitlines()
        assert rows[0] == "bug_id,candidates,dev_fix_rank,dcg,idcg,ndcg,syntactic_matches,semantic_matches"
        assert [r.split(",")[0] for r in rows[1:]] == list(FIXTURE_BUGS)

        config = json.loads((out / "run-config.json").read_text(encoding="utf-8"))
        assert config["embedding"]["dim"] == 16
        assert config["embedding"]["seed"] == 42
        assert config["metric"] == "cosmul"

    def test_rerun_is_byte_identical(self, runner, corpus, tmp_path):
        out = tmp_path / "out"
        start = time.perf_counter()
        assert invoke(runner, "pipeline", "--corpus", corpus, "--out", out, *FAST_FLAGS).exit_code == 0
        first = snapshot(out)
        assert invoke(runner, "pipeline", "--corpus", corpus, "--out", out, *FAST_FLAGS).exit_code == 0
        assert time.perf_counter() - start < 60.0
        assert snapshot(out) == first

    def test_missing_annotations(self, runner, corpus, tmp_path):
        (corpus / "eslint-1" / "annotations.json").unlink()
        out = tmp_path / "out"
        result = invoke(runner, "pipeline", "--corpus", corpus, "--out", out, *FAST_FLAGS)
        assert result.exit_code == 0
        assert "eslint-1: no annotations, evaluation skipped" in result.output
        assert (out / "rankings" / "eslint-1.json").is_file()

    def test_malformed_bug(self, runner, corpus, tmp_path):
        (corpus / "eslint-99" / "candidates").mkdir(parents=True)
        out = tmp_path / "out"
        result = invoke(runner, "pipeline", "--corpus", corpus, "--out", out, *FAST_FLAGS)
        assert result.exit_code == 2
        assert "eslint-99" in result.output
        for bug_id in FIXTURE_BUGS:
            assert (out / "rankings" / f"{bug_id}.json").is_file()

    def test_unreadable_corpus(self, runner, tmp_path):
        result = invoke(runner, "pipeline", "--corpus", tmp_path / "nope", "--out", tmp_path / "out")
        assert result.exit_code == 1

    def test_corpus_is_required(self, runner, tmp_path):
        result = runner.invoke(cli, ["pipeline", "--out", str(tmp_path / "out")])
        assert result.exit_code == 2
        assert "--corpus is required" in result.output

    def test_invalid_override(self, runner, corpus, tmp_path):
        result = invoke(runner, "pipeline", "--corpus", corpus, "--out", tmp_path / "out", "--dim", "0")
        assert result.exit_code == 1

    def test_config_file(self, runner, corpus, tmp_path):
        config = tmp_path / "config.yaml"
        config.write_text("embedding:\n  dim: 12\n  epochs: 3\nranking:\n  metric: cosine\n", encoding="utf-8")
        out = tmp_path / "out"
        result = invoke(runner, "--config", config, "pipeline", "--corpus", corpus, "--out", out)
        assert result.exit_code == 0
        settings = json.loads((out / "run-config.json").read_text(encoding="utf-8"))
        assert settings["embedding"]["dim"] == 12
        assert settings["metric"] == "cosine"


class TestStageCommands:
    """Each stage runs on its own from the previous stage's files."""

    def test_stages_reproduce_pipeline(self, runner, corpus, tmp_path):
        full, staged = tmp_path / "full", tmp_path / "staged"
        invoke(runner, "pipeline", "--corpus", corpus, "--out", full, *FAST_FLAGS)
        for command in ("ingest", "tokenize", "train", "rank", "eval", "report"):
            result = invoke(runner, command, "--corpus", corpus, "--out", staged, *FAST_FLAGS)
            assert result.exit_code == 0, f"{command}: {result.output}"

        full_tree, staged_tree = snapshot(full), snapshot(staged)
        del full_tree["run-config.json"], staged_tree["run-config.json"]
        assert staged_tree == full_tree

    def test_rank_before_train(self, runner, corpus, tmp_path):
        result = invoke(runner, "rank", "--corpus", corpus, "--out", tmp_path / "out")
        assert result.exit_code == 2
        assert "run train first" in result.output


class TestTokenizeCommand:
    """Tests for `patch-rank tokenize FILE`."""

    def test_stdin(self, runner):
        result = invoke(runner, "tokenize", "-", input="function foo () { return this.bar; }\n")
        assert result.exit_code == 0
        assert result.output.split("\n")[:9] == [
            "function",
            "foo",
            "(",
            ")",
            "{",
            "return",
            "this.bar",
            ";",
            "}",
        ]

    def test_file(self, runner, tmp_path):
        source = tmp_path / "snippet.js"
        source.write_text('if (name === "Math")\n', encoding="utf-8")
        result = invoke(runner, "tokenize", source)
        assert result.output.splitlines() == ["if", "(", "name", "=", "=", "=", '"Math"', ")"]


class TestAnnotateCommand:
    """Tests for `patch-rank annotate`."""

    def test_interactive(self, runner, corpus, tmp_path):
        (corpus / "eslint-47" / "annotations.json").unlink()
        target = tmp_path / "scores.json"
        result = invoke(
            runner,
            "annotate",
            "--corpus",
            corpus,
            "--bug",
            "eslint-47",
            "--annotator",
            "carol",
            "--output",
            target,
            input="-1\n1\n0\n",
        )
        assert result.exit_code == 0, result.output
        saved = json.loads(target.read_text(encoding="utf-8"))
        assert saved["annotator"] == "carol"
        assert saved["scores"] == {
            "eslint-47/colzero": 2.0,
            "eslint-47/developer": 3.0,
            "eslint-47/drop": -1.0,
            "eslint-47/minus": 1.0,
            "eslint-47/startcol": 0.0,
        }

    def test_requires_bug(self, runner, corpus):
        result = runner.invoke(cli, ["annotate", "--corpus", str(corpus)])
        assert result.exit_code == 2

    def test_merge(self, runner, tmp_path):
        def write(name, annotator, scores):
            path = tmp_path / name
            path.write_text(
                json.dumps({"bug_id": "b", "annotator": annotator, "scores": scores}),
                encoding="utf-8",
            )
            return path

        first = write("a.json", "ann1", {"c1": 1, "c2": 0})
        second = write("b.json", "ann2", {"c1": -1, "c2": 0})
        arbiter = write("c.json", "ann3", {"c1": -1})
        target = tmp_path / "merged.json"
        result = invoke(
            runner, "annotate", "merge", first, second, "--arbiter", arbiter, "--output", target
        )
        assert result.exit_code == 0, result.output
        merged = json.loads(target.read_text(encoding="utf-8"))
        assert merged["scores"] == {"b/c1": -1.0, "b/c2": 0.0, "b/developer": 3.0}
        assert merged["annotator"] == "ann1+ann2/ann3"

    def test_merge_unresolved(self, runner, tmp_path):
        first = tmp_path / "a.json"
        second = tmp_path / "b.json"
        first.write_text(json.dumps({"bug_id": "b", "scores": {"c1": 1}}), encoding="utf-8")
        second.write_text(json.dumps({"bug_id": "b", "scores": {"c1": 0}}), encoding="utf-8")
        result = invoke(runner, "annotate", "merge", first, second, "--output", tmp_path / "m.json")
        assert result.exit_code == 1
        assert "Disagreements without arbiter score" in result.output
