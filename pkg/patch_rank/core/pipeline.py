"""
End-to-end patch ranking pipeline.

Stages run per bug and persist their output under the output root, so any
stage can be rerun on its own from the previous stage's artifacts::

    ingest    -> snippets/<bug>.json
    tokenize  -> tokens/<bug>.json
    train     -> models/<bug>.pvdm
    rank      -> rankings/<bug>.json
    eval      -> evaluations/<bug>.json   (bugs with annotations only)
    report    -> ndcg.csv, summary.json, charts/ndcg.svg, charts/<bug>.svg

A bug that fails a stage is recorded and skipped by the later stages of
the same run; the other bugs carry on.
"""

from __future__ import annotations


import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Sequence, TypeVar

from pydantic import ValidationError

from patch_rank.config.settings import RunConfig
from patch_rank.core.corpus import CorpusScan, auxiliary_windows, bug_windows, scan_corpus
from patch_rank.core.embedding import EmbeddingModel, load_model, save_model, train
from patch_rank.core.evaluation import evaluate_bug, load_annotations
from patch_rank.core.models import (
    AnnotationSet,
    BugCase,
    EvalResult,
    RankedList,
    SnippetWindow,
    TokenSequence,
)
from patch_rank.core.ranking import rank_bug
from patch_rank.core.report import (
    ReportBundle,
    build_bundle,
    emit_ndcg_chart,
    emit_similarity_chart,
    emit_summary_csv,
    emit_summary_json,
    write_json,
)
from patch_rank.core.tokenizer import tokenize
from patch_rank.utils.exceptions import ArtifactError, CorpusError, PatchRankError
from patch_rank.utils.logger import get_logger

logger = get_logger(__name__)

T = TypeVar("T")

EXIT_OK = 0
EXIT_HARD_ERROR = 1
EXIT_PARTIAL = 2


class Stage(str, Enum):
    """Pipeline stages in execution order."""

    INGEST = "ingest"
    TOKENIZE = "tokenize"
    TRAIN = "train"
    RANK = "rank"
    EVALUATE = "eval"
    REPORT = "report"


class ArtifactStore:
    """Reads and writes the intermediate files of a run."""

    def __init__(self, root: Path | str) -> None:
        self.root = Path(root)

    @property
    def run_config_path(self) -> Path:
        return self.root / "run-config.json"

    @property
    def csv_path(self) -> Path:
        return self.root / "ndcg.csv"

    @property
    def summary_path(self) -> Path:
        return self.root / "summary.json"

    @property
    def charts_dir(self) -> Path:
        return self.root / "charts"

    def snippets_path(self, bug_id: str) -> Path:
        return self.root / "snippets" / f"{bug_id}.json"

    def tokens_path(self, bug_id: str) -> Path:
        return self.root / "tokens" / f"{bug_id}.json"

    def model_path(self, bug_id: str) -> Path:
        return self.root / "models" / f"{bug_id}.pvdm"

    def ranking_path(self, bug_id: str) -> Path:
        return self.root / "rankings" / f"{bug_id}.json"

    def evaluation_path(self, bug_id: str) -> Path:
        return self.root / "evaluations" / f"{bug_id}.json"

    def chart_path(self, bug_id: str) -> Path:
        return self.charts_dir / f"{bug_id}.svg"

    def write_run_config(self, config: RunConfig) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        self.run_config_path.write_text(config.to_json(), encoding="utf-8")
        return self.run_config_path

    def write_snippets(self, bug_id: str, windows: Sequence[SnippetWindow]) -> Path:
        payload = {"bug_id": bug_id, "windows": [w.model_dump(mode="json") for w in windows]}
        return write_json(payload, self.snippets_path(bug_id))

    def read_snippets(self, bug_id: str) -> list[SnippetWindow]:
        data = self._read(self.snippets_path(bug_id), bug_id, "run ingest first")
        try:
            return [SnippetWindow.model_validate(w) for w in data["windows"]]
        except (KeyError, TypeError, ValidationError) as e:
            raise ArtifactError(
                "Malformed snippets file", path=str(self.snippets_path(bug_id)), bug_id=bug_id
            ) from e

    def write_tokens(self, bug_id: str, documents: Sequence[TokenSequence]) -> Path:
        payload = {
            "bug_id": bug_id,
            "documents": [{"doc_id": d.doc_id, "tokens": list(d.tokens)} for d in documents],
        }
        return write_json(payload, self.tokens_path(bug_id))

    def read_tokens(self, bug_id: str) -> list[TokenSequence]:
        data = self._read(self.tokens_path(bug_id), bug_id, "run tokenize first")
        try:
            return [TokenSequence.model_validate(d) for d in data["documents"]]
        except (KeyError, TypeError, ValidationError) as e:
            raise ArtifactError(
                "Malformed tokens file", path=str(self.tokens_path(bug_id)), bug_id=bug_id
            ) from e

    def read_model(self, bug_id: str) -> EmbeddingModel:
        path = self.model_path(bug_id)
        if not path.is_file():
            raise ArtifactError("Missing model, run train first", path=str(path), bug_id=bug_id)
        return load_model(path)

    def write_ranking(self, ranked: RankedList) -> Path:
        return write_json(ranked.to_dict(), self.ranking_path(ranked.bug_id))

    def read_ranking(self, bug_id: str) -> RankedList:
        data = self._read(self.ranking_path(bug_id), bug_id, "run rank first")
        try:
            return RankedList.model_validate(data)
        except ValidationError as e:
            raise ArtifactError(
                "Malformed rankings file", path=str(self.ranking_path(bug_id)), bug_id=bug_id
            ) from e

    def write_evaluation(self, result: EvalResult) -> Path:
        return write_json(result.to_dict(), self.evaluation_path(result.bug_id))

    def read_evaluation(self, bug_id: str) -> EvalResult | None:
        """Stored evaluation, or None when the bug was not evaluated."""
        path = self.evaluation_path(bug_id)
        if not path.is_file():
            return None
        data = self._read(path, bug_id, "")
        try:
            return EvalResult.model_validate(data)
        except ValidationError as e:
            raise ArtifactError("Malformed evaluation file", path=str(path), bug_id=bug_id) from e

    def discard_evaluation(self, bug_id: str) -> None:
        """Remove the evaluation left by an earlier run, if any."""
        self.evaluation_path(bug_id).unlink(missing_ok=True)

    @staticmethod
    def _read(path: Path, bug_id: str, hint: str) -> Any:
        if not path.is_file():
            message = f"Missing {path.parent.name} artifact"
            raise ArtifactError(f"{message}, {hint}" if hint else message, path=str(path), bug_id=bug_id)
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ArtifactError(f"Unreadable artifact: {e}", path=str(path), bug_id=bug_id) from e


@dataclass
class BugFailure:
    """A stage that failed for one bug."""

    bug_id: str
    stage: Stage
    error: PatchRankError

    def __str__(self) -> str:
        return f"{self.bug_id} [{self.stage.value}]: {self.error}"


@dataclass
class RunResult:
    """Outcome of a pipeline run or of a single stage."""

    completed: dict[Stage, list[str]] = field(default_factory=dict)
    failures: list[BugFailure] = field(default_factory=list)
    notices: list[str] = field(default_factory=list)
    hard_error: PatchRankError | None = None
    bundle: ReportBundle | None = None

    @property
    def failed_bugs(self) -> list[str]:
        seen: list[str] = []
        for failure in self.failures:
            if failure.bug_id not in seen:
                seen.append(failure.bug_id)
        return seen

    @property
    def exit_code(self) -> int:
        if self.hard_error is not None:
            return EXIT_HARD_ERROR
        if self.failures:
            return EXIT_PARTIAL
        return EXIT_OK

    def record(self, stage: Stage, bug_id: str) -> None:
        self.completed.setdefault(stage, []).append(bug_id)

    def fail(self, stage: Stage, bug_id: str, error: PatchRankError) -> None:
        failure = BugFailure(bug_id=bug_id, stage=stage, error=error)
        logger.error(f"Stage failed: {error}", bug_id=bug_id, stage=stage.value)
        self.failures.append(failure)

    def to_dict(self) -> dict[str, Any]:
        return {
            "exit_code": self.exit_code,
            "completed": {s.value: ids for s, ids in self.completed.items()},
            "failures": [str(f) for f in self.failures],
            "notices": self.notices,
            "hard_error": str(self.hard_error) if self.hard_error else None,
        }


class PatchRankingPipeline:
    """
    Runs the ranking stages over a corpus.

    Example:
        pipeline = PatchRankingPipeline(run_config)
        result = pipeline.run()
        sys.exit(result.exit_code)
    """

    def __init__(self, config: RunConfig, store: ArtifactStore | None = None) -> None:
        """
        Initialize the pipeline.

        Args:
            config: Resolved run configuration
            store: Artifact store; defaults to one rooted at config.output_root
        """
        self.config = config
        self.store = store or ArtifactStore(config.output_root)
        self._scan: CorpusScan | None = None

    @property
    def scan(self) -> CorpusScan:
        """Lenient corpus scan, done once per pipeline."""
        if self._scan is None:
            self._scan = scan_corpus(self.config.corpus_root, self.config.radius)
        return self._scan

    def run(self) -> RunResult:
        """Run every stage in order."""
        result = RunResult()
        stages: list[Callable[[RunResult], None]] = [
            self._ingest,
            self._tokenize,
            self._train,
            self._rank,
            self._evaluate,
            self._report,
        ]
        if not self._start(result):
            return result
        for stage in stages:
            stage(result)
            if result.hard_error is not None:
                break
        self._finish(result)
        return result

    def run_stage(self, stage: Stage) -> RunResult:
        """Run a single stage from the artifacts already on disk."""
        result = RunResult()
        if not self._start(result):
            return result
        handler = {
            Stage.INGEST: self._ingest,
            Stage.TOKENIZE: self._tokenize,
            Stage.TRAIN: self._train,
            Stage.RANK: self._rank,
            Stage.EVALUATE: self._evaluate,
            Stage.REPORT: self._report,
        }[stage]
        handler(result)
        self._finish(result)
        return result

    def _start(self, result: RunResult) -> bool:
        try:
            self.store.write_run_config(self.config)
            scan = self.scan
        except CorpusError as e:
            logger.error(f"Cannot read corpus: {e}")
            result.hard_error = e
            return False
        except OSError as e:
            result.hard_error = ArtifactError(f"Cannot write output: {e}", path=str(self.store.root))
            logger.error(str(result.hard_error))
            return False
        for bug_id, error in scan.failures.items():
            result.fail(Stage.INGEST, bug_id, error)
        return True

    def _finish(self, result: RunResult) -> None:
        if result.hard_error is None:
            logger.info(
                "Run finished",
                failed_bugs=len(result.failed_bugs),
                exit_code=result.exit_code,
            )

    def _active_bugs(self, result: RunResult) -> list[BugCase]:
        failed = set(result.failed_bugs)
        return [b for b in self.scan.manifest.bugs if b.bug_id not in failed]

    def _for_each_bug(
        self,
        stage: Stage,
        result: RunResult,
        work: Callable[[BugCase], T],
    ) -> list[tuple[BugCase, T]]:
        """Apply work to every active bug, recording failures per bug."""
        bugs = self._active_bugs(result)

        def guarded(bug: BugCase) -> tuple[BugCase, T | PatchRankError]:
            logger.stage(stage.value, bug.bug_id)
            try:
                return bug, work(bug)
            except PatchRankError as e:
                return bug, e

        if self.config.parallel and len(bugs) > 1:
            with ThreadPoolExecutor(max_workers=self.config.embedding.workers) as pool:
                outcomes = list(pool.map(guarded, bugs))
        else:
            outcomes = [guarded(b) for b in bugs]

        done: list[tuple[BugCase, T]] = []
        for bug, value in outcomes:
            if isinstance(value, PatchRankError):
                result.fail(stage, bug.bug_id, value)
            else:
                result.record(stage, bug.bug_id)
                done.append((bug, value))
        return done

    # stages -------------------------------------------------------------

    def windows_for(self, bug: BugCase) -> list[SnippetWindow]:
        """Ranked windows plus, when enabled, the auxiliary chunks."""
        windows = bug_windows(bug, self.config.radius)
        if self.config.with_aux:
            windows.extend(auxiliary_windows(bug, self.config.radius))
        return windows

    def _ingest(self, result: RunResult) -> None:
        def work(bug: BugCase) -> int:
            windows = self.windows_for(bug)
            self.store.write_snippets(bug.bug_id, windows)
            return len(windows)

        self._for_each_bug(Stage.INGEST, result, work)

    def _tokenize(self, result: RunResult) -> None:
        def work(bug: BugCase) -> int:
            documents = [tokenize(w.text, w.doc_id) for w in self.store.read_snippets(bug.bug_id)]
            self.store.write_tokens(bug.bug_id, documents)
            return sum(len(d) for d in documents)

        self._for_each_bug(Stage.TOKENIZE, result, work)

    def _train(self, result: RunResult) -> None:
        def work(bug: BugCase) -> EmbeddingModel:
            model = train(self.store.read_tokens(bug.bug_id), self.config.embedding)
            save_model(model, self.store.model_path(bug.bug_id))
            return model

        self._for_each_bug(Stage.TRAIN, result, work)

    def _rank(self, result: RunResult) -> None:
        def work(bug: BugCase) -> RankedList:
            ranked = rank_bug(self.store.read_model(bug.bug_id), bug, self.config.metric)
            self.store.write_ranking(ranked)
            return ranked

        self._for_each_bug(Stage.RANK, result, work)

    def _evaluate(self, result: RunResult) -> None:
        missing = [b.bug_id for b in self._active_bugs(result) if b.annotation_ref is None]
        for bug_id in missing:
            notice = f"{bug_id}: no annotations, evaluation skipped"
            logger.warning(notice)
            result.notices.append(notice)

        def work(bug: BugCase) -> EvalResult | None:
            self.store.discard_evaluation(bug.bug_id)
            if bug.annotation_ref is None:
                return None
            annotations = load_annotations(bug.annotation_ref, bug.bug_id)
            evaluation = evaluate_bug(self.store.read_ranking(bug.bug_id), annotations)
            self.store.write_evaluation(evaluation)
            return evaluation

        self._for_each_bug(Stage.EVALUATE, result, work)

    def _report(self, result: RunResult) -> None:
        bugs: list[BugCase] = []
        rankings: list[RankedList] = []
        evals: list[EvalResult] = []
        annotations: dict[str, AnnotationSet] = {}
        for bug in self._active_bugs(result):
            evaluation = None
            try:
                ranked = self.store.read_ranking(bug.bug_id)
                # only annotated bugs have a current evaluation
                if bug.annotation_ref is not None:
                    evaluation = self.store.read_evaluation(bug.bug_id)
                    annotations[bug.bug_id] = load_annotations(bug.annotation_ref, bug.bug_id)
            except PatchRankError as e:
                result.fail(Stage.REPORT, bug.bug_id, e)
                continue
            bugs.append(bug)
            rankings.append(ranked)
            if evaluation is not None:
                evals.append(evaluation)

        try:
            bundle = build_bundle(bugs, rankings, evals, annotations)
            emit_summary_csv(bundle, self.store.csv_path)
            emit_summary_json(bundle, self.store.summary_path)
            ndcg_chart = self.store.charts_dir / "ndcg.svg"
            if evals:
                emit_ndcg_chart(evals, ndcg_chart)
            else:
                ndcg_chart.unlink(missing_ok=True)
            for ranked in rankings:
                emit_similarity_chart(
                    ranked, annotations.get(ranked.bug_id), self.store.chart_path(ranked.bug_id)
                )
        except PatchRankError as e:
            logger.error(f"Report failed: {e}")
            result.hard_error = e
            return
        for ranked in rankings:
            result.record(Stage.REPORT, ranked.bug_id)
        result.bundle = bundle
