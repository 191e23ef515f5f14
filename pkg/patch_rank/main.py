"""
patch-rank CLI - rank plausible patches by similarity to the original program.

Every stage can run on its own from the artifacts of the previous stage,
or all at once with ``pipeline``. Diagnostics go to standard error, data
to files under ``--out``.
"""

from __future__ import annotations

import sys
from pathlib import Path
from typing import Any, Callable, Optional

import click

from patch_rank import __version__
from patch_rank.config import RunConfig, SimilarityMetric, load_settings
from patch_rank.config.settings import Settings
from patch_rank.core.annotator import Annotator
from patch_rank.core.corpus import ANNOTATIONS_FILE, CorpusLoader
from patch_rank.core.evaluation import load_annotations, merge_annotations, save_annotations
from patch_rank.core.pipeline import PatchRankingPipeline, RunResult, Stage
from patch_rank.core.report import print_summary_table
from patch_rank.core.tokenizer import tokenize_text
from patch_rank.utils.exceptions import PatchRankError
from patch_rank.utils.logger import console, get_logger, setup_logging


@click.group()
@click.version_option(version=__version__, prog_name="patch-rank")
@click.option(
    "--config",
    "-c",
    type=click.Path(exists=True, path_type=Path),
    help="Path to YAML configuration file",
)
@click.option("--verbose", "-v", is_flag=True, help="Enable verbose output")
@click.option("--debug", is_flag=True, help="Enable debug logging")
@click.pass_context
def cli(ctx: click.Context, config: Optional[Path], verbose: bool, debug: bool) -> None:
    """
    patch-rank - similarity ranking and nDCG evaluation of plausible patches.

    Examples:

        # Full run with the default settings
        patch-rank pipeline --corpus corpus/ --out out/

        # Retrain with smaller vectors, then rerank
        patch-rank train --corpus corpus/ --out out/ --dim 64
        patch-rank rank --corpus corpus/ --out out/

        # Debug the tokenizer
        patch-rank tokenize snippet.js
    """
    ctx.ensure_object(dict)
    try:
        settings = load_settings(config)
    except PatchRankError as e:
        click.echo(f"Error: {e}", err=True)
        sys.exit(1)

    log_level = "DEBUG" if debug else ("INFO" if verbose else settings.log_level)
    try:
        setup_logging(level=log_level, json_output=settings.log_json)
    except ValueError:
        click.echo(f"Error: unknown log level '{log_level}'", err=True)
        sys.exit(1)

    ctx.obj["settings"] = settings
    ctx.obj["verbose"] = verbose


def run_options(func: Callable[..., Any]) -> Callable[..., Any]:
    """Options shared by every corpus stage."""
    options = [
        click.option(
            "--corpus",
            type=click.Path(file_okay=False, path_type=Path),
            help="Corpus root directory",
        ),
        click.option(
            "--out",
            type=click.Path(file_okay=False, path_type=Path),
            default=Path("out"),
            show_default=True,
            help="Output directory",
        ),
        click.option("--dim", type=int, default=None, help="Vector dimensionality [256]"),
        click.option("--window", type=int, default=None, help="Context window [5]"),
        click.option("--min-count", type=int, default=None, help="Minimum token frequency [2]"),
        click.option("--epochs", type=int, default=None, help="Training epochs [50]"),
        click.option("--negative", type=int, default=None, help="Negative samples [5]"),
        click.option("--radius", type=int, default=None, help="Snippet radius in lines [3]"),
        click.option("--seed", type=int, default=None, help="Random seed [42]"),
        click.option(
            "--metric",
            type=click.Choice([m.value for m in SimilarityMetric]),
            default=None,
            help="Similarity metric [cosmul]",
        ),
        click.option(
            "--nondeterministic-parallel",
            is_flag=True,
            help="Train with several threads; results are no longer reproducible",
        ),
        click.option(
            "--with-aux",
            is_flag=True,
            default=None,
            help="Add auxiliary project files to the training corpus",
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _run_config(ctx: click.Context, params: dict[str, Any]) -> RunConfig:
    corpus = params.get("corpus")
    if corpus is None:
        raise click.UsageError("--corpus is required")
    settings: Settings = ctx.obj["settings"]
    return settings.get_run_config(
        corpus_root=corpus,
        output_root=params["out"],
        radius=params.get("radius"),
        metric=params.get("metric"),
        with_aux=params.get("with_aux"),
        dim=params.get("dim"),
        window=params.get("window"),
        min_count=params.get("min_count"),
        epochs=params.get("epochs"),
        negative_samples=params.get("negative"),
        seed=params.get("seed"),
        deterministic=False if params.get("nondeterministic_parallel") else None,
    )


def _report_result(result: RunResult, show_table: bool = False) -> None:
    if show_table and result.bundle is not None:
        print_summary_table(result.bundle, console)
    for notice in result.notices:
        click.echo(f"[NOTE] {notice}", err=True)
    for failure in result.failures:
        click.echo(f"[FAIL] {failure}", err=True)
    if result.hard_error is not None:
        click.echo(f"Error: {result.hard_error}", err=True)


def _run_stage(ctx: click.Context, stage: Stage, params: dict[str, Any], show_table: bool = False) -> None:
    logger = get_logger(__name__)
    try:
        result = PatchRankingPipeline(_run_config(ctx, params)).run_stage(stage)
    except PatchRankError as e:
        logger.error(f"{stage.value} failed: {e}")
        click.echo(f"Error: {e}", err=True)
        sys.exit(1)
    _report_result(result, show_table)
    sys.exit(result.exit_code)


@cli.command()
@run_options
@click.pass_context
def ingest(ctx: click.Context, **params: Any) -> None:
    """Validate the corpus and write the snippet windows of every bug."""
    _run_stage(ctx, Stage.INGEST, params)


@cli.command()
@run_options
@click.pass_context
def train(ctx: click.Context, **params: Any) -> None:
    """Train one paragraph-vector model per bug from its tokenized windows."""
    _run_stage(ctx, Stage.TRAIN, params)


@cli.command()
@run_options
@click.pass_context
def rank(ctx: click.Context, **params: Any) -> None:
    """Rank each bug's patches by similarity to the original snippet."""
    _run_stage(ctx, Stage.RANK, params)


@cli.command("eval")
@run_options
@click.pass_context
def evaluate(ctx: click.Context, **params: Any) -> None:
    """Compute nDCG for every bug that has annotations."""
    _run_stage(ctx, Stage.EVALUATE, params)


@cli.command()
@run_options
@click.pass_context
def report(ctx: click.Context, **params: Any) -> None:
    """Write the CSV summary, summary JSON and SVG charts."""
    _run_stage(ctx, Stage.REPORT, params, show_table=True)


@cli.command()
@click.argument("source", required=False, type=click.File("r", encoding="utf-8"))
@run_options
@click.pass_context
def tokenize(ctx: click.Context, source: Any, **params: Any) -> None:
    """
    Tokenize a file, or every snippet window of a corpus.

    With SOURCE (use - for standard input) the tokens are printed one per
    line. With --corpus the windows written by ingest are tokenized into
    the output directory.
    """
    if source is not None:
        for token in tokenize_text(source.read()):
            click.echo(token)
        return
    _run_stage(ctx, Stage.TOKENIZE, params)


@cli.command()
@run_options
@click.pass_context
def pipeline(ctx: click.Context, **params: Any) -> None:
    """
    Run ingest, tokenize, train, rank, eval and report in order.

    Exit status is 0 on success, 2 when some bugs failed and 1 when the
    run could not complete.
    """
    logger = get_logger(__name__)
    try:
        run_config = _run_config(ctx, params)
        result = PatchRankingPipeline(run_config).run()
    except PatchRankError as e:
        logger.error(f"Pipeline failed: {e}")
        click.echo(f"Error: {e}", err=True)
        sys.exit(1)

    _report_result(result, show_table=True)
    if result.exit_code == 0:
        logger.success("Pipeline completed", out=str(run_config.output_root))
    sys.exit(result.exit_code)


@cli.group(invoke_without_command=True)
@click.option(
    "--corpus",
    type=click.Path(exists=True, file_okay=False, path_type=Path),
    help="Corpus root directory",
)
@click.option("--bug", "bug_id", help="Bug to annotate")
@click.option("--annotator", default="unknown", show_default=True, help="Annotator id")
@click.option(
    "--output",
    "-o",
    type=click.Path(dir_okay=False, path_type=Path),
    help="Where to write the annotations (default: the bug's annotations.json)",
)
@click.option(
    "--no-auto-syntactic",
    is_flag=True,
    help="Ask about syntactic matches instead of scoring them 2",
)
@click.pass_context
def annotate(
    ctx: click.Context,
    corpus: Optional[Path],
    bug_id: Optional[str],
    annotator: str,
    output: Optional[Path],
    no_auto_syntactic: bool,
) -> None:
    """
    Score the unannotated candidates of a bug interactively.

    The faulty line, the developer fix and each candidate are shown as
    diffs against the original; existing scores are kept.
    """
    if ctx.invoked_subcommand is not None:
        return
    if corpus is None or bug_id is None:
        raise click.UsageError("--corpus and --bug are required")

    logger = get_logger(__name__)
    try:
        bug = CorpusLoader(corpus).load_bug(corpus / bug_id)
        existing = load_annotations(bug.annotation_ref, bug.bug_id) if bug.annotation_ref else None
        tool = Annotator(annotator_id=annotator, auto_syntactic=not no_auto_syntactic)
        annotations = tool.annotate_bug(bug, existing)
        target = save_annotations(annotations, output or corpus / bug_id / ANNOTATIONS_FILE)
    except PatchRankError as e:
        logger.error(f"Annotation failed: {e}")
        click.echo(f"Error: {e}", err=True)
        sys.exit(1)
    logger.success("Annotations saved", path=str(target), scores=len(annotations.scores))


@annotate.command("merge")
@click.argument("first", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("second", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option(
    "--arbiter",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Third annotator's file, used where the first two disagree",
)
@click.option(
    "--output",
    "-o",
    type=click.Path(dir_okay=False, path_type=Path),
    required=True,
    help="Merged annotations file",
)
def annotate_merge(first: Path, second: Path, arbiter: Optional[Path], output: Path) -> None:
    """Merge two annotators' files, resolving disagreements with the arbiter."""
    logger = get_logger(__name__)
    try:
        merged = merge_annotations(
            load_annotations(first),
            load_annotations(second),
            load_annotations(arbiter) if arbiter else None,
        )
        save_annotations(merged, output)
    except PatchRankError as e:
        logger.error(f"Merge failed: {e}")
        click.echo(f"Error: {e}", err=True)
        sys.exit(1)
    logger.success("Annotations merged", path=str(output))


def main() -> None:
    """Main entry point."""
    cli(obj={})


if __name__ == "__main__":
    main()
