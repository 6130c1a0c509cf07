"""Command-line entry point: `qpk <command> [--config FILE] [--seed N] [--jobs N] [--out DIR]`.

Exit codes: 0 on success, 1 on invalid input or provenance mismatch, 2 on runtime
failure (including any failed cell of a full run or a staged command).
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import TYPE_CHECKING, NoReturn

import pandas as pd
from pydantic import ValidationError

from qpk import __version__
from qpk.baselines.classical import compare_experiment, save_w1_snapshot, summarize_comparison, w1_experiment
from qpk.core import ProvenanceError, QpkError, TrainingDivergedError
from qpk.harness.config import ExperimentConfig, config_schema
from qpk.harness.io import RunLayout, write_csv
from qpk.harness.report import report
from qpk.harness.runner import (
    CellResult,
    RunArtifacts,
    assemble,
    prepare_run,
    record_failures,
    run_cells,
    run_experiment,
    stage_data,
)
from qpk.utils.funcs import get_logger

if TYPE_CHECKING:
    from collections.abc import Sequence

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2


class ArgumentParser(argparse.ArgumentParser):
    """argparse parser that exits with the validation code on usage errors."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON experiment configuration. Defaults are used if omitted.")
    parser.add_argument("--seed", type=int, help="Run only this seed instead of the configured list.")
    parser.add_argument("--jobs", type=int, help="Degree of parallelism (overrides QPK_JOBS).")
    parser.add_argument("--out", help="Root output directory (overrides the config).")
    parser.add_argument("-v", "--verbose", action="store_true", help="Show progress bars.")


def build_parser() -> ArgumentParser:
    """The qpk argument parser with one subparser per pipeline stage."""
    parser = ArgumentParser(prog="qpk", description="Quantum path-kernel experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    descriptions = {
        "gen-data": "Generate and split the datasets of every (eps, seed).",
        "train": "Train the QNN of every (eps, L, seed) cell and store its trajectory.",
        "kernels": "Build QNTK and path-kernel Gram matrices from stored trajectories.",
        "svm": "Fit SVMs on stored Grams and assemble the metrics table.",
        "run": "Run the full pipeline (data, train, kernels, svm) with per-cell isolation.",
        "baseline": "Compare best-of-pool networks with random-feature SVMs and measure W1 shrinkage.",
        "report": "Write summary tables and figures for a completed run.",
    }
    for name, description in descriptions.items():
        sub = commands.add_parser(name, help=description, description=description)
        _add_common(sub)

    commands.add_parser("schema", help="Print the JSON schema of the configuration file.")
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    """Reads the configuration and applies command-line overrides.

    Raises:
        InputError: if the config file is missing or invalid.
        ValidationError: if an override is invalid.
    """
    cfg = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    updates = {}
    if args.seed is not None:
        updates["seeds"] = [args.seed]
    if args.jobs is not None:
        updates["jobs"] = args.jobs
    if args.out is not None:
        updates["out"] = args.out
    if updates:
        cfg = ExperimentConfig.model_validate({**cfg.model_dump(mode="json"), **updates})
    return cfg


def _staged(cfg: ExperimentConfig, stage: str, quiet: bool) -> list[CellResult]:
    """Runs one stage for every cell; provenance mismatches abort, other failures are recorded."""
    layout = RunLayout(cfg.run_dir)
    if not layout.config_path.exists():
        raise FileNotFoundError(f"No run at {layout.root}; run gen-data first")
    return run_cells(cfg, stages=(stage,), fatal=(ProvenanceError,), quiet=quiet)


def _finish(cfg: ExperimentConfig, failures: pd.DataFrame, total: int) -> int:
    if failures.empty:
        return EXIT_OK
    print(f"{len(failures)} of {total} cells failed; see {RunLayout(cfg.run_dir).failures_path}", file=sys.stderr)
    return EXIT_RUNTIME


def cmd_gen_data(cfg: ExperimentConfig, quiet: bool) -> int:
    layout = prepare_run(cfg)
    for eps in cfg.dataset.eps:
        for seed in cfg.seeds:
            stage_data(cfg, float(eps), seed)
    print(f"Datasets written to {layout.subdir('data')}")
    return EXIT_OK


def cmd_train(cfg: ExperimentConfig, quiet: bool) -> int:
    results = _staged(cfg, "train", quiet)
    print(f"Trajectories written to {cfg.run_dir / 'traj'}")
    return _finish(cfg, record_failures(cfg, results), len(results))


def cmd_kernels(cfg: ExperimentConfig, quiet: bool) -> int:
    results = _staged(cfg, "kernels", quiet)
    print(f"Gram matrices written to {cfg.run_dir / 'gram'}")
    return _finish(cfg, record_failures(cfg, results), len(results))


def cmd_svm(cfg: ExperimentConfig, quiet: bool) -> int:
    results = _staged(cfg, "svm", quiet)
    metrics, failures = assemble(cfg, results)
    print(f"{len(metrics)} metric rows written to {cfg.run_dir / 'report' / 'metrics.csv'}")
    return _finish(cfg, failures, len(results))


def cmd_run(cfg: ExperimentConfig, quiet: bool) -> int:
    artifacts = run_experiment(cfg, quiet=quiet)
    print(f"Run {cfg.hash}: {len(artifacts.metrics)} metric rows, {len(artifacts.failures)} failed cells")
    if not artifacts.ok:
        print(f"Failures recorded in {artifacts.layout.failures_path}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_baseline(cfg: ExperimentConfig, quiet: bool) -> int:
    layout = prepare_run(cfg)
    out = layout.subdir("report")
    spec = cfg.baseline
    seed = cfg.seeds[0]

    frames = [
        compare_experiment(
            d,
            spec.eps,
            spec.repeats,
            seed,
            pool_size=spec.pool_size,
            d_prime=spec.d_prime,
            train_fraction=spec.train_fraction,
            selection=spec.selection,
            epochs=spec.epochs,
            lr=spec.lr,
            C=spec.C,
            jobs=cfg.resolved_jobs(),
            quiet=quiet,
        )
        for d in spec.dims
    ]
    comparison = pd.concat(frames, ignore_index=True)
    write_csv(comparison, out / "baseline_comparison.csv")
    write_csv(summarize_comparison(comparison), out / "baseline_summary.csv")

    run, shrinkage = w1_experiment(
        d=spec.w1_d, d_prime=spec.d_prime, eps=spec.w1_eps, n=spec.w1_n, seed=seed, epochs=spec.epochs, lr=spec.lr
    )
    last = run.trajectory.n_epochs
    for epoch in sorted({e for e in spec.w1_snapshots if 0 <= e <= last} | {last}):
        save_w1_snapshot(run.snapshot(epoch), out / f"w1_epoch{epoch}.csv")
    write_csv(pd.DataFrame([shrinkage._asdict()]), out / "w1_shrinkage.csv")

    print(f"Baseline results written to {out}")
    return EXIT_OK


def cmd_report(cfg: ExperimentConfig, quiet: bool) -> int:
    result = report(RunArtifacts.load(cfg.run_dir))
    print("\n".join(result.notes))
    return EXIT_OK


COMMANDS = {
    "gen-data": cmd_gen_data,
    "train": cmd_train,
    "kernels": cmd_kernels,
    "svm": cmd_svm,
    "run": cmd_run,
    "baseline": cmd_baseline,
    "report": cmd_report,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Parses argv, runs the chosen command and returns its exit code."""
    args = build_parser().parse_args(argv)

    if args.command == "schema":
        print(json.dumps(config_schema(), indent=2))
        return EXIT_OK

    try:
        cfg = load_config(args)
        return COMMANDS[args.command](cfg, quiet=not args.verbose)
    except TrainingDivergedError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    except (QpkError, ValidationError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as err:
        logger.exception(f"{args.command} failed")
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
