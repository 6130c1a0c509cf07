"""Orchestration of the path-kernel pipeline over (eps, L, seed) cells.

Each cell runs three stages that communicate only through files: training writes a
trajectory, the kernel stage reads it and writes Gram matrices, the SVM stage reads
those and writes models and metrics. Every stage checks that its inputs were produced
under the active configuration hash. A failing cell is logged to the failure ledger and
the remaining cells still run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, NamedTuple

import numpy as np
import pandas as pd

from qpk.classifiers.svm import SvmModel, accuracy, svm_predict, svm_train
from qpk.core import TrainingDivergedError
from qpk.datasets.xor import LabeledDataset, generate, oracle_predict, split
from qpk.harness.config import ExperimentConfig, KernelSpec, SvmSpec
from qpk.harness.io import RunLayout, cell_key, check_provenance, read_csv, write_csv
from qpk.kernels.base import GramMatrix
from qpk.kernels.path import effective_qpk_gram, qpk_gram
from qpk.kernels.psd import is_mercer, psd_report
from qpk.kernels.tangent import qntk_gram
from qpk.models.qnn import QnnConfig, QuantumNeuralNetwork
from qpk.training.trainer import TrainConfig, param_deviation, train
from qpk.training.trajectory import ParameterTrajectory
from qpk.utils.funcs import derive_seed, get_logger
from qpk.utils.ray import parallel_map

logger = get_logger(__name__)

METRICS_COLUMNS = ["eps", "L", "seed", "kernel", "train_acc", "test_acc", "final_loss", "param_deviation"]
FAILURE_COLUMNS = ["eps", "L", "seed", "stage", "error"]
KERNELS = ["qntk", "qntk_init", "qpk", "effective_qpk"]
STAGES = ("train", "kernels", "svm")


class CellResult(NamedTuple):
    """Outcome of one (eps, L, seed) cell."""

    eps: float
    L: int
    seed: int
    rows: list[dict[str, Any]]
    stage: str | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        """Whether every stage succeeded."""
        return self.error is None


@dataclass
class RunArtifacts:
    """Index of everything a run produced."""

    root: Path
    config: ExperimentConfig
    metrics: pd.DataFrame
    failures: pd.DataFrame
    dataset_files: list[Path] = field(default_factory=list)
    trajectory_files: list[Path] = field(default_factory=list)
    gram_files: list[Path] = field(default_factory=list)
    svm_files: list[Path] = field(default_factory=list)
    figures: list[Path] = field(default_factory=list)

    @property
    def layout(self) -> RunLayout:
        """Paths below the run directory."""
        return RunLayout(self.root)

    @property
    def ok(self) -> bool:
        """Whether no cell failed."""
        return self.failures.empty

    @classmethod
    def load(cls, root: str | Path) -> RunArtifacts:
        """Reconstructs the index of an existing run directory."""
        layout = RunLayout(Path(root))
        config = ExperimentConfig.from_json(layout.config_path)
        metrics = read_csv(layout.metrics_path) if layout.metrics_path.exists() else _empty(METRICS_COLUMNS)
        failures = read_csv(layout.failures_path) if layout.failures_path.exists() else _empty(FAILURE_COLUMNS)
        return cls(
            root=layout.root,
            config=config,
            metrics=metrics,
            failures=failures,
            dataset_files=sorted(layout.subdir("data").glob("*.csv")),
            trajectory_files=sorted(layout.subdir("traj").glob("*.csv")),
            gram_files=sorted(layout.subdir("gram").glob("*.csv")),
            svm_files=sorted(layout.subdir("svm").glob("*.json")),
            figures=sorted(layout.subdir("report").glob("*.svg")),
        )


def _empty(columns: list[str]) -> pd.DataFrame:
    return pd.DataFrame(columns=columns)


def prepare_run(cfg: ExperimentConfig) -> RunLayout:
    """Creates the run directory and stores the configuration in it."""
    layout = RunLayout(cfg.run_dir)
    layout.create()
    cfg.to_json(layout.config_path)
    return layout


def stage_data(cfg: ExperimentConfig, eps: float, seed: int) -> tuple[LabeledDataset, LabeledDataset]:
    """Generates, splits and stores the dataset shared by all layer counts of (eps, seed)."""
    layout = RunLayout(cfg.run_dir)
    spec = cfg.dataset

    ds = generate(spec.d, spec.d_prime, eps, spec.n, derive_seed(seed, "data", eps), spec.noise_mode)
    ds.meta["config_hash"] = cfg.hash
    train_ds, test_ds = split(ds, spec.train_fraction, derive_seed(seed, "split", eps))

    for part, data in (("full", ds), ("train", train_ds), ("test", test_ds)):
        data.to_csv(layout.dataset_path(eps, seed, part))

    return train_ds, test_ds


def load_split(cfg: ExperimentConfig, eps: float, seed: int) -> tuple[LabeledDataset, LabeledDataset]:
    """Reads the stored train/test split of (eps, seed) and checks its provenance."""
    layout = RunLayout(cfg.run_dir)
    parts = []
    for part in ("train", "test"):
        data = LabeledDataset.from_csv(layout.dataset_path(eps, seed, part))
        check_provenance(data.meta.get("config_hash"), cfg.hash, f"Dataset {data_name(eps, seed, part)}")
        parts.append(data)
    return parts[0], parts[1]


def data_name(eps: float, seed: int, part: str) -> str:
    """Readable dataset label for messages."""
    return f"(eps={eps:g}, seed={seed}, {part})"


def stage_train(cfg: ExperimentConfig, eps: float, L: int, seed: int) -> ParameterTrajectory:
    """Trains the L-layer QNN on the stored training set and writes its trajectory.

    A diverged run still writes its partial trajectory before the error propagates.
    """
    layout = RunLayout(cfg.run_dir)
    train_ds, _ = load_split(cfg, eps, seed)

    model = QuantumNeuralNetwork(QnnConfig(cfg.dataset.d, L, cfg.model.ring_mode))
    train_cfg = TrainConfig(
        optimizer=cfg.model.optimizer,
        lr=cfg.model.lr,
        epochs=cfg.model.epochs,
        loss=cfg.model.loss,
        seed=derive_seed(seed, "init", L),
    )

    try:
        traj = train(train_ds, model, train_cfg)
    except TrainingDivergedError as err:
        if err.trajectory is not None:
            err.trajectory.config_hash = cfg.hash
            err.trajectory.to_csv(layout.trajectory_path(eps, L, seed))
        raise

    traj.config_hash = cfg.hash
    traj.to_csv(layout.trajectory_path(eps, L, seed))
    return traj


def stage_kernels(cfg: ExperimentConfig, eps: float, L: int, seed: int) -> dict[str, tuple[GramMatrix, GramMatrix]]:
    """Builds the train and test Grams of every kernel from the stored trajectory.

    Returns:
        A dict from kernel name to (train Gram, test x train Gram).
    """
    layout = RunLayout(cfg.run_dir)
    train_ds, test_ds = load_split(cfg, eps, seed)
    traj = ParameterTrajectory.from_csv(layout.trajectory_path(eps, L, seed))
    check_provenance(traj.config_hash, cfg.hash, f"Trajectory {cell_key(eps, L, seed)}")
    check_provenance(traj.dataset_hash, train_ds.hash, f"Training set of trajectory {cell_key(eps, L, seed)}")

    model = QuantumNeuralNetwork(QnnConfig(cfg.dataset.d, L, cfg.model.ring_mode))
    grams = build_grams(train_ds, test_ds, traj, model, cfg.kernel, {"config_hash": cfg.hash})

    for name, (train_gram, test_gram) in grams.items():
        if not train_gram.provenance["mercer"]:
            logger.warning(f"{name} Gram of {cell_key(eps, L, seed)} fails the Mercer check")
        train_gram.to_csv(layout.gram_path(eps, L, seed, name, "train"))
        test_gram.to_csv(layout.gram_path(eps, L, seed, name, "test"))

    return grams


def build_grams(
    train_ds: LabeledDataset,
    test_ds: LabeledDataset,
    traj: ParameterTrajectory,
    model: QuantumNeuralNetwork,
    spec: KernelSpec,
    provenance: dict[str, Any] | None = None,
) -> dict[str, tuple[GramMatrix, GramMatrix]]:
    """Training and test-by-train Grams of the QNTK at the final and initial parameters,
    the path kernel and (optionally) the effective path kernel.

    The training Gram's provenance carries its PSD report and Mercer flag.
    """
    base = {**(provenance or {}), "dataset_hash": train_ds.hash, "trajectory_hash": traj.hash}

    builders = {
        "qntk": lambda rows, cols: qntk_gram(rows, cols, traj.final, model, {**base, "epoch": traj.n_epochs}),
        "qntk_init": lambda rows, cols: qntk_gram(rows, cols, traj.initial, model, {**base, "epoch": 0}),
        "qpk": lambda rows, cols: qpk_gram(rows, cols, traj, model, inclusive=spec.inclusive),
        "effective_qpk": lambda rows, cols: effective_qpk_gram(
            rows, cols, traj, model, rel_tol=spec.rel_tol, criterion=spec.criterion, inclusive=spec.inclusive
        ),
    }
    if not spec.include_effective:
        builders.pop("effective_qpk")

    grams = {}
    for name, build in builders.items():
        train_gram = build(train_ds, train_ds)
        test_gram = build(test_ds, train_ds)

        train_gram.provenance = {**base, **train_gram.provenance, "psd": psd_report(train_gram)._asdict()}
        train_gram.provenance["mercer"] = is_mercer(train_gram)
        test_gram.provenance = {**base, **test_gram.provenance}
        grams[name] = (train_gram, test_gram)

    return grams


def score_kernels(
    grams: dict[str, tuple[GramMatrix, GramMatrix]],
    train_ds: LabeledDataset,
    test_ds: LabeledDataset,
    spec: SvmSpec,
) -> dict[str, tuple[SvmModel, float, float]]:
    """Fits one SVM per kernel and returns (model, train accuracy, test accuracy)."""
    scores = {}
    for name, (train_gram, test_gram) in grams.items():
        model = svm_train(train_gram, train_ds.labels, C=spec.C, tol=spec.tol, max_passes=spec.max_passes)
        scores[name] = (
            model,
            accuracy(svm_predict(model, train_gram), train_ds.labels),
            accuracy(svm_predict(model, test_gram), test_ds.labels),
        )
    return scores


def oracle_row(train_ds: LabeledDataset, test_ds: LabeledDataset, d_prime: int) -> dict[str, float]:
    """Train and test accuracy of the parity oracle, without loss or deviation."""
    return {
        "kernel": "oracle",
        "train_acc": accuracy(oracle_predict(train_ds.points, d_prime), train_ds.labels),
        "test_acc": accuracy(oracle_predict(test_ds.points, d_prime), test_ds.labels),
        "final_loss": np.nan,
        "param_deviation": np.nan,
    }


def stage_svm(cfg: ExperimentConfig, eps: float, L: int, seed: int) -> list[dict[str, Any]]:
    """Fits one SVM per stored kernel, scores it and writes the cell's metrics rows.

    The oracle contributes a row of its own, without loss or deviation.
    """
    layout = RunLayout(cfg.run_dir)
    train_ds, test_ds = load_split(cfg, eps, seed)
    traj = ParameterTrajectory.from_csv(layout.trajectory_path(eps, L, seed))
    check_provenance(traj.config_hash, cfg.hash, f"Trajectory {cell_key(eps, L, seed)}")

    final_loss = traj.final_loss
    deviation = param_deviation(traj, traj.n_epochs)
    kernels = KERNELS if cfg.kernel.include_effective else KERNELS[:-1]

    grams = {}
    for name in kernels:
        train_gram = GramMatrix.from_csv(layout.gram_path(eps, L, seed, name, "train"))
        test_gram = GramMatrix.from_csv(layout.gram_path(eps, L, seed, name, "test"))
        for gram in (train_gram, test_gram):
            check_provenance(gram.provenance.get("config_hash"), cfg.hash, f"{name} Gram of {cell_key(eps, L, seed)}")
            check_provenance(gram.provenance.get("trajectory_hash"), traj.hash, f"{name} Gram trajectory")
        grams[name] = (train_gram, test_gram)

    cell = {"eps": eps, "L": L, "seed": seed}
    rows = []
    for name, (model, train_acc, test_acc) in score_kernels(grams, train_ds, test_ds, cfg.svm).items():
        model.to_json(layout.svm_path(eps, L, seed, name))
        rows.append(
            {
                **cell,
                "kernel": name,
                "train_acc": train_acc,
                "test_acc": test_acc,
                "final_loss": final_loss,
                "param_deviation": deviation,
            }
        )
    rows.append({**cell, **oracle_row(train_ds, test_ds, cfg.dataset.d_prime)})

    write_csv(pd.DataFrame(rows, columns=METRICS_COLUMNS), layout.cell_metrics_path(eps, L, seed))
    return rows


def _stage_function(name: str):
    return {"train": stage_train, "kernels": stage_kernels, "svm": stage_svm}[name]


def run_cell(
    cfg: ExperimentConfig,
    eps: float,
    L: int,
    seed: int,
    stages: tuple[str, ...] = STAGES,
    fatal: tuple[type[Exception], ...] = (),
) -> CellResult:
    """Runs the given stages of one cell in order, capturing the first failure.

    Errors of the types in `fatal` propagate instead of being recorded. Only the svm stage
    contributes metrics rows.
    """
    rows: list[dict[str, Any]] = []
    stage = stages[0]
    try:
        for stage in stages:
            out = _stage_function(stage)(cfg, eps, L, seed)
            if stage == "svm":
                rows = out
    except fatal:
        raise
    except Exception as err:
        logger.error(f"Cell {cell_key(eps, L, seed)} failed during {stage}: {err}")
        return CellResult(eps, L, seed, [], stage, f"{type(err).__name__}: {err}")

    logger.info(f"Cell {cell_key(eps, L, seed)} done ({', '.join(stages)})")
    return CellResult(eps, L, seed, rows)


def run_cells(
    cfg: ExperimentConfig,
    stages: tuple[str, ...] = STAGES,
    fatal: tuple[type[Exception], ...] = (),
    quiet: bool = True,
) -> list[CellResult]:
    """Runs the given stages for every cell, in parallel when more than one job is configured."""
    tasks = [(cfg, *cell, stages, fatal) for cell in cells(cfg)]
    return parallel_map(run_cell, tasks, jobs=cfg.resolved_jobs(), desc="/".join(stages), quiet=quiet)


def cells(cfg: ExperimentConfig) -> list[tuple[float, int, int]]:
    """All (eps, L, seed) cells in their canonical order."""
    return [(float(eps), L, seed) for eps in cfg.dataset.eps for L in cfg.model.layers for seed in cfg.seeds]


def _canonical(cfg: ExperimentConfig, results: list[CellResult]) -> list[CellResult]:
    order = {cell: i for i, cell in enumerate(cells(cfg))}
    return sorted(results, key=lambda r: order[(r.eps, r.L, r.seed)])


def record_failures(cfg: ExperimentConfig, results: list[CellResult]) -> pd.DataFrame:
    """Writes report/failures.csv with one row per failed cell, in canonical cell order."""
    failures = pd.DataFrame(
        [
            {"eps": r.eps, "L": r.L, "seed": r.seed, "stage": r.stage, "error": r.error}
            for r in _canonical(cfg, results)
            if not r.ok
        ],
        columns=FAILURE_COLUMNS,
    )
    write_csv(failures, RunLayout(cfg.run_dir).failures_path)
    return failures


def assemble(cfg: ExperimentConfig, results: list[CellResult]) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Writes report/metrics.csv and report/failures.csv from cell results in canonical
    cell order.
    """
    results = _canonical(cfg, results)
    metrics = pd.DataFrame([row for r in results for row in r.rows], columns=METRICS_COLUMNS)
    write_csv(metrics, RunLayout(cfg.run_dir).metrics_path)
    return metrics, record_failures(cfg, results)


def run_experiment(cfg: ExperimentConfig, quiet: bool = True) -> RunArtifacts:
    """Runs the full pipeline for every (eps, L, seed) cell of the configuration.

    Datasets are generated once per (eps, seed) and shared by all layer counts. Cells
    run in parallel when more than one job is configured; the metrics table is
    assembled in canonical cell order afterwards, so its bytes do not depend on the
    degree of parallelism.
    """
    layout = prepare_run(cfg)
    logger.info(f"Running experiment {cfg.hash} into {layout.root}")

    for eps in cfg.dataset.eps:
        for seed in cfg.seeds:
            stage_data(cfg, float(eps), seed)

    results = run_cells(cfg, quiet=quiet)
    metrics, failures = assemble(cfg, results)

    if not failures.empty:
        logger.warning(f"{len(failures)} of {len(results)} cells failed; see {layout.failures_path}")

    artifacts = RunArtifacts.load(layout.root)
    artifacts.metrics, artifacts.failures = metrics, failures
    return artifacts
