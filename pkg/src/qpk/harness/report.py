"""Summary tables and vector figures for a completed run."""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING, NamedTuple

import matplotlib as mpl

mpl.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
from monty.serialization import loadfn  # noqa: E402

from qpk.core import EmptyReportError  # noqa: E402
from qpk.harness.io import write_csv  # noqa: E402
from qpk.harness.runner import cells  # noqa: E402
from qpk.training.trainer import deviation_curve  # noqa: E402
from qpk.training.trajectory import ParameterTrajectory  # noqa: E402
from qpk.utils.funcs import get_logger  # noqa: E402

if TYPE_CHECKING:
    from qpk.harness.runner import RunArtifacts

logger = get_logger(__name__)

plt.rcParams["svg.hashsalt"] = "qpk"
SVG_METADATA = {"Date": None, "Creator": None}

KERNEL_LABELS = {
    "qpk": "QPK",
    "effective_qpk": "Effective QPK",
    "qntk": "QNTK (trained)",
    "qntk_init": "QNTK (init)",
    "oracle": "Oracle",
}


class Report(NamedTuple):
    """Files written by report()."""

    summary: pd.DataFrame
    figures: list[Path]
    notes: list[str]


def _std(values: pd.Series) -> float:
    """Sample standard deviation; zero for a single observation."""
    return float(values.std(ddof=1)) if len(values) > 1 else 0.0


def summarize_metrics(metrics: pd.DataFrame) -> pd.DataFrame:
    """Mean and standard deviation over seeds of every metric per (eps, L, kernel)."""
    grouped = metrics.groupby(["eps", "L", "kernel"], sort=True)
    summary = grouped.agg(
        n_seeds=("seed", "count"),
        train_acc_mean=("train_acc", "mean"),
        train_acc_std=("train_acc", _std),
        test_acc_mean=("test_acc", "mean"),
        test_acc_std=("test_acc", _std),
        final_loss_mean=("final_loss", "mean"),
        param_deviation_mean=("param_deviation", "mean"),
    )
    return summary.reset_index()


def curve_table(artifacts: RunArtifacts, quantity: str) -> pd.DataFrame:
    """Per-epoch mean and standard deviation over seeds of the loss or the parameter
    deviation, for every (eps, L) with at least one stored trajectory.
    """
    cfg = artifacts.config
    layout = artifacts.layout
    frames = []
    for eps in cfg.dataset.eps:
        for L in cfg.model.layers:
            curves = []
            for seed in cfg.seeds:
                path = layout.trajectory_path(float(eps), L, seed)
                if not path.exists():
                    continue
                traj = ParameterTrajectory.from_csv(path)
                if len(traj) == 0:
                    continue
                curves.append(traj.losses if quantity == "loss" else deviation_curve(traj))
            if not curves:
                continue
            length = min(len(c) for c in curves)
            stacked = np.array([c[:length] for c in curves])
            std = stacked.std(axis=0, ddof=1) if len(curves) > 1 else np.zeros(length)
            frames.append(
                pd.DataFrame(
                    {"eps": float(eps), "L": L, "epoch": np.arange(length), "mean": stacked.mean(axis=0), "std": std}
                )
            )
    columns = ["eps", "L", "epoch", "mean", "std"]
    return pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=columns)


def plot_accuracy(summary: pd.DataFrame, eps: float, layers: list[int], split: str, path: Path) -> Path:
    """Accuracy versus L with error bars, one line per kernel. Missing L values are gaps."""
    fig, ax = plt.subplots(figsize=(6, 4))
    subset = summary[summary["eps"] == eps]
    for kernel, label in KERNEL_LABELS.items():
        rows = subset[subset["kernel"] == kernel].set_index("L").reindex(layers)
        if rows[f"{split}_acc_mean"].isna().all():
            continue
        ax.errorbar(
            layers,
            rows[f"{split}_acc_mean"],
            yerr=rows[f"{split}_acc_std"],
            label=label,
            marker="o",
            capsize=3,
        )
    ax.set_xlabel("Layers, $L$")
    ax.set_ylabel(f"{split.capitalize()} accuracy")
    ax.set_title(rf"$\bar\epsilon = {eps:g}$")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=SVG_METADATA)
    plt.close(fig)
    return path


def plot_curves(curves: pd.DataFrame, eps: float, ylabel: str, path: Path) -> Path:
    """Mean curve per L over epochs with a one-standard-deviation band."""
    fig, ax = plt.subplots(figsize=(6, 4))
    subset = curves[curves["eps"] == eps]
    for L, rows in subset.groupby("L", sort=True):
        ax.plot(rows["epoch"], rows["mean"], label=f"L = {L}")
        ax.fill_between(rows["epoch"], rows["mean"] - rows["std"], rows["mean"] + rows["std"], alpha=0.2)
    ax.set_xlabel("Epoch")
    ax.set_ylabel(ylabel)
    ax.set_title(rf"$\bar\epsilon = {eps:g}$")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=SVG_METADATA)
    plt.close(fig)
    return path


def mercer_failures(artifacts: RunArtifacts) -> list[str]:
    """Names of stored training Grams whose sidecar records a failed Mercer check."""
    failed = []
    for path in artifacts.layout.subdir("gram").glob("*_train.json"):
        if not loadfn(path).get("provenance", {}).get("mercer", True):
            failed.append(path.stem)
    return sorted(failed)


def report(artifacts: RunArtifacts) -> Report:
    """Writes summary.csv, loss/deviation curve tables, accuracy/loss/deviation figures
    and summary.txt to the run's report directory.

    Raises:
        EmptyReportError: if the run has no metrics.
    """
    if artifacts.metrics is None or artifacts.metrics.empty:
        raise EmptyReportError(f"No metrics found in {artifacts.root}")

    cfg = artifacts.config
    out = artifacts.layout.subdir("report")
    out.mkdir(parents=True, exist_ok=True)

    summary = summarize_metrics(artifacts.metrics)
    write_csv(summary, out / "summary.csv")

    loss_curves = curve_table(artifacts, "loss")
    deviation_curves = curve_table(artifacts, "deviation")
    write_csv(loss_curves, out / "loss_curves.csv")
    write_csv(deviation_curves, out / "deviation_curves.csv")

    figures = []
    for eps in sorted({float(e) for e in cfg.dataset.eps}):
        tag = f"eps{eps:g}"
        for split in ("train", "test"):
            figures.append(plot_accuracy(summary, eps, cfg.model.layers, split, out / f"accuracy_{split}_{tag}.svg"))
        figures.append(plot_curves(loss_curves, eps, "Training loss", out / f"loss_{tag}.svg"))
        figures.append(plot_curves(deviation_curves, eps, "Parameter deviation", out / f"deviation_{tag}.svg"))

    present = set(zip(artifacts.metrics["eps"].astype(float), artifacts.metrics["L"], artifacts.metrics["seed"]))
    missing = [cell for cell in cells(cfg) if cell not in present]

    notes = [f"Config hash: {cfg.hash}", f"Cells with metrics: {len(present)} of {len(cells(cfg))}"]
    notes.extend(f"Missing cell: eps={e:g}, L={L}, seed={s}" for e, L, s in missing)
    notes.extend(f"Gram failing the Mercer check: {name}" for name in mercer_failures(artifacts))
    (out / "summary.txt").write_text("\n".join(notes) + "\n")

    if missing:
        logger.warning(f"{len(missing)} cells are missing from the report")

    artifacts.figures = figures
    return Report(summary, figures, notes)
