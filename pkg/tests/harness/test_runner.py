"""Tests for the staged experiment runner"""

import json

import numpy as np
import pytest
from monty.serialization import loadfn
from qpk.core import ProvenanceError
from qpk.harness import runner
from qpk.harness.config import ExperimentConfig, KernelSpec
from qpk.harness.io import RunLayout
from qpk.harness.runner import (
    KERNELS,
    METRICS_COLUMNS,
    RunArtifacts,
    cells,
    prepare_run,
    run_cell,
    run_experiment,
    stage_data,
    stage_kernels,
)


@pytest.fixture()
def two_layer_config(smoke_config):
    return smoke_config.model_copy(update={"model": smoke_config.model.model_copy(update={"layers": [1, 2]})})


def test_smoke_run(smoke_config):
    artifacts = run_experiment(smoke_config)

    assert artifacts.ok
    assert list(artifacts.metrics.columns) == METRICS_COLUMNS
    assert len(artifacts.metrics) == 5
    assert sorted(artifacts.metrics["kernel"]) == sorted([*KERNELS, "oracle"])
    assert artifacts.root == smoke_config.run_dir
    assert (artifacts.root / "config.json").exists()
    assert len(artifacts.dataset_files) == 3
    assert len(artifacts.trajectory_files) == 1
    assert len(artifacts.gram_files) == 2 * len(KERNELS)
    assert len(artifacts.svm_files) == len(KERNELS)

    metrics = artifacts.metrics.set_index("kernel")
    assert metrics["train_acc"].between(0, 1).all()
    assert np.isnan(metrics.loc["oracle", "final_loss"])
    assert metrics.loc["qpk", "final_loss"] == metrics.loc["qntk", "final_loss"]
    assert metrics.loc["qpk", "param_deviation"] > 0


def test_training_grams_pass_mercer_check(smoke_config):
    artifacts = run_experiment(smoke_config)
    for path in artifacts.layout.subdir("gram").glob("*_train.json"):
        provenance = loadfn(path)["provenance"]
        assert provenance["mercer"]
        assert provenance["psd"]["symmetric_defect"] < 1e-10
        assert provenance["config_hash"] == smoke_config.hash


def test_rerun_is_byte_identical(smoke_config, tmp_path):
    first = run_experiment(smoke_config.model_copy(update={"out": str(tmp_path / "a")}))
    second = run_experiment(smoke_config.model_copy(update={"out": str(tmp_path / "b")}))
    assert first.layout.metrics_path.read_bytes() == second.layout.metrics_path.read_bytes()
    assert first.root.name == second.root.name


def test_provenance_mismatch_is_detected(smoke_config):
    artifacts = run_experiment(smoke_config)
    eps, L, seed = cells(smoke_config)[0]

    sidecar = RunLayout(artifacts.root).trajectory_path(eps, L, seed).with_suffix(".json")
    meta = json.loads(sidecar.read_text())
    meta["config_hash"] = "000000000000"
    sidecar.write_text(json.dumps(meta))

    with pytest.raises(ProvenanceError):
        stage_kernels(smoke_config, eps, L, seed)


def test_failing_cell_is_isolated(two_layer_config, monkeypatch):
    original = runner.stage_kernels

    def flaky(cfg, eps, L, seed):
        if L == 2:
            raise RuntimeError("kernel stage exploded")
        return original(cfg, eps, L, seed)

    monkeypatch.setattr(runner, "stage_kernels", flaky)
    artifacts = run_experiment(two_layer_config)

    assert not artifacts.ok
    assert len(artifacts.failures) == 1
    failure = artifacts.failures.iloc[0]
    assert failure["L"] == 2
    assert failure["stage"] == "kernels"
    assert "exploded" in failure["error"]
    assert set(artifacts.metrics["L"]) == {1}
    assert len(artifacts.metrics) == 5


def test_run_cell_stage_subset(smoke_config):
    prepare_run(smoke_config)
    eps, L, seed = cells(smoke_config)[0]
    stage_data(smoke_config, eps, seed)

    trained = run_cell(smoke_config, eps, L, seed, stages=("train",))
    assert trained.ok
    assert trained.rows == []
    assert RunLayout(smoke_config.run_dir).trajectory_path(eps, L, seed).exists()

    scored = run_cell(smoke_config, eps, L, seed, stages=("kernels", "svm"))
    assert scored.ok
    assert len(scored.rows) == 5


def test_run_cell_fatal_errors_propagate(smoke_config, monkeypatch):
    eps, L, seed = cells(smoke_config)[0]

    def foreign(cfg, eps, L, seed):
        raise ProvenanceError("Trajectory was produced under config 000000000000")

    monkeypatch.setattr(runner, "stage_kernels", foreign)
    recorded = run_cell(smoke_config, eps, L, seed, stages=("kernels",))
    assert recorded.stage == "kernels"
    assert recorded.error.startswith("ProvenanceError")

    with pytest.raises(ProvenanceError):
        run_cell(smoke_config, eps, L, seed, stages=("kernels",), fatal=(ProvenanceError,))

def test_without_effective_kernel(smoke_config):
    cfg = smoke_config.model_copy(update={"kernel": KernelSpec(include_effective=False)})
    artifacts = run_experiment(cfg)
    assert len(artifacts.metrics) == 4
    assert "effective_qpk" not in set(artifacts.metrics["kernel"])


def test_load_existing_run(smoke_config):
    artifacts = run_experiment(smoke_config)
    loaded = RunArtifacts.load(artifacts.root)
    assert loaded.config == smoke_config
    assert len(loaded.metrics) == len(artifacts.metrics)
    assert loaded.failures.empty


@pytest.mark.slow
def test_parallel_run_matches_serial(smoke_config, tmp_path):
    serial = run_experiment(smoke_config.model_copy(update={"out": str(tmp_path / "serial")}))
    parallel = run_experiment(smoke_config.model_copy(update={"out": str(tmp_path / "parallel"), "jobs": 2}))
    assert serial.layout.metrics_path.read_bytes() == parallel.layout.metrics_path.read_bytes()


@pytest.mark.slow
def test_path_kernel_acceptance_sweep(tmp_path):
    cfg = ExperimentConfig.model_validate(
        {
            "dataset": {"d": 4, "d_prime": 2, "eps": [0.1, 1.0], "n": 32, "train_fraction": 0.5},
            "model": {"layers": [1, 2, 4, 8], "epochs": 1000},
            "seeds": [0, 1, 2],
            "out": str(tmp_path / "out"),
            "jobs": 4,
        }
    )
    artifacts = run_experiment(cfg)
    assert artifacts.ok

    quantum = artifacts.metrics[artifacts.metrics["kernel"] != "oracle"]
    assert (quantum["final_loss"] > 1e-3).all()
    assert (quantum["param_deviation"] > 0.05).all()

    means = artifacts.metrics.groupby(["eps", "L", "kernel"])[["train_acc", "test_acc"]].mean()
    violations = 0
    for L in cfg.model.layers:
        if means.loc[(1.0, L, "qpk"), "train_acc"] < means.loc[(1.0, L, "qntk"), "train_acc"]:
            violations += 1
        if L >= 8 and means.loc[(1.0, L, "qpk"), "test_acc"] < means.loc[(1.0, L, "qntk"), "test_acc"]:
            violations += 1
    assert violations <= 1
