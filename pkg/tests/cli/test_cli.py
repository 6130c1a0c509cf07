"""Tests for the command-line interface"""

import json

import pytest
from qpk.cli import main
from qpk.core import TrainingDivergedError
from qpk.harness import runner
from qpk.harness.io import RunLayout, read_csv


@pytest.fixture()
def config_file(smoke_config, tmp_path):
    path = tmp_path / "config.json"
    smoke_config.to_json(path)
    return str(path)


def test_run(smoke_config, config_file, capsys):
    assert main(["run", "--config", config_file, "--jobs", "1"]) == 0
    assert (smoke_config.run_dir / "report" / "metrics.csv").exists()
    assert smoke_config.hash in capsys.readouterr().out


def test_missing_config(tmp_path, capsys):
    missing = tmp_path / "absent.json"
    assert main(["run", "--config", str(missing)]) == 1
    assert str(missing) in capsys.readouterr().err


def test_invalid_config(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"model": {"layers": []}}))
    assert main(["train", "--config", str(path)]) == 1


def test_invalid_override(config_file):
    assert main(["run", "--config", config_file, "--jobs", "0"]) == 1


def test_usage_errors():
    with pytest.raises(SystemExit) as exc_info:
        main(["run", "--bogus"])
    assert exc_info.value.code == 1

    with pytest.raises(SystemExit) as exc_info:
        main([])
    assert exc_info.value.code == 1


def test_help():
    with pytest.raises(SystemExit) as exc_info:
        main(["--help"])
    assert exc_info.value.code == 0


def test_schema(capsys):
    assert main(["schema"]) == 0
    schema = json.loads(capsys.readouterr().out)
    assert "dataset" in schema["properties"]


def test_staged_commands(smoke_config, config_file):
    for command in ("gen-data", "train", "kernels", "svm", "report"):
        assert main([command, "--config", config_file, "--jobs", "1"]) == 0

    report_dir = smoke_config.run_dir / "report"
    assert (report_dir / "metrics.csv").exists()
    assert (report_dir / "summary.csv").exists()
    assert (report_dir / "accuracy_test_eps0.1.svg").exists()


def test_staged_matches_full_run(smoke_config, config_file, tmp_path):
    for command in ("gen-data", "train", "kernels", "svm"):
        assert main([command, "--config", config_file, "--jobs", "1"]) == 0
    staged = (smoke_config.run_dir / "report" / "metrics.csv").read_bytes()

    other = str(tmp_path / "full")
    assert main(["run", "--config", config_file, "--jobs", "1", "--out", other]) == 0
    full = (tmp_path / "full" / smoke_config.hash / "report" / "metrics.csv").read_bytes()
    assert staged == full


def test_kernels_rejects_foreign_trajectory(smoke_config, config_file, capsys):
    for command in ("gen-data", "train"):
        assert main([command, "--config", config_file, "--jobs", "1"]) == 0

    sidecar = next((smoke_config.run_dir / "traj").glob("*.json"))
    meta = json.loads(sidecar.read_text())
    meta["config_hash"] = "ffffffffffff"
    sidecar.write_text(json.dumps(meta))

    assert main(["kernels", "--config", config_file, "--jobs", "1"]) == 1
    assert "ffffffffffff" in capsys.readouterr().err


def test_run_with_failed_cell(config_file, monkeypatch):
    def broken(cfg, eps, L, seed):
        raise RuntimeError("no kernels today")

    monkeypatch.setattr(runner, "stage_kernels", broken)
    assert main(["run", "--config", config_file, "--jobs", "1"]) == 2


def test_report_without_run(config_file):
    assert main(["report", "--config", config_file]) == 1


@pytest.mark.parametrize("command", ["train", "kernels", "svm"])
def test_staged_command_without_data(config_file, capsys, command):
    assert main([command, "--config", config_file, "--jobs", "1"]) == 1
    assert "gen-data" in capsys.readouterr().err


def test_baseline(smoke_config, config_file):
    assert main(["baseline", "--config", config_file, "--jobs", "1"]) == 0

    out = smoke_config.run_dir / "report"
    for name in ("baseline_comparison.csv", "baseline_summary.csv", "w1_shrinkage.csv"):
        assert (out / name).exists()
    assert sorted(p.name for p in out.glob("w1_epoch*.csv")) == ["w1_epoch0.csv", "w1_epoch2.csv", "w1_epoch5.csv"]


def test_staged_commands_isolate_failed_cell(smoke_config, tmp_path, monkeypatch):
    cfg = smoke_config.model_copy(update={"model": smoke_config.model.model_copy(update={"layers": [1, 2]})})
    path = str(tmp_path / "two_layers.json")
    cfg.to_json(path)
    original = runner.stage_train

    def diverging(cfg, eps, L, seed):
        if L == 1:
            raise TrainingDivergedError("Non-finite loss at epoch 3")
        return original(cfg, eps, L, seed)

    monkeypatch.setattr(runner, "stage_train", diverging)
    assert main(["gen-data", "--config", path, "--jobs", "1"]) == 0
    assert main(["train", "--config", path, "--jobs", "1"]) == 2

    layout = RunLayout(cfg.run_dir)
    assert not layout.trajectory_path(0.1, 1, 0).exists()
    assert layout.trajectory_path(0.1, 2, 0).exists()
    failures = read_csv(layout.failures_path)
    assert list(failures["L"]) == [1]
    assert list(failures["stage"]) == ["train"]
    assert "Non-finite loss" in failures["error"].iloc[0]

    assert main(["kernels", "--config", path, "--jobs", "1"]) == 2
    assert main(["svm", "--config", path, "--jobs", "1"]) == 2

    metrics = read_csv(layout.metrics_path)
    assert set(metrics["L"]) == {2}
    assert len(metrics) == 5
    failures = read_csv(layout.failures_path)
    assert list(failures["L"]) == [1]
    assert list(failures["stage"]) == ["svm"]
