"""Tests for run directory layout and provenance checks"""

import pandas as pd
import pytest
from qpk.core import ProvenanceError
from qpk.harness.io import RunLayout, cell_key, check_provenance, data_key, read_csv, write_csv


def test_keys():
    assert data_key(0.1, 2) == "eps0.1_seed2"
    assert cell_key(1.0, 8, 0) == "eps1_L8_seed0"


def test_layout(tmp_path):
    layout = RunLayout(tmp_path / "run")
    layout.create()

    for name in ("data", "traj", "gram", "svm", "report"):
        assert layout.subdir(name).is_dir()
    assert layout.config_path == tmp_path / "run" / "config.json"
    assert layout.dataset_path(0.1, 0, "train").name == "eps0.1_seed0_train.csv"
    assert layout.trajectory_path(0.1, 2, 0).name == "eps0.1_L2_seed0.csv"
    assert layout.gram_path(0.1, 2, 0, "qpk", "test").name == "eps0.1_L2_seed0_qpk_test.csv"
    assert layout.svm_path(0.1, 2, 0, "qpk").name == "eps0.1_L2_seed0_qpk.json"
    assert layout.metrics_path.parent.name == "report"


def test_csv_precision(tmp_path):
    df = pd.DataFrame({"a": [0.1 + 0.2, 1 / 3], "b": [1, 2]})
    write_csv(df, tmp_path / "t.csv")
    pd.testing.assert_frame_equal(read_csv(tmp_path / "t.csv"), df)


def test_check_provenance():
    check_provenance("abc", "abc", "Trajectory")
    with pytest.raises(ProvenanceError, match="Trajectory"):
        check_provenance("abc", "def", "Trajectory")
    with pytest.raises(ProvenanceError):
        check_provenance(None, "def", "Gram")
