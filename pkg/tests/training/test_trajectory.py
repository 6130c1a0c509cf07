"""Tests for parameter trajectories"""

import numpy as np
import pytest
from monty.json import MontyDecoder
from qpk.core import ShapeError
from qpk.training.trajectory import ParameterTrajectory


def test_properties(trajectory):
    assert trajectory.n_epochs == 20
    assert trajectory.n_params == 2
    assert len(trajectory) == 21
    np.testing.assert_array_equal(trajectory.initial, trajectory.thetas[0])
    np.testing.assert_array_equal(trajectory.final, trajectory.thetas[-1])
    assert trajectory.final_loss == trajectory.losses[-1]


def test_csv_layout_and_exact_reload(trajectory, tmp_path):
    path = tmp_path / "traj.csv"
    trajectory = ParameterTrajectory(
        trajectory.thetas,
        trajectory.losses,
        seed=trajectory.seed,
        config=trajectory.config,
        dataset_hash=trajectory.dataset_hash,
        config_hash="abc123",
    )
    trajectory.to_csv(path)

    header = path.read_text().splitlines()[0]
    assert header == "epoch,loss,theta_0,theta_1"
    assert path.with_suffix(".json").exists()

    reloaded = ParameterTrajectory.from_csv(path)
    np.testing.assert_array_equal(reloaded.thetas, trajectory.thetas)
    np.testing.assert_array_equal(reloaded.losses, trajectory.losses)
    assert reloaded.hash == trajectory.hash
    assert reloaded.seed == trajectory.seed
    assert reloaded.config_hash == "abc123"
    assert reloaded.dataset_hash == trajectory.dataset_hash


def test_msonable(trajectory):
    restored = MontyDecoder().process_decoded(trajectory.as_dict())
    assert isinstance(restored, ParameterTrajectory)
    assert restored.hash == trajectory.hash


def test_empty_trajectory():
    traj = ParameterTrajectory([], [])
    assert len(traj) == 0
    assert traj.n_epochs == 0


def test_shape_validation():
    with pytest.raises(ShapeError):
        ParameterTrajectory([[0.0], [1.0]], [0.0])
    with pytest.raises(ShapeError):
        ParameterTrajectory([0.0, 1.0], [0.0, 1.0])
