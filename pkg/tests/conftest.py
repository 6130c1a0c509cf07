import numpy as np
import pytest
from jobflow.core.store import JobStore
from maggma.stores import MemoryStore
from qpk.datasets.xor import generate, split
from qpk.harness.config import ExperimentConfig
from qpk.models.qnn import QnnConfig, QuantumNeuralNetwork, SingleQubitModel
from qpk.training.trainer import TrainConfig, train
from qpk.training.trajectory import ParameterTrajectory


@pytest.fixture(scope="session")
def xor_split():
    """8/8 split of D(2, 2, 0.1, 16) for the first seed whose training half holds both classes."""
    for seed in range(10):
        train_ds, test_ds = split(generate(2, 2, 0.1, 16, seed=seed), 0.5, seed=seed)
        if len(np.unique(train_ds.labels)) == 2:
            return train_ds, test_ds
    raise RuntimeError("No balanced split found")


@pytest.fixture(scope="session")
def train_ds(xor_split):
    return xor_split[0]


@pytest.fixture(scope="session")
def test_ds(xor_split):
    return xor_split[1]


@pytest.fixture(scope="session")
def qnn_config():
    return QnnConfig(d=2, L=1)


@pytest.fixture(scope="session")
def qnn(qnn_config):
    return QuantumNeuralNetwork(qnn_config)


@pytest.fixture(scope="session")
def single_qubit_model():
    return SingleQubitModel()


@pytest.fixture(scope="session")
def trajectory(train_ds, qnn):
    """A short ADAM run of the two-qubit, one-layer QNN."""
    return train(train_ds, qnn, TrainConfig(optimizer="ADAM", lr=0.1, epochs=20, loss="MSE", seed=3))


@pytest.fixture()
def frozen_trajectory():
    """Five epochs that never leave theta(0)."""
    theta = np.array([0.3, -0.7])
    return ParameterTrajectory(np.tile(theta, (6, 1)), np.zeros(6), seed=0)


@pytest.fixture()
def smoke_config(tmp_path):
    """A configuration small enough to run the full pipeline in seconds."""
    return ExperimentConfig.model_validate(
        {
            "dataset": {"d": 2, "d_prime": 2, "eps": [0.1], "n": 24, "train_fraction": 0.5},
            "model": {"layers": [1], "epochs": 5, "lr": 0.1},
            "baseline": {
                "dims": [3],
                "d_prime": 2,
                "eps": [0.0],
                "repeats": 1,
                "pool_size": 2,
                "epochs": 5,
                "w1_d": 4,
                "w1_eps": 0.8,
                "w1_n": 16,
                "w1_snapshots": [0, 2],
            },
            "seeds": [0],
            "out": str(tmp_path / "out"),
            "jobs": 1,
        }
    )


@pytest.fixture(scope="session")
def job_store():
    additional_stores = {
        "datasets": MemoryStore(),
        "trajectories": MemoryStore(),
        "grams": MemoryStore(),
    }
    return JobStore(MemoryStore(), additional_stores=additional_stores)
