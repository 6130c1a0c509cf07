"""Tests for tangent kernels"""

import numpy as np
import pytest
from qpk.core import InputError, ShapeError
from qpk.kernels.base import GramMatrix, KernelKind
from qpk.kernels.psd import is_mercer
from qpk.kernels.tangent import qntk, qntk_gram


def test_single_qubit_example(single_qubit_model):
    theta = np.zeros(1)
    assert qntk([np.pi / 8], [np.pi / 8], theta, single_qubit_model) == pytest.approx(2.0, abs=1e-12)

    gram = qntk_gram(np.array([[0.0], [np.pi / 8]]), np.array([[0.0], [np.pi / 8]]), theta, single_qubit_model)
    np.testing.assert_allclose(gram.values, [[0.0, 0.0], [0.0, 2.0]], atol=1e-12)


def test_symmetric_in_points(qnn_config):
    rng = np.random.default_rng(1)
    theta = rng.normal(size=2)
    for _ in range(20):
        x, y = rng.uniform(-1, 1, size=(2, 2))
        assert qntk(x, y, theta, qnn_config) == qntk(y, x, theta, qnn_config)


def test_gram_matches_pairwise(train_ds, test_ds, qnn_config):
    theta = np.array([0.4, -1.1])
    gram = qntk_gram(train_ds, test_ds, theta, qnn_config)

    naive = np.array([[qntk(x, y, theta, qnn_config) for y in test_ds.points] for x in train_ds.points])
    np.testing.assert_allclose(gram.values, naive, rtol=1e-14, atol=1e-14)
    assert gram.shape == (train_ds.n, test_ds.n)
    assert gram.row_ids == list(train_ds.ids)
    assert gram.col_ids == list(test_ds.ids)
    assert gram.kind == KernelKind.QNTK


def test_square_gram_is_symmetric_and_psd(train_ds, qnn_config, trajectory):
    for theta in trajectory.thetas:
        gram = qntk_gram(train_ds, train_ds, theta, qnn_config)
        np.testing.assert_array_equal(gram.values, gram.values.T)
        assert gram.is_square
        assert is_mercer(gram)


def test_provenance_attached(train_ds, qnn_config):
    gram = qntk_gram(train_ds, train_ds, np.zeros(2), qnn_config, provenance={"seed": 9})
    assert gram.provenance == {"seed": 9}


def test_dimension_mismatch(qnn_config):
    with pytest.raises(ShapeError):
        qntk(np.zeros(3), np.zeros(2), np.zeros(2), qnn_config)


def test_gram_matrix_validation():
    with pytest.raises(InputError):
        GramMatrix([[1.0, np.nan]], "QNTK")
    with pytest.raises(ShapeError):
        GramMatrix([1.0, 2.0], "QNTK")
    with pytest.raises(ShapeError):
        GramMatrix([[1.0, 2.0]], "QNTK", row_ids=[0, 1])


def test_gram_csv_reload(train_ds, test_ds, qnn_config, tmp_path):
    gram = qntk_gram(train_ds, test_ds, np.array([0.2, 0.9]), qnn_config, provenance={"seed": 1})
    gram.to_csv(tmp_path / "gram.csv")

    reloaded = GramMatrix.from_csv(tmp_path / "gram.csv")
    np.testing.assert_array_equal(reloaded.values, gram.values)
    assert reloaded.row_ids == gram.row_ids
    assert reloaded.col_ids == gram.col_ids
    assert reloaded.provenance == {"seed": 1}
    assert reloaded.hash == gram.hash
