"""Tests for the feature-learning versus random-features baseline"""

import numpy as np
import pandas as pd
import pytest
from qpk.baselines.classical import (
    COMPARISON_COLUMNS,
    _best,
    compare_cell,
    compare_experiment,
    mlp_accuracy,
    mlp_train,
    save_w1_snapshot,
    summarize_comparison,
    w1_experiment,
    w1_shrinkage,
)
from qpk.core import ParameterError, ShapeError
from qpk.datasets.xor import generate
from qpk.models.mlp import MlpParams


@pytest.fixture(scope="module")
def small_ds():
    return generate(3, 3, 0.1, 32, seed=0)


def test_mlp_train_is_deterministic(small_ds):
    first = mlp_train(small_ds, seed=1, epochs=20, lr=0.01)
    second = mlp_train(small_ds, seed=1, epochs=20, lr=0.01)
    np.testing.assert_array_equal(first.losses, second.losses)
    np.testing.assert_array_equal(first.params.flatten(), second.params.flatten())
    assert len(first.losses) == 21


def test_mlp_train_zero_rate_is_frozen(small_ds):
    run = mlp_train(small_ds, seed=2, epochs=10, lr=0.0)
    np.testing.assert_array_equal(run.params.flatten(), run.initial.flatten())
    assert len(run.losses) == 11
    assert np.all(run.losses == run.losses[0])


def test_mlp_train_rejects_negative_rate(small_ds):
    with pytest.raises(ParameterError):
        mlp_train(small_ds, seed=0, epochs=5, lr=-0.1)


def test_snapshots(small_ds):
    run = mlp_train(small_ds, seed=3, epochs=8, lr=0.01)
    np.testing.assert_array_equal(run.snapshot(0).flatten(), run.initial.flatten())
    np.testing.assert_array_equal(run.snapshot(8).flatten(), run.params.flatten())
    assert np.all(run.snapshot(0).b1 == 0)


def test_xor_witness_network():
    params = MlpParams([[1.0, 1.0], [-1.0, -1.0]], np.eye(2), [[1.0, 1.0]], np.zeros(2), np.zeros(2), -1.0)
    assert mlp_accuracy(params, generate(2, 2, 0.0, 16, seed=0)) == 1.0


@pytest.mark.slow
def test_best_of_pool_learns_xor():
    ds = generate(2, 2, 0.0, 32, seed=0)
    scores = [mlp_accuracy(mlp_train(ds, seed=k, epochs=1000, lr=0.01).params, ds) for k in range(10)]
    assert max(scores) == 1.0


def test_best():
    scores = [(0.5, 0.9), (0.8, 0.7), (0.8, 0.6)]
    assert _best(scores, "test") == 0.9
    assert _best(scores, "train") == 0.7
    assert _best([(np.nan, np.nan), (0.1, 0.4)], "train") == 0.4
    assert np.isnan(_best([], "test"))


def test_compare_cell():
    row = compare_cell(3, 0.0, repeat=0, seed=0, pool_size=2, epochs=5, lr=0.01)
    assert list(row) == COMPARISON_COLUMNS
    assert row["d"] == 3
    assert row["oracle_acc"] == 1.0
    assert 0.0 <= row["nn_acc"] <= 1.0
    assert 0.0 <= row["rf_acc"] <= 1.0


def test_compare_experiment():
    df = compare_experiment(3, [0.0, 0.5], repeats=2, seed=1, pool_size=1, epochs=3, lr=0.01)
    assert list(df.columns) == COMPARISON_COLUMNS
    assert len(df) == 4
    assert df["eps"].tolist() == [0.0, 0.0, 0.5, 0.5]
    assert df["repeat"].tolist() == [0, 1, 0, 1]

    again = compare_experiment(3, [0.0, 0.5], repeats=2, seed=1, pool_size=1, epochs=3, lr=0.01)
    pd.testing.assert_frame_equal(df, again)


def test_compare_experiment_validation():
    with pytest.raises(ParameterError):
        compare_experiment(2, [0.0], repeats=1, seed=0)
    with pytest.raises(ParameterError):
        compare_experiment(4, [0.0], repeats=1, seed=0, selection="validation")


def test_summarize_comparison():
    df = pd.DataFrame(
        [[4, 0.5, 0, 1.0, 0.8, 0.6], [4, 0.5, 1, 1.0, 0.6, 0.6]],
        columns=COMPARISON_COLUMNS,
    )
    summary = summarize_comparison(df)
    assert len(summary) == 1
    assert summary["nn_acc_mean"].iloc[0] == pytest.approx(0.7)
    assert summary["nn_acc_std"].iloc[0] == pytest.approx(np.sqrt(0.02))
    assert summary["rf_acc_std"].iloc[0] == 0.0


def test_w1_shrinkage_identity():
    params = MlpParams.initialize(6, 3, seed=0)
    result = w1_shrinkage(params, params, d_prime=3)
    assert result.ratio_change == pytest.approx(1.0)
    assert result.signal_mean_abs[0] == result.signal_mean_abs[1]
    assert result.junk_mean_abs[0] == pytest.approx(np.abs(params.W1[:, 3:]).mean())


def test_w1_shrinkage_zero_weights():
    zeros = MlpParams(np.zeros((2, 4)), np.zeros((2, 2)), np.zeros((1, 2)), np.zeros(2), np.zeros(2), 0.0)
    assert np.isnan(w1_shrinkage(zeros, zeros, d_prime=2).ratio_change)


def test_w1_shrinkage_validation():
    a = MlpParams.initialize(4, 2, seed=0)
    b = MlpParams.initialize(5, 2, seed=0)
    with pytest.raises(ShapeError):
        w1_shrinkage(a, b, d_prime=2)
    with pytest.raises(ParameterError):
        w1_shrinkage(a, a, d_prime=4)
    with pytest.raises(ParameterError):
        w1_shrinkage(a, a, d_prime=0)


def test_junk_weights_shrink():
    run, result = w1_experiment(epochs=200)
    assert result.junk_after < result.junk_before
    assert run.params.d == 24
    assert run.params.h == 5


def test_save_w1_snapshot(tmp_path):
    params = MlpParams.initialize(4, 2, seed=1)
    save_w1_snapshot(params, tmp_path / "w1.csv")

    df = pd.read_csv(tmp_path / "w1.csv", float_precision="round_trip")
    assert list(df.columns) == ["w_0", "w_1", "w_2", "w_3"]
    np.testing.assert_array_equal(df.to_numpy(), params.W1)


@pytest.mark.slow
def test_networks_beat_random_features():
    summaries = {
        d: summarize_comparison(compare_experiment(d, [0.0, 0.5, 1.0], repeats=5, seed=0, jobs=4))
        for d in (4, 24)
    }
    high = summaries[24]
    assert np.all(high["nn_acc_mean"] >= high["rf_acc_mean"])

    def gap(summary):
        row = summary[summary["eps"] == 0.5].iloc[0]
        return row["nn_acc_mean"] - row["rf_acc_mean"]

    assert gap(summaries[24]) > gap(summaries[4])


@pytest.mark.slow
def test_junk_weights_shrink_full_run():
    _, result = w1_experiment()
    assert result.junk_after < result.junk_before
