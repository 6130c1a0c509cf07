"""Tests for ray utils"""

import logging
import operator

import pytest
import ray
from qpk.utils.ray import initialize_ray, parallel_map


@pytest.fixture()
def no_ray():
    if ray.is_initialized():
        ray.shutdown()
    yield
    if ray.is_initialized():
        ray.shutdown()


def test_initialize_ray(no_ray, caplog, monkeypatch):
    monkeypatch.delenv("IP_HEAD", raising=False)
    monkeypatch.delenv("PBS_NNODES", raising=False)

    with caplog.at_level(logging.INFO):
        initialize_ray(num_cpus=1, quiet=False)

    assert "Ray is not initialized. Checking for existing cluster..." in caplog.text
    assert ray.is_initialized()


def test_initialize_ray_quiet(no_ray, caplog, monkeypatch):
    monkeypatch.delenv("IP_HEAD", raising=False)
    monkeypatch.delenv("PBS_NNODES", raising=False)

    with caplog.at_level(logging.WARNING):
        initialize_ray(num_cpus=1, quiet=True)

    assert caplog.text == ""
    assert ray.is_initialized()


def test_parallel_map_serial():
    tasks = [(k, k + 1) for k in range(5)]
    assert parallel_map(operator.mul, tasks, jobs=1) == [0, 2, 6, 12, 20]
    assert parallel_map(operator.mul, [], jobs=4) == []


def test_parallel_map_keeps_task_order(no_ray, monkeypatch):
    monkeypatch.delenv("IP_HEAD", raising=False)
    monkeypatch.delenv("PBS_NNODES", raising=False)

    tasks = [(k, 3) for k in range(8)]
    assert parallel_map(operator.mul, tasks, jobs=2) == [3 * k for k in range(8)]
