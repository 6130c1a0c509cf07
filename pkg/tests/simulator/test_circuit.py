"""Tests for compiled circuit templates"""

import numpy as np
import pytest
from qpk.core import ParameterError, QubitIndexError, ShapeError
from qpk.simulator.circuit import FEATURE, PARAMETER, CircuitTemplate
from qpk.simulator.statevector import PauliAxis, PauliRotation, apply_rotation, expval_z, new_state

GATES = [
    (PauliAxis.Y, (0,), FEATURE, 0),
    (PauliAxis.Y, (1,), FEATURE, 1),
    (PauliAxis.ZZ, (0, 1), PARAMETER, 0),
    (PauliAxis.X, (0,), PARAMETER, 1),
    (PauliAxis.X, (1,), PARAMETER, 1),
    (PauliAxis.Z, (1,), PARAMETER, 0),
]


@pytest.fixture(scope="module")
def template():
    return CircuitTemplate.from_gates(2, GATES, n_features=2, n_params=2)


def reference_expectation(x, theta):
    state = new_state(2)
    for axis, targets, source, index in GATES:
        angle = x[index] if source == FEATURE else theta[index]
        state = apply_rotation(state, PauliRotation(axis, targets, angle))
    return expval_z(state, 0)


def test_template_structure(template):
    assert template.num_gates == 6
    np.testing.assert_array_equal(template.occurrences, [2, 3, 4, 5])


def test_expectations_match_gate_by_gate_simulation(template):
    rng = np.random.default_rng(0)
    X = rng.uniform(-np.pi, np.pi, size=(10, 2))
    theta = rng.uniform(-np.pi, np.pi, size=2)

    expected = [reference_expectation(x, theta) for x in X]
    np.testing.assert_allclose(template.expectations(X, theta), expected, atol=1e-13)


def test_jacobian_sums_occurrence_shifts(template):
    rng = np.random.default_rng(1)
    x = rng.uniform(-np.pi, np.pi, size=2)
    theta = rng.uniform(-np.pi, np.pi, size=2)

    shifts = template.occurrence_shifts(x, theta)
    assert shifts[0] == 0.0
    assert shifts[1] == 0.0

    jac = template.jacobian(x, theta)[0]
    assert jac[0] == pytest.approx(shifts[2] + shifts[5], abs=1e-14)
    assert jac[1] == pytest.approx(shifts[3] + shifts[4], abs=1e-14)


def test_check_inputs(template):
    with pytest.raises(ShapeError):
        template.expectations(np.zeros((3, 3)), np.zeros(2))
    with pytest.raises(ShapeError):
        template.expectations(np.zeros((3, 2)), np.zeros(3))

    X, theta = template.check_inputs([0.1, 0.2], [0.0, 0.0])
    assert X.shape == (1, 2)
    assert theta.dtype == np.float64


@pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
def test_non_finite_parameters(template, bad):
    with pytest.raises(ParameterError):
        template.expectations(np.zeros((3, 2)), [0.1, bad])
    with pytest.raises(ParameterError):
        template.jacobian(np.zeros((3, 2)), [bad, 0.1])


def test_from_gates_validation():
    with pytest.raises(QubitIndexError):
        CircuitTemplate.from_gates(1, [(PauliAxis.X, (0,), PARAMETER, 0)], 1, 1, readout=1)
    with pytest.raises(QubitIndexError):
        CircuitTemplate.from_gates(1, [(PauliAxis.X, (1,), PARAMETER, 0)], 1, 1)
    with pytest.raises(ShapeError):
        CircuitTemplate.from_gates(1, [(PauliAxis.X, (0,), PARAMETER, 1)], 1, 1)
