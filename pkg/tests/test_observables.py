"""Tests for fidelities, logical-qubit reductions and populations."""

import math

import numpy as np
import pytest

from app.core import observables
from app.core.errors import ParameterError
from app.core.hamiltonian import initialState
from app.models.basis import GROUND_INDEX, eExcIndex, fExcIndex
from app.models.quantum_types import InitialKind
from app.models.system_params import SystemParams


def _cloneParams(theta: float = math.pi / 3, delta: float = 0.4) -> SystemParams:
    return SystemParams.fromGPrimeUnits(3, 100, theta=theta, delta=delta)


class TestWState:
    """W-state overlap."""

    def test_w_vector(self):
        w = observables.wStateVector(4)
        assert np.linalg.norm(w) == pytest.approx(1.0)
        assert observables.wStateFidelity(w, 4) == pytest.approx(1.0)

    def test_seed_overlap_is_one_over_n(self, nominalParams):
        psi = initialState(nominalParams, InitialKind.W_SEED)
        assert observables.wStateFidelity(psi, 3) == pytest.approx(1 / 3)

    def test_density_agrees_with_vector(self, nominalParams):
        psi = initialState(nominalParams, InitialKind.CLONE_INPUT)
        rho = np.outer(psi, psi.conj())
        assert observables.wStateFidelity(rho, 3) == pytest.approx(observables.wStateFidelity(psi, 3))

    def test_phase_insensitive(self):
        w = observables.wStateVector(3)
        assert observables.wStateFidelity(-w, 3) == pytest.approx(1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ParameterError):
            observables.wStateFidelity(observables.wStateVector(3), 4)


class TestLogicalQubit:
    """Reduction to one node's ensemble qubit."""

    def test_clone_input_on_node_one(self):
        params = _cloneParams()
        q = observables.reduceToLogicalQubit(initialState(params, InitialKind.CLONE_INPUT), 1)
        c, s = math.cos(math.pi / 6), math.sin(math.pi / 6)
        np.testing.assert_allclose(
            q.matrix, [[c * c, c * s * np.exp(-0.4j)], [c * s * np.exp(0.4j), s * s]], atol=1e-15
        )
        assert q.trace == pytest.approx(1.0)

    def test_other_nodes_see_ground(self):
        params = _cloneParams()
        q = observables.reduceToLogicalQubit(initialState(params, InitialKind.CLONE_INPUT), 2)
        np.testing.assert_allclose(q.matrix, [[1.0, 0.0], [0.0, 0.0]], atol=1e-15)

    def test_e_excitation_is_excluded(self):
        """The node's own e-state belongs to neither logical state."""
        state = np.zeros(11, dtype=complex)
        state[GROUND_INDEX] = math.sqrt(0.5)
        state[eExcIndex(2)] = math.sqrt(0.3)
        state[fExcIndex(2)] = math.sqrt(0.2)
        q = observables.reduceToLogicalQubit(state, 2)
        assert q.trace == pytest.approx(0.7)
        assert observables.reduceToLogicalQubit(state, 1).trace == pytest.approx(1.0)

    def test_density_agrees_with_vector(self):
        psi = initialState(_cloneParams(), InitialKind.CLONE_INPUT)
        fromVector = observables.reduceToLogicalQubit(psi, 1).matrix
        fromDensity = observables.reduceToLogicalQubit(np.outer(psi, psi.conj()), 1).matrix
        np.testing.assert_allclose(fromDensity, fromVector, atol=1e-15)

    def test_invalid_node(self):
        with pytest.raises(ParameterError):
            observables.reduceToLogicalQubit(np.zeros(11), 4)

    def test_invalid_dimension(self):
        with pytest.raises(ParameterError):
            observables.reduceToLogicalQubit(np.zeros(7), 1)


class TestCloneFidelity:
    """Fidelity against the input orbital state."""

    def test_input_is_perfect(self):
        params = _cloneParams()
        q = observables.reduceToLogicalQubit(initialState(params, InitialKind.CLONE_INPUT), 1)
        assert observables.cloneFidelity(q, params.theta, params.delta) == pytest.approx(1.0)

    def test_frame_flip(self):
        """Flipping the coherences of an equatorial input gives the orthogonal state."""
        params = _cloneParams(theta=math.pi / 2, delta=0.0)
        q = observables.reduceToLogicalQubit(initialState(params, InitialKind.CLONE_INPUT), 1)
        assert observables.cloneFidelity(q, math.pi / 2, 0.0, frameCorrected=True) == pytest.approx(0.0, abs=1e-15)
        np.testing.assert_allclose(q.frameFlipped().frameFlipped().matrix, q.matrix)

    def test_trace_along_series(self):
        params = _cloneParams()
        psi = initialState(params, InitialKind.CLONE_INPUT)
        trace = observables.qubitFidelityTrace([psi, psi], 1, params.theta, params.delta)
        np.testing.assert_allclose(trace, [1.0, 1.0])

    def test_target(self):
        target = observables.cloneTarget(math.pi / 2, math.pi / 2)
        np.testing.assert_allclose(target, [math.sqrt(0.5), 1j * math.sqrt(0.5)], atol=1e-15)


class TestPopulations:
    """Basis-state probabilities."""

    def test_sum_and_labels(self):
        psi = initialState(_cloneParams(), InitialKind.CLONE_INPUT)
        pops = observables.populations(psi)
        assert len(pops) == 11
        assert sum(p for _, p in pops) == pytest.approx(1.0)
        assert str(pops[1][0]) == "FExc(1)"
        assert pops[1][1] == pytest.approx(0.25)

    def test_density(self):
        psi = initialState(_cloneParams(), InitialKind.CLONE_INPUT)
        pops = observables.populations(np.outer(psi, psi.conj()))
        assert pops[0][1] == pytest.approx(0.75)
