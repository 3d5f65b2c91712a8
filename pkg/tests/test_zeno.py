"""Tests for the Zeno-projected effective model."""

import math

import numpy as np
import pytest
import scipy.linalg

from app.core import zeno
from app.core.errors import NumericalError, ParameterError
from app.core.hamiltonian import buildHI, buildHLaser, initialState
from app.core.observables import wStateFidelity
from app.models.basis import FIBER_INDEX, eExcIndex, fExcIndex
from app.models.quantum_types import InitialKind
from app.models.system_params import SystemParams


class TestDarkState:
    """Zero-eigenvalue state of H_I."""

    def test_uniform_components(self, nominalParams):
        dark = zeno.darkState(nominalParams)
        root = math.sqrt(3 * 0.5 ** 2 + 1.0)
        for node in nominalParams.nodes:
            assert dark.vector[eExcIndex(node)] == pytest.approx(0.5 / root)
        assert dark.vector[FIBER_INDEX] == pytest.approx(-1.0 / root)
        assert dark.eta == pytest.approx(0.5 / root)
        assert dark.fiberWeight == pytest.approx(1.0 / root ** 2)

    def test_annihilated(self, nominalParams, irregularParams):
        for params in (nominalParams, irregularParams):
            hI = buildHI(params)
            dark = zeno.darkState(params)
            assert np.linalg.norm(dark.vector) == pytest.approx(1.0)
            assert np.linalg.norm(hI @ dark.vector) <= 1e-12 * np.linalg.norm(hI, 2)

    def test_partial_zero_coupling_rejected(self):
        params = SystemParams.fromGPrimeUnits(3, 100, gNodes={2: 0.0})
        with pytest.raises(ParameterError):
            zeno.darkState(params)


class TestEffectiveModel:
    """Star-graph effective Hamiltonian and its closed form."""

    def test_mu_uniform_formula(self, protocolParams):
        p = protocolParams
        expected = p.v * math.sqrt(p.omega1 ** 2 + 2 * p.omega ** 2) / math.sqrt(3 * p.v ** 2 + p.mAtoms * p.g ** 2)
        assert zeno.rabiMu(p) == pytest.approx(expected, rel=1e-12)

    def test_closed_form_matches_expm(self, nominalParams, irregularParams):
        for params in (nominalParams, irregularParams):
            times = np.linspace(0.0, 100.0, 6)
            generator = -1j * zeno.effectiveHamiltonian(params)
            psi0 = initialState(params, InitialKind.W_SEED)
            for t, state in zip(times, zeno.analyticSeries(params, times)):
                np.testing.assert_allclose(state, scipy.linalg.expm(generator * t) @ psi0, atol=1e-10)

    def test_projection_reproduces_effective_hamiltonian(self, nominalParams, irregularParams):
        """The generic projection restricted to the zero sector equals the closed form."""
        for params in (nominalParams, irregularParams):
            hI = buildHI(params)
            projected = zeno.zenoProjectedHamiltonian(hI, buildHLaser(params))
            zero = min(zeno.zenoSectors(hI), key=lambda sector: abs(sector[0]))[1]
            np.testing.assert_allclose(zero @ projected @ zero, zeno.effectiveHamiltonian(params), atol=1e-10)

    def test_undriven_state_is_static(self):
        params = SystemParams.fromGPrimeUnits(3, 100, omegaFactor=0.0, omega1Factor=0.0)
        states = zeno.analyticSeries(params, [0.0, 10.0])
        np.testing.assert_array_equal(states[0], states[1])


class TestSectors:
    """Eigenvalue clustering."""

    def test_degenerate_cluster(self):
        sectors = zeno.zenoSectors(np.diag([0.0, 0.0, 1.0]))
        assert len(sectors) == 2
        assert np.trace(sectors[0][1]).real == pytest.approx(2.0)

    def test_ambiguous_gap(self):
        with pytest.raises(NumericalError, match="ambiguous"):
            zeno.zenoSectors(np.diag([0.0, 1e-7, 1.0]))

    def test_non_hermitian_rejected(self):
        with pytest.raises(ParameterError):
            zeno.zenoSectors(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestAmplitudes:
    """Closed-form A, B, C, D."""

    def test_completeness(self, protocolParams):
        for t in np.linspace(0.0, 200.0, 9):
            assert zeno.amplitudesABCD(protocolParams, t).completeness(3) == pytest.approx(1.0, abs=1e-12)

    def test_match_state_components(self, protocolParams):
        t = 23.0
        amps = zeno.amplitudesABCD(protocolParams, t)
        state = zeno.analyticState(protocolParams, t)
        assert state[fExcIndex(1)] == pytest.approx(amps.a, abs=1e-12)
        assert state[fExcIndex(3)] == pytest.approx(amps.b, abs=1e-12)
        assert state[eExcIndex(2)] == pytest.approx(amps.c, abs=1e-12)
        assert state[FIBER_INDEX] == pytest.approx(amps.d, abs=1e-12)

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_w_state_at_protocol_time(self, n):
        """A = B = −1/√N and no e or fiber weight at t₀."""
        params = zeno.protocolParams(SystemParams.fromGPrimeUnits(n, 100))
        t0 = zeno.protocolSchedule(params).tN
        amps = zeno.amplitudesABCD(params, t0)
        assert amps.a == pytest.approx(-1 / math.sqrt(n), abs=1e-12)
        assert amps.b == pytest.approx(-1 / math.sqrt(n), abs=1e-12)
        assert abs(amps.c) < 1e-12 and abs(amps.d) < 1e-12
        assert wStateFidelity(zeno.analyticState(params, t0), n) == pytest.approx(1.0, abs=1e-12)

    def test_dark_component_carries_rabi_phase(self, protocolParams):
        """Half-way to t₀ the dark-state overlap is −i·c₁/μ."""
        mu = zeno.rabiMu(protocolParams)
        c1 = zeno.darkCouplings(protocolParams)[0]
        dark = zeno.darkState(protocolParams)
        state = zeno.analyticState(protocolParams, 0.5 * math.pi / mu)
        overlap = np.vdot(dark.vector, state)
        assert overlap == pytest.approx(-1j * c1 / mu, abs=1e-12)
        assert overlap.imag < 0 and abs(overlap.real) < 1e-12
        assert state[FIBER_INDEX].imag > 0 and abs(state[FIBER_INDEX].real) < 1e-12
        assert state[eExcIndex(2)].imag < 0

    def test_non_uniform_rejected(self, irregularParams):
        with pytest.raises(ParameterError):
            zeno.amplitudesABCD(irregularParams, 1.0)


class TestSchedule:
    """Protocol timing."""

    def test_schedule(self, nominalParams):
        first = zeno.protocolSchedule(nominalParams)
        third = zeno.protocolSchedule(nominalParams, n=1)
        assert first.omega1Required == pytest.approx((math.sqrt(3) + 1) * 0.05)
        assert third.tN == pytest.approx(3 * first.tN)
        assert first.tN == pytest.approx(math.pi / first.mu)

    def test_schedule_errors(self, nominalParams):
        with pytest.raises(ParameterError):
            zeno.protocolSchedule(nominalParams, n=-1)
        with pytest.raises(ParameterError):
            zeno.protocolSchedule(nominalParams.withOverrides(omega=0.0))

    def test_solve_omega_for_time(self, nominalParams):
        omega = zeno.solveOmegaForTime(nominalParams, 40.0)
        params = zeno.protocolParams(nominalParams.withOverrides(omega=omega))
        assert math.pi / zeno.rabiMu(params) == pytest.approx(40.0, rel=1e-12)
        with pytest.raises(ParameterError):
            zeno.solveOmegaForTime(nominalParams, 0.0)


class TestCloneFidelity:
    """Transient and final clone fidelities."""

    def test_formula_values(self):
        assert zeno.cloneFidelityFormula(math.pi / 2, 3) == pytest.approx(0.78868, abs=1e-5)
        assert zeno.cloneFidelityFormula(0.0, 4) == pytest.approx(1.0)
        with pytest.raises(ParameterError):
            zeno.cloneFidelityFormula(1.0, 1)

    @pytest.mark.parametrize("theta", [0.0, math.pi / 8, math.pi / 4, math.pi / 2])
    def test_corrected_qubit2_reaches_formula(self, protocolParams, theta):
        t0 = zeno.protocolSchedule(protocolParams).tN
        measured = zeno.fidelityQubit2Eff(protocolParams, t0, theta, frameCorrected=True)
        assert measured == pytest.approx(zeno.cloneFidelityFormula(theta, 3), abs=1e-12)

    def test_qubit1_matches_qubit2_at_protocol_time(self, protocolParams):
        t0 = zeno.protocolSchedule(protocolParams).tN
        f1 = zeno.fidelityQubit1Eff(protocolParams, t0, math.pi / 2, frameCorrected=True)
        f2 = zeno.fidelityQubit2Eff(protocolParams, t0, math.pi / 2, frameCorrected=True)
        assert f1 == pytest.approx(f2, abs=1e-12)

    def test_raw_below_corrected(self, protocolParams):
        t0 = zeno.protocolSchedule(protocolParams).tN
        raw = zeno.fidelityQubit2Eff(protocolParams, t0, math.pi / 2)
        corrected = zeno.fidelityQubit2Eff(protocolParams, t0, math.pi / 2, frameCorrected=True)
        assert raw < corrected

    def test_qubit1_starts_perfect(self, protocolParams):
        assert zeno.fidelityQubit1Eff(protocolParams, 0.0, 1.0) == pytest.approx(1.0)


class TestFirstOptimum:
    """Local-maximum search."""

    def test_first_interior_maximum(self):
        times = np.arange(7.0)
        values = np.array([0.1, 0.5, 0.9, 0.4, 0.95, 0.2, 0.1])
        assert zeno.firstOptimumTime(times, values) == 2.0

    def test_monotone_trace(self):
        assert zeno.firstOptimumTime(np.arange(4.0), np.arange(4.0)) is None

    def test_shape_mismatch(self):
        with pytest.raises(ParameterError):
            zeno.firstOptimumTime(np.arange(3.0), np.arange(4.0))


class TestRandomNetworks:
    """Invariants over seeded random parameter draws."""

    @pytest.mark.parametrize("seed", range(10))
    def test_dark_state_annihilated(self, drawParams, seed):
        rng = np.random.default_rng(seed)
        for _ in range(100):
            params = drawParams(rng)
            hI = buildHI(params)
            dark = zeno.darkState(params)
            assert np.linalg.norm(dark.vector) == pytest.approx(1.0, abs=1e-12)
            assert np.linalg.norm(hI @ dark.vector) <= 1e-12 * np.linalg.norm(hI, 2)

    @pytest.mark.parametrize("seed", range(5))
    def test_closed_form_matches_expm(self, drawParams, seed):
        rng = np.random.default_rng(100 + seed)
        params = drawParams(rng)
        generator = -1j * zeno.effectiveHamiltonian(params)
        psi0 = initialState(params, InitialKind.W_SEED)
        for t in rng.uniform(0.0, 3 * math.pi / zeno.rabiMu(params), size=4):
            expected = scipy.linalg.expm(generator * t) @ psi0
            np.testing.assert_allclose(zeno.analyticState(params, t), expected, atol=1e-10)

    @pytest.mark.parametrize("seed", range(5))
    def test_amplitude_completeness(self, drawParams, seed):
        rng = np.random.default_rng(200 + seed)
        params = drawParams(rng, uniform=True)
        for t in rng.uniform(0.0, 1e4, size=20):
            assert zeno.amplitudesABCD(params, t).completeness(params.nCavities) == pytest.approx(1.0, abs=1e-12)
