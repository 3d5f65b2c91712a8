"""Tests for Schrödinger, Lindblad and conditional evolution."""

import math

import numpy as np
import pytest
import scipy.linalg

from app.core import dynamics, experiments, zeno
from app.core.errors import NumericalError, ParameterError
from app.core.hamiltonian import buildCollapseOps, buildHTotal, initialDensity, initialState
from app.core.observables import qubitFidelityTrace
from app.models.basis import GROUND_INDEX
from app.models.experiment import EvolutionMode
from app.models.quantum_types import CollapseOp, IntegratorConfig, IntegratorMethod, InitialKind
from app.models.system_params import SystemParams
from app.utils.linalg_utils import propagatorCache


class TestSchrodinger:
    """Unitary evolution."""

    def test_norm_conserved(self, nominalParams):
        h = buildHTotal(nominalParams)
        psi0 = initialState(nominalParams, InitialKind.CLONE_INPUT)
        states = dynamics.evolveSchrodingerSeries(h, psi0, np.linspace(0.0, 60.0, 7))
        np.testing.assert_allclose(np.linalg.norm(states, axis=1), 1.0, atol=1e-12)

    def test_rk4_agrees_with_expm(self, nominalParams):
        h = buildHTotal(nominalParams)
        psi0 = initialState(nominalParams, InitialKind.W_SEED)
        exact = dynamics.evolveSchrodinger(h, psi0, 10.0)
        stepped = dynamics.evolveSchrodinger(h, psi0, 10.0, IntegratorConfig(method=IntegratorMethod.RK4))
        np.testing.assert_allclose(stepped, exact, atol=1e-7)

    def test_rk4_propagator_is_cached(self, nominalParams):
        h = buildHTotal(nominalParams)
        psi0 = initialState(nominalParams, InitialKind.W_SEED)
        dynamics.evolveSchrodingerSeries(h, psi0, [1.0, 2.0, 3.0], IntegratorConfig(method="rk4", dt=0.01))
        assert len(propagatorCache.cache) == 1

    def test_unstable_step_rejected(self, nominalParams):
        h = buildHTotal(nominalParams)
        psi0 = initialState(nominalParams, InitialKind.W_SEED)
        with pytest.raises(NumericalError, match="dt"):
            dynamics.evolveSchrodinger(h, psi0, 5.0, IntegratorConfig(method=IntegratorMethod.RK4, dt=1.0))

    def test_time_zero_is_identity(self, nominalParams):
        h = buildHTotal(nominalParams)
        psi0 = initialState(nominalParams, InitialKind.CLONE_INPUT)
        np.testing.assert_allclose(dynamics.evolveSchrodinger(h, psi0, 0.0), psi0, atol=1e-15)

    def test_bad_times(self, nominalParams):
        h = buildHTotal(nominalParams)
        psi0 = initialState(nominalParams, InitialKind.W_SEED)
        with pytest.raises(ParameterError):
            dynamics.evolveSchrodingerSeries(h, psi0, [2.0, 1.0])
        with pytest.raises(ParameterError):
            dynamics.evolveSchrodinger(h, psi0, -1.0)

    def test_dimension_mismatch(self, nominalParams):
        with pytest.raises(ParameterError):
            dynamics.evolveSchrodinger(buildHTotal(nominalParams), np.ones(5), 1.0)


    @pytest.mark.parametrize("seed", range(5))
    def test_random_networks_match_matrix_exponential(self, drawParams, seed):
        rng = np.random.default_rng(500 + seed)
        params = drawParams(rng, maxAtoms=100)
        h = buildHTotal(params)
        psi0 = initialState(params, InitialKind.CLONE_INPUT)
        t = float(rng.uniform(0.0, 10.0))
        exact = scipy.linalg.expm(-1j * h * t) @ psi0
        np.testing.assert_allclose(dynamics.evolveSchrodinger(h, psi0, t), exact, atol=1e-10)
        stepped = dynamics.evolveSchrodinger(h, psi0, t, IntegratorConfig(method=IntegratorMethod.RK4))
        np.testing.assert_allclose(stepped, exact, atol=1e-6)


class TestLindblad:
    """Master-equation evolution."""

    def test_liouvillian_without_channels_is_unitary(self, nominalParams):
        """Zero rates reproduce |ψ(t)⟩⟨ψ(t)|."""
        h = buildHTotal(nominalParams)
        psi0 = initialState(nominalParams, InitialKind.CLONE_INPUT)
        rho = dynamics.evolveLindblad(
            h, [], initialDensity(nominalParams, InitialKind.CLONE_INPUT), 30.0, IntegratorConfig(method="expm")
        )
        psi = dynamics.evolveSchrodinger(h, psi0, 30.0)
        np.testing.assert_allclose(rho, np.outer(psi, psi.conj()), atol=1e-10)

    def test_trace_and_positivity(self, openParams):
        h = buildHTotal(openParams)
        rho0 = initialDensity(openParams, InitialKind.W_SEED)
        densities = dynamics.evolveLindbladSeries(h, buildCollapseOps(openParams), rho0, np.linspace(0.0, 50.0, 6))
        for rho in densities:
            assert np.trace(rho).real == pytest.approx(1.0, abs=1e-8)
            assert np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0] >= -1e-8

    def test_ground_population_grows(self, openParams):
        h = buildHTotal(openParams)
        rho0 = initialDensity(openParams, InitialKind.W_SEED)
        densities = dynamics.evolveLindbladSeries(h, buildCollapseOps(openParams), rho0, np.linspace(0.0, 50.0, 11))
        ground = densities[:, GROUND_INDEX, GROUND_INDEX].real
        assert np.all(np.diff(ground) >= -1e-12)
        assert ground[-1] > 0

    @pytest.mark.parametrize("seed", range(4))
    def test_ground_population_grows_for_random_networks(self, drawParams, seed):
        rng = np.random.default_rng(400 + seed)
        params = drawParams(rng, decay=True, maxNodes=4, maxAtoms=100)
        rho0 = initialDensity(params, InitialKind.W_SEED)
        times = np.linspace(0.0, 30.0, 16)
        densities = dynamics.evolveLindbladSeries(buildHTotal(params), buildCollapseOps(params), rho0, times)
        ground = densities[:, GROUND_INDEX, GROUND_INDEX].real
        assert np.all(np.diff(ground) >= -1e-10)

    def test_rk4_agrees_with_expm(self, openParams):
        h = buildHTotal(openParams)
        ops = buildCollapseOps(openParams)
        rho0 = initialDensity(openParams, InitialKind.W_SEED)
        exact = dynamics.evolveLindblad(h, ops, rho0, 10.0, IntegratorConfig(method="expm"))
        stepped = dynamics.evolveLindblad(h, ops, rho0, 10.0)
        np.testing.assert_allclose(stepped, exact, atol=1e-7)

    def test_pure_decay(self):
        """A two-level decay r·D[σ⁻] empties the excited state as e^{−rt}."""
        h = np.zeros((2, 2), dtype=complex)
        jump = np.array([[0, 1], [0, 0]], dtype=complex)
        rho0 = np.diag([0.0, 1.0]).astype(complex)
        rho = dynamics.evolveLindblad(h, [CollapseOp(0.5, jump)], rho0, 2.0, IntegratorConfig(method="expm"))
        assert rho[1, 1].real == pytest.approx(np.exp(-1.0), rel=1e-12)

    def test_negative_rate_rejected(self):
        h = np.zeros((2, 2), dtype=complex)
        with pytest.raises(ParameterError):
            dynamics.liouvillian(h, [CollapseOp(-1.0, np.eye(2))])


class TestConditional:
    """No-jump evolution."""

    def test_norm_non_increasing(self, openParams):
        h = buildHTotal(openParams)
        psi0 = initialState(openParams, InitialKind.W_SEED)
        states = dynamics.evolveConditionalSeries(h, buildCollapseOps(openParams), psi0, np.linspace(0.0, 50.0, 11))
        norms = np.linalg.norm(states, axis=1)
        assert norms[0] == pytest.approx(1.0)
        assert np.all(np.diff(norms) <= 1e-12)
        assert norms[-1] < 1.0

    def test_single_time_matches_series(self, openParams):
        h = buildHTotal(openParams)
        ops = buildCollapseOps(openParams)
        psi0 = initialState(openParams, InitialKind.W_SEED)
        series = dynamics.evolveConditionalSeries(h, ops, psi0, [0.0, 20.0])
        np.testing.assert_allclose(dynamics.evolveConditional(h, ops, psi0, 20.0), series[-1], atol=1e-12)

    def test_without_decay_is_unitary(self, nominalParams):
        h = buildHTotal(nominalParams)
        psi0 = initialState(nominalParams, InitialKind.W_SEED)
        conditional = dynamics.evolveConditional(h, [], psi0, 10.0)
        closed = dynamics.evolveSchrodinger(h, psi0, 10.0, IntegratorConfig(method=IntegratorMethod.EXPM))
        np.testing.assert_allclose(conditional, closed, atol=1e-10)

    def test_hamiltonian_anti_hermitian_part(self, openParams):
        h = buildHTotal(openParams)
        hc = dynamics.conditionalHamiltonian(h, buildCollapseOps(openParams))
        np.testing.assert_allclose(0.5 * (hc + hc.conj().T), h, atol=1e-15)
        assert np.all(np.diag(0.5j * (hc - hc.conj().T)).real >= 0)


class TestStateFidelity:
    """Overlaps."""

    def test_vector_and_density(self, nominalParams):
        psi = initialState(nominalParams, InitialKind.CLONE_INPUT)
        rho = np.outer(psi, psi.conj())
        assert dynamics.stateFidelity(psi, psi) == pytest.approx(1.0)
        assert dynamics.stateFidelity(rho, psi) == pytest.approx(1.0)

    def test_maximally_mixed(self):
        psi = np.zeros(12, dtype=complex)
        psi[5] = 1.0
        assert dynamics.stateFidelity(np.eye(12) / 12, psi) == pytest.approx(1 / 12, abs=1e-15)

    def test_mismatch(self):
        with pytest.raises(ParameterError):
            dynamics.stateFidelity(np.ones(3), np.ones(4))


class TestIntegratorConfig:
    """Step rules."""

    def test_invalid_dt(self):
        with pytest.raises(ParameterError):
            IntegratorConfig(dt=0.0)

    def test_default_step_rule(self, openParams):
        h = buildHTotal(openParams)
        cfg = IntegratorConfig.defaultFor(h, buildCollapseOps(openParams))
        assert cfg.method is IntegratorMethod.RK4
        assert cfg.dt == pytest.approx(0.02 / np.linalg.norm(h, 2))
        assert cfg.resolveStep(np.linalg.norm(h, 2)) == cfg.dt


class TestZenoLimit:
    """Full dynamics against the effective model deep in the Zeno regime."""

    def test_clone_fidelity_tracks_effective_model(self):
        params = zeno.protocolParams(SystemParams.fromGPrimeUnits(3, 100, vFactor=0.5, omegaFactor=0.01))
        times = np.linspace(0.0, experiments.protocolTime(params), 13)
        states = experiments.simulateStates(params, EvolutionMode.FULL_CLOSED, InitialKind.CLONE_INPUT, times)
        full = qubitFidelityTrace(states, 2, params.theta, params.delta, frameCorrected=True)
        effective = np.array([zeno.fidelityQubit2Eff(params, t, params.theta, frameCorrected=True) for t in times])
        assert np.max(np.abs(full - effective)) <= 0.005

    def test_seeded_state_follows_closed_form(self):
        omega = 0.01
        params = SystemParams(nCavities=3, mAtoms=100, g=1.0, v=5.0, omega1=(math.sqrt(3) + 1.0) * omega, omega=omega)
        times = np.linspace(0.0, experiments.protocolTime(params), 13)
        full = experiments.simulateStates(params, EvolutionMode.FULL_CLOSED, InitialKind.W_SEED, times)
        overlaps = [dynamics.stateFidelity(f, a) for f, a in zip(full, zeno.analyticSeries(params, times))]
        assert min(overlaps) >= 0.999
