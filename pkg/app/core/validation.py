"""Invariant suite behind `zenoclone validate`.

Each check returns (passed, detail). Checks are grouped by the module whose
invariants they guard so that a subset can be selected.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg

from app.core import brute_force, dynamics, experiments, hamiltonian, observables, zeno
from app.core.errors import ConfigError, ZenoCloneError
from app.models.basis import GROUND_INDEX, eExcIndex, enumerateBasis, fExcIndex
from app.models.experiment import EvolutionMode, ObservableKind, SweepAxis, SweepSpec
from app.models.quantum_types import InitialKind, IntegratorConfig, IntegratorMethod
from app.models.system_params import SystemParams
from app.utils.linalg_utils import hermiticityError

logger = logging.getLogger(__name__)

GROUPS = ("model", "zeno", "dynamics", "observables", "experiments")

CheckOutcome = Tuple[bool, str]


@dataclass(frozen=True)
class Check:
    """A named invariant."""

    name: str
    group: str
    run: Callable[[], CheckOutcome]


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one check."""

    name: str
    group: str
    passed: bool
    detail: str


def _nominal(nCavities: int = 3, mAtoms: int = 100, **kwargs) -> SystemParams:
    kwargs.setdefault("vFactor", 0.5)
    kwargs.setdefault("omegaFactor", 0.05)
    return SystemParams.fromGPrimeUnits(nCavities, mAtoms, **kwargs)


def _irregular() -> SystemParams:
    return _nominal(
        omegaNodes={2: 0.04, 3: 0.06},
        gNodes={1: 0.11, 3: 0.09},
        vNodes={2: 0.55},
    )


def _within(value: float, tol: float, label: str) -> CheckOutcome:
    return value <= tol, f"{label} = {value:.3e} (tol {tol:.0e})"


def checkHermiticity() -> CheckOutcome:
    worst = max(hermiticityError(hamiltonian.buildHTotal(p)) for p in (_nominal(), _irregular()))
    return _within(worst, 1e-14, "max |H - H†|")


def checkBasisIndexing() -> CheckOutcome:
    for n in (2, 3, 6):
        basis = enumerateBasis(n)
        indices = sorted(basis.indexOf(label) for label in basis)
        if indices != list(range(3 * n + 2)):
            return False, f"N={n}: labels do not index 0..{3 * n + 1}"
    return True, "labels index 0..3N+1 bijectively for N in {2, 3, 6}"


def checkMatrixElementProvenance() -> CheckOutcome:
    worst = 0.0
    for n, m in ((2, 1), (2, 2), (2, 3), (3, 2)):
        params = SystemParams(
            nCavities=n, mAtoms=m, g=0.7, v=0.4, omega1=0.3, omega=0.2, gNodes={2: 0.5}, vNodes={1: 0.45}
        )
        projected = brute_force.bruteForceProjection(params)
        worst = max(worst, float(np.max(np.abs(projected - hamiltonian.buildHTotal(params)))))
    return _within(worst, 1e-12, "max |V†HV - H_sub| over M in {1,2,3}")


def checkCollapseTargets() -> CheckOutcome:
    params = _nominal(kappaFactor=0.01, gammaFactor=0.02, betaFactor=0.03, branchingEF=0.25)
    allowed = {GROUND_INDEX} | {fExcIndex(x) for x in params.nodes}
    for rate, jump in hamiltonian.buildCollapseOps(params):
        rows = set(np.nonzero(jump)[0])
        if rate < 0 or not rows <= allowed:
            return False, f"channel with rate {rate} targets {sorted(rows)}"
    return True, "every channel has rate >= 0 and lands on ground or an f-state"


def checkDarkStateAnnihilation() -> CheckOutcome:
    worst = 0.0
    for params in (_nominal(), _irregular(), _nominal(nCavities=5, mAtoms=25)):
        hI = hamiltonian.buildHI(params)
        dark = zeno.darkState(params)
        worst = max(worst, float(np.linalg.norm(hI @ dark.vector) / np.linalg.norm(hI, 2)))
    return _within(worst, 1e-12, "max ‖H_I d‖/‖H_I‖")


def checkClosedFormEvolution() -> CheckOutcome:
    worst = 0.0
    for params in (_nominal(), _irregular()):
        times = np.linspace(0.0, 2.0 * experiments.protocolTime(params), 7)
        analytic = zeno.analyticSeries(params, times)
        generator = -1j * zeno.effectiveHamiltonian(params)
        psi0 = hamiltonian.initialState(params, InitialKind.W_SEED)
        for t, state in zip(times, analytic):
            numeric = scipy.linalg.expm(generator * t) @ psi0
            worst = max(worst, float(np.max(np.abs(numeric - state))))
    return _within(worst, 1e-10, "max |closed form - expm(-iH_e t)|")


def checkAmplitudeCompleteness() -> CheckOutcome:
    worst = 0.0
    for n in (2, 3, 5):
        params = _nominal(nCavities=n)
        for t in np.linspace(0.0, 3.0 * experiments.protocolTime(params), 11):
            worst = max(worst, abs(zeno.amplitudesABCD(params, t).completeness(n) - 1.0))
    return _within(worst, 1e-12, "max ||A|²+(N−1)|B|²+N|C|²+|D|² − 1|")


def checkZenoProjection() -> CheckOutcome:
    worst = 0.0
    for params in (_nominal(), _irregular()):
        hI = hamiltonian.buildHI(params)
        projected = zeno.zenoProjectedHamiltonian(hI, hamiltonian.buildHLaser(params))
        zeroSector = min(zeno.zenoSectors(hI), key=lambda sector: abs(sector[0]))[1]
        block = zeroSector @ projected @ zeroSector
        worst = max(worst, float(np.max(np.abs(block - zeno.effectiveHamiltonian(params)))))
    return _within(worst, 1e-10, "max |P₀H_ZP₀ − H_e|")


def checkWStateAtProtocolTime() -> CheckOutcome:
    worst = 0.0
    for n in (3, 4, 5):
        params = zeno.protocolParams(_nominal(nCavities=n))
        state = zeno.analyticState(params, zeno.protocolSchedule(params).tN)
        worst = max(worst, 1.0 - observables.wStateFidelity(state, n))
    return _within(worst, 1e-12, "max 1 − F_W(t₀), N in {3,4,5}")


def checkCloneFormula() -> CheckOutcome:
    worst = 0.0
    for n in (3, 4, 5):
        params = zeno.protocolParams(_nominal(nCavities=n))
        t0 = zeno.protocolSchedule(params).tN
        for theta in np.linspace(0.0, math.pi / 2, 5):
            measured = zeno.fidelityQubit2Eff(params, t0, theta, frameCorrected=True)
            worst = max(worst, abs(measured - zeno.cloneFidelityFormula(theta, n)))
    return _within(worst, 1e-12, "max |F₂(t₀) − closed-form clone fidelity|")


def checkNormConservation() -> CheckOutcome:
    params = _nominal(omegaFactor=0.1)
    times = np.linspace(0.0, experiments.protocolTime(params), 9)
    states = experiments.simulateStates(params, EvolutionMode.FULL_CLOSED, InitialKind.CLONE_INPUT, times)
    drift = float(np.max(np.abs(np.linalg.norm(states, axis=1) - 1.0)))
    return _within(drift, 1e-9, "max |‖ψ(t)‖ − 1|")


def _openParams() -> SystemParams:
    return _nominal(kappaFactor=0.01, gammaFactor=0.01, betaFactor=0.01)


def checkLindbladTracePositivity() -> CheckOutcome:
    params = _openParams()
    times = np.linspace(0.0, experiments.protocolTime(params), 5)
    try:
        densities = experiments.simulateStates(params, EvolutionMode.FULL_OPEN, InitialKind.W_SEED, times)
    except ZenoCloneError as e:
        return False, str(e)
    drift = max(abs(float(np.real(np.trace(rho))) - 1.0) for rho in densities)
    lowest = min(float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]) for rho in densities)
    return drift <= 1e-8 and lowest >= -1e-8, f"trace drift {drift:.3e}, min eigenvalue {lowest:.3e}"


def checkGroundMonotone() -> CheckOutcome:
    params = _openParams()
    times = np.linspace(0.0, experiments.protocolTime(params), 21)
    densities = experiments.simulateStates(params, EvolutionMode.FULL_OPEN, InitialKind.W_SEED, times)
    ground = np.real(densities[:, GROUND_INDEX, GROUND_INDEX])
    worst = float(np.max(-np.diff(ground), initial=0.0))
    return _within(worst, 1e-12, "largest decrease of the ground population")


def checkStepHalving() -> CheckOutcome:
    params = _openParams()
    hTotal = hamiltonian.buildHTotal(params)
    ops = hamiltonian.buildCollapseOps(params)
    rho0 = hamiltonian.initialDensity(params, InitialKind.W_SEED)
    coarse = IntegratorConfig.defaultFor(hTotal, ops)
    fine = IntegratorConfig(method=IntegratorMethod.RK4, dt=coarse.dt / 2)
    t = 5.0
    difference = float(
        np.max(np.abs(dynamics.evolveLindblad(hTotal, ops, rho0, t, coarse) - dynamics.evolveLindblad(hTotal, ops, rho0, t, fine)))
    )
    return _within(difference, 1e-7, "max |ρ_dt − ρ_dt/2|")


def checkOpenClosedLimit() -> CheckOutcome:
    params = _nominal()
    times = [experiments.protocolTime(params)]
    closed = experiments.simulateStates(params, EvolutionMode.FULL_CLOSED, InitialKind.W_SEED, times)[0]
    opened = experiments.simulateStates(params, EvolutionMode.FULL_OPEN, InitialKind.W_SEED, times)[0]
    difference = abs(observables.wStateFidelity(closed, 3) - observables.wStateFidelity(opened, 3))
    return _within(difference, 1e-8, "|F_closed − F_open| with zero rates")


def checkDeepZenoCloneAgreement() -> CheckOutcome:
    params = zeno.protocolParams(_nominal(omegaFactor=0.01))
    times = np.linspace(0.0, experiments.protocolTime(params), 13)
    states = experiments.simulateStates(params, EvolutionMode.FULL_CLOSED, InitialKind.CLONE_INPUT, times)
    full = observables.qubitFidelityTrace(states, 2, params.theta, params.delta, frameCorrected=True)
    effective = np.array([zeno.fidelityQubit2Eff(params, t, params.theta, frameCorrected=True) for t in times])
    return _within(float(np.max(np.abs(full - effective))), 5e-3, "max |F₂ full − F₂ effective| at Ω = 0.01g′")


def checkDeepZenoStateOverlap() -> CheckOutcome:
    omega = 0.01
    params = SystemParams(nCavities=3, mAtoms=100, g=1.0, v=5.0, omega1=(math.sqrt(3) + 1.0) * omega, omega=omega)
    times = np.linspace(0.0, experiments.protocolTime(params), 13)
    full = experiments.simulateStates(params, EvolutionMode.FULL_CLOSED, InitialKind.W_SEED, times)
    analytic = zeno.analyticSeries(params, times)
    worst = max(1.0 - dynamics.stateFidelity(f, a) for f, a in zip(full, analytic))
    return _within(worst, 1e-3, "max 1 − |⟨ψ_eff(t)|ψ(t)⟩|²")


def checkDeltaIndependence() -> CheckOutcome:
    base = zeno.protocolParams(_nominal(theta=math.pi / 3))
    t0 = experiments.protocolTime(base)
    spreads = {}
    for mode, tol in ((EvolutionMode.EFFECTIVE, 1e-12), (EvolutionMode.FULL_CLOSED, 1e-6)):
        values = []
        for delta in np.linspace(0.0, 2 * math.pi, 16, endpoint=False):
            params = base.withOverrides(delta=float(delta))
            state = experiments.simulateStates(params, mode, InitialKind.CLONE_INPUT, [t0])[0]
            q = observables.reduceToLogicalQubit(state, 2)
            values.append(observables.cloneFidelity(q, params.theta, params.delta, frameCorrected=True))
        spreads[mode] = (max(values) - min(values), tol)
    passed = all(spread <= tol for spread, tol in spreads.values())
    return passed, ", ".join(f"{mode.value} spread {spread:.2e}" for mode, (spread, _) in spreads.items())


def checkQubitSymmetry() -> CheckOutcome:
    params = zeno.protocolParams(_nominal(nCavities=4))
    t0 = experiments.protocolTime(params)
    state = experiments.simulateStates(params, EvolutionMode.FULL_CLOSED, InitialKind.CLONE_INPUT, [t0])[0]
    second = observables.cloneFidelity(observables.reduceToLogicalQubit(state, 2), params.theta, params.delta)
    worst = max(
        abs(observables.cloneFidelity(observables.reduceToLogicalQubit(state, j), params.theta, params.delta) - second)
        for j in range(3, 5)
    )
    return _within(worst, 1e-10, "max |F_j − F_2| for j >= 3")


def checkLogicalTrace() -> CheckOutcome:
    params = _nominal()
    times = np.linspace(0.0, experiments.protocolTime(params), 7)
    states = experiments.simulateStates(params, EvolutionMode.FULL_CLOSED, InitialKind.CLONE_INPUT, times)
    worst = 0.0
    for state in states:
        for node in params.nodes:
            q = observables.reduceToLogicalQubit(state, node)
            eWeight = abs(state[eExcIndex(node)]) ** 2
            worst = max(worst, abs(q.trace + eWeight - 1.0))
    return _within(worst, 1e-10, "max |tr q + p_e − 1|")


def checkSweepDeterminism() -> CheckOutcome:
    spec = SweepSpec(
        scenarioId="determinism",
        baseParams=_nominal(),
        axes=(SweepAxis("omega_factor", (0.03, 0.05)), SweepAxis("v_factor", (0.5, 1.0))),
        mode=EvolutionMode.FULL_CLOSED,
        observable=ObservableKind.CLONE_FIDELITY,
    )
    first = experiments.runSweep(spec)
    second = experiments.runSweep(replace(spec, workers=3))
    same = [a.toDict() for a in first] == [b.toDict() for b in second]
    return same and len(first) == 4, f"{len(first)} rows, serial and threaded identical: {same}"


def checkZenoConvergence() -> CheckOutcome:
    fWeak, _ = experiments.wFidelityAtProtocol(_nominal(omegaFactor=0.005), EvolutionMode.FULL_CLOSED)
    fStrong, _ = experiments.wFidelityAtProtocol(_nominal(omegaFactor=0.1), EvolutionMode.FULL_CLOSED)
    return fWeak >= 0.999 and fStrong >= 0.90, f"F(Ω=0.005g′) = {fWeak:.6f}, F(Ω=0.1g′) = {fStrong:.6f}"


def checkCavityInsensitivity() -> CheckOutcome:
    values = [
        experiments.wFidelityAtProtocol(_nominal(kappaFactor=kappa), EvolutionMode.FULL_OPEN)[0] for kappa in (0.0, 0.01)
    ]
    drop = values[0] - values[1]
    return _within(drop, 0.01, "F(κ′=0) − F(κ′=0.01)")


def checkScalingLaw() -> CheckOutcome:
    slope = experiments.runScalingLaw().metadata["slope"]
    return abs(slope - 0.5) <= 0.02, f"log t₀ / log M slope = {slope:.4f}"


CHECKS: List[Check] = [
    Check("hamiltonian hermiticity", "model", checkHermiticity),
    Check("basis indexing", "model", checkBasisIndexing),
    Check("matrix-element provenance", "model", checkMatrixElementProvenance),
    Check("collapse channel targets", "model", checkCollapseTargets),
    Check("dark-state annihilation", "zeno", checkDarkStateAnnihilation),
    Check("effective closed form", "zeno", checkClosedFormEvolution),
    Check("amplitude completeness", "zeno", checkAmplitudeCompleteness),
    Check("zeno projection couplings", "zeno", checkZenoProjection),
    Check("w state at protocol time", "zeno", checkWStateAtProtocolTime),
    Check("clone fidelity formula", "zeno", checkCloneFormula),
    Check("unitary norm conservation", "dynamics", checkNormConservation),
    Check("lindblad trace and positivity", "dynamics", checkLindbladTracePositivity),
    Check("ground population monotone", "dynamics", checkGroundMonotone),
    Check("step-halving consistency", "dynamics", checkStepHalving),
    Check("open model zero-rate limit", "dynamics", checkOpenClosedLimit),
    Check("deep zeno clone agreement", "dynamics", checkDeepZenoCloneAgreement),
    Check("deep zeno state overlap", "dynamics", checkDeepZenoStateOverlap),
    Check("delta independence", "observables", checkDeltaIndependence),
    Check("qubit symmetry", "observables", checkQubitSymmetry),
    Check("logical trace bookkeeping", "observables", checkLogicalTrace),
    Check("sweep determinism", "experiments", checkSweepDeterminism),
    Check("zeno convergence", "experiments", checkZenoConvergence),
    Check("cavity-decay insensitivity", "experiments", checkCavityInsensitivity),
    Check("scaling law", "experiments", checkScalingLaw),
]


def runChecks(only: Optional[str] = None, checks: Optional[List[Check]] = None) -> List[CheckResult]:
    """
    Run the invariant suite.

    Args:
        only: Restrict to one group of GROUPS
        checks: Check list; defaults to CHECKS

    Returns:
        One CheckResult per executed check, in declaration order
    """
    if only is not None and only not in GROUPS:
        raise ConfigError(f"unknown check group '{only}'; valid groups: {', '.join(GROUPS)}", key="only")
    results = []
    for check in checks if checks is not None else CHECKS:
        if only is not None and check.group != only:
            continue
        try:
            passed, detail = check.run()
        except (ZenoCloneError, ArithmeticError, ValueError) as e:
            passed, detail = False, f"{type(e).__name__}: {e}"
        if passed:
            logger.info("check passed: %s (%s)", check.name, detail)
        else:
            logger.error("check failed: %s (%s)", check.name, detail)
        results.append(CheckResult(check.name, check.group, bool(passed), detail))
    return results


def summarize(results: List[CheckResult]) -> Dict[str, int]:
    """Pass and fail counts."""
    failed = sum(1 for r in results if not r.passed)
    return {"passed": len(results) - failed, "failed": failed}
