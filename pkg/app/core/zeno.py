"""Zeno-projected effective model and its closed-form results.

In the strong-coupling limit the measurement Hamiltonian H_I splits the
subspace into invariant sectors. The drive only acts inside the zero sector,
spanned by the ground state, the f-excitations and the dark state, where the
dynamics reduce to a star graph: every F(x) couples to the dark state with
strength Ω_x·⟨E(x)|d⟩.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg

from app.core.errors import NumericalError, ParameterError
from app.models.basis import FIBER_INDEX, eExcIndex, fExcIndex
from app.models.quantum_types import DarkState, StateVector, ZenoAmplitudes
from app.models.system_params import SystemParams
from app.utils.linalg_utils import dagger, hermiticityError

logger = logging.getLogger(__name__)

# Relative tolerance grouping eigenvalues of the measurement Hamiltonian
DEFAULT_DEGENERACY_TOL = 1e-9

# Gaps between tol and AMBIGUITY_FACTOR·tol cannot be classified safely
AMBIGUITY_FACTOR = 1e3


def darkState(params: SystemParams) -> DarkState:
    """
    Zero-eigenvalue state of H_I without cavity components.

    Components are ∝ v_x/g′_x on E(x) and −1 on the fiber photon, which for
    uniform nodes gives v/√(Nv²+Mg²) on every e-state and −√M·g/√(Nv²+Mg²)
    on the fiber.

    Args:
        params: System parameters

    Returns:
        DarkState with unit-norm vector and η = ⟨E(1)|d⟩
    """
    gPrimes = [params.nodeGPrime(x) for x in params.nodes]
    vector = np.zeros(params.dimension, dtype=complex)

    if all(gp > 0 for gp in gPrimes):
        reference = max(gPrimes)
        for node, gp in zip(params.nodes, gPrimes):
            vector[eExcIndex(node)] = params.nodeV(node) * reference / gp
        vector[FIBER_INDEX] = -reference
    elif all(gp == 0 for gp in gPrimes):
        # Atoms decoupled from their cavities: the drive sees the bare e-states.
        for node in params.nodes:
            vector[eExcIndex(node)] = params.nodeV(node)
    else:
        raise ParameterError("dark state is not unique when only some nodes have g = 0")

    norm = np.linalg.norm(vector)
    if norm == 0:
        raise ParameterError("dark state undefined: all couplings vanish")
    vector /= norm
    return DarkState(vector=vector, eta=float(np.real(vector[eExcIndex(1)])))


def darkCouplings(params: SystemParams, dark: Optional[DarkState] = None) -> np.ndarray:
    """
    Couplings c_x = Ω_x·⟨E(x)|d⟩ of each f-excitation to the dark state.

    Args:
        params: System parameters
        dark: Precomputed dark state

    Returns:
        Real array of length N, node order
    """
    if dark is None:
        dark = darkState(params)
    return np.array(
        [params.nodeOmega(x) * np.real(dark.vector[eExcIndex(x)]) for x in params.nodes]
    )


def zenoSectors(
    hMeasure: np.ndarray, degeneracyTol: Optional[float] = None
) -> List[Tuple[float, np.ndarray]]:
    """
    Eigenprojections of a measurement Hamiltonian.

    Args:
        hMeasure: Hermitian matrix
        degeneracyTol: Absolute tolerance for grouping eigenvalues; defaults to
            1e-9 times the spectral radius

    Returns:
        List of (eigenvalue, projector), eigenvalues ascending
    """
    if hermiticityError(hMeasure) > 1e-10 * max(1.0, float(np.max(np.abs(hMeasure), initial=0.0))):
        raise ParameterError("measurement Hamiltonian is not Hermitian")

    eigenvalues, eigenvectors = scipy.linalg.eigh(hMeasure)
    radius = float(np.max(np.abs(eigenvalues), initial=0.0))
    tol = DEFAULT_DEGENERACY_TOL * radius if degeneracyTol is None else degeneracyTol

    clusters: List[List[int]] = [[0]]
    for i in range(1, len(eigenvalues)):
        gap = eigenvalues[i] - eigenvalues[i - 1]
        if gap <= tol:
            clusters[-1].append(i)
        elif gap <= AMBIGUITY_FACTOR * tol:
            raise NumericalError(
                f"ambiguous degeneracy: eigenvalues {eigenvalues[i - 1]:.3e} and {eigenvalues[i]:.3e} "
                f"differ by {gap:.3e}, within {AMBIGUITY_FACTOR:g}x the tolerance {tol:.3e}"
            )
        else:
            clusters.append([i])

    sectors = []
    for members in clusters:
        basis = eigenvectors[:, members]
        sectors.append((float(np.mean(eigenvalues[members])), basis @ dagger(basis)))
    return sectors


def zenoProjectedHamiltonian(
    hMeasure: np.ndarray, hSystem: np.ndarray, degeneracyTol: Optional[float] = None
) -> np.ndarray:
    """
    Leading-order Zeno Hamiltonian Σ_n (λ_n P_n + P_n H P_n).

    Args:
        hMeasure: Strong measurement Hamiltonian
        hSystem: Weak system Hamiltonian
        degeneracyTol: Eigenvalue grouping tolerance (see zenoSectors)

    Returns:
        Hermitian matrix, block diagonal in the Zeno sectors
    """
    if hMeasure.shape != hSystem.shape:
        raise ParameterError(f"shape mismatch {hMeasure.shape} vs {hSystem.shape}")
    if hermiticityError(hSystem) > 1e-10 * max(1.0, float(np.max(np.abs(hSystem), initial=0.0))):
        raise ParameterError("system Hamiltonian is not Hermitian")

    result = np.zeros_like(hSystem, dtype=complex)
    for eigenvalue, proj in zenoSectors(hMeasure, degeneracyTol):
        result += eigenvalue * proj + proj @ hSystem @ proj
    return result


def effectiveHamiltonian(params: SystemParams) -> np.ndarray:
    """
    Closed-form effective Hamiltonian Σ_x c_x (|F(x)⟩⟨d| + h.c.).

    Args:
        params: System parameters

    Returns:
        Hermitian (3N+2)×(3N+2) matrix
    """
    dark = darkState(params)
    couplings = darkCouplings(params, dark)
    half = np.zeros((params.dimension, params.dimension), dtype=complex)
    for node, coupling in zip(params.nodes, couplings):
        half[fExcIndex(node), :] += coupling * dark.vector.conj()
    return half + dagger(half)


def rabiMu(params: SystemParams) -> float:
    """
    Oscillation frequency μ of the effective three-level dynamics.

    Equals v√(Ω₁² + (N−1)Ω²)/√(Nv²+Mg²) for uniform nodes; zero without drive.
    """
    return float(np.linalg.norm(darkCouplings(params)))


def analyticSeries(params: SystemParams, times: np.ndarray) -> np.ndarray:
    """
    Closed-form evolution of φ₁ under the effective Hamiltonian.

    ψ(t) = φ₁ + (c₁/μ)[(cos μt − 1)|b⟩ − i sin μt |d⟩] with the bright state
    |b⟩ = Σ_x c_x|F(x)⟩/μ.

    Args:
        params: System parameters
        times: 1-D array of times

    Returns:
        Array of shape (len(times), 3N+2)
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    states = np.zeros((len(times), params.dimension), dtype=complex)
    states[:, fExcIndex(1)] = 1.0

    dark = darkState(params)
    couplings = darkCouplings(params, dark)
    mu = float(np.linalg.norm(couplings))
    if mu == 0:
        return states

    bright = np.zeros(params.dimension, dtype=complex)
    for node, coupling in zip(params.nodes, couplings):
        bright[fExcIndex(node)] = coupling / mu
    weight = couplings[0] / mu
    cosTerm = np.cos(mu * times) - 1.0
    sinTerm = np.sin(mu * times)
    states += weight * (np.outer(cosTerm, bright) - 1j * np.outer(sinTerm, dark.vector))
    return states


def analyticState(params: SystemParams, t: float) -> StateVector:
    """State |Φ(t)⟩ of the effective model starting from φ₁."""
    return analyticSeries(params, np.array([t]))[0]


def _requireUniformDrive(params: SystemParams):
    if not params.isUniform:
        raise ParameterError("closed-form amplitudes require identical nodes (no Ω, g or v overrides)")
    if params.omega <= 0:
        raise ParameterError("closed-form amplitudes need Ω > 0; use analyticState instead")


def amplitudesABCD(params: SystemParams, t: float) -> ZenoAmplitudes:
    """
    Amplitudes A, B, C, D of the effective evolution.

    Written with the common factor [Ω₁/Ω + (N−1)Ω/Ω₁]^(-1) multiplied through,
    which keeps C and D normalised consistently with A and B.

    Args:
        params: Uniform-node parameters with Ω > 0
        t: Time

    Returns:
        ZenoAmplitudes
    """
    _requireUniformDrive(params)
    n = params.nCavities
    omega, omega1 = params.omega, params.omega1
    bright2 = omega1 ** 2 + (n - 1) * omega ** 2
    root = math.sqrt(n * params.v ** 2 + params.mAtoms * params.g ** 2)
    mu = params.v * math.sqrt(bright2) / root
    cosine, sine = math.cos(mu * t), math.sin(mu * t)
    darkAmplitude = -1j * sine * omega1 / math.sqrt(bright2)
    return ZenoAmplitudes(
        a=complex((omega1 ** 2 * cosine + (n - 1) * omega ** 2) / bright2),
        b=complex(omega1 * omega * (cosine - 1.0) / bright2),
        c=darkAmplitude * params.v / root,
        d=-darkAmplitude * params.gPrime / root,
    )


@dataclass(frozen=True)
class ProtocolSchedule:
    """Drive ratio and interaction time that produce the W state."""

    omega1Required: float
    tN: float
    mu: float


def protocolParams(params: SystemParams) -> SystemParams:
    """Copy of params with Ω₁ = (√N+1)Ω and no node-1 Ω override."""
    omegaNodes = {k: val for k, val in params.omegaNodes.items() if k != 1}
    return params.withOverrides(
        omega1=(math.sqrt(params.nCavities) + 1.0) * params.omega, omegaNodes=omegaNodes
    )


def protocolSchedule(params: SystemParams, n: int = 0) -> ProtocolSchedule:
    """
    Ω₁ = (√N+1)Ω and t_n = (2n+1)π/μ.

    Args:
        params: System parameters (Ω₁ is replaced)
        n: Schedule index ≥ 0

    Returns:
        ProtocolSchedule
    """
    if n < 0:
        raise ParameterError(f"schedule index must be >= 0, got {n}")
    if params.omega <= 0:
        raise ParameterError("no schedule: protocol requires Ω > 0")
    scheduled = protocolParams(params)
    mu = rabiMu(scheduled)
    if mu <= 0:
        raise ParameterError("no schedule: μ = 0")
    return ProtocolSchedule(omega1Required=scheduled.omega1, tN=(2 * n + 1) * math.pi / mu, mu=mu)


def solveOmegaForTime(params: SystemParams, tTarget: float) -> float:
    """
    Drive Ω for which the protocol time t₀ equals tTarget.

    μ is linear in Ω once Ω₁ = (√N+1)Ω, so one evaluation at unit drive fixes it.

    Args:
        params: System parameters (Ω, Ω₁ ignored)
        tTarget: Desired protocol time in the params' time unit

    Returns:
        Ω in the params' frequency unit
    """
    if tTarget <= 0:
        raise ParameterError(f"target time must be > 0, got {tTarget}")
    unitDrive = protocolParams(params.withOverrides(omega=1.0))
    muUnit = rabiMu(unitDrive)
    if muUnit <= 0:
        raise ParameterError("no schedule: μ = 0 at unit drive")
    return math.pi / (tTarget * muUnit)


def cloneFidelityFormula(theta: float, nCavities: int) -> float:
    """
    Fidelity of each clone at the protocol time.

    F = cos⁴(θ/2) + sin⁴(θ/2)/N + ((N−1)/N + 2/√N)·cos²(θ/2)·sin²(θ/2)
    """
    if nCavities < 2:
        raise ParameterError(f"N must be >= 2, got {nCavities}")
    c2, s2 = math.cos(theta / 2) ** 2, math.sin(theta / 2) ** 2
    return c2 ** 2 + s2 ** 2 / nCavities + ((nCavities - 1) / nCavities + 2 / math.sqrt(nCavities)) * c2 * s2


def fidelityQubit1Eff(params: SystemParams, t: float, theta: float, frameCorrected: bool = False) -> float:
    """
    Effective-model fidelity of qubit 1 against its own input.

    Args:
        params: Uniform-node parameters with Ω > 0
        t: Time
        theta: Input polar angle
        frameCorrected: Apply the logical |1⟩ → −|1⟩ readout flip

    Returns:
        Fidelity
    """
    amps = amplitudesABCD(params, t)
    if frameCorrected:
        amps = amps.frameCorrected()
    n = params.nCavities
    c2, s2 = math.cos(theta / 2) ** 2, math.sin(theta / 2) ** 2
    bracket = (n - 1) * (abs(amps.b) ** 2 + abs(amps.c) ** 2) + abs(amps.d) ** 2 + 2 * amps.a.real
    return c2 ** 2 + abs(amps.a) ** 2 * s2 ** 2 + c2 * s2 * bracket


def fidelityQubit2Eff(params: SystemParams, t: float, theta: float, frameCorrected: bool = False) -> float:
    """
    Effective-model fidelity of qubit 2 (and by symmetry every qubit j ≥ 3).

    Args:
        params: Uniform-node parameters with Ω > 0
        t: Time
        theta: Input polar angle
        frameCorrected: Apply the logical |1⟩ → −|1⟩ readout flip

    Returns:
        Fidelity
    """
    amps = amplitudesABCD(params, t)
    if frameCorrected:
        amps = amps.frameCorrected()
    n = params.nCavities
    c2, s2 = math.cos(theta / 2) ** 2, math.sin(theta / 2) ** 2
    bracket = (
        (n - 2) * (abs(amps.b) ** 2 + abs(amps.c) ** 2)
        + abs(amps.a) ** 2
        + abs(amps.c) ** 2
        + abs(amps.d) ** 2
        + 2 * amps.b.real
    )
    return c2 ** 2 + abs(amps.b) ** 2 * s2 ** 2 + c2 * s2 * bracket


def firstOptimumTime(times: np.ndarray, values: np.ndarray) -> Optional[float]:
    """
    Time of the first interior local maximum of a sampled trace.

    Args:
        times: Sorted sample times
        values: Trace values at those times

    Returns:
        The time, or None when the trace has no interior maximum
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.shape != values.shape:
        raise ParameterError(f"shape mismatch {times.shape} vs {values.shape}")
    for k in range(1, len(values) - 1):
        if values[k] >= values[k - 1] and values[k] > values[k + 1]:
            return float(times[k])
    return None
