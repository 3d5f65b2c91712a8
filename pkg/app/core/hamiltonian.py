"""Hamiltonian, decay channels and initial states in the single-excitation subspace."""

import logging
import math
from dataclasses import dataclass
from typing import List

import numpy as np

from app.core.errors import ParameterError
from app.models.basis import (
    FIBER_INDEX,
    GROUND_INDEX,
    cavityIndex,
    eExcIndex,
    fExcIndex,
)
from app.models.quantum_types import (
    CollapseOp,
    DensityMatrix,
    InitialKind,
    StateVector,
)
from app.models.system_params import GEOMETRY_M_LIMIT, SystemParams

logger = logging.getLogger(__name__)

# Interatomic distance prefactor in µm for d ≈ 4.1·M^(-1/2) µm
GEOMETRY_DISTANCE_UM = 4.1


def _zeros(params: SystemParams) -> np.ndarray:
    return np.zeros((params.dimension, params.dimension), dtype=complex)


def _couple(matrix: np.ndarray, row: int, col: int, value: float):
    matrix[row, col] += value
    matrix[col, row] += np.conj(value)


def buildHLaser(params: SystemParams) -> np.ndarray:
    """
    Driving part: Ω_x |E(x)⟩⟨F(x)| + h.c.

    Args:
        params: System parameters

    Returns:
        Hermitian (3N+2)×(3N+2) matrix
    """
    hLaser = _zeros(params)
    for node in params.nodes:
        _couple(hLaser, eExcIndex(node), fExcIndex(node), params.nodeOmega(node))
    return hLaser


def buildHI(params: SystemParams) -> np.ndarray:
    """
    Measurement part: √M·g_x |E(x)⟩⟨C(x)| + v_x |fiber⟩⟨C(x)| + h.c.

    Args:
        params: System parameters

    Returns:
        Hermitian (3N+2)×(3N+2) matrix
    """
    hI = _zeros(params)
    for node in params.nodes:
        _couple(hI, eExcIndex(node), cavityIndex(node), params.nodeGPrime(node))
        _couple(hI, FIBER_INDEX, cavityIndex(node), params.nodeV(node))
    return hI


def buildHTotal(params: SystemParams) -> np.ndarray:
    """Full Hamiltonian H_laser + H_I restricted to the subspace."""
    return buildHLaser(params) + buildHI(params)


def buildCollapseOps(params: SystemParams) -> List[CollapseOp]:
    """
    Decay channels of the network.

    Every excited state decays to the global ground state with unit amplitude.
    A fraction branchingEF of γ is routed E(x) → F(x) instead. Zero-rate
    channels are omitted.

    Args:
        params: System parameters

    Returns:
        List of (rate, jump matrix)
    """
    ops: List[CollapseOp] = []

    def jump(target: int, source: int) -> np.ndarray:
        op = _zeros(params)
        op[target, source] = 1.0
        return op

    for node in params.nodes:
        kappa = params.nodeKappa(node)
        if kappa > 0:
            ops.append(CollapseOp(kappa, jump(GROUND_INDEX, cavityIndex(node))))
    for node in params.nodes:
        gamma = params.nodeGamma(node)
        toGround = gamma * (1.0 - params.branchingEF)
        toF = gamma * params.branchingEF
        if toGround > 0:
            ops.append(CollapseOp(toGround, jump(GROUND_INDEX, eExcIndex(node))))
        if toF > 0:
            ops.append(CollapseOp(toF, jump(fExcIndex(node), eExcIndex(node))))
    if params.beta > 0:
        ops.append(CollapseOp(params.beta, jump(GROUND_INDEX, FIBER_INDEX)))
    return ops


def initialState(params: SystemParams, kind: InitialKind) -> StateVector:
    """
    Prepared state of the network.

    Args:
        params: System parameters (θ, δ used by CloneInput)
        kind: W_SEED puts the excitation on φ₁; CLONE_INPUT superposes ground and φ₁

    Returns:
        Unit-norm state vector
    """
    psi = np.zeros(params.dimension, dtype=complex)
    kind = InitialKind(kind)
    if kind is InitialKind.W_SEED:
        psi[fExcIndex(1)] = 1.0
    else:
        psi[GROUND_INDEX] = math.cos(params.theta / 2)
        psi[fExcIndex(1)] = math.sin(params.theta / 2) * np.exp(1j * params.delta)
    return psi


def initialDensity(params: SystemParams, kind: InitialKind) -> DensityMatrix:
    """Projector onto initialState."""
    psi = initialState(params, kind)
    return np.outer(psi, psi.conj())


@dataclass(frozen=True)
class GeometryCheck:
    """Interatomic distance estimate for an ensemble of M atoms."""

    distanceUm: float
    feasible: bool


def ensembleGeometryCheck(mAtoms: int) -> GeometryCheck:
    """
    Feasibility heuristic for neglecting dipole-dipole interaction.

    Args:
        mAtoms: Atoms per ensemble

    Returns:
        GeometryCheck with d = 4.1·M^(-1/2) µm and feasible = M < 200
    """
    if not isinstance(mAtoms, int) or mAtoms < 1:
        raise ParameterError(f"M must be an integer >= 1, got {mAtoms!r}")
    feasible = mAtoms < GEOMETRY_M_LIMIT
    if not feasible:
        logger.warning("M=%d: interatomic distance too small, dipole-dipole coupling not negligible", mAtoms)
    return GeometryCheck(distanceUm=GEOMETRY_DISTANCE_UM / math.sqrt(mAtoms), feasible=feasible)
