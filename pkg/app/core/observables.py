"""Figures of merit: W-state fidelity, logical-qubit reductions, clone fidelities, populations."""

import math
from typing import Iterable, List, Tuple

import numpy as np

from app.core.errors import ParameterError
from app.models.basis import GROUND_INDEX, BasisLabel, eExcIndex, enumerateBasis, fExcIndex
from app.models.quantum_types import LogicalQubitMatrix


def _dimensionToN(dimension: int) -> int:
    nCavities, remainder = divmod(dimension - 2, 3)
    if remainder or nCavities < 2:
        raise ParameterError(f"dimension {dimension} is not 3N+2 for N >= 2")
    return nCavities


def reduceToLogicalQubit(state: np.ndarray, node: int) -> LogicalQubitMatrix:
    """
    Reduced matrix of the ensemble qubit at one node.

    |1⟩_L is the node's f-excitation; every basis state that leaves the node's
    ensemble all-ground counts towards |0⟩_L. The node's own e-excitation
    belongs to neither, so the result may be sub-normalised. Only the global
    ground state shares its environment with |1⟩_L, so it alone carries the
    coherence.

    Args:
        state: State vector or density matrix over the canonical basis
        node: 1-based node index

    Returns:
        LogicalQubitMatrix
    """
    nCavities = _dimensionToN(state.shape[0])
    if not 1 <= node <= nCavities:
        raise ParameterError(f"node {node} outside 1..{nCavities}")
    fIndex, eIndex = fExcIndex(node), eExcIndex(node)
    zeroSet = [i for i in range(state.shape[0]) if i not in (fIndex, eIndex)]

    matrix = np.zeros((2, 2), dtype=complex)
    if state.ndim == 1:
        matrix[0, 0] = np.sum(np.abs(state[zeroSet]) ** 2)
        matrix[1, 1] = abs(state[fIndex]) ** 2
        matrix[0, 1] = state[GROUND_INDEX] * np.conj(state[fIndex])
    else:
        matrix[0, 0] = np.real(np.sum(np.diag(state)[zeroSet]))
        matrix[1, 1] = np.real(state[fIndex, fIndex])
        matrix[0, 1] = state[GROUND_INDEX, fIndex]
    matrix[1, 0] = np.conj(matrix[0, 1])
    return LogicalQubitMatrix(matrix=matrix, node=node)


def wStateVector(nCavities: int) -> np.ndarray:
    """(1/√N)(φ₁ + Σ_k φ_{3k+1})."""
    basis = enumerateBasis(nCavities)
    w = np.zeros(len(basis), dtype=complex)
    for node in range(1, nCavities + 1):
        w[fExcIndex(node)] = 1.0 / math.sqrt(nCavities)
    return w


def wStateFidelity(state: np.ndarray, nCavities: int) -> float:
    """
    Overlap with the W state, |⟨W|ψ⟩|² or ⟨W|ρ|W⟩.

    Args:
        state: State vector or density matrix
        nCavities: Number of nodes N

    Returns:
        Fidelity (phase insensitive)
    """
    w = wStateVector(nCavities)
    if state.shape[0] != len(w):
        raise ParameterError(f"state dimension {state.shape[0]} does not match N={nCavities}")
    if state.ndim == 1:
        return float(abs(np.vdot(w, state)) ** 2)
    return float(np.real(np.vdot(w, state @ w)))


def cloneTarget(theta: float, delta: float) -> np.ndarray:
    """cos(θ/2)|0⟩_L + sin(θ/2)e^{iδ}|1⟩_L."""
    return np.array([math.cos(theta / 2), math.sin(theta / 2) * np.exp(1j * delta)], dtype=complex)


def cloneFidelity(q: LogicalQubitMatrix, theta: float, delta: float, frameCorrected: bool = False) -> float:
    """
    Fidelity of a logical qubit against the input orbital state.

    Args:
        q: Reduced logical-qubit matrix
        theta: Target polar angle
        delta: Target phase
        frameCorrected: Flip the sign of the coherences first (logical Z at readout)

    Returns:
        ⟨ψ|q|ψ⟩
    """
    if frameCorrected:
        q = q.frameFlipped()
    target = cloneTarget(theta, delta)
    return float(np.real(np.vdot(target, q.matrix @ target)))


def qubitFidelityTrace(
    states: Iterable[np.ndarray], node: int, theta: float, delta: float, frameCorrected: bool = False
) -> np.ndarray:
    """Clone fidelity of one node along a sequence of states."""
    return np.array(
        [cloneFidelity(reduceToLogicalQubit(s, node), theta, delta, frameCorrected) for s in states]
    )


def populations(state: np.ndarray) -> List[Tuple[BasisLabel, float]]:
    """
    Per-basis-state probabilities.

    Args:
        state: State vector or density matrix

    Returns:
        (label, probability) in canonical order; sums to the norm² / trace
    """
    basis = enumerateBasis(_dimensionToN(state.shape[0]))
    if state.ndim == 1:
        probs = np.abs(state) ** 2
    else:
        probs = np.real(np.diag(state))
    return [(label, float(p)) for label, p in zip(basis, probs)]
