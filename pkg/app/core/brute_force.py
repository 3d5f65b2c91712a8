"""Full Hilbert-space Hamiltonian for small ensembles, projected onto Dicke states.

Used to check the collective √M matrix elements of the subspace model against
an explicit construction with M three-level atoms per node.
"""

import math
from typing import List

import numpy as np
import scipy.sparse as sp

from app.core.errors import ParameterError
from app.models.basis import FIBER_INDEX, GROUND_INDEX, cavityIndex, eExcIndex, fExcIndex
from app.models.system_params import SystemParams

# Atomic levels
LEVEL_G, LEVEL_F, LEVEL_E = 0, 1, 2

# Hilbert-space size above which the explicit construction is refused
MAX_FULL_DIMENSION = 2_000_000

_SIGMA_EG = sp.csr_matrix(([1.0], ([LEVEL_E], [LEVEL_G])), shape=(3, 3), dtype=complex)
_SIGMA_EF = sp.csr_matrix(([1.0], ([LEVEL_E], [LEVEL_F])), shape=(3, 3), dtype=complex)
_ANNIHILATE = sp.csr_matrix(([1.0], ([0], [1])), shape=(2, 2), dtype=complex)


class FullSpace:
    """Tensor-product layout: for each node M atoms then its cavity, finally the fiber."""

    def __init__(self, nCavities: int, mAtoms: int):
        self.nCavities = nCavities
        self.mAtoms = mAtoms
        self.dims: List[int] = []
        for _ in range(nCavities):
            self.dims += [3] * mAtoms + [2]
        self.dims.append(2)
        self.dimension = int(np.prod(self.dims))
        self.strides = [int(np.prod(self.dims[k + 1:])) for k in range(len(self.dims))]

    def atomSlot(self, node: int, atom: int) -> int:
        return (node - 1) * (self.mAtoms + 1) + atom

    def cavitySlot(self, node: int) -> int:
        return (node - 1) * (self.mAtoms + 1) + self.mAtoms

    @property
    def fiberSlot(self) -> int:
        return len(self.dims) - 1

    def embed(self, op: sp.spmatrix, slot: int) -> sp.csr_matrix:
        """Local operator acting on one tensor factor."""
        before = int(np.prod(self.dims[:slot]))
        after = int(np.prod(self.dims[slot + 1:]))
        return sp.kron(sp.kron(sp.identity(before, format="csr"), op), sp.identity(after, format="csr"), format="csr")

    def excitedIndex(self, slot: int, level: int) -> int:
        """Computational index with a single factor raised to level."""
        return self.strides[slot] * level


def fullHamiltonian(params: SystemParams, space: FullSpace) -> sp.csr_matrix:
    """
    Explicit H_laser + H_I over the full tensor-product space.

    Args:
        params: System parameters
        space: Tensor layout

    Returns:
        Sparse Hermitian matrix
    """
    h = sp.csr_matrix((space.dimension, space.dimension), dtype=complex)
    fiberAnnihilate = space.embed(_ANNIHILATE, space.fiberSlot)
    for node in params.nodes:
        cavityAnnihilate = space.embed(_ANNIHILATE, space.cavitySlot(node))
        for atom in range(space.mAtoms):
            slot = space.atomSlot(node, atom)
            h = h + params.nodeOmega(node) * space.embed(_SIGMA_EF, slot)
            h = h + params.nodeG(node) * (cavityAnnihilate @ space.embed(_SIGMA_EG, slot))
        h = h + params.nodeV(node) * (fiberAnnihilate.conj().T @ cavityAnnihilate)
    h = h + h.conj().T
    return h.tocsr()


def dickeBasis(params: SystemParams, space: FullSpace) -> sp.csc_matrix:
    """
    Columns are the 3N+2 symmetric basis states embedded in the full space.

    Args:
        params: System parameters
        space: Tensor layout

    Returns:
        Sparse isometry V of shape (full dimension, 3N+2)
    """
    rows, cols, values = [0], [GROUND_INDEX], [1.0]
    weight = 1.0 / math.sqrt(space.mAtoms)
    for node in params.nodes:
        for atom in range(space.mAtoms):
            slot = space.atomSlot(node, atom)
            rows += [space.excitedIndex(slot, LEVEL_F), space.excitedIndex(slot, LEVEL_E)]
            cols += [fExcIndex(node), eExcIndex(node)]
            values += [weight, weight]
        rows.append(space.excitedIndex(space.cavitySlot(node), 1))
        cols.append(cavityIndex(node))
        values.append(1.0)
    rows.append(space.excitedIndex(space.fiberSlot, 1))
    cols.append(FIBER_INDEX)
    values.append(1.0)
    return sp.csc_matrix((values, (rows, cols)), shape=(space.dimension, params.dimension), dtype=complex)


def bruteForceProjection(params: SystemParams) -> np.ndarray:
    """
    Project the explicit full-space Hamiltonian onto the symmetric subspace.

    Args:
        params: System parameters; M and N must be small

    Returns:
        Dense (3N+2)×(3N+2) matrix V†HV
    """
    space = FullSpace(params.nCavities, params.mAtoms)
    if space.dimension > MAX_FULL_DIMENSION:
        raise ParameterError(
            f"full space of dimension {space.dimension} too large (N={params.nCavities}, M={params.mAtoms})"
        )
    isometry = dickeBasis(params, space)
    projected = isometry.conj().T @ fullHamiltonian(params, space) @ isometry
    return np.asarray(projected.toarray())
