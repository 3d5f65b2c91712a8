"""Labels of the single-excitation basis."""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple

from app.core.errors import ParameterError


GROUND_INDEX = 0
FIBER_INDEX = 4


class LabelKind(str, Enum):
    """Kind of excitation carried by a basis state."""

    GLOBAL_GROUND = "GlobalGround"
    F_EXC = "FExc"
    E_EXC = "EExc"
    CAVITY_PHOTON = "CavityPhoton"
    FIBER_PHOTON = "FiberPhoton"


@dataclass(frozen=True)
class BasisLabel:
    """One basis state: excitation kind plus the node carrying it."""

    kind: LabelKind
    node: Optional[int] = None

    @classmethod
    def globalGround(cls) -> "BasisLabel":
        return cls(LabelKind.GLOBAL_GROUND)

    @classmethod
    def fExc(cls, node: int) -> "BasisLabel":
        return cls(LabelKind.F_EXC, node)

    @classmethod
    def eExc(cls, node: int) -> "BasisLabel":
        return cls(LabelKind.E_EXC, node)

    @classmethod
    def cavityPhoton(cls, node: int) -> "BasisLabel":
        return cls(LabelKind.CAVITY_PHOTON, node)

    @classmethod
    def fiberPhoton(cls) -> "BasisLabel":
        return cls(LabelKind.FIBER_PHOTON)

    def __str__(self) -> str:
        if self.node is None:
            return self.kind.value
        return f"{self.kind.value}({self.node})"


def fExcIndex(node: int) -> int:
    """Index of the f-excitation of node x (φ₁ or φ_{3x+1})."""
    return 1 if node == 1 else 3 * node + 1


def eExcIndex(node: int) -> int:
    """Index of the e-excitation of node x (φ₂ or φ_{3x})."""
    return 2 if node == 1 else 3 * node


def cavityIndex(node: int) -> int:
    """Index of the photon in cavity x (φ₃ or φ_{3x−1})."""
    return 3 if node == 1 else 3 * node - 1


class SubspaceBasis:
    """Ordered basis of dimension 3N+2 with label↔index lookup."""

    def __init__(self, nCavities: int):
        """
        Initialize basis.

        Args:
            nCavities: Number of nodes N
        """
        self.nCavities = nCavities
        labels: List[BasisLabel] = [BasisLabel.globalGround()] * (3 * nCavities + 2)
        labels[FIBER_INDEX] = BasisLabel.fiberPhoton()
        for node in range(1, nCavities + 1):
            labels[fExcIndex(node)] = BasisLabel.fExc(node)
            labels[eExcIndex(node)] = BasisLabel.eExc(node)
            labels[cavityIndex(node)] = BasisLabel.cavityPhoton(node)
        self.labels: Tuple[BasisLabel, ...] = tuple(labels)
        self._index: Dict[BasisLabel, int] = {label: i for i, label in enumerate(self.labels)}

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def labelAt(self, index: int) -> BasisLabel:
        """Label at a canonical index."""
        if not 0 <= index < len(self.labels):
            raise ParameterError(f"index {index} outside 0..{len(self.labels) - 1}")
        return self.labels[index]

    def indexOf(self, label: BasisLabel) -> int:
        """Canonical index of a label."""
        try:
            return self._index[label]
        except KeyError:
            raise ParameterError(f"label {label} not in basis for N={self.nCavities}") from None


def enumerateBasis(nCavities: int) -> SubspaceBasis:
    """
    Enumerate the 3N+2 basis states in canonical order.

    Index 0 is the global ground state; index j ≥ 1 is φ_j.

    Args:
        nCavities: Number of nodes N

    Returns:
        SubspaceBasis
    """
    if not isinstance(nCavities, int) or nCavities < 2:
        raise ParameterError(f"N must be an integer >= 2, got {nCavities!r}")
    return SubspaceBasis(nCavities)
