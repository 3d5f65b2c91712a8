"""Dynamical objects shared by the simulator modules."""

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np

from app.core.errors import NumericalError, ParameterError
from app.models.basis import FIBER_INDEX


# Complex amplitudes over the canonical basis, shape (3N+2,)
StateVector = np.ndarray

# Complex matrix over the canonical basis, shape (3N+2, 3N+2)
DensityMatrix = np.ndarray

# Ceiling on dt·‖H‖ for the fixed-step integrator
STABILITY_LIMIT = 0.1

# Default step rule: dt = DEFAULT_STEP_FACTOR / max(‖H‖, max rate)
DEFAULT_STEP_FACTOR = 0.02


class CollapseOp(NamedTuple):
    """Decay channel: rate r and jump matrix L entering r·D[L]."""

    rate: float
    jump: np.ndarray


class InitialKind(str, Enum):
    """Initial-state preparations."""

    W_SEED = "w_seed"
    CLONE_INPUT = "clone_input"


@dataclass(frozen=True)
class ZenoAmplitudes:
    """Closed-form amplitudes on φ₁, each φ_{3k+1}, each e-state and the fiber."""

    a: complex
    b: complex
    c: complex
    d: complex

    def completeness(self, nCavities: int) -> float:
        """|A|² + (N−1)|B|² + N|C|² + |D|²."""
        return (
            abs(self.a) ** 2
            + (nCavities - 1) * abs(self.b) ** 2
            + nCavities * abs(self.c) ** 2
            + abs(self.d) ** 2
        )

    def frameCorrected(self) -> "ZenoAmplitudes":
        """Amplitudes after the logical flip |1⟩ → −|1⟩ on every node."""
        return ZenoAmplitudes(-self.a, -self.b, self.c, self.d)


@dataclass(frozen=True)
class DarkState:
    """Zero-eigenvalue state of the measurement Hamiltonian with no cavity photon."""

    vector: StateVector
    eta: float

    @property
    def fiberWeight(self) -> float:
        """Population of the fiber photon in the dark state."""
        return float(abs(self.vector[FIBER_INDEX]) ** 2)


@dataclass(frozen=True)
class LogicalQubitMatrix:
    """
    Reduced 2×2 matrix of one ensemble qubit.

    Basis |0⟩_L (all atoms in g) and |1⟩_L (one collective f-excitation).
    May be sub-normalized when the node carries an e-excitation.
    """

    matrix: np.ndarray
    node: int

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def frameFlipped(self) -> "LogicalQubitMatrix":
        """Apply the logical Z readout correction (sign flip of coherences)."""
        flipped = self.matrix.copy()
        flipped[0, 1] = -flipped[0, 1]
        flipped[1, 0] = -flipped[1, 0]
        return LogicalQubitMatrix(flipped, self.node)


class IntegratorMethod(str, Enum):
    """Propagation method."""

    EXPM = "expm"
    RK4 = "rk4"


@dataclass(frozen=True)
class IntegratorConfig:
    """
    Propagation settings.

    dt is only used by the RK4 method; None selects the default step rule.
    errorCap optionally bounds the norm or trace drift per unit time.
    """

    method: IntegratorMethod = IntegratorMethod.EXPM
    dt: Optional[float] = None
    errorCap: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "method", IntegratorMethod(self.method))
        if self.dt is not None and not self.dt > 0:
            raise ParameterError(f"dt must be > 0, got {self.dt!r}")
        if self.errorCap is not None and not self.errorCap > 0:
            raise ParameterError(f"errorCap must be > 0, got {self.errorCap!r}")

    def resolveStep(self, generatorScale: float) -> float:
        """
        Step size to use against a generator of the given norm.

        Args:
            generatorScale: max(‖H‖, max rate)

        Returns:
            dt satisfying the stability heuristic
        """
        if generatorScale <= 0:
            return self.dt if self.dt is not None else 1.0
        if self.dt is None:
            return DEFAULT_STEP_FACTOR / generatorScale
        if self.dt * generatorScale > STABILITY_LIMIT * (1 + 1e-12):
            raise NumericalError(
                f"dt={self.dt:g} violates dt*|H| <= {STABILITY_LIMIT} (|H|={generatorScale:g})"
            )
        return self.dt

    @classmethod
    def defaultFor(cls, hamiltonian: np.ndarray, collapseOps=()) -> "IntegratorConfig":
        """
        RK4 settings with the default step rule for a given generator.

        Args:
            hamiltonian: System Hamiltonian
            collapseOps: Decay channels whose rates enter the step rule

        Returns:
            IntegratorConfig with dt = 0.02/max(‖H‖, max rate)
        """
        scale = max([float(np.linalg.norm(hamiltonian, 2))] + [op.rate for op in collapseOps])
        return cls(method=IntegratorMethod.RK4, dt=DEFAULT_STEP_FACTOR / scale if scale > 0 else None)
