"""Physical parameters of the star-coupled cavity network."""

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional

from app.core.errors import ParameterError


# Quoted "/2π MHz" inputs become angular frequencies in rad/µs here and only here.
MHZ_TO_ANGULAR = 2.0 * math.pi

# Ω/g′ at which the Zeno condition Ω ≪ g′ is considered weakly satisfied
ZENO_RATIO_WARNING = 0.1

# Atom count from which the interatomic distance no longer rules out dipole-dipole coupling
GEOMETRY_M_LIMIT = 200


def mhzToAngular(valueMhz: float) -> float:
    """Convert a frequency quoted as value/2π in MHz to rad/µs."""
    return float(valueMhz) * MHZ_TO_ANGULAR


class UnitMode(str, Enum):
    """Unit convention of a parameter set."""

    DIMENSIONLESS = "dimensionless"
    PHYSICAL = "physical"

    @property
    def timeUnit(self) -> str:
        """Label of the time unit implied by the convention."""
        return "us" if self is UnitMode.PHYSICAL else "1/g'"


@dataclass(frozen=True)
class SystemParams:
    """
    Complete parameter set of the network.

    All couplings and rates are angular frequencies. In physical mode they are
    rad/µs and times are µs; in dimensionless mode the caller picks the scale.
    Per-node overrides are keyed by the 1-based node index.
    """

    nCavities: int
    mAtoms: int
    g: float
    v: float
    omega1: float
    omega: float
    kappa: float = 0.0
    gamma: float = 0.0
    beta: float = 0.0
    theta: float = math.pi / 2
    delta: float = 0.0
    unitMode: UnitMode = UnitMode.DIMENSIONLESS
    omegaNodes: Dict[int, float] = field(default_factory=dict)
    gNodes: Dict[int, float] = field(default_factory=dict)
    vNodes: Dict[int, float] = field(default_factory=dict)
    kappaNodes: Dict[int, float] = field(default_factory=dict)
    gammaNodes: Dict[int, float] = field(default_factory=dict)
    branchingEF: float = 0.0

    def __post_init__(self):
        """Validate every field; raise ParameterError on the first violation."""
        if not isinstance(self.nCavities, int) or self.nCavities < 2:
            raise ParameterError(f"N must be an integer >= 2, got {self.nCavities!r}")
        if not isinstance(self.mAtoms, int) or self.mAtoms < 1:
            raise ParameterError(f"M must be an integer >= 1, got {self.mAtoms!r}")

        for name in ("g", "v", "omega1", "omega", "kappa", "gamma", "beta"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ParameterError(f"{name} must be finite and >= 0, got {value!r}")

        if not 0.0 <= self.theta <= math.pi:
            raise ParameterError(f"theta must lie in [0, pi], got {self.theta!r}")
        if not 0.0 <= self.delta < 2 * math.pi:
            raise ParameterError(f"delta must lie in [0, 2pi), got {self.delta!r}")
        if not 0.0 <= self.branchingEF <= 1.0:
            raise ParameterError(f"branchingEF must lie in [0, 1], got {self.branchingEF!r}")

        for name in ("omegaNodes", "gNodes", "vNodes", "kappaNodes", "gammaNodes"):
            overrides = {int(k): float(val) for k, val in dict(getattr(self, name)).items()}
            for node, value in overrides.items():
                if not 1 <= node <= self.nCavities:
                    raise ParameterError(f"{name}: node {node} outside 1..{self.nCavities}")
                if not math.isfinite(value) or value < 0:
                    raise ParameterError(f"{name}[{node}] must be finite and >= 0, got {value!r}")
            object.__setattr__(self, name, overrides)

        gAny = any(self.nodeG(x) > 0 for x in self.nodes)
        vAny = any(self.nodeV(x) > 0 for x in self.nodes)
        if not (gAny or vAny):
            raise ParameterError("degenerate network: g and v are both zero on every node")

    @classmethod
    def fromGPrimeUnits(
        cls,
        nCavities: int,
        mAtoms: int,
        vFactor: float = 0.5,
        omegaFactor: float = 0.05,
        omega1Factor: Optional[float] = None,
        kappaFactor: float = 0.0,
        gammaFactor: float = 0.0,
        betaFactor: float = 0.0,
        theta: float = math.pi / 2,
        delta: float = 0.0,
        g: Optional[float] = None,
        referenceM: Optional[int] = None,
        **extra,
    ) -> "SystemParams":
        """
        Build dimensionless parameters with frequencies in units of a reference g′.

        Args:
            nCavities: Number of nodes N
            mAtoms: Atoms per ensemble M
            vFactor: v in units of the reference coupling
            omegaFactor: Ω in units of the reference coupling
            omega1Factor: Ω₁ in units of the reference coupling; defaults to (√N+1)·Ω
            kappaFactor: κ in units of g′ (of this M)
            gammaFactor: γ in units of g′ (of this M)
            betaFactor: β in units of g′ (of this M)
            theta: Input polar angle
            delta: Input phase
            g: Per-atom coupling; defaults to 1/√M so that g′ = 1
            referenceM: Atom count defining the reference coupling √referenceM·g;
                defaults to mAtoms
            **extra: Forwarded to the constructor (node overrides, branchingEF)

        Returns:
            Validated SystemParams
        """
        if g is None:
            g = 1.0 / math.sqrt(mAtoms)
        gPrime = math.sqrt(mAtoms) * g
        reference = math.sqrt(referenceM if referenceM is not None else mAtoms) * g
        omega = omegaFactor * reference
        if omega1Factor is None:
            omega1 = (math.sqrt(nCavities) + 1.0) * omega
        else:
            omega1 = omega1Factor * reference
        return cls(
            nCavities=nCavities,
            mAtoms=mAtoms,
            g=g,
            v=vFactor * reference,
            omega1=omega1,
            omega=omega,
            kappa=kappaFactor * gPrime,
            gamma=gammaFactor * gPrime,
            beta=betaFactor * gPrime,
            theta=theta,
            delta=delta,
            unitMode=UnitMode.DIMENSIONLESS,
            **extra,
        )

    @classmethod
    def fromPhysical(
        cls,
        nCavities: int,
        mAtoms: int,
        gMhz: float,
        vFactor: float = 0.5,
        omegaFactor: float = 0.05,
        omega1Factor: Optional[float] = None,
        kappaMhz: float = 0.0,
        gammaMhz: float = 0.0,
        betaMhz: float = 0.0,
        theta: float = math.pi / 2,
        delta: float = 0.0,
        referenceM: Optional[int] = None,
        **extra,
    ) -> "SystemParams":
        """
        Build physical parameters from /2π MHz inputs.

        Args:
            nCavities: Number of nodes N
            mAtoms: Atoms per ensemble M
            gMhz: Per-atom coupling g/2π in MHz
            vFactor: v in units of the reference coupling
            omegaFactor: Ω in units of the reference coupling
            omega1Factor: Ω₁ in units of the reference coupling; defaults to (√N+1)·Ω
            kappaMhz: κ/2π in MHz
            gammaMhz: γ/2π in MHz
            betaMhz: β/2π in MHz
            theta: Input polar angle
            delta: Input phase
            referenceM: Atom count defining the reference coupling; defaults to mAtoms
            **extra: Forwarded to the constructor

        Returns:
            Validated SystemParams in rad/µs
        """
        g = mhzToAngular(gMhz)
        reference = math.sqrt(referenceM if referenceM is not None else mAtoms) * g
        omega = omegaFactor * reference
        omega1 = (math.sqrt(nCavities) + 1.0) * omega if omega1Factor is None else omega1Factor * reference
        return cls(
            nCavities=nCavities,
            mAtoms=mAtoms,
            g=g,
            v=vFactor * reference,
            omega1=omega1,
            omega=omega,
            kappa=mhzToAngular(kappaMhz),
            gamma=mhzToAngular(gammaMhz),
            beta=mhzToAngular(betaMhz),
            theta=theta,
            delta=delta,
            unitMode=UnitMode.PHYSICAL,
            **extra,
        )

    @property
    def nodes(self) -> range:
        """1-based node indices."""
        return range(1, self.nCavities + 1)

    @property
    def gPrime(self) -> float:
        """Collectively enhanced coupling √M·g."""
        return math.sqrt(self.mAtoms) * self.g

    @property
    def dimension(self) -> int:
        """Dimension 3N+2 of the single-excitation subspace plus ground."""
        return 3 * self.nCavities + 2

    def nodeOmega(self, node: int) -> float:
        """Rabi frequency driving node x (Ω₁ on node 1)."""
        default = self.omega1 if node == 1 else self.omega
        return self.omegaNodes.get(node, default)

    def nodeG(self, node: int) -> float:
        """Per-atom coupling g_x."""
        return self.gNodes.get(node, self.g)

    def nodeGPrime(self, node: int) -> float:
        """Collective coupling √M·g_x."""
        return math.sqrt(self.mAtoms) * self.nodeG(node)

    def nodeV(self, node: int) -> float:
        """Cavity-fiber coupling v_x."""
        return self.vNodes.get(node, self.v)

    def nodeKappa(self, node: int) -> float:
        """Cavity decay rate κ_x."""
        return self.kappaNodes.get(node, self.kappa)

    def nodeGamma(self, node: int) -> float:
        """Excited-state decay rate γ_x."""
        return self.gammaNodes.get(node, self.gamma)

    @property
    def isUniform(self) -> bool:
        """True when no Ω, g or v override breaks the node symmetry."""
        return not (self.omegaNodes or self.gNodes or self.vNodes)

    @property
    def maxRate(self) -> float:
        """Largest decay rate in the network."""
        rates = [self.beta]
        rates += [self.nodeKappa(x) for x in self.nodes]
        rates += [self.nodeGamma(x) for x in self.nodes]
        return max(rates)

    def withOverrides(self, **changes) -> "SystemParams":
        """Return a validated copy with the given fields replaced."""
        return replace(self, **changes)

    def regimeFlags(self) -> List[str]:
        """
        List non-fatal regime notes for result metadata.

        Returns:
            Flag strings; empty when the parameters sit inside the analysed regime
        """
        flags = []
        if self.theta > math.pi / 2:
            flags.append("theta_outside_clone_formula_range")
        if self.nCavities == 2:
            flags.append("extrapolated_n2")
        if self.gPrime > 0 and self.omega >= ZENO_RATIO_WARNING * self.gPrime:
            flags.append("zeno_condition_weak")
        if self.mAtoms >= GEOMETRY_M_LIMIT:
            flags.append("geometry_infeasible")
        return flags
