"""Sweep specifications and result tables."""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from app.core.errors import ConfigError
from app.models.quantum_types import InitialKind, IntegratorConfig
from app.models.system_params import SystemParams


# Slack allowed on fidelities and populations outside [0, 1]
OBSERVABLE_SLACK = 1e-8

# Grid points per axis when a scenario is not told otherwise
DEFAULT_GRID_POINTS = 31


class EvolutionMode(str, Enum):
    """Dynamics used to produce a state."""

    EFFECTIVE = "effective"
    FULL_CLOSED = "full-closed"
    FULL_OPEN = "full-open"
    CONDITIONAL = "conditional"


class ObservableKind(str, Enum):
    """Figure of merit recorded per row."""

    W_FIDELITY = "w_fidelity"
    CLONE_FIDELITY = "clone_fidelity"


class TimePolicy(str, Enum):
    """Where a grid point is evaluated in time."""

    PROTOCOL = "protocol"
    GRID = "grid"


@dataclass(frozen=True)
class SweepAxis:
    """
    One swept parameter.

    With relative=True the values are fractional deviations applied as
    base·(1 + value). Each point is evaluated at the protocol time π/μ of its
    deviated parameters; the relative axis `t` then scales that time. A θ
    deviation changes the prepared input only, the target keeps nominal θ.
    """

    path: str
    values: Tuple[float, ...]
    relative: bool = False

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ConfigError(f"axis '{self.path}' has an empty grid", key=self.path)
        if not all(math.isfinite(v) for v in values):
            raise ConfigError(f"axis '{self.path}' has non-finite values", key=self.path)
        if any(b < a for a, b in zip(values, values[1:])):
            raise ConfigError(f"axis '{self.path}' values must be sorted ascending", key=self.path)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class SweepSpec:
    """Declarative description of a parameter sweep."""

    scenarioId: str
    baseParams: SystemParams
    axes: Tuple[SweepAxis, ...]
    mode: EvolutionMode = EvolutionMode.FULL_CLOSED
    observable: ObservableKind = ObservableKind.W_FIDELITY
    qubit: int = 2
    frameCorrected: bool = True
    initialKind: Optional[InitialKind] = None
    timePolicy: TimePolicy = TimePolicy.PROTOCOL
    gtGrid: Tuple[float, ...] = ()
    protocolDrive: bool = True
    integrator: Optional[IntegratorConfig] = None
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        object.__setattr__(self, "mode", EvolutionMode(self.mode))
        object.__setattr__(self, "observable", ObservableKind(self.observable))
        object.__setattr__(self, "timePolicy", TimePolicy(self.timePolicy))
        object.__setattr__(self, "gtGrid", tuple(float(v) for v in self.gtGrid))

        if not self.axes:
            raise ConfigError("a sweep needs at least one axis", key="axes")
        if len(self.axes) > 2:
            raise ConfigError(f"at most two axes are supported, got {len(self.axes)}", key="axes")
        paths = [axis.path for axis in self.axes]
        if len(set(paths)) != len(paths):
            raise ConfigError(f"duplicated axis path in {paths}", key="axes")
        if self.timePolicy is TimePolicy.GRID:
            if not self.gtGrid:
                raise ConfigError("time policy 'grid' needs a non-empty g·t grid", key="t_max_gt")
            if any(v < 0 or not math.isfinite(v) for v in self.gtGrid):
                raise ConfigError("g·t grid must be finite and >= 0", key="t_max_gt")
            if any(b < a for a, b in zip(self.gtGrid, self.gtGrid[1:])):
                raise ConfigError("g·t grid must be sorted ascending", key="t_max_gt")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}", key="workers")

    @property
    def resolvedInitialKind(self) -> InitialKind:
        """Initial state implied by the observable unless set explicitly."""
        if self.initialKind is not None:
            return InitialKind(self.initialKind)
        if self.observable is ObservableKind.CLONE_FIDELITY:
            return InitialKind.CLONE_INPUT
        return InitialKind.W_SEED

    @property
    def gridShape(self) -> Tuple[int, ...]:
        return tuple(len(axis.values) for axis in self.axes)


@dataclass(frozen=True)
class ResultRow:
    """One grid point at one time sample."""

    scenarioId: str
    axisValues: Tuple[Tuple[str, float], ...]
    time: float
    gT: float
    value: float
    mode: EvolutionMode
    mu: float
    t0: float
    gPrime: float
    extras: Tuple[Tuple[str, float], ...] = ()

    def toDict(self) -> Dict[str, Any]:
        """Flat mapping in column order."""
        row: Dict[str, Any] = {"scenario_id": self.scenarioId}
        row.update({path: value for path, value in self.axisValues})
        row.update(
            {
                "t": self.time,
                "g_t": self.gT,
                "value": self.value,
                "mode": self.mode.value,
                "mu": self.mu,
                "t0": self.t0,
                "g_prime": self.gPrime,
            }
        )
        row.update(dict(self.extras))
        return row


@dataclass(frozen=True)
class TargetComparison:
    """A measured quantity checked against a published target."""

    name: str
    measured: float
    target: float
    tolerance: float
    passed: bool
    hard: bool = True
    note: str = ""

    def toDict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "measured": self.measured,
            "target": self.target,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "hard": self.hard,
            "note": self.note,
        }


@dataclass
class ScenarioResult:
    """Output of a scenario runner: a CSV-ready table, metadata and comparisons."""

    scenarioId: str
    columns: List[str]
    table: List[Dict[str, Any]]
    metadata: Dict[str, Any] = field(default_factory=dict)
    comparisons: List[TargetComparison] = field(default_factory=list)
    document: Optional[Dict[str, Any]] = None

    @property
    def passed(self) -> bool:
        """True when every hard comparison passed."""
        return all(c.passed for c in self.comparisons if c.hard)
