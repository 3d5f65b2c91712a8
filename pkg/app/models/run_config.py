"""Run configuration data model."""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from app.core.errors import ConfigError
from app.models.experiment import EvolutionMode, ObservableKind, SweepAxis, SweepSpec, TimePolicy
from app.models.quantum_types import InitialKind, IntegratorConfig, IntegratorMethod
from app.models.system_params import SystemParams, UnitMode, mhzToAngular


DIMENSIONLESS_KEYS = ("g_dimensionless", "kappa_factor", "gamma_factor", "beta_factor")
PHYSICAL_KEYS = ("g_mhz", "kappa_mhz", "gamma_mhz", "beta_mhz")
NODE_KEYS = ("omega_nodes", "g_nodes", "v_nodes", "kappa_nodes", "gamma_nodes")
OUTPUT_FORMATS = ("csv", "json")

SHARED_KEYS = (
    "n_cavities",
    "m_atoms",
    "v_factor",
    "omega_factor",
    "omega1_factor",
    "theta_rad",
    "delta_rad",
    "branching_ef",
    "factor_reference_m",
    "mode",
    "scenario",
    "observable",
    "qubit",
    "frame_corrected",
    "t_max_gt",
    "n_times",
    "time_policy",
    "integrator",
    "dt",
    "output_format",
    "output_dir",
    "axes",
    "scenario_id",
    "workers",
    "grid",
) + NODE_KEYS


def _fail(key: str, message: str):
    raise ConfigError(f"{key}: {message}", key=key)


def _toInt(data: Dict[str, Any], key: str) -> int:
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
        _fail(key, f"expected an integer, got {value!r}")
    return int(value)


def _toFloat(data: Dict[str, Any], key: str, optional: bool = False) -> Optional[float]:
    value = data.get(key)
    if value is None and optional:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        _fail(key, f"expected a finite number, got {value!r}")
    return float(value)


def _toBool(data: Dict[str, Any], key: str) -> bool:
    value = data[key]
    if not isinstance(value, bool):
        _fail(key, f"expected true or false, got {value!r}")
    return value


def _toChoice(data: Dict[str, Any], key: str, enumType):
    try:
        return enumType(data[key])
    except ValueError:
        choices = ", ".join(member.value for member in enumType)
        _fail(key, f"expected one of {choices}, got {data[key]!r}")


def _toNodes(data: Dict[str, Any], key: str) -> Dict[int, float]:
    value = data.get(key) or {}
    if not isinstance(value, dict):
        _fail(key, "expected an object mapping node index to value")
    nodes = {}
    for nodeText, nodeValue in value.items():
        try:
            node = int(nodeText)
        except (TypeError, ValueError):
            _fail(key, f"node index {nodeText!r} is not an integer")
        if isinstance(nodeValue, bool) or not isinstance(nodeValue, (int, float)):
            _fail(key, f"value for node {node} is not a number")
        nodes[node] = float(nodeValue)
    return nodes


def _toAxes(data: Dict[str, Any]) -> Tuple[SweepAxis, ...]:
    value = data.get("axes") or []
    if not isinstance(value, list):
        _fail("axes", "expected a list of {path, values, relative}")
    axes = []
    for entry in value:
        if not isinstance(entry, dict) or "path" not in entry or "values" not in entry:
            _fail("axes", f"axis entry {entry!r} needs 'path' and 'values'")
        unknown = set(entry) - {"path", "values", "relative"}
        if unknown:
            _fail("axes", f"unknown axis keys {sorted(unknown)}")
        values = entry["values"]
        if not isinstance(values, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in values
        ):
            _fail(f"axes.{entry['path']}", "values must be a list of numbers")
        axes.append(SweepAxis(str(entry["path"]), tuple(values), bool(entry.get("relative", False))))
    return tuple(axes)


@dataclass(frozen=True)
class RunConfig:
    """
    Resolved run configuration.

    Frequencies are kept in the unit family of the document; toSystemParams
    converts them. `document` holds the flat resolved mapping that is echoed
    into result metadata and accepted back as input.
    """

    unitMode: UnitMode
    nCavities: int
    mAtoms: int
    gValue: Optional[float]
    vFactor: float
    omegaFactor: float
    omega1Factor: Optional[float]
    kappa: float
    gamma: float
    beta: float
    thetaRad: float
    deltaRad: float
    branchingEF: float
    factorReferenceM: Optional[int]
    mode: EvolutionMode
    scenario: Optional[InitialKind]
    observable: ObservableKind
    qubit: int
    frameCorrected: bool
    tMaxGt: Optional[float]
    nTimes: int
    timePolicy: TimePolicy
    integrator: Optional[IntegratorMethod]
    dt: Optional[float]
    outputFormat: str
    outputDir: str
    axes: Tuple[SweepAxis, ...]
    scenarioId: str
    workers: int
    grid: int
    nodes: Dict[str, Dict[int, float]] = field(default_factory=dict)
    document: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def fromJson(cls, data: Dict[str, Any]) -> "RunConfig":
        """
        Create RunConfig from a flat configuration document.

        The document must already carry every shared key (the config manager
        overlays it on the defaults). Exactly one unit family may appear; when
        neither does the dimensionless family is assumed.

        Args:
            data: Flat mapping of snake_case keys

        Returns:
            RunConfig instance

        Raises:
            ConfigError: Unknown key, mixed families or a malformed value
        """
        unknown = sorted(set(data) - set(SHARED_KEYS) - set(DIMENSIONLESS_KEYS) - set(PHYSICAL_KEYS))
        if unknown:
            _fail(unknown[0], f"unknown configuration key (all unknown: {', '.join(unknown)})")
        missing = [key for key in SHARED_KEYS if key not in data]
        if missing:
            _fail(missing[0], "missing configuration key")

        dimensionless = [key for key in DIMENSIONLESS_KEYS if key in data]
        physical = [key for key in PHYSICAL_KEYS if key in data]
        if dimensionless and physical:
            raise ConfigError(
                f"unit families mixed: '{dimensionless[0]}' (dimensionless) and '{physical[0]}' (physical)",
                key=physical[0],
            )
        if physical:
            unitMode, familyKeys = UnitMode.PHYSICAL, PHYSICAL_KEYS
            family = {"g_mhz": None, "kappa_mhz": 0.0, "gamma_mhz": 0.0, "beta_mhz": 0.0}
        else:
            unitMode, familyKeys = UnitMode.DIMENSIONLESS, DIMENSIONLESS_KEYS
            family = {"g_dimensionless": None, "kappa_factor": 0.0, "gamma_factor": 0.0, "beta_factor": 0.0}
        family.update({key: data[key] for key in familyKeys if key in data})
        if unitMode is UnitMode.PHYSICAL and family["g_mhz"] is None:
            _fail("g_mhz", "physical configurations need the per-atom coupling g/2π")

        gKey, kappaKey, gammaKey, betaKey = familyKeys
        integrator = data["integrator"]
        referenceM = data["factor_reference_m"]
        document = {key: data[key] for key in SHARED_KEYS}
        document.update(family)
        for key in NODE_KEYS:
            document[key] = {str(k): v for k, v in sorted(_toNodes(data, key).items())}

        return cls(
            unitMode=unitMode,
            nCavities=_toInt(data, "n_cavities"),
            mAtoms=_toInt(data, "m_atoms"),
            gValue=_toFloat(family, gKey, optional=True),
            vFactor=_toFloat(data, "v_factor"),
            omegaFactor=_toFloat(data, "omega_factor"),
            omega1Factor=_toFloat(data, "omega1_factor", optional=True),
            kappa=_toFloat(family, kappaKey),
            gamma=_toFloat(family, gammaKey),
            beta=_toFloat(family, betaKey),
            thetaRad=_toFloat(data, "theta_rad"),
            deltaRad=_toFloat(data, "delta_rad"),
            branchingEF=_toFloat(data, "branching_ef"),
            factorReferenceM=None if referenceM is None else _toInt(data, "factor_reference_m"),
            mode=_toChoice(data, "mode", EvolutionMode),
            scenario=None if data["scenario"] is None else _toChoice(data, "scenario", InitialKind),
            observable=_toChoice(data, "observable", ObservableKind),
            qubit=_toInt(data, "qubit"),
            frameCorrected=_toBool(data, "frame_corrected"),
            tMaxGt=_toFloat(data, "t_max_gt", optional=True),
            nTimes=_toInt(data, "n_times"),
            timePolicy=_toChoice(data, "time_policy", TimePolicy),
            integrator=None if integrator is None else _toChoice(data, "integrator", IntegratorMethod),
            dt=_toFloat(data, "dt", optional=True),
            outputFormat=cls._outputFormat(data),
            outputDir=str(data["output_dir"]),
            axes=_toAxes(data),
            scenarioId=str(data["scenario_id"]),
            workers=_toInt(data, "workers"),
            grid=_toInt(data, "grid"),
            nodes={key: _toNodes(data, key) for key in NODE_KEYS},
            document=dict(sorted(document.items())),
        )

    @property
    def initialKind(self) -> InitialKind:
        """Prepared state: the explicit scenario, else the one the observable implies."""
        if self.scenario is not None:
            return self.scenario
        if self.observable is ObservableKind.CLONE_FIDELITY:
            return InitialKind.CLONE_INPUT
        return InitialKind.W_SEED

    @staticmethod
    def _outputFormat(data: Dict[str, Any]) -> str:
        value = data["output_format"]
        if value not in OUTPUT_FORMATS:
            _fail("output_format", f"expected one of {', '.join(OUTPUT_FORMATS)}, got {value!r}")
        return value

    def toSystemParams(self) -> SystemParams:
        """
        Build validated SystemParams.

        Ω, Ω₁ and v (and their node overrides) are factors of √(factor_reference_m)·g;
        node overrides of g are per-atom couplings and of κ, γ rates, all in the
        document's unit family.

        Returns:
            SystemParams

        Raises:
            ParameterError: A value breaks the physical validation rules
        """
        physical = self.unitMode is UnitMode.PHYSICAL
        if physical:
            g = mhzToAngular(self.gValue)
        else:
            g = self.gValue if self.gValue is not None else 1.0 / math.sqrt(self.mAtoms)
        referenceM = self.factorReferenceM if self.factorReferenceM is not None else self.mAtoms
        reference = math.sqrt(referenceM) * g
        gPrime = math.sqrt(self.mAtoms) * g

        def rate(value: float) -> float:
            return mhzToAngular(value) if physical else value * gPrime

        overrides = {
            "omegaNodes": {k: v * reference for k, v in self.nodes.get("omega_nodes", {}).items()},
            "vNodes": {k: v * reference for k, v in self.nodes.get("v_nodes", {}).items()},
            "gNodes": {
                k: (mhzToAngular(v) if physical else v) for k, v in self.nodes.get("g_nodes", {}).items()
            },
            "kappaNodes": {k: rate(v) for k, v in self.nodes.get("kappa_nodes", {}).items()},
            "gammaNodes": {k: rate(v) for k, v in self.nodes.get("gamma_nodes", {}).items()},
        }
        common = dict(
            vFactor=self.vFactor,
            omegaFactor=self.omegaFactor,
            omega1Factor=self.omega1Factor,
            theta=self.thetaRad,
            delta=self.deltaRad,
            referenceM=referenceM,
            branchingEF=self.branchingEF,
            **overrides,
        )
        if physical:
            return SystemParams.fromPhysical(
                self.nCavities,
                self.mAtoms,
                gMhz=self.gValue,
                kappaMhz=self.kappa,
                gammaMhz=self.gamma,
                betaMhz=self.beta,
                **common,
            )
        return SystemParams.fromGPrimeUnits(
            self.nCavities,
            self.mAtoms,
            kappaFactor=self.kappa,
            gammaFactor=self.gamma,
            betaFactor=self.beta,
            g=g,
            **common,
        )

    def integratorConfig(self) -> Optional[IntegratorConfig]:
        """Explicit integrator settings, or None for the per-mode default."""
        if self.integrator is None and self.dt is None:
            return None
        method = self.integrator or IntegratorMethod.RK4
        return IntegratorConfig(method=method, dt=self.dt)

    def gtGrid(self) -> Tuple[float, ...]:
        """Uniform g·t samples from 0 to t_max_gt."""
        if self.tMaxGt is None:
            raise ConfigError("time policy 'grid' needs t_max_gt", key="t_max_gt")
        if self.nTimes < 1:
            raise ConfigError(f"n_times must be >= 1, got {self.nTimes}", key="n_times")
        return tuple(np.linspace(0.0, self.tMaxGt, self.nTimes))

    def toSweepSpec(self) -> SweepSpec:
        """
        Sweep specification described by this configuration.

        Raises:
            ConfigError: No axes, or a time grid that cannot be built
        """
        if not self.axes:
            raise ConfigError("a sweep configuration needs 'axes'", key="axes")
        return SweepSpec(
            scenarioId=self.scenarioId,
            baseParams=self.toSystemParams(),
            axes=self.axes,
            mode=self.mode,
            observable=self.observable,
            qubit=self.qubit,
            frameCorrected=self.frameCorrected,
            initialKind=self.scenario,
            timePolicy=self.timePolicy,
            gtGrid=self.gtGrid() if self.timePolicy is TimePolicy.GRID else (),
            protocolDrive=self.omega1Factor is None,
            integrator=self.integratorConfig(),
            workers=self.workers,
        )
