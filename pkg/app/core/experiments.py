"""Scenario registry and sweep engine.

Every scenario is declared through central defaults, evaluated through the
same point evaluator as a free sweep and returned as a ScenarioResult whose
table is ready for the result writer.
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.core import zeno
from app.core.dynamics import evolveConditionalSeries, evolveLindbladSeries, evolveSchrodingerSeries
from app.core.errors import ConfigError, NumericalError, ParameterError
from app.core.hamiltonian import buildCollapseOps, buildHTotal, initialDensity, initialState
from app.core.observables import cloneFidelity, qubitFidelityTrace, reduceToLogicalQubit, wStateFidelity
from app.models.basis import GROUND_INDEX
from app.models.experiment import (
    DEFAULT_GRID_POINTS,
    OBSERVABLE_SLACK,
    EvolutionMode,
    ObservableKind,
    ResultRow,
    ScenarioResult,
    SweepAxis,
    SweepSpec,
    TargetComparison,
    TimePolicy,
)
from app.models.quantum_types import InitialKind, IntegratorConfig
from app.models.system_params import SystemParams

logger = logging.getLogger(__name__)

TIME_PATH = "t"

_SCALAR_FIELDS = ("g", "v", "omega", "omega1", "kappa", "gamma", "beta", "theta", "delta", "branchingEF")
_INTEGER_FIELDS = ("nCavities", "mAtoms")
_NODE_FIELDS = {
    "omegaNodes": "nodeOmega",
    "gNodes": "nodeG",
    "vNodes": "nodeV",
    "kappaNodes": "nodeKappa",
    "gammaNodes": "nodeGamma",
}

# Configuration-style aliases: key -> (field, value is in units of the base g′)
_ALIASES = {
    "n_cavities": ("nCavities", False),
    "m_atoms": ("mAtoms", False),
    "v_factor": ("v", True),
    "omega_factor": ("omega", True),
    "omega1_factor": ("omega1", True),
    "kappa_factor": ("kappa", True),
    "gamma_factor": ("gamma", True),
    "beta_factor": ("beta", True),
    "theta_rad": ("theta", False),
    "delta_rad": ("delta", False),
    "branching_ef": ("branchingEF", False),
}


# Published values the reproductions are compared against.
# kind "min": measured >= target - tolerance; "max": measured <= target + tolerance;
# "abs": |measured - target| <= tolerance.
PUBLISHED_TARGETS: Dict[str, Dict[str, Any]] = {
    "fig2a_strong_drive_floor": {"target": 0.90, "tolerance": 0.0, "kind": "min"},
    "fig2a_zeno_limit": {"target": 0.999, "tolerance": 0.0, "kind": "min"},
    "fig2a_oscillating_decrease": {"target": 1.0, "tolerance": 0.0, "kind": "min"},
    "fig2b_cavity_insensitivity": {"target": 0.01, "tolerance": 0.0, "kind": "max"},
    "fig2b_monotone": {"target": 0.0, "tolerance": 1e-9, "kind": "max"},
    "fig2b_gamma_dominant": {"target": 1.0, "tolerance": 0.0, "kind": "min"},
    "fig3_clone_optimum": {"target": None, "tolerance": 1e-3, "kind": "abs"},
    "fig3_decreasing_with_n": {"target": 1.0, "tolerance": 0.0, "kind": "min"},
    "fig3_optimum_time_growth": {"target": 1.0, "tolerance": 0.0, "kind": "min"},
    "fig3_sqrt_m_slope": {"target": 0.5, "tolerance": 0.1, "kind": "abs"},
    "fig3_small_theta_flatter": {"target": 1.0, "tolerance": 0.0, "kind": "min"},
    "fig4_optimal_fidelity": {"target": 0.788, "tolerance": 0.005, "kind": "abs"},
    "fig4_time_theta_deviation": {"target": 0.778, "tolerance": 0.0, "kind": "min"},
    "fig4_single_g_deviation": {"target": 0.02, "tolerance": 0.0, "kind": "max"},
    "headline_w_fidelity_open": {"target": 0.97, "tolerance": 0.0, "kind": "min", "published": 0.9766},
    "headline_t0_us": {"target": 0.147, "tolerance": 1e-9, "kind": "abs"},
    "headline_omega_over_gprime": {"target": 0.016, "tolerance": 0.002, "kind": "abs"},
    "headline_strong_drive": {"target": 0.8737, "tolerance": 0.02, "kind": "abs"},
    "scaling_sqrt_m_slope": {"target": 0.5, "tolerance": 0.02, "kind": "abs"},
    "robustness_single_g_drop": {"target": 0.02, "tolerance": 0.0, "kind": "max"},
    "robustness_time_theta_drop": {"target": 0.01, "tolerance": 0.0, "kind": "max"},
}

SCENARIO_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "fig2a": {
        "n_cavities": 3,
        "m_atoms": 100,
        "mode": EvolutionMode.FULL_CLOSED.value,
        "omega_over_gprime": [0.005, 0.15],
        "v_over_gprime": [0.5, 1.0, 2.0],
        "interpretation": "closed system; dissipation is swept separately in fig2b",
    },
    "fig2b": {
        "n_cavities": 3,
        "m_atoms": 100,
        "mode": EvolutionMode.FULL_OPEN.value,
        "omega_over_gprime": 0.05,
        "v_over_gprime": 0.5,
        "rate_over_gprime": [0.0, 0.01],
        "rates": ["kappa", "beta", "gamma"],
    },
    "fig3": {
        "n_cavities": 3,
        "m_atoms": 100,
        "g": 0.1,
        "v": 0.5,
        "omega": 0.05,
        "theta_rad": math.pi / 2,
        "theta_grid": [math.pi / 8, math.pi / 4, 3 * math.pi / 8, math.pi / 2],
        "m_grid": [25, 100, 400, 1600],
        "n_grid": [3, 4, 5, 6],
        "gt_span": 2.2,
    },
    "fig4": {
        "n_cavities": 3,
        "m_atoms": 100,
        "mode": EvolutionMode.FULL_CLOSED.value,
        "omega_over_gprime": 0.05,
        "v_over_gprime": 0.05,
        "theta_rad": math.pi / 2,
        "relative_deviation": [-0.15, 0.15],
        "qubit": 2,
        "frame_corrected": True,
    },
    "headline": {
        "n_cavities": 3,
        "m_atoms": 100,
        "g_mhz": 18.5,
        "kappa_mhz": 53.0,
        "gamma_mhz": 3.0,
        "beta_mhz": 0.15,
        "v_factor": 0.5,
        "t0_us": 0.147,
        "strong_drive_factor": 0.1,
        "omega_scales": [0.8, 0.9, 1.0, 1.1, 1.2],
    },
    "scaling": {
        "n_cavities": 3,
        "m_grid": [100, 400, 1600, 6400],
        "g": 1.0,
        "v": 1.0,
        "omega": 0.01,
    },
    "robustness": {
        "n_cavities": 3,
        "m_atoms": 100,
        "omega_over_gprime": 0.05,
        "v_over_gprime": 0.5,
        "g_deviation": 0.1,
        "clone_v_over_gprime": 0.05,
        "time_theta_deviation": 0.1,
    },
}

# Robustness map panels: (panel, axis paths, column names)
FIG4_PANELS: Tuple[Tuple[str, Tuple[str, str], Tuple[str, str]], ...] = (
    ("a", ("omegaNodes.1", "omegaNodes.2"), ("omega_1", "omega_2")),
    ("b", ("omegaNodes.2", "omegaNodes.3"), ("omega_2", "omega_3")),
    ("c", ("vNodes.1", "vNodes.2"), ("v_1", "v_2")),
    ("d", ("vNodes.2", "vNodes.3"), ("v_2", "v_3")),
    ("e", ("gNodes.1", "gNodes.2"), ("g_1", "g_2")),
    ("f", ("gNodes.2", "gNodes.3"), ("g_2", "g_3")),
    ("g", (TIME_PATH, "theta"), ("t", "theta")),
)


def compareTarget(name: str, measured: float, hard: bool = True, note: str = "", target: Optional[float] = None) -> TargetComparison:
    """
    Check a measured value against PUBLISHED_TARGETS[name].

    Args:
        name: Key in PUBLISHED_TARGETS
        measured: Computed value
        hard: False for trends that are reported but not part of the acceptance set
        note: Free-text context stored with the comparison
        target: Overrides the declared target (used where it depends on N)

    Returns:
        TargetComparison
    """
    spec = PUBLISHED_TARGETS[name]
    goal = spec["target"] if target is None else target
    tolerance = spec["tolerance"]
    if spec["kind"] == "min":
        passed = measured >= goal - tolerance
    elif spec["kind"] == "max":
        passed = measured <= goal + tolerance
    else:
        passed = abs(measured - goal) <= tolerance
    return TargetComparison(
        name=name,
        measured=float(measured),
        target=float(goal),
        tolerance=float(tolerance),
        passed=bool(passed),
        hard=hard,
        note=note,
    )


def simulateStates(
    params: SystemParams,
    mode: EvolutionMode,
    kind: InitialKind,
    times: Sequence[float],
    integrator: Optional[IntegratorConfig] = None,
) -> np.ndarray:
    """
    Evolve the prepared state under one of the supported dynamics.

    Args:
        params: System parameters (θ, δ define the clone input)
        mode: Effective, full closed, full open or conditional dynamics
        kind: Initial preparation
        times: Sorted non-negative sample times
        integrator: Overrides the per-mode default integrator

    Returns:
        State vectors (len(times), dim), or densities (len(times), dim, dim) in open mode
    """
    mode, kind = EvolutionMode(mode), InitialKind(kind)
    times = np.atleast_1d(np.asarray(times, dtype=float))

    if mode is EvolutionMode.EFFECTIVE:
        excited = zeno.analyticSeries(params, times)
        if kind is InitialKind.W_SEED:
            return excited
        states = math.sin(params.theta / 2) * np.exp(1j * params.delta) * excited
        states[:, GROUND_INDEX] += math.cos(params.theta / 2)
        return states

    hamiltonian = buildHTotal(params)
    if mode is EvolutionMode.FULL_CLOSED:
        return evolveSchrodingerSeries(hamiltonian, initialState(params, kind), times, integrator)
    collapseOps = buildCollapseOps(params)
    if mode is EvolutionMode.FULL_OPEN:
        return evolveLindbladSeries(hamiltonian, collapseOps, initialDensity(params, kind), times, integrator)
    return evolveConditionalSeries(hamiltonian, collapseOps, initialState(params, kind), times)


def protocolTime(params: SystemParams) -> float:
    """Half period π/μ of the effective oscillation with the drive as given."""
    mu = zeno.rabiMu(params)
    if mu <= 0:
        raise ParameterError("no protocol time: μ = 0")
    return math.pi / mu


@dataclass(frozen=True)
class _PathTarget:
    path: str
    field: str
    node: Optional[int] = None
    scaled: bool = False


def _resolvePath(path: str, base: SystemParams) -> _PathTarget:
    if path == TIME_PATH:
        return _PathTarget(path, TIME_PATH)
    if path in _ALIASES:
        name, scaled = _ALIASES[path]
        return _PathTarget(path, name, scaled=scaled)
    if path in _SCALAR_FIELDS or path in _INTEGER_FIELDS:
        return _PathTarget(path, path)
    name, sep, nodeText = path.partition(".")
    if sep and name in _NODE_FIELDS:
        try:
            node = int(nodeText)
        except ValueError:
            raise ConfigError(f"invalid node index in sweep path '{path}'", key=path) from None
        if not 1 <= node <= base.nCavities:
            raise ConfigError(f"sweep path '{path}': node outside 1..{base.nCavities}", key=path)
        return _PathTarget(path, name, node=node)
    raise ConfigError(f"unknown sweep path '{path}'", key=path)


def _checkAxes(spec: SweepSpec) -> List[_PathTarget]:
    targets = []
    for axis in spec.axes:
        target = _resolvePath(axis.path, spec.baseParams)
        if target.field == TIME_PATH and not axis.relative:
            raise ConfigError("sweep path 't' only supports relative deviations", key=axis.path)
        if target.field in _INTEGER_FIELDS:
            if axis.relative:
                raise ConfigError(f"sweep path '{axis.path}' cannot be relative", key=axis.path)
            if any(v != int(v) for v in axis.values):
                raise ConfigError(f"sweep path '{axis.path}' needs integer values", key=axis.path)
        targets.append(target)
    return targets


def _currentValue(params: SystemParams, target: _PathTarget) -> float:
    if target.node is not None:
        return getattr(params, _NODE_FIELDS[target.field])(target.node)
    return getattr(params, target.field)


def _setValues(params: SystemParams, assignments: List[Tuple[_PathTarget, float]]) -> SystemParams:
    changes: Dict[str, Any] = {}
    for target, value in assignments:
        if target.node is not None:
            overrides = dict(changes.get(target.field, getattr(params, target.field)))
            overrides[target.node] = value
            changes[target.field] = overrides
        elif target.field in _INTEGER_FIELDS:
            changes[target.field] = int(value)
        else:
            changes[target.field] = value
    return params.withOverrides(**changes) if changes else params


def _pointParams(
    spec: SweepSpec, targets: List[_PathTarget], values: Tuple[float, ...]
) -> Tuple[SystemParams, SystemParams, float]:
    """(actual params, nominal params, time scale) at one grid point."""
    base = spec.baseParams
    absolute, relative = [], []
    timeScale = 1.0
    for axis, target, value in zip(spec.axes, targets, values):
        if target.field == TIME_PATH:
            timeScale = 1.0 + value
        elif axis.relative:
            relative.append((target, value))
        else:
            absolute.append((target, value * base.gPrime if target.scaled else value))

    nominal = _setValues(base, absolute)
    explicitDrive = any(t.field == "omega1" or (t.field == "omegaNodes" and t.node == 1) for t, _ in absolute)
    if spec.protocolDrive and not explicitDrive:
        nominal = nominal.withOverrides(omega1=(math.sqrt(nominal.nCavities) + 1.0) * nominal.omega)

    actual = _setValues(nominal, [(t, _currentValue(nominal, t) * (1.0 + dev)) for t, dev in relative])
    return actual, nominal, timeScale


def _evaluatePoint(spec: SweepSpec, targets: List[_PathTarget], index: Tuple[int, ...]) -> List[ResultRow]:
    values = tuple(axis.values[i] for axis, i in zip(spec.axes, index))
    actual, nominal, timeScale = _pointParams(spec, targets, values)

    t0 = protocolTime(actual)
    if spec.timePolicy is TimePolicy.PROTOCOL:
        times = np.array([t0 * timeScale])
    else:
        if nominal.g <= 0:
            raise ParameterError("a g·t grid needs g > 0")
        times = np.asarray(spec.gtGrid) / nominal.g * timeScale

    states = simulateStates(actual, spec.mode, spec.resolvedInitialKind, times, spec.integrator)
    mu, gPrime = zeno.rabiMu(actual), actual.gPrime
    axisValues = tuple((axis.path, float(v)) for axis, v in zip(spec.axes, values))

    rows = []
    for t, state in zip(times, states):
        extras: Tuple[Tuple[str, float], ...] = ()
        if spec.observable is ObservableKind.W_FIDELITY:
            value = wStateFidelity(state, actual.nCavities)
        else:
            q = reduceToLogicalQubit(state, spec.qubit)
            raw = cloneFidelity(q, nominal.theta, nominal.delta, frameCorrected=False)
            corrected = cloneFidelity(q, nominal.theta, nominal.delta, frameCorrected=True)
            value = corrected if spec.frameCorrected else raw
            extras = (("fidelity_raw", raw), ("fidelity_corrected", corrected))
        if not -OBSERVABLE_SLACK <= value <= 1.0 + OBSERVABLE_SLACK:
            raise NumericalError(f"{spec.scenarioId}: observable {value!r} outside [0, 1] at {axisValues}, t={t:.6g}")
        rows.append(
            ResultRow(
                scenarioId=spec.scenarioId,
                axisValues=axisValues,
                time=float(t),
                gT=float(t * nominal.g),
                value=float(value),
                mode=spec.mode,
                mu=mu,
                t0=t0,
                gPrime=gPrime,
                extras=extras,
            )
        )
    return rows


def runSweep(spec: SweepSpec) -> List[ResultRow]:
    """
    Evaluate a sweep over the cartesian product of its axes.

    Args:
        spec: Sweep specification

    Returns:
        One row per grid point and time sample, in lexicographic grid order
    """
    targets = _checkAxes(spec)
    if spec.qubit < 1 or (spec.observable is ObservableKind.CLONE_FIDELITY and spec.qubit > spec.baseParams.nCavities):
        raise ConfigError(f"qubit {spec.qubit} outside 1..{spec.baseParams.nCavities}", key="qubit")
    indices = list(itertools.product(*(range(n) for n in spec.gridShape)))
    logger.debug("sweep %s: %d points, mode=%s, workers=%d", spec.scenarioId, len(indices), spec.mode.value, spec.workers)

    def evaluate(index):
        return _evaluatePoint(spec, targets, index)

    if spec.workers > 1 and len(indices) > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            perPoint = list(pool.map(evaluate, indices))
    else:
        perPoint = [evaluate(index) for index in indices]
    return [row for rows in perPoint for row in rows]


def _singlePoint(spec: SweepSpec) -> ResultRow:
    return runSweep(spec)[0]


def _fidelityAt(base: SystemParams, scenarioId: str, pathValues: Dict[str, float], relative: bool, **specArgs) -> ResultRow:
    axes = tuple(SweepAxis(path, (value,), relative) for path, value in pathValues.items())
    return _singlePoint(SweepSpec(scenarioId=scenarioId, baseParams=base, axes=axes, **specArgs))


def _localMaxima(values: np.ndarray) -> List[float]:
    return [
        float(values[k])
        for k in range(1, len(values) - 1)
        if values[k] >= values[k - 1] and values[k] > values[k + 1]
    ]


def _logSlope(xs: Sequence[float], ys: Sequence[float]) -> float:
    slope, _ = np.polyfit(np.log(np.asarray(xs, dtype=float)), np.log(np.asarray(ys, dtype=float)), 1)
    return float(slope)


def runFig2a(grid: int = DEFAULT_GRID_POINTS, workers: int = 1) -> ScenarioResult:
    """
    W fidelity at the protocol time over Ω/g′ for three values of v/g′.

    Args:
        grid: Points on the Ω/g′ axis
        workers: Threads used for the sweep

    Returns:
        ScenarioResult with columns v_over_gprime, omega_over_gprime, fidelity
    """
    defaults = SCENARIO_DEFAULTS["fig2a"]
    base = SystemParams.fromGPrimeUnits(defaults["n_cavities"], defaults["m_atoms"], vFactor=0.5, omegaFactor=0.05)
    lo, hi = defaults["omega_over_gprime"]
    spec = SweepSpec(
        scenarioId="fig2a",
        baseParams=base,
        axes=(
            SweepAxis("v_factor", tuple(defaults["v_over_gprime"])),
            SweepAxis("omega_factor", tuple(np.linspace(lo, hi, grid))),
        ),
        mode=defaults["mode"],
        observable=ObservableKind.W_FIDELITY,
        workers=workers,
    )
    rows = runSweep(spec)
    table = [
        {"v_over_gprime": row.axisValues[0][1], "omega_over_gprime": row.axisValues[1][1], "fidelity": row.value}
        for row in rows
    ]

    comparisons = []
    strong = _fidelityAt(base, "fig2a", {"v_factor": 0.5, "omega_factor": 0.1}, False, mode=defaults["mode"])
    comparisons.append(compareTarget("fig2a_strong_drive_floor", strong.value, note="Ω = 0.1g′, v = 0.5g′"))
    zenoLimit = min(
        _fidelityAt(base, "fig2a", {"v_factor": v, "omega_factor": lo}, False, mode=defaults["mode"]).value
        for v in defaults["v_over_gprime"]
    )
    comparisons.append(compareTarget("fig2a_zeno_limit", zenoLimit, note=f"Ω = {lo}g′, worst v"))

    decreasing = []
    for v in defaults["v_over_gprime"]:
        curve = np.array([r["fidelity"] for r in table if r["v_over_gprime"] == v])
        maxima = _localMaxima(curve)
        decreasing.append(all(b < a for a, b in zip(maxima, maxima[1:])))
    comparisons.append(
        compareTarget(
            "fig2a_oscillating_decrease",
            float(all(decreasing)),
            hard=False,
            note="1 when successive local maxima decrease on every curve",
        )
    )
    logger.info("fig2a: %d rows", len(table))
    return ScenarioResult(
        scenarioId="fig2a",
        columns=["v_over_gprime", "omega_over_gprime", "fidelity"],
        table=table,
        metadata={"defaults": defaults, "grid": grid, "flags": base.regimeFlags()},
        comparisons=comparisons,
    )


def runFig2b(grid: int = DEFAULT_GRID_POINTS, workers: int = 1) -> ScenarioResult:
    """
    W fidelity under one decay channel at a time, rates in units of g′.

    Args:
        grid: Points per rate axis
        workers: Threads used for the sweeps

    Returns:
        ScenarioResult with columns rate_name, rate_over_gprime, fidelity
    """
    defaults = SCENARIO_DEFAULTS["fig2b"]
    base = SystemParams.fromGPrimeUnits(
        defaults["n_cavities"],
        defaults["m_atoms"],
        vFactor=defaults["v_over_gprime"],
        omegaFactor=defaults["omega_over_gprime"],
    )
    lo, hi = defaults["rate_over_gprime"]
    rates = tuple(np.linspace(lo, hi, grid))

    table: List[Dict[str, Any]] = []
    curves: Dict[str, np.ndarray] = {}
    for rate in defaults["rates"]:
        spec = SweepSpec(
            scenarioId="fig2b",
            baseParams=base,
            axes=(SweepAxis(f"{rate}_factor", rates),),
            mode=defaults["mode"],
            observable=ObservableKind.W_FIDELITY,
            workers=workers,
        )
        rows = runSweep(spec)
        curves[rate] = np.array([row.value for row in rows])
        table += [{"rate_name": rate, "rate_over_gprime": row.axisValues[0][1], "fidelity": row.value} for row in rows]

    slopes = {rate: float((curve[-1] - curve[0]) / (hi - lo)) for rate, curve in curves.items()}
    steepest = min(slopes, key=slopes.get)
    rise = max(float(np.max(np.diff(curve), initial=0.0)) for curve in curves.values())
    comparisons = [
        compareTarget(
            "fig2b_cavity_insensitivity",
            float(curves["kappa"][0] - curves["kappa"][-1]),
            note=f"F(κ′=0) − F(κ′={hi})",
        ),
        compareTarget("fig2b_monotone", rise, note="largest increase between neighbouring rates"),
        compareTarget(
            "fig2b_gamma_dominant",
            float(steepest == "gamma"),
            hard=False,
            note=f"steepest channel: {steepest}",
        ),
    ]
    logger.info("fig2b: slopes %s", ", ".join(f"{k}={v:.4g}" for k, v in slopes.items()))
    return ScenarioResult(
        scenarioId="fig2b",
        columns=["rate_name", "rate_over_gprime", "fidelity"],
        table=table,
        metadata={"defaults": defaults, "grid": grid, "slopes": slopes, "flags": base.regimeFlags()},
        comparisons=comparisons,
    )


def _fig3Params(defaults: Dict[str, Any], nCavities: int, mAtoms: int, theta: float) -> SystemParams:
    omega = defaults["omega"]
    return SystemParams(
        nCavities=nCavities,
        mAtoms=mAtoms,
        g=defaults["g"],
        v=defaults["v"],
        omega1=(math.sqrt(nCavities) + 1.0) * omega,
        omega=omega,
        theta=theta,
    )


def runFig3(grid: int = DEFAULT_GRID_POINTS) -> ScenarioResult:
    """
    Effective and full clone-fidelity traces versus g·t.

    Panel (a) shows every qubit at N=3, M=100; (b, c) qubit 1 and 2 over a θ
    grid; (d, e) over M with g, v, Ω fixed in absolute terms; (f, g) over N.

    Args:
        grid: Sets the trace resolution (4·grid + 1 samples)

    Returns:
        ScenarioResult with one row per panel, series, model, qubit and sample
    """
    defaults = SCENARIO_DEFAULTS["fig3"]
    nSamples = 4 * grid + 1
    theta0 = defaults["theta_rad"]
    n0, m0 = defaults["n_cavities"], defaults["m_atoms"]

    # panel -> (param name, [(value, params)], qubits)
    series = {
        "a": ("theta_rad", [(theta0, _fig3Params(defaults, n0, m0, theta0))], list(range(1, n0 + 1))),
        "bc": ("theta_rad", [(th, _fig3Params(defaults, n0, m0, th)) for th in defaults["theta_grid"]], [1, 2]),
        "de": ("m_atoms", [(m, _fig3Params(defaults, n0, m, theta0)) for m in defaults["m_grid"]], [1, 2]),
        "fg": ("n_cavities", [(n, _fig3Params(defaults, n, m0, theta0)) for n in defaults["n_grid"]], [1, 2]),
    }

    table: List[Dict[str, Any]] = []
    traces: Dict[Tuple[str, float, str, int], np.ndarray] = {}
    gtGrids: Dict[str, np.ndarray] = {}
    for panel, (paramName, members, qubits) in series.items():
        gtMax = defaults["gt_span"] * max(p.g * protocolTime(p) for _, p in members)
        gt = np.linspace(0.0, gtMax, nSamples)
        gtGrids[panel] = gt
        for value, params in members:
            times = gt / params.g
            for mode in (EvolutionMode.EFFECTIVE, EvolutionMode.FULL_CLOSED):
                states = simulateStates(params, mode, InitialKind.CLONE_INPUT, times)
                model = "effective" if mode is EvolutionMode.EFFECTIVE else "full"
                for qubit in qubits:
                    raw = qubitFidelityTrace(states, qubit, params.theta, params.delta, frameCorrected=False)
                    corrected = qubitFidelityTrace(states, qubit, params.theta, params.delta, frameCorrected=True)
                    traces[(panel, value, model, qubit)] = corrected
                    panelName = panel if len(panel) == 1 else panel[qubit - 1]
                    table += [
                        {
                            "panel": panelName,
                            "param_name": paramName,
                            "param_value": value,
                            "model": model,
                            "qubit": qubit,
                            "g_t": gt[k],
                            "fidelity_raw": raw[k],
                            "fidelity_corrected": corrected[k],
                        }
                        for k in range(nSamples)
                    ]

    comparisons = []
    optima = []
    for n in defaults["n_grid"]:
        params = _fig3Params(defaults, n, m0, theta0)
        optimum = zeno.fidelityQubit2Eff(params, protocolTime(params), theta0, frameCorrected=True)
        optima.append(optimum)
        comparisons.append(
            compareTarget(
                "fig3_clone_optimum",
                optimum,
                target=0.5 + 1.0 / (2.0 * math.sqrt(n)),
                note=f"N={n}, effective model at t₀",
            )
        )
    comparisons.append(
        compareTarget("fig3_decreasing_with_n", float(all(b < a for a, b in zip(optima, optima[1:]))))
    )

    gtDe = gtGrids["de"]
    optimumTimes = []
    for m in defaults["m_grid"]:
        params = _fig3Params(defaults, n0, m, theta0)
        first = zeno.firstOptimumTime(gtDe / params.g, traces[("de", m, "effective", 2)])
        optimumTimes.append(first if first is not None else protocolTime(params))
    comparisons.append(
        compareTarget(
            "fig3_optimum_time_growth",
            float(all(b > a for a, b in zip(optimumTimes, optimumTimes[1:]))),
            note="first optimum of the qubit-2 trace grows with M",
        )
    )
    comparisons.append(
        compareTarget(
            "fig3_sqrt_m_slope",
            _logSlope(defaults["m_grid"], optimumTimes),
            hard=False,
            note="√M growth holds once Mg² dominates Nv²",
        )
    )

    means, spreads = [], []
    for th in defaults["theta_grid"]:
        trace = traces[("bc", th, "effective", 1)]
        means.append(float(np.mean(trace)))
        spreads.append(float(np.std(trace)))
    flatter = all(b <= a for a, b in zip(means, means[1:])) and all(b >= a for a, b in zip(spreads, spreads[1:]))
    comparisons.append(
        compareTarget(
            "fig3_small_theta_flatter",
            float(flatter),
            hard=False,
            note="qubit-1 trace mean falls and spread grows with θ",
        )
    )
    logger.info("fig3: %d rows", len(table))
    return ScenarioResult(
        scenarioId="fig3",
        columns=["panel", "param_name", "param_value", "model", "qubit", "g_t", "fidelity_raw", "fidelity_corrected"],
        table=table,
        metadata={
            "defaults": defaults,
            "grid": grid,
            "samples": nSamples,
            "optimum_times": dict(zip(map(str, defaults["m_grid"]), optimumTimes)),
        },
        comparisons=comparisons,
    )


def fig4Base() -> SystemParams:
    """Nominal robustness-map network: Ω = 0.05g′, v = 0.5g = 0.05g′, θ = π/2."""
    defaults = SCENARIO_DEFAULTS["fig4"]
    return SystemParams.fromGPrimeUnits(
        defaults["n_cavities"],
        defaults["m_atoms"],
        vFactor=defaults["v_over_gprime"],
        omegaFactor=defaults["omega_over_gprime"],
        theta=defaults["theta_rad"],
    )


def _fig4Spec(base: SystemParams, paths: Sequence[str], values: Sequence[Sequence[float]], workers: int = 1) -> SweepSpec:
    defaults = SCENARIO_DEFAULTS["fig4"]
    return SweepSpec(
        scenarioId="fig4",
        baseParams=base,
        axes=tuple(SweepAxis(path, tuple(vals), relative=True) for path, vals in zip(paths, values)),
        mode=defaults["mode"],
        observable=ObservableKind.CLONE_FIDELITY,
        qubit=defaults["qubit"],
        frameCorrected=defaults["frame_corrected"],
        workers=workers,
    )


def runFig4(grid: int = DEFAULT_GRID_POINTS, workers: int = 1) -> ScenarioResult:
    """
    Frame-corrected qubit-2 clone fidelity under pairs of relative deviations.

    Args:
        grid: Points per deviation axis
        workers: Threads used for each panel

    Returns:
        ScenarioResult with the axis1/axis2 deviation table
    """
    defaults = SCENARIO_DEFAULTS["fig4"]
    base = fig4Base()
    lo, hi = defaults["relative_deviation"]
    deviations = tuple(np.linspace(lo, hi, grid))

    table: List[Dict[str, Any]] = []
    for panel, paths, names in FIG4_PANELS:
        rows = runSweep(_fig4Spec(base, paths, (deviations, deviations), workers))
        extras = [dict(row.extras) for row in rows]
        table += [
            {
                "axis1_name": names[0],
                "axis1_rel_dev": row.axisValues[0][1],
                "axis2_name": names[1],
                "axis2_rel_dev": row.axisValues[1][1],
                "fidelity_raw": extra["fidelity_raw"],
                "fidelity_corrected": extra["fidelity_corrected"],
            }
            for row, extra in zip(rows, extras)
        ]
        logger.debug("fig4 panel %s done", panel)

    nominal = _singlePoint(_fig4Spec(base, (TIME_PATH,), ((0.0,),))).value
    shifted = _singlePoint(_fig4Spec(base, (TIME_PATH, "theta"), ((0.1,), (0.1,)))).value
    gShift = _singlePoint(_fig4Spec(base, ("gNodes.1",), ((0.1,),))).value
    comparisons = [
        compareTarget("fig4_optimal_fidelity", nominal, note="no deviation"),
        compareTarget("fig4_time_theta_deviation", shifted, note="δt/t = δθ/θ = 0.1"),
        compareTarget("fig4_single_g_deviation", nominal - gShift, note="δg₁/g₁ = 0.1"),
    ]
    logger.info("fig4: %d rows", len(table))
    return ScenarioResult(
        scenarioId="fig4",
        columns=["axis1_name", "axis1_rel_dev", "axis2_name", "axis2_rel_dev", "fidelity_raw", "fidelity_corrected"],
        table=table,
        metadata={"defaults": defaults, "grid": grid, "flags": base.regimeFlags()},
        comparisons=comparisons,
    )


def headlineBase() -> SystemParams:
    """Physical network with (g′, κ, γ)/2π = (185, 53, 3) MHz and β/2π = 0.15 MHz; Ω unset."""
    defaults = SCENARIO_DEFAULTS["headline"]
    return SystemParams.fromPhysical(
        defaults["n_cavities"],
        defaults["m_atoms"],
        gMhz=defaults["g_mhz"],
        vFactor=defaults["v_factor"],
        omegaFactor=0.0,
        kappaMhz=defaults["kappa_mhz"],
        gammaMhz=defaults["gamma_mhz"],
        betaMhz=defaults["beta_mhz"],
    )


def wFidelityAtProtocol(params: SystemParams, mode: EvolutionMode) -> Tuple[float, float]:
    """W fidelity and time at π/μ, starting from φ₁."""
    t0 = protocolTime(params)
    state = simulateStates(params, mode, InitialKind.W_SEED, [t0])[0]
    return wStateFidelity(state, params.nCavities), t0


def runHeadline(grid: int = DEFAULT_GRID_POINTS) -> ScenarioResult:
    """
    Open-system W fidelity at the quoted operation time, and the strong-drive point.

    The drive is not quoted alongside the operation time, so Ω is solved from
    t₀ = 0.147 µs and the fidelity is also reported for Ω scaled around it.

    Args:
        grid: Unused; accepted for a uniform runner signature

    Returns:
        ScenarioResult whose document holds the headline JSON report
    """
    defaults = SCENARIO_DEFAULTS["headline"]
    base = headlineBase()
    omega = zeno.solveOmegaForTime(base, defaults["t0_us"])
    params = zeno.protocolParams(base.withOverrides(omega=omega))
    for flag in params.regimeFlags():
        logger.warning("headline: %s", flag)

    fOpen, t0 = wFidelityAtProtocol(params, EvolutionMode.FULL_OPEN)
    fClosed, _ = wFidelityAtProtocol(params, EvolutionMode.FULL_CLOSED)
    fConditional, _ = wFidelityAtProtocol(params, EvolutionMode.CONDITIONAL)

    # One decay channel at a time, the others switched off.
    silent = {"kappa": 0.0, "gamma": 0.0, "beta": 0.0, "kappaNodes": {}, "gammaNodes": {}}
    channelBreakdown = {
        name: wFidelityAtProtocol(params.withOverrides(**{**silent, name: getattr(params, name)}), EvolutionMode.FULL_OPEN)[0]
        for name in ("kappa", "gamma", "beta")
    }

    sensitivity = []
    for scale in defaults["omega_scales"]:
        scaled = zeno.protocolParams(params.withOverrides(omega=omega * scale))
        fidelity, tScaled = wFidelityAtProtocol(scaled, EvolutionMode.FULL_OPEN)
        sensitivity.append(
            {
                "omega_scale": scale,
                "omega_over_gprime": scaled.omega / scaled.gPrime,
                "t0_us": tScaled,
                "w_fidelity_open": fidelity,
            }
        )

    strongFactor = defaults["strong_drive_factor"]
    strong = zeno.protocolParams(
        base.withOverrides(v=strongFactor * base.gPrime, omega=strongFactor * base.gPrime)
    )
    strongClosed, _ = wFidelityAtProtocol(strong.withOverrides(kappa=0.0, gamma=0.0, beta=0.0), EvolutionMode.FULL_CLOSED)
    strongOpen, _ = wFidelityAtProtocol(strong, EvolutionMode.FULL_OPEN)

    ratio = omega / params.gPrime
    comparisons = [
        compareTarget(
            "headline_w_fidelity_open",
            fOpen,
            note="published 0.9766; Ω solved from t₀, decay model as built",
        ),
        compareTarget("headline_t0_us", t0),
        compareTarget("headline_omega_over_gprime", ratio),
        compareTarget("headline_strong_drive", strongClosed, note=f"closed model; open model gives {strongOpen:.4f}"),
    ]
    document = {
        "w_fidelity_open": fOpen,
        "w_fidelity_closed": fClosed,
        "w_fidelity_conditional": fConditional,
        "channel_breakdown": channelBreakdown,
        "t0_us": t0,
        "omega_over_gprime": ratio,
        "omega_mhz": omega / (2.0 * math.pi),
        "strong_drive_fidelity": strongClosed,
        "strong_drive_fidelity_open": strongOpen,
        "sensitivity": sensitivity,
        "paper_targets": {
            name: spec for name, spec in PUBLISHED_TARGETS.items() if name.startswith("headline_")
        },
        "comparisons": [c.toDict() for c in comparisons],
    }
    table = [
        {
            "quantity": c.name,
            "measured": c.measured,
            "target": c.target,
            "tolerance": c.tolerance,
            "passed": c.passed,
        }
        for c in comparisons
    ]
    logger.info("headline: F_open=%.4f at t0=%.4g us, Omega/g'=%.4f", fOpen, t0, ratio)
    return ScenarioResult(
        scenarioId="headline",
        columns=["quantity", "measured", "target", "tolerance", "passed"],
        table=table,
        metadata={"defaults": defaults, "flags": params.regimeFlags()},
        comparisons=comparisons,
        document=document,
    )


def runScalingLaw(grid: int = DEFAULT_GRID_POINTS) -> ScenarioResult:
    """
    Fit log t₀ against log M at fixed g, v and Ω.

    Args:
        grid: Unused; accepted for a uniform runner signature

    Returns:
        ScenarioResult with columns m_atoms, t0
    """
    defaults = SCENARIO_DEFAULTS["scaling"]
    n, omega = defaults["n_cavities"], defaults["omega"]
    times = []
    for m in defaults["m_grid"]:
        params = SystemParams(
            nCavities=n,
            mAtoms=m,
            g=defaults["g"],
            v=defaults["v"],
            omega1=(math.sqrt(n) + 1.0) * omega,
            omega=omega,
        )
        times.append(zeno.protocolSchedule(params).tN)
    slope = _logSlope(defaults["m_grid"], times)
    return ScenarioResult(
        scenarioId="scaling",
        columns=["m_atoms", "t0"],
        table=[{"m_atoms": m, "t0": t} for m, t in zip(defaults["m_grid"], times)],
        metadata={"defaults": defaults, "slope": slope},
        comparisons=[compareTarget("scaling_sqrt_m_slope", slope)],
    )


def runRobustness(grid: int = DEFAULT_GRID_POINTS) -> ScenarioResult:
    """
    Fidelity drops under static parameter deviations.

    Reports the W-fidelity drop for a 10% deviation of one node's g′ (and of
    all nodes together), and the corrected clone-fidelity drop for 10%
    deviations of t and θ at once.

    Args:
        grid: Unused; accepted for a uniform runner signature

    Returns:
        ScenarioResult with columns quantity, deviation, fidelity_nominal, fidelity_deviated, drop
    """
    defaults = SCENARIO_DEFAULTS["robustness"]
    dev = defaults["g_deviation"]
    base = SystemParams.fromGPrimeUnits(
        defaults["n_cavities"],
        defaults["m_atoms"],
        vFactor=defaults["v_over_gprime"],
        omegaFactor=defaults["omega_over_gprime"],
    )
    wArgs = {"mode": EvolutionMode.FULL_CLOSED, "observable": ObservableKind.W_FIDELITY}
    wNominal = _fidelityAt(base, "robustness", {TIME_PATH: 0.0}, True, **wArgs).value
    table = []
    for quantity, paths in (
        ("w_single_g_plus", {"gNodes.1": dev}),
        ("w_single_g_minus", {"gNodes.1": -dev}),
        ("w_uniform_g_plus", {"g": dev}),
    ):
        deviated = _fidelityAt(base, "robustness", paths, True, **wArgs).value
        table.append(
            {
                "quantity": quantity,
                "deviation": next(iter(paths.values())),
                "fidelity_nominal": wNominal,
                "fidelity_deviated": deviated,
                "drop": wNominal - deviated,
            }
        )

    cloneBase = base.withOverrides(v=defaults["clone_v_over_gprime"] * base.gPrime)
    shift = defaults["time_theta_deviation"]
    cloneNominal = _singlePoint(_fig4Spec(cloneBase, (TIME_PATH,), ((0.0,),))).value
    cloneShifted = _singlePoint(_fig4Spec(cloneBase, (TIME_PATH, "theta"), ((shift,), (shift,)))).value
    table.append(
        {
            "quantity": "clone_time_theta",
            "deviation": shift,
            "fidelity_nominal": cloneNominal,
            "fidelity_deviated": cloneShifted,
            "drop": cloneNominal - cloneShifted,
        }
    )

    comparisons = [
        compareTarget("robustness_single_g_drop", table[0]["drop"], note="δg′₁ = +0.1g′, W fidelity"),
        compareTarget("robustness_time_theta_drop", table[-1]["drop"], note="δt/t = δθ/θ = 0.1, corrected clone"),
    ]
    return ScenarioResult(
        scenarioId="robustness",
        columns=["quantity", "deviation", "fidelity_nominal", "fidelity_deviated", "drop"],
        table=table,
        metadata={"defaults": defaults},
        comparisons=comparisons,
    )


_PARALLEL_SCENARIOS = ("fig2a", "fig2b", "fig4")

SCENARIOS: Dict[str, Callable[..., ScenarioResult]] = {
    "fig2a": runFig2a,
    "fig2b": runFig2b,
    "fig3": runFig3,
    "fig4": runFig4,
    "headline": runHeadline,
    "scaling": runScalingLaw,
    "robustness": runRobustness,
}


def runScenario(scenarioId: str, grid: int = DEFAULT_GRID_POINTS, workers: int = 1) -> ScenarioResult:
    """
    Run a registered scenario.

    Args:
        scenarioId: Key of SCENARIOS
        grid: Points per axis
        workers: Threads for sweep-based scenarios

    Returns:
        ScenarioResult
    """
    runner = SCENARIOS.get(scenarioId)
    if runner is None:
        raise ConfigError(f"unknown scenario '{scenarioId}'; valid ids: {', '.join(SCENARIOS)}", key=scenarioId)
    if grid < 2:
        raise ConfigError(f"grid must be >= 2, got {grid}", key="grid")
    if scenarioId in _PARALLEL_SCENARIOS:
        return runner(grid=grid, workers=workers)
    return runner(grid=grid)
