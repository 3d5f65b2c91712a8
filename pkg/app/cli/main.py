"""
zenoclone command line.

Subcommands: simulate, reproduce, sweep, validate. Exit codes: 0 success,
1 configuration or parameter error, 2 numerical failure or failed check,
3 output failure.
"""

import argparse
import json
import logging
import sys
from typing import Any, Dict, Optional, Sequence

import numpy as np

from app.core import experiments, validation
from app.core.config_manager import ConfigManager
from app.core.errors import ConfigError, NumericalError, OutputError, ParameterError
from app.core.observables import cloneFidelity, populations, reduceToLogicalQubit, wStateFidelity
from app.core.result_writer import ResultWriter
from app.core.zeno import rabiMu
from app.models.basis import FIBER_INDEX, GROUND_INDEX
from app.models.experiment import ObservableKind, TimePolicy

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_OUTPUT = 3

SIMULATE_COLUMNS = ["t", "g_t", "fidelity_w", "pop_ground", "pop_fiber"]
CLONE_COLUMNS = ["fidelity_raw", "fidelity_corrected"]


def configureLogging(verbose: bool = False):
    """
    Install a single stderr handler on the root logger.

    Args:
        verbose: DEBUG instead of INFO
    """
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("[%(levelname)s] %(message)s"))
    root.addHandler(handler)
    root.setLevel(logging.DEBUG if verbose else logging.INFO)


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides = {}
    if getattr(args, "out", None) is not None:
        overrides["output_dir"] = args.out
    if getattr(args, "format", None) is not None:
        overrides["output_format"] = args.format
    return overrides


def _simulationTimes(manager: ConfigManager) -> np.ndarray:
    runConfig = manager.getRunConfig()
    params = manager.getSystemParams()
    if runConfig.timePolicy is TimePolicy.GRID:
        return np.asarray(runConfig.gtGrid()) / params.g
    if runConfig.nTimes < 1:
        raise ConfigError(f"n_times must be >= 1, got {runConfig.nTimes}", key="n_times")
    return np.linspace(0.0, experiments.protocolTime(params), runConfig.nTimes)


def cmdSimulate(args: argparse.Namespace) -> int:
    """Run one evolution and write its time series."""
    manager = ConfigManager(args.config, _overrides(args))
    runConfig = manager.getRunConfig()
    params = manager.getSystemParams()
    clone = runConfig.observable is ObservableKind.CLONE_FIDELITY
    if clone and not 1 <= runConfig.qubit <= params.nCavities:
        raise ConfigError(f"qubit {runConfig.qubit} outside 1..{params.nCavities}", key="qubit")

    times = _simulationTimes(manager)
    states = experiments.simulateStates(
        params, runConfig.mode, runConfig.initialKind, times, runConfig.integratorConfig()
    )

    rows = []
    for t, state in zip(times, states):
        probs = [p for _, p in populations(state)]
        row = {
            "t": float(t),
            "g_t": float(t * params.g),
            "fidelity_w": wStateFidelity(state, params.nCavities),
            "pop_ground": probs[GROUND_INDEX],
            "pop_fiber": probs[FIBER_INDEX],
        }
        if clone:
            q = reduceToLogicalQubit(state, runConfig.qubit)
            row["fidelity_raw"] = cloneFidelity(q, params.theta, params.delta, frameCorrected=False)
            row["fidelity_corrected"] = cloneFidelity(q, params.theta, params.delta, frameCorrected=True)
        rows.append(row)

    mu = rabiMu(params)
    metadata = {
        "mu": mu,
        "t0": experiments.protocolTime(params) if mu > 0 else None,
        "g_prime": params.gPrime,
        "omega1": params.omega1,
        "unit_mode": runConfig.unitMode.value,
    }
    writer = ResultWriter(runConfig.outputDir, runConfig.outputFormat, args.plot_script)
    writer.writeTable(
        "simulate",
        SIMULATE_COLUMNS + (CLONE_COLUMNS if clone else []),
        rows,
        config=manager.getResolvedConfig(),
        metadata=metadata,
        flags=params.regimeFlags(),
    )
    return EXIT_OK


def _printSummary(result) -> None:
    status = "PASS" if result.passed else "FAIL"
    print(f"{result.scenarioId}: {status}")
    for c in result.comparisons:
        mark = "PASS" if c.passed else "FAIL"
        scope = "" if c.hard else " (reported)"
        print(f"  [{mark}] {c.name}: measured {c.measured:.6g}, target {c.target:.6g} ± {c.tolerance:.3g}{scope}")


def _reproduceOverrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides = _overrides(args)
    if args.grid is not None:
        overrides["grid"] = args.grid
    if args.workers is not None:
        overrides["workers"] = args.workers
    return overrides


def cmdReproduce(args: argparse.Namespace) -> int:
    """
    Run registered scenarios and write their tables.

    The figure id comes from the command line or, when replaying a result's
    metadata through --config, from its scenario_id. Each written file embeds
    the resolved configuration with its own scenario_id.
    """
    if args.id is None and args.config is None:
        raise ConfigError("reproduce needs a figure id or --config", key="scenario_id")
    manager = ConfigManager(args.config, _reproduceOverrides(args))
    requested = args.id if args.id is not None else manager.getRunConfig().scenarioId
    if requested != "all" and requested not in experiments.SCENARIOS:
        raise ConfigError(
            f"unknown figure id '{requested}'; valid ids: {', '.join(experiments.SCENARIOS)}, all", key="scenario_id"
        )
    ids = list(experiments.SCENARIOS) if requested == "all" else [requested]
    for scenarioId in ids:
        resolved = ConfigManager.fromDict({**manager.getResolvedConfig(), "scenario_id": scenarioId})
        runConfig = resolved.getRunConfig()
        logger.info("reproducing %s (grid %d)", scenarioId, runConfig.grid)
        result = experiments.runScenario(scenarioId, grid=runConfig.grid, workers=runConfig.workers)
        metadata = dict(result.metadata)
        metadata["comparisons"] = [c.toDict() for c in result.comparisons]
        metadata["passed"] = result.passed
        asJson = runConfig.outputFormat == "json"
        writer = ResultWriter(runConfig.outputDir, runConfig.outputFormat, args.plot_script)
        writer.writeTable(
            scenarioId,
            result.columns,
            result.table,
            config=resolved.getResolvedConfig(),
            metadata=metadata,
            extra=result.document if asJson else None,
        )
        if result.document is not None and not asJson:
            writer.writeDocument(scenarioId, result.document)
        _printSummary(result)
    return EXIT_OK


def cmdSweep(args: argparse.Namespace) -> int:
    """Evaluate a declarative parameter sweep."""
    manager = ConfigManager(args.config, _overrides(args))
    runConfig = manager.getRunConfig()
    spec = manager.getSweepSpec()
    rows = [row.toDict() for row in experiments.runSweep(spec)]
    writer = ResultWriter(runConfig.outputDir, runConfig.outputFormat, args.plot_script)
    writer.writeTable(
        spec.scenarioId,
        list(rows[0]),
        rows,
        config=manager.getResolvedConfig(),
        metadata={"grid_shape": list(spec.gridShape), "points": len(rows)},
        flags=spec.baseParams.regimeFlags(),
    )
    return EXIT_OK


def cmdValidate(args: argparse.Namespace) -> int:
    """Run the invariant suite."""
    results = validation.runChecks(only=args.only)
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        print(f"[{status}] {result.group}: {result.name}: {result.detail}")
    counts = validation.summarize(results)
    print(f"{counts['passed']}/{len(results)} checks passed")
    return EXIT_OK if counts["failed"] == 0 else EXIT_NUMERICAL


def buildParser() -> argparse.ArgumentParser:
    """Argument parser with all subcommands."""
    parser = argparse.ArgumentParser(prog="zenoclone", description="Zeno-dynamics W-state and cloning simulator")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", help="run one evolution")
    simulate.add_argument("--config", required=True)
    simulate.add_argument("--out")
    simulate.add_argument("--format", choices=("csv", "json"))
    simulate.add_argument("--plot-script", action="store_true")
    simulate.set_defaults(handler=cmdSimulate)

    reproduce = sub.add_parser("reproduce", help="reproduce a published figure or claim")
    reproduce.add_argument("id", nargs="?", help="figure id or all; read from --config when omitted")
    reproduce.add_argument("--config", help="resolved configuration or result metadata to replay")
    reproduce.add_argument("--out")
    reproduce.add_argument("--grid", type=int)
    reproduce.add_argument("--workers", type=int)
    reproduce.add_argument("--format", choices=("csv", "json"))
    reproduce.add_argument("--plot-script", action="store_true")
    reproduce.set_defaults(handler=cmdReproduce)

    sweep = sub.add_parser("sweep", help="evaluate a parameter sweep")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--out")
    sweep.add_argument("--format", choices=("csv", "json"))
    sweep.add_argument("--plot-script", action="store_true")
    sweep.set_defaults(handler=cmdSweep)

    validate = sub.add_parser("validate", help="run the invariant suite")
    validate.add_argument("--only", choices=validation.GROUPS)
    validate.set_defaults(handler=cmdValidate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main application entry point."""
    parser = buildParser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_CONFIG
    configureLogging(args.verbose)

    try:
        return args.handler(args)
    except (ConfigError, ParameterError, json.JSONDecodeError) as e:
        logger.error("%s", e)
        return EXIT_CONFIG
    except NumericalError as e:
        logger.error("numerical failure: %s", e)
        return EXIT_NUMERICAL
    except (OutputError, OSError) as e:
        logger.error("output failure: %s", e)
        return EXIT_OUTPUT


if __name__ == "__main__":
    sys.exit(main())
