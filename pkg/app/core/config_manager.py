"""Configuration loading and resolution."""

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from app.core.errors import ConfigError
from app.models.experiment import DEFAULT_GRID_POINTS, SweepSpec
from app.models.run_config import RunConfig
from app.models.system_params import SystemParams

logger = logging.getLogger(__name__)


DEFAULT_CONFIG: Dict[str, Any] = {
    "n_cavities": 3,
    "m_atoms": 100,
    "v_factor": 0.5,
    "omega_factor": 0.05,
    "omega1_factor": None,
    "theta_rad": math.pi / 2,
    "delta_rad": 0.0,
    "branching_ef": 0.0,
    "factor_reference_m": None,
    "mode": "effective",
    "scenario": None,
    "observable": "w_fidelity",
    "qubit": 2,
    "frame_corrected": True,
    "t_max_gt": None,
    "n_times": 201,
    "time_policy": "protocol",
    "integrator": None,
    "dt": None,
    "output_format": "csv",
    "output_dir": ".",
    "omega_nodes": {},
    "g_nodes": {},
    "v_nodes": {},
    "kappa_nodes": {},
    "gamma_nodes": {},
    "axes": [],
    "scenario_id": "sweep",
    "workers": 1,
    "grid": DEFAULT_GRID_POINTS,
}


def _rejectDuplicates(pairs: List[Tuple[str, Any]]) -> Dict[str, Any]:
    seen: Dict[str, Any] = {}
    for key, value in pairs:
        if key in seen:
            raise ConfigError(f"{key}: duplicated configuration key", key=key)
        seen[key] = value
    return seen


class ConfigManager:
    """Load a JSON run configuration and resolve it against the defaults."""

    def __init__(self, configFile: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None):
        """
        Initialize config manager.

        Args:
            configFile: Path to a configuration (or result metadata) JSON file;
                None uses the defaults alone
            overrides: Keys applied on top of the file, e.g. from CLI flags
        """
        self.configFile = Path(configFile) if configFile is not None else None
        document = self._loadConfig() if self.configFile is not None else {}
        document.update(overrides or {})
        self.settings = {**DEFAULT_CONFIG, **document}
        self.runConfig = RunConfig.fromJson(self.settings)

    @classmethod
    def fromDict(cls, data: Dict[str, Any]) -> "ConfigManager":
        """Resolve an in-memory document (meta wrappers are unwrapped)."""
        return cls(overrides=cls._unwrap(data))

    @staticmethod
    def _unwrap(data: Any) -> Dict[str, Any]:
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        if "config" in data and isinstance(data["config"], dict):
            return dict(data["config"])
        return dict(data)

    def _loadConfig(self) -> Dict[str, Any]:
        """Load the configuration document from file."""
        try:
            with open(self.configFile, "r", encoding="utf-8") as f:
                data = json.load(f, object_pairs_hook=_rejectDuplicates)
        except FileNotFoundError:
            raise ConfigError(f"configuration file not found: {self.configFile}", key="config") from None
        except json.JSONDecodeError as e:
            raise ConfigError(f"malformed JSON in {self.configFile}: {e}", key="config") from e
        logger.debug("loaded configuration from %s", self.configFile)
        return self._unwrap(data)

    def getRunConfig(self) -> RunConfig:
        """Get the resolved run configuration."""
        return self.runConfig

    def getSystemParams(self) -> SystemParams:
        """Get validated SystemParams; logs regime warnings."""
        params = self.runConfig.toSystemParams()
        for flag in params.regimeFlags():
            logger.warning("parameter regime: %s", flag)
        return params

    def getSweepSpec(self) -> SweepSpec:
        """Get the sweep specification of a sweep configuration."""
        return self.runConfig.toSweepSpec()

    def getResolvedConfig(self) -> Dict[str, Any]:
        """Fully resolved flat configuration, keys sorted."""
        return dict(self.runConfig.document)
