"""Tests for configuration loading and resolution."""

import json
import math

import pytest

from app.core.config_manager import DEFAULT_CONFIG, ConfigManager
from app.core.errors import ConfigError, ParameterError
from app.models.experiment import EvolutionMode, ObservableKind, TimePolicy
from app.models.quantum_types import InitialKind, IntegratorMethod
from app.models.system_params import UnitMode


def _write(tmp_path, document, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(document), encoding="utf-8")
    return str(path)


class TestDefaults:
    """Resolution against DEFAULT_CONFIG."""

    def test_defaults_only(self):
        runConfig = ConfigManager().getRunConfig()
        assert runConfig.nCavities == 3
        assert runConfig.mAtoms == 100
        assert runConfig.mode is EvolutionMode.EFFECTIVE
        assert runConfig.unitMode is UnitMode.DIMENSIONLESS
        assert runConfig.initialKind is InitialKind.W_SEED
        assert runConfig.integratorConfig() is None

    def test_observable_implies_initial_state(self):
        runConfig = ConfigManager.fromDict({"observable": "clone_fidelity"}).getRunConfig()
        assert runConfig.observable is ObservableKind.CLONE_FIDELITY
        assert runConfig.initialKind is InitialKind.CLONE_INPUT

    def test_resolved_config_is_sorted_and_complete(self):
        resolved = ConfigManager().getResolvedConfig()
        assert list(resolved) == sorted(resolved)
        assert set(DEFAULT_CONFIG) <= set(resolved)
        assert resolved["g_dimensionless"] is None
        assert resolved["kappa_factor"] == 0.0

    def test_system_params_from_defaults(self):
        params = ConfigManager().getSystemParams()
        assert params.gPrime == pytest.approx(1.0)
        assert params.omega1 == pytest.approx((math.sqrt(3) + 1) * 0.05)


class TestLoading:
    """Files, wrappers and overrides."""

    def test_file_and_overrides(self, tmp_path):
        path = _write(tmp_path, {"n_cavities": 4, "mode": "full-open", "output_dir": "a"})
        manager = ConfigManager(path, {"output_dir": "b"})
        runConfig = manager.getRunConfig()
        assert runConfig.nCavities == 4
        assert runConfig.mode is EvolutionMode.FULL_OPEN
        assert runConfig.outputDir == "b"

    def test_meta_wrapper(self, tmp_path):
        resolved = ConfigManager.fromDict({"n_cavities": 5}).getResolvedConfig()
        path = _write(tmp_path, {"config": resolved, "metadata": {}, "flags": [], "timestamp": "x"})
        assert ConfigManager(path).getResolvedConfig() == resolved

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            ConfigManager(str(tmp_path / "absent.json"))

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{\"n_cavities\": 3,", encoding="utf-8")
        with pytest.raises(ConfigError, match="malformed"):
            ConfigManager(str(path))

    def test_duplicate_key(self, tmp_path):
        path = tmp_path / "dup.json"
        path.write_text('{"m_atoms": 10, "m_atoms": 20}', encoding="utf-8")
        with pytest.raises(ConfigError) as excinfo:
            ConfigManager(str(path))
        assert excinfo.value.key == "m_atoms"

    def test_not_an_object(self, tmp_path):
        with pytest.raises(ConfigError):
            ConfigManager(_write(tmp_path, [1, 2, 3]))


class TestValidation:
    """Rejected documents."""

    def test_unknown_key(self):
        with pytest.raises(ConfigError) as excinfo:
            ConfigManager.fromDict({"n_cavity": 3})
        assert excinfo.value.key == "n_cavity"

    def test_mixed_families(self):
        with pytest.raises(ConfigError) as excinfo:
            ConfigManager.fromDict({"kappa_factor": 0.01, "g_mhz": 18.5})
        assert "kappa_factor" in str(excinfo.value)
        assert "g_mhz" in str(excinfo.value)

    def test_physical_needs_g(self):
        with pytest.raises(ConfigError) as excinfo:
            ConfigManager.fromDict({"kappa_mhz": 53.0})
        assert excinfo.value.key == "g_mhz"

    @pytest.mark.parametrize(
        "key,value",
        [
            ("n_cavities", "3"),
            ("n_cavities", 2.5),
            ("theta_rad", None),
            ("frame_corrected", 1),
            ("mode", "open"),
            ("output_format", "xml"),
            ("omega_nodes", {"x": 0.1}),
            ("axes", [{"path": "v"}]),
        ],
    )
    def test_malformed_values(self, key, value):
        with pytest.raises(ConfigError) as excinfo:
            ConfigManager.fromDict({key: value})
        assert excinfo.value.key.startswith(key)

    def test_physical_rules_apply(self):
        manager = ConfigManager.fromDict({"n_cavities": 1})
        with pytest.raises(ParameterError):
            manager.getSystemParams()


class TestConversion:
    """RunConfig → SystemParams, integrator and sweep settings."""

    def test_physical_units(self):
        params = ConfigManager.fromDict(
            {"g_mhz": 18.5, "kappa_mhz": 53.0, "gamma_mhz": 3.0, "beta_mhz": 0.15}
        ).getSystemParams()
        assert params.unitMode is UnitMode.PHYSICAL
        assert params.g == pytest.approx(2 * math.pi * 18.5)
        assert params.kappa == pytest.approx(2 * math.pi * 53.0)
        assert params.v == pytest.approx(0.5 * params.gPrime)

    def test_node_overrides(self):
        params = ConfigManager.fromDict(
            {
                "omega_nodes": {"2": 0.06},
                "v_nodes": {"3": 0.4},
                "g_nodes": {"1": 0.11},
                "kappa_factor": 0.01,
                "kappa_nodes": {"2": 0.02},
            }
        ).getSystemParams()
        assert params.nodeOmega(2) == pytest.approx(0.06)
        assert params.nodeV(3) == pytest.approx(0.4)
        assert params.nodeG(1) == pytest.approx(0.11)
        assert params.nodeKappa(2) == pytest.approx(0.02)
        assert params.nodeKappa(1) == pytest.approx(0.01)

    def test_factor_reference(self):
        params = ConfigManager.fromDict({"m_atoms": 400, "g_dimensionless": 0.1, "factor_reference_m": 100}).getSystemParams()
        assert params.gPrime == pytest.approx(2.0)
        assert params.v == pytest.approx(0.5)

    def test_integrator(self):
        runConfig = ConfigManager.fromDict({"integrator": "rk4", "dt": 0.01}).getRunConfig()
        cfg = runConfig.integratorConfig()
        assert cfg.method is IntegratorMethod.RK4
        assert cfg.dt == 0.01

    def test_time_grid(self):
        runConfig = ConfigManager.fromDict({"time_policy": "grid", "t_max_gt": 4.0, "n_times": 5}).getRunConfig()
        assert runConfig.timePolicy is TimePolicy.GRID
        assert runConfig.gtGrid() == pytest.approx((0.0, 1.0, 2.0, 3.0, 4.0))
        with pytest.raises(ConfigError):
            ConfigManager.fromDict({"time_policy": "grid"}).getRunConfig().gtGrid()

    def test_sweep_spec(self):
        manager = ConfigManager.fromDict(
            {
                "axes": [{"path": "omega_factor", "values": [0.02, 0.05]}, {"path": "t", "values": [0.0], "relative": True}],
                "scenario_id": "map",
                "workers": 2,
                "mode": "full-closed",
            }
        )
        spec = manager.getSweepSpec()
        assert spec.scenarioId == "map"
        assert spec.gridShape == (2, 1)
        assert spec.axes[1].relative
        assert spec.protocolDrive
        assert spec.workers == 2

    def test_sweep_needs_axes(self):
        with pytest.raises(ConfigError):
            ConfigManager().getSweepSpec()
