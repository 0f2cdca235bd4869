"""
Tests for the configuration module.
"""

import json
import tempfile
from pathlib import Path

import pytest

from fraclr.config import (
    CliConfig,
    ConfigurationError,
    PlanError,
    SweepPlan,
    Tolerances,
    load_plan,
    load_tolerances,
    plan_tolerances,
)


@pytest.fixture
def temp_dir():
    """Create a temporary directory."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


class TestCliConfig:
    """Tests for the CliConfig model."""

    def test_defaults(self):
        """Test default values."""
        config = CliConfig()

        assert config.grid.points_per_axis == 256
        assert config.family_range.j_max == 6
        assert config.out_dir == "fraclr-out"
        assert config.threads is None

    def test_load_nonexistent_file(self):
        """Test that an explicit but missing config file is an error."""
        with pytest.raises(ConfigurationError):
            CliConfig.load("/nonexistent/path/fraclr.yaml")

    def test_search_finds_nothing(self, temp_dir, monkeypatch):
        monkeypatch.chdir(temp_dir)
        monkeypatch.setenv("HOME", str(temp_dir))

        assert CliConfig.load() == CliConfig()

    def test_search_finds_dotfile(self, temp_dir, monkeypatch):
        (temp_dir / ".fraclr.yaml").write_text("out_dir: results\n")
        monkeypatch.chdir(temp_dir)

        assert CliConfig.load().out_dir == "results"

    def test_load_valid_config(self, temp_dir):
        """Test loading a valid configuration file."""
        config_content = """
grid:
  dim: 1
  points_per_axis: 128
family_range:
  j_min: 0
  j_max: 5
out_dir: sweeps
threads: 2
"""
        config_path = temp_dir / "fraclr.yaml"
        config_path.write_text(config_content)

        config = CliConfig.load(config_path)

        assert config.grid.points_per_axis == 128
        assert config.family_range.j_max == 5
        assert config.threads == 2
        assert config.output_path("x.bin") == Path("sweeps") / "x.bin"

    def test_load_empty_yaml(self, temp_dir):
        """Test loading an empty YAML file."""
        config_path = temp_dir / "empty.yaml"
        config_path.write_text("")

        assert CliConfig.load(config_path) == CliConfig()

    def test_load_invalid_yaml(self, temp_dir):
        """Test that invalid YAML raises an error."""
        config_path = temp_dir / "invalid.yaml"
        config_path.write_text("invalid: yaml: content: [[[")

        with pytest.raises(ConfigurationError):
            CliConfig.load(config_path)

    def test_unknown_key_names_field(self, temp_dir):
        config_path = temp_dir / "fraclr.yaml"
        config_path.write_text("grid:\n  points: 64\n")

        with pytest.raises(ConfigurationError) as exc_info:
            CliConfig.load(config_path)

        assert exc_info.value.field_path == "grid.points"

    def test_overrides(self):
        config = CliConfig().with_overrides(**{"grid.points_per_axis": 64, "out_dir": None, "threads": 3})

        assert config.grid.points_per_axis == 64
        assert config.out_dir == "fraclr-out"
        assert config.threads == 3

    def test_invalid_override(self):
        with pytest.raises(ConfigurationError):
            CliConfig().with_overrides(threads=0)

    def test_grid_errors_name_the_field(self):
        config = CliConfig().with_overrides(**{"grid.dim": 3})

        with pytest.raises(ConfigurationError) as exc_info:
            config.grid.to_grid()

        assert exc_info.value.field_path == "grid.dim"

    def test_family_range_errors_name_the_field(self):
        config = CliConfig().with_overrides(**{"grid.points_per_axis": 64})
        grid = config.grid.to_grid()

        with pytest.raises(ConfigurationError) as exc_info:
            config.family_range.to_family(grid)

        assert exc_info.value.field_path == "family_range.j_max"


class TestThreads:
    """Tests for thread-count resolution."""

    def test_env_wins(self, monkeypatch):
        monkeypatch.setenv("FRACLR_THREADS", "5")
        assert CliConfig(threads=2).resolve_threads() == 5

    def test_config_value(self, monkeypatch):
        monkeypatch.delenv("FRACLR_THREADS", raising=False)
        assert CliConfig(threads=2).resolve_threads() == 2

    def test_cpu_count_fallback(self, monkeypatch):
        monkeypatch.delenv("FRACLR_THREADS", raising=False)
        assert CliConfig().resolve_threads() >= 1

    @pytest.mark.parametrize("raw", ["zero", "0", "-4"])
    def test_invalid_env(self, monkeypatch, raw):
        monkeypatch.setenv("FRACLR_THREADS", raw)

        with pytest.raises(ConfigurationError) as exc_info:
            CliConfig().resolve_threads()

        assert exc_info.value.field_path == "FRACLR_THREADS"


class TestSweepPlan:
    """Tests for plan validation and loading."""

    def test_defaults(self):
        plan = SweepPlan()

        assert plan.kinds == []
        assert plan.s == [0.5, 1.0, 1.5, 2.0, 2.5, 3.0]
        assert not plan.fixtures.active
        assert plan.samples.commutator == 5

    def test_all_checks_selected_by_default(self):
        from fraclr.harness import CHECKS

        assert SweepPlan().selected_checks == tuple(CHECKS)

    def test_selected_checks_keep_canonical_order(self):
        from fraclr.harness import CHECKS

        plan = SweepPlan(checks=["taylor_telescoping", "decomposition"])
        assert plan.selected_checks == tuple(c for c in CHECKS if c in ("decomposition", "taylor_telescoping"))

    def test_holder_violation(self):
        with pytest.raises(ValueError):
            SweepPlan(triples=[(2.0, 4.0, 3.0)])

    def test_exponent_range(self):
        with pytest.raises(ValueError):
            SweepPlan(triples=[(1.0, 2.0, 2.0)])

    def test_order_range(self):
        with pytest.raises(ValueError):
            SweepPlan(s=[4.5])

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            SweepPlan(kinds=["eq99"])

    def test_unknown_check(self):
        with pytest.raises(ValueError):
            SweepPlan(checks=["nonexistent"])

    def test_negative_seed(self):
        with pytest.raises(ValueError):
            SweepPlan(families=[{"kind": "random_bandlimited", "seeds": [-1]}])

    def test_fixture_switch(self):
        assert SweepPlan(fixtures={"theta_coefficient": "printed"}).fixtures.active

    def test_load_missing_plan(self, temp_dir):
        with pytest.raises(PlanError):
            load_plan(temp_dir / "missing.json")

    def test_load_json_plan(self, temp_dir):
        plan_path = temp_dir / "plan.json"
        plan_path.write_text(json.dumps({"kinds": ["cor2"], "s": [1.0], "families": [{"kind": "gaussian"}]}))

        plan = load_plan(plan_path)

        assert plan.kinds == ["cor2"]
        assert plan.families[0].kind == "gaussian"

    def test_load_plan_reports_field(self, temp_dir):
        plan_path = temp_dir / "plan.yaml"
        plan_path.write_text("families:\n  - kind: brownian\n")

        with pytest.raises(PlanError) as exc_info:
            load_plan(plan_path)

        assert exc_info.value.field_path == "families.0.kind"

    def test_top_level_must_be_mapping(self, temp_dir):
        plan_path = temp_dir / "plan.json"
        plan_path.write_text("[1, 2]")

        with pytest.raises(PlanError):
            load_plan(plan_path)

    def test_packaged_plans_validate(self):
        plans = Path(__file__).resolve().parent.parent / "plans"
        for path in sorted(plans.glob("*.json")):
            load_plan(path)


class TestTolerances:
    """Tests for the tolerance profile."""

    def test_packaged_default_matches_model(self):
        assert load_tolerances() == Tolerances()

    def test_custom_profile(self, temp_dir):
        profile = temp_dir / "tight.json"
        profile.write_text(json.dumps({"decomposition": 1e-12}))

        assert load_tolerances(profile).decomposition == 1e-12

    def test_redistribution_factor_per_kind(self, temp_dir):
        profile = temp_dir / "bands.json"
        profile.write_text(json.dumps({"redistribution_factors": {"thm11": 20000.0}}))
        tolerances = load_tolerances(profile)

        assert Tolerances().redistribution_factor_for("kpv_cor1") == 32.0
        assert tolerances.redistribution_factor_for("thm11") == 20000.0
        assert tolerances.redistribution_factor_for("kpv_cor1") == tolerances.redistribution_factor

    def test_missing_profile(self, temp_dir):
        with pytest.raises(ConfigurationError):
            load_tolerances(temp_dir / "missing.json")

    def test_unknown_tolerance(self, temp_dir):
        profile = temp_dir / "bad.json"
        profile.write_text(json.dumps({"decompositon": 1e-12}))

        with pytest.raises(ConfigurationError):
            load_tolerances(profile)

    def test_plan_profile_relative_to_plan(self, temp_dir):
        (temp_dir / "loose.json").write_text(json.dumps({"maximal_slack": 2.0}))
        plan = SweepPlan(tolerance_profile="loose.json")

        assert plan_tolerances(plan, temp_dir / "plan.json").maximal_slack == 2.0

    def test_plan_without_profile(self):
        assert plan_tolerances(SweepPlan()) == Tolerances()


class TestConfigurationError:
    """Tests for the ConfigurationError exception."""

    def test_error_message(self):
        """Test error message."""
        error = ConfigurationError("Invalid YAML")

        assert str(error) == "Invalid YAML"

    def test_error_with_field(self):
        error = ConfigurationError("must be positive", field_path="grid.period")

        assert str(error) == "grid.period: must be positive"

    def test_error_with_cause(self):
        """Test error with cause exception."""
        original = ValueError("Original error")
        error = ConfigurationError("Config error", from_exception=original)

        assert error.__cause__ == original

    def test_plan_error_is_configuration_error(self):
        assert issubclass(PlanError, ConfigurationError)
