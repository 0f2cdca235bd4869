"""
Configuration management for fraclr.

This module loads the CLI configuration file, sweep plans and the tolerance
profile. All three are pydantic models; validation failures surface as
ConfigurationError (or PlanError for plans) whose message names the dotted
path of the offending field.
"""

from __future__ import annotations

import json
import math
import os
from importlib import resources
from pathlib import Path
from typing import Any, Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .littlewood_paley import FamilyError, LPFamily, build_family
from .spectral import GridSpec, SpectralError

THREADS_ENV_VAR = "FRACLR_THREADS"
DEFAULT_OUT_DIR = "fraclr-out"


class ConfigurationError(Exception):
    """Exception raised for configuration errors."""

    def __init__(
        self,
        message: str,
        from_exception: Exception | None = None,
        field_path: str | None = None,
    ) -> None:
        self.message = message
        self.from_exception = from_exception
        self.field_path = field_path
        super().__init__(message)
        if from_exception:
            self.__cause__ = from_exception

    def __str__(self) -> str:
        if self.field_path:
            return f"{self.field_path}: {self.message}"
        return self.message

    @classmethod
    def from_validation(cls, exc: ValidationError, source: str = "") -> ConfigurationError:
        """Build an error naming the first failing field as a dotted path."""
        first = exc.errors()[0]
        path = ".".join(str(part) for part in first["loc"]) or None
        prefix = f"{source}: " if source else ""
        return cls(f"{prefix}{first['msg']}", from_exception=exc, field_path=path)


class PlanError(ConfigurationError):
    """Exception raised for missing or invalid sweep plans."""


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GridConfig(_Model):
    """Grid section: dimension, points per axis and period."""

    dim: int = 1
    points_per_axis: int = 256
    period: float = 2 * math.pi

    def to_grid(self) -> GridSpec:
        try:
            return GridSpec(self.dim, self.points_per_axis, self.period)
        except SpectralError as e:
            raise ConfigurationError(e.message, e, f"grid.{e.parameter}") from e


class FamilyRangeConfig(_Model):
    j_min: int = 0
    j_max: int = 6

    def to_family(self, grid: GridSpec) -> LPFamily:
        try:
            return build_family(grid, self.j_min, self.j_max)
        except FamilyError as e:
            raise ConfigurationError(e.message, e, f"family_range.{e.parameter}") from e


class FamilyEntry(_Model):
    """
    One family line of a plan. List-valued fields expand into one instance each.

    Examples:
        {"kind": "localized_pair", "k": [4, 5, 6]}
        {"kind": "dilation", "k": [3], "t": [-2, -1, 0, 1, 2]}
        {"kind": "random_bandlimited", "j_lo": 1, "j_hi": 5, "seeds": [0, 1, 2]}
    """

    kind: Literal["localized_pair", "gaussian", "dilation", "random_bandlimited"]
    k: list[int] = Field(default_factory=lambda: [4])
    t: list[int] = Field(default_factory=lambda: [0])
    seeds: list[int] = Field(default_factory=lambda: [0])
    j_lo: int = 1
    j_hi: int = 5
    center: float | None = None
    width: float | None = None

    @field_validator("seeds")
    @classmethod
    def _non_negative_seeds(cls, seeds: list[int]) -> list[int]:
        if any(seed < 0 for seed in seeds):
            raise ValueError("seeds must be non-negative")
        return seeds


class Fixtures(_Model):
    """Negative-control switches. Defaults leave every symbol intact."""

    symbol_exponent_offset: float = 0.0
    theta_coefficient: Literal["multinomial", "printed"] = "multinomial"

    @property
    def active(self) -> bool:
        return self.symbol_exponent_offset != 0.0 or self.theta_coefficient != "multinomial"


class SampleCounts(_Model):
    decomposition: int = Field(20, ge=1)
    separable: int = Field(20, ge=1)
    commutator: int = Field(5, ge=1)
    telescoping: int = Field(3, ge=1)
    maximal: int = Field(50, ge=1)
    square_function: int = Field(50, ge=1)
    fefferman_stein: int = Field(20, ge=1)
    seed: int = Field(1000, ge=0)


class SweepPlan(_Model):
    """
    A parameter sweep: estimate kinds times families times exponent points,
    followed by the identity checks named in `checks`.
    """

    kinds: list[str] = Field(default_factory=list)
    s: list[float] = Field(default_factory=lambda: [0.5, 1.0, 1.5, 2.0, 2.5, 3.0])
    splits: list[float] = Field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75, 1.0])
    triples: list[tuple[float, float, float]] = Field(
        default_factory=lambda: [(2.0, 4.0, 4.0), (1.5, 3.0, 3.0), (2.0, 6.0, 3.0)]
    )
    families: list[FamilyEntry] = Field(default_factory=list)
    grid: GridConfig = Field(default_factory=GridConfig)
    family_range: FamilyRangeConfig = Field(default_factory=FamilyRangeConfig)
    checks: list[str] | None = None
    samples: SampleCounts = Field(default_factory=SampleCounts)
    fixtures: Fixtures = Field(default_factory=Fixtures)
    tolerance_profile: str | None = None

    @field_validator("s")
    @classmethod
    def _orders(cls, values: list[float]) -> list[float]:
        if any(not 0 <= s <= 4 for s in values):
            raise ValueError("orders s must lie in [0, 4]")
        return values

    @field_validator("splits")
    @classmethod
    def _splits(cls, values: list[float]) -> list[float]:
        if any(not 0 <= v <= 1 for v in values):
            raise ValueError("split fractions must lie in [0, 1]")
        return values

    @field_validator("triples")
    @classmethod
    def _holder(cls, values: list[tuple[float, float, float]]) -> list[tuple[float, float, float]]:
        for p, p1, p2 in values:
            if min(p, p1, p2) <= 1 or not all(math.isfinite(v) for v in (p, p1, p2)):
                raise ValueError(f"exponents of ({p}, {p1}, {p2}) must lie in (1, inf)")
            if abs(1 / p - 1 / p1 - 1 / p2) > 1e-12:
                raise ValueError(f"({p}, {p1}, {p2}) violates 1/p = 1/p1 + 1/p2")
        return values

    @model_validator(mode="after")
    def _known_names(self) -> SweepPlan:
        # Imported here: the harness imports this module.
        from .harness import CHECKS
        from .leibniz import EstimateKindRegistry

        for kind in self.kinds:
            if not EstimateKindRegistry.is_registered(kind):
                raise ValueError(f"unknown estimate kind '{kind}'")
        for check in self.checks or ():
            if check not in CHECKS:
                raise ValueError(f"unknown check '{check}'")
        return self

    @property
    def selected_checks(self) -> tuple[str, ...]:
        from .harness import CHECKS

        if self.checks is None:
            return tuple(CHECKS)
        return tuple(name for name in CHECKS if name in self.checks)


class Tolerances(_Model):
    """The tolerance profile; the packaged default lives in fraclr/data/tolerances.json."""

    version: int = 1
    second_order_identity: float = 1e-10
    decomposition: float = 1e-10
    separable_vs_direct: float = 1e-10
    taylor_telescoping: float = 1e-8
    quadrature_convergence: float = 1e-10
    theta_derivative_fd: float = 1e-6
    commutator_identity: float = 1e-10
    corollary_reconstruction: float = 1e-8
    lemma22_pointwise: float = 1e-3
    maximal_slack: float = 1.1
    square_function_slack: float = 1.2
    fefferman_stein_band: float = 2.0
    cone_spread: float = 1e-9
    dilation_rel_tol: float = 1e-6
    dilation_rel_tol_nonsmooth: float = 1e-3
    redistribution_factor: float = 20.0
    redistribution_factors: dict[str, float] = Field(default_factory=lambda: {"kpv_cor1": 32.0, "cor2": 20.0})
    k_stability_factor: float = 3.0
    ratio_floor: float = 1e-10

    def redistribution_factor_for(self, kind: str) -> float:
        """Calibrated factor band of a kind, falling back to redistribution_factor."""
        return self.redistribution_factors.get(kind, self.redistribution_factor)


def _read_mapping(path: Path, error: type[ConfigurationError]) -> dict[str, Any]:
    try:
        data = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise error(f"Cannot read {path}: {exc.strerror}", exc) from exc
    except yaml.YAMLError as exc:
        raise error(f"Invalid YAML/JSON in {path}: {exc}", exc) from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise error(f"{path} must contain a mapping at the top level")
    return data


def load_plan(path: str | Path) -> SweepPlan:
    """
    Load and validate a sweep plan file (JSON or YAML).

    Raises:
        PlanError: If the file is missing or fails validation.
    """
    plan_path = Path(path)
    if not plan_path.is_file():
        raise PlanError(f"Plan file not found: {plan_path}")
    data = _read_mapping(plan_path, PlanError)
    try:
        return SweepPlan.model_validate(data)
    except ValidationError as exc:
        raise PlanError.from_validation(exc, str(plan_path)) from exc


def load_tolerances(path: str | Path | None = None) -> Tolerances:
    """
    Load the tolerance profile; None selects the packaged default.

    Raises:
        ConfigurationError: If the file is missing or fails validation.
    """
    if path is None:
        text = resources.files("fraclr").joinpath("data/tolerances.json").read_text()
        data = json.loads(text)
    else:
        profile = Path(path)
        if not profile.is_file():
            raise ConfigurationError(f"Tolerance profile not found: {profile}")
        data = _read_mapping(profile, ConfigurationError)
    try:
        return Tolerances.model_validate(data)
    except ValidationError as exc:
        raise ConfigurationError.from_validation(exc, str(path or "tolerances.json")) from exc


def plan_tolerances(plan: SweepPlan, plan_path: str | Path | None = None) -> Tolerances:
    """Tolerances named by a plan, resolved relative to the plan file."""
    if plan.tolerance_profile is None:
        return load_tolerances()
    profile = Path(plan.tolerance_profile)
    if not profile.is_absolute() and plan_path is not None:
        profile = Path(plan_path).parent / profile
    return load_tolerances(profile)


class CliConfig(_Model):
    """Main configuration for the fraclr CLI."""

    grid: GridConfig = Field(default_factory=GridConfig)
    family_range: FamilyRangeConfig = Field(default_factory=FamilyRangeConfig)
    plan: str | None = None
    out_dir: str = DEFAULT_OUT_DIR
    threads: int | None = Field(None, ge=1)

    @classmethod
    def load(cls, config_path: str | Path | None = None) -> CliConfig:
        """
        Load configuration from a YAML or JSON file.

        Args:
            config_path: Path to the configuration file. If None, searches
                        for config in standard locations.

        Returns:
            A CliConfig instance with the loaded configuration.
        """
        if config_path is not None and not Path(config_path).exists():
            raise ConfigurationError(f"Config file not found: {config_path}")
        if config_path is None:
            config_path = cls._find_config_file()
        if config_path is None:
            return cls()
        return cls._parse_config_file(config_path)

    @classmethod
    def _find_config_file(cls) -> str | None:
        """Search for config file in standard locations."""
        search_paths = [
            Path.cwd() / ".fraclr.yaml",
            Path.cwd() / ".fraclr.yml",
            Path.cwd() / "fraclr.yaml",
            Path.cwd() / "fraclr.yml",
            Path.home() / ".config" / "fraclr.yaml",
        ]

        for path in search_paths:
            if path.exists():
                return str(path)

        return None

    @classmethod
    def _parse_config_file(cls, config_path: str | Path) -> CliConfig:
        data = _read_mapping(Path(config_path), ConfigurationError)
        return cls.from_mapping(data, str(config_path))

    @classmethod
    def from_mapping(cls, data: dict[str, Any], source: str = "") -> CliConfig:
        try:
            return cls.model_validate(data)
        except ValidationError as exc:
            raise ConfigurationError.from_validation(exc, source) from exc

    def with_overrides(self, **overrides: Any) -> CliConfig:
        """
        Return a copy with flag values applied; None means "not given".

        Dotted keys address nested sections, e.g. "grid.points_per_axis".
        """
        data = self.model_dump()
        for key, value in overrides.items():
            if value is None:
                continue
            target = data
            *parents, leaf = key.split(".")
            for parent in parents:
                target = target[parent]
            target[leaf] = value
        return self.from_mapping(data, "command line")

    def resolve_threads(self) -> int:
        """Thread count: FRACLR_THREADS, then the config value, then the CPU count."""
        raw = os.environ.get(THREADS_ENV_VAR)
        if raw:
            try:
                threads = int(raw)
            except ValueError as exc:
                raise ConfigurationError(
                    f"must be a positive integer, got {raw!r}", exc, THREADS_ENV_VAR
                ) from exc
            if threads < 1:
                raise ConfigurationError(
                    f"must be a positive integer, got {raw!r}", field_path=THREADS_ENV_VAR
                )
            return threads
        if self.threads is not None:
            return self.threads
        return os.cpu_count() or 1

    def output_path(self, name: str) -> Path:
        return Path(self.out_dir) / name
