"""
fraclr: fractional Leibniz rules on periodic spectral grids.

The package evaluates Riesz potentials, Littlewood-Paley projections and
bilinear Fourier multipliers on a discrete torus, measures both sides of the
fractional Leibniz estimates and their corrected variants, and runs parameter
sweeps that check the identities the estimates rest on.

Basic Usage:
    fraclr verify --plan plans/default.json
"""

__version__ = "0.1.0"

from .bilinear import bilinear_apply_direct, bilinear_apply_separable, decompose
from .cli import main
from .config import CliConfig, ConfigurationError, SweepPlan, Tolerances, load_plan
from .harness import SweepResult, run_sweep
from .leibniz import EstimateKindRegistry, EstimateSpec, estimate_report
from .littlewood_paley import LPFamily, build_family
from .spectral import GridSpec, RealField, SpectralField, riesz_potential
from .symbols import Symbol, SymbolError, SymbolRegistry

__all__ = [
    "main",
    "CliConfig",
    "ConfigurationError",
    "SweepPlan",
    "Tolerances",
    "load_plan",
    "SweepResult",
    "run_sweep",
    "EstimateKindRegistry",
    "EstimateSpec",
    "estimate_report",
    "LPFamily",
    "build_family",
    "GridSpec",
    "RealField",
    "SpectralField",
    "riesz_potential",
    "bilinear_apply_direct",
    "bilinear_apply_separable",
    "decompose",
    "Symbol",
    "SymbolError",
    "SymbolRegistry",
]
