"""
Command-line interface for fraclr.

This module provides the CLI entry point and argument parsing.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import scipy.fft
import yaml
from rich import print as rprint
from rich.logging import RichHandler
from rich.markdown import Markdown
from rich.panel import Panel
from rich.table import Table

from . import __version__
from .bilinear import BilinearError, bilinear_apply_direct
from .config import CliConfig, ConfigurationError, load_plan, load_tolerances, plan_tolerances
from .dump import FieldDumpError, read_field, write_family_tables, write_field
from .families import GenerationError
from .harness import CONE_ORDERS_S, SweepResult, cone_orders, lemma12_scan, run_sweep, write_artifacts, write_json
from .leibniz import (
    EstimateError,
    EstimateKindRegistry,
    EstimateSpec,
    commutator,
    remainder_kpv,
    remainder_second_order,
    theorem11_remainder,
)
from .littlewood_paley import FamilyError, project, project_gt, project_leq, project_widened
from .spectral import RealField, SpectralError, riesz_potential
from .symbols import SymbolError, SymbolRegistry
from .symbols.localized import LOCALIZATIONS, localize

# Import to register built-in symbols
from .symbols.built_in import register_built_in_symbols  # noqa: F401

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_INTERRUPTED = 130

# Errors caused by the request rather than by the numerics: exit code 2.
USAGE_ERRORS = (
    ConfigurationError,
    FieldDumpError,
    SymbolError,
    SpectralError,
    FamilyError,
    EstimateError,
    BilinearError,
    GenerationError,
    KeyError,
)

OPERATORS = {
    "riesz": 1,
    "project": 1,
    "commutator": 2,
    "remainder-kpv": 2,
    "remainder-cor2": 2,
    "remainder-thm11": 2,
    "bilinear-direct": 2,
}
PROJECTIONS = {
    "band": project,
    "low": project_leq,
    "high": project_gt,
    "widened": project_widened,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Main entry point for the CLI."""
    try:
        return _main(argv)
    except KeyboardInterrupt:
        rprint("[yellow]Cancelled.[/yellow]")
        return EXIT_INTERRUPTED
    except USAGE_ERRORS as exc:
        rprint(f"[red]Error: {exc}[/red]")
        return EXIT_USAGE
    except Exception as exc:
        rprint(f"[red]Error: {exc}[/red]")
        return EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fraclr",
        description="Fractional Leibniz rules on periodic spectral grids",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  fraclr verify --plan plans/default.json          # Run the default sweep
  fraclr verify --plan plans/default.json --threads 8
  fraclr apply riesz --s 1.5 --in f.bin            # Write D^1.5 f to <out-dir>/riesz.bin
  fraclr apply remainder-cor2 --s 2 --in f.bin g.bin
  fraclr apply bilinear-direct --symbol sum-riesz --s 1 --in f.bin g.bin
  fraclr scan-symbols --s 0.5 1.5                  # Cone bounds of |eta + theta xi|^s
  fraclr dump-family --points-per-axis 256 --j-max 6
  fraclr --list-symbols                            # List registered symbols
  fraclr --symbol-help theta-deriv                 # Show help for a symbol
        """,
    )

    parser.add_argument("--config", help="Configuration file path (YAML or JSON)")
    parser.add_argument("--list-symbols", action="store_true", help="List all registered symbols")
    parser.add_argument("--list-kinds", action="store_true", help="List all estimate kinds")
    parser.add_argument("--symbol-help", metavar="SYMBOL", help="Show detailed help for a symbol")
    parser.add_argument("--version", action="version", version=f"fraclr {__version__}")
    parser.add_argument(
        "--verbose",
        "-v",
        action="count",
        default=0,
        help="Increase verbosity (can be used multiple times)",
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", help="Directory all outputs are written to")
    common.add_argument("--threads", type=int, help="Worker threads (overridden by FRACLR_THREADS)")
    common.add_argument("--dim", type=int, help="Grid dimension, 1 or 2")
    common.add_argument("--points-per-axis", type=int, help="Grid points N per axis")
    common.add_argument("--period", type=float, help="Grid period L")
    common.add_argument("--j-min", type=int, help="Lowest Littlewood-Paley band")
    common.add_argument("--j-max", type=int, help="Highest Littlewood-Paley band")

    commands = parser.add_subparsers(dest="command")

    verify = commands.add_parser("verify", parents=[common], help="Run a sweep plan")
    verify.add_argument("--plan", help="Sweep plan file")
    verify.add_argument("--tolerances", help="Tolerance profile overriding the plan's")

    apply = commands.add_parser("apply", parents=[common], help="Apply one operator to field dumps")
    apply.add_argument("operator", choices=sorted(OPERATORS))
    apply.add_argument("--in", dest="inputs", nargs="+", required=True, help="Input field dumps")
    apply.add_argument("--out", dest="output", help="Output file name (default: <operator>.bin)")
    apply.add_argument("--s", type=float, help="Order s")
    apply.add_argument("--j", type=int, help="Band index for project")
    apply.add_argument("--mode", choices=sorted(PROJECTIONS), default="band", help="Projection kind")
    apply.add_argument("--ell", type=int, help="Correction order for remainder-thm11")
    apply.add_argument("--symbol", help="Registered symbol name for bilinear-direct")
    apply.add_argument(
        "--param",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Extra symbol parameter (repeatable)",
    )
    apply.add_argument(
        "--localize",
        choices=["none", *sorted(LOCALIZATIONS)],
        default="none",
        help="Frequency localization of the symbol",
    )

    scan = commands.add_parser("scan-symbols", parents=[common], help="Cone bounds of the symbol family")
    scan.add_argument("--s", dest="orders_s", type=float, nargs="+", help="Orders s to scan")
    scan.add_argument("--max-order", type=int, default=4, help="Largest |alpha| + |beta| (at most 4)")
    scan.add_argument("--spread-tolerance", type=float, help="Homogeneity tolerance")

    commands.add_parser("dump-family", parents=[common], help="Dump the family multiplier tables")

    return parser


def _configure_logging(verbose: int) -> None:
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(show_path=False, rich_tracebacks=True)],
        force=True,
    )


def _main(argv: Sequence[str] | None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)

    # Discover plugin-based symbols registered via entry points
    SymbolRegistry.discover_plugins()

    if args.symbol_help:
        _display_symbol_help(args.symbol_help)
        return EXIT_OK

    if args.list_symbols:
        _display_symbols()
        return EXIT_OK

    if args.list_kinds:
        _display_kinds()
        return EXIT_OK

    if args.command is None:
        parser.print_help()
        return EXIT_USAGE

    config = CliConfig.load(args.config).with_overrides(
        **{
            "grid.dim": args.dim,
            "grid.points_per_axis": args.points_per_axis,
            "grid.period": args.period,
            "family_range.j_min": args.j_min,
            "family_range.j_max": args.j_max,
            "out_dir": args.out_dir,
            "threads": args.threads,
            "plan": getattr(args, "plan", None),
        }
    )
    threads = config.resolve_threads()
    logger.info("Using %d thread(s), output in %s", threads, config.out_dir)

    with scipy.fft.set_workers(threads):
        if args.command == "verify":
            return cmd_verify(config, threads, args.tolerances)
        if args.command == "apply":
            return cmd_apply(config, args)
        if args.command == "scan-symbols":
            return cmd_scan_symbols(config, args.orders_s, args.max_order, args.spread_tolerance)
        return cmd_dump_family(config)


def cmd_verify(config: CliConfig, threads: int = 1, tolerances_path: str | None = None) -> int:
    """Run the configured sweep; exit 0 iff the verdict is PASS."""
    if config.plan is None:
        raise ConfigurationError("No sweep plan given", field_path="plan")
    plan = load_plan(config.plan)
    if tolerances_path is not None:
        tolerances = load_tolerances(tolerances_path)
    else:
        tolerances = plan_tolerances(plan, config.plan)

    result = run_sweep(plan, tolerances, threads)
    written = write_artifacts(result, config.out_dir)
    _display_checks(result)
    rprint(f"[green]Wrote {written['reports']} with {len(result.reports)} row(s).[/green]")

    if result.passed:
        rprint("[green]PASS[/green]")
        return EXIT_OK
    rprint(f"[red]FAIL[/red] ({len(result.failures())} failing case(s), see {written['verdict']})")
    return EXIT_FAIL


def _parse_params(items: Sequence[str]) -> dict[str, Any]:
    params: dict[str, Any] = {}
    for item in items:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ConfigurationError(f"expected KEY=VALUE, got {item!r}", field_path="param")
        params[key] = yaml.safe_load(raw)
    return params


def _require(value: Any, flag: str, operator: str) -> Any:
    if value is None:
        raise ConfigurationError(f"{flag} is required for {operator}", field_path=flag.lstrip("-"))
    return value


def apply_operator(config: CliConfig, args: argparse.Namespace, inputs: list[RealField]) -> RealField:
    """Evaluate one named operator on already-loaded fields."""
    operator = args.operator
    f = inputs[0]
    if operator == "riesz":
        return riesz_potential(f, _require(args.s, "--s", operator))
    if operator == "project":
        fam = config.family_range.to_family(f.grid)
        return PROJECTIONS[args.mode](f, fam, _require(args.j, "--j", operator))

    g = inputs[1]
    if operator == "commutator":
        return commutator(f, g, _require(args.s, "--s", operator))
    if operator == "remainder-kpv":
        return remainder_kpv(f, g, _require(args.s, "--s", operator))
    if operator == "remainder-cor2":
        return remainder_second_order(f, g, _require(args.s, "--s", operator))
    if operator == "remainder-thm11":
        s = _require(args.s, "--s", operator)
        fam = config.family_range.to_family(f.grid)
        return theorem11_remainder(f, g, fam, EstimateSpec(s, s, 0.0, 2.0, 4.0, 4.0, args.ell))

    params = _parse_params(args.param)
    if args.s is not None:
        params["s"] = args.s
    symbol = SymbolRegistry.get(_require(args.symbol, "--symbol", operator), **params)
    if args.localize != "none":
        symbol = localize(symbol, config.family_range.to_family(f.grid), args.localize)
    return bilinear_apply_direct(symbol, f, g)


def cmd_apply(config: CliConfig, args: argparse.Namespace) -> int:
    """Apply an operator to field dumps and write the result dump."""
    expected = OPERATORS[args.operator]
    if len(args.inputs) != expected:
        raise ConfigurationError(
            f"{args.operator} takes {expected} input field(s), got {len(args.inputs)}",
            field_path="in",
        )
    inputs = [read_field(path) for path in args.inputs]
    result = apply_operator(config, args, inputs)
    target = write_field(result, config.output_path(args.output or f"{args.operator}.bin"))
    rprint(f"[green]Wrote {target} (max |value| = {result.max_abs():.6g}).[/green]")
    return EXIT_OK


def cmd_scan_symbols(
    config: CliConfig,
    orders_s: Sequence[float] | None = None,
    max_order: int = 4,
    spread_tolerance: float | None = None,
) -> int:
    """Write the cone-bound report; exit 0 iff every spread is within tolerance."""
    if not 0 <= max_order <= 4:
        raise ConfigurationError(
            f"derivative orders above 4 are not supported, got {max_order}", field_path="max_order"
        )
    tolerance = spread_tolerance if spread_tolerance is not None else load_tolerances().cone_spread
    report = lemma12_scan(
        list(orders_s or CONE_ORDERS_S),
        cone_orders(config.grid.dim, max_order),
        config.grid.dim,
        spread_tolerance=tolerance,
    )
    target = write_json(report, config.output_path("cone_bounds.json"))

    table = Table(title="Cone bounds")
    table.add_column("s", style="cyan")
    table.add_column("alpha")
    table.add_column("beta")
    table.add_column("Q", style="green")
    table.add_column("spread", style="yellow")
    for bound in report["bounds"]:
        table.add_row(
            f"{bound['s']:g}",
            str(bound["alpha"]),
            str(bound["beta"]),
            f"{bound['Q']:.6g}",
            f"{bound['spread']:.2e}",
        )
    rprint(table)
    rprint(f"[green]Wrote {target}.[/green]")
    return EXIT_OK if report["pass"] else EXIT_FAIL


def cmd_dump_family(config: CliConfig) -> int:
    """Dump the phi_j and psi_j tables of the configured family."""
    grid = config.grid.to_grid()
    fam = config.family_range.to_family(grid)
    written = write_family_tables(fam, Path(config.out_dir) / "family")
    rprint(f"[green]Wrote {len(written)} table(s) to {Path(config.out_dir) / 'family'}.[/green]")
    return EXIT_OK


def _display_checks(result: SweepResult) -> None:
    table = Table(title="Checks")
    table.add_column("Check", style="cyan")
    table.add_column("Result")
    table.add_column("Value", style="yellow")
    table.add_column("Tolerance")
    table.add_column("Detail")
    for check in result.checks:
        status = "[green]pass[/green]" if check.passed else "[red]FAIL[/red]"
        table.add_row(check.name, status, f"{check.value:.3e}", f"{check.tolerance:g}", check.detail)
    rprint(table)


def _display_symbol_help(symbol_name: str) -> None:
    """Display detailed help information for a specific symbol."""
    symbols = {s.name: s for s in SymbolRegistry.list_symbols()}

    if symbol_name not in symbols:
        rprint(f"[red]Symbol '{symbol_name}' is not registered.[/red]")
        if symbols:
            available = ", ".join(sorted(symbols))
            rprint(f"[yellow]Available symbols:[/yellow] {available}")
        return

    info = symbols[symbol_name]

    header = Table(show_header=False, box=None)
    header.add_row("Name", f"[cyan]{info.name}[/cyan]")
    header.add_row("Description", info.description)
    header.add_row("Separable", "yes" if info.separable else "no")

    rprint(Panel(header, title="Symbol", expand=False))

    help_text = info.help or "This symbol has no additional help."
    rprint(Panel(Markdown(help_text), title="Usage"))


def _display_symbols() -> None:
    """Display all registered symbols."""
    symbols = SymbolRegistry.list_symbols()

    if not symbols:
        rprint("[yellow]No symbols registered.[/yellow]")
        return

    table = Table(title="Available Symbols")
    table.add_column("Name", style="cyan")
    table.add_column("Description", style="green")
    table.add_column("Separable", style="yellow")

    for symbol in symbols:
        table.add_row(symbol.name, symbol.description, "yes" if symbol.separable else "")

    rprint(table)


def _display_kinds() -> None:
    """Display all estimate kinds."""
    table = Table(title="Estimate Kinds")
    table.add_column("Name", style="cyan")
    table.add_column("Description", style="green")
    table.add_column("Localized only", style="yellow")

    for kind in EstimateKindRegistry.list_kinds():
        table.add_row(kind.name, kind.description, "yes" if kind.localized_only else "")

    rprint(table)


if __name__ == "__main__":
    sys.exit(main())
