"""
Parameter sweeps, identity checks and verdict artifacts for fraclr.

A sweep runs every (estimate kind, family, exponent point) triple of a plan,
then the identity checks the plan selects. Failures are data: every
check yields CheckResult records and the verdict is PASS iff all of them
pass. Outputs are byte-stable for a fixed plan and build; parallel results
are re-ordered by plan index before anything is written.

Usage:
    from fraclr.config import load_plan
    from fraclr.harness import run_sweep, write_artifacts

    result = run_sweep(load_plan("plans/default.json"), threads=4)
    write_artifacts(result, "fraclr-out")
"""

from __future__ import annotations

import csv
import json
import logging
import math
from collections import defaultdict
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .bilinear import (
    ConeBound,
    ConeSample,
    bilinear_apply_direct,
    bilinear_apply_separable,
    decompose,
    remainder_symbol_apply,
    symbol_cone_bounds,
    taylor_correction_lowhigh,
)
from .config import SweepPlan, Tolerances, load_tolerances
from .dump import write_field
from .families import FamilySpec, GenerationError, dilation_grid, generate, random_bandlimited
from .leibniz import (
    EstimateError,
    EstimateKindRegistry,
    EstimateReport,
    EstimateSpec,
    commutator_first_correction,
    corollary11_pieces,
    corollary12_pieces,
    estimate_report,
    remainder_second_order,
)
from .littlewood_paley import LPFamily, build_family, lemma22_bound_check, mu, square_function_ratio
from .spectral import (
    GridSpec,
    MultiIndex,
    RealField,
    lp_norm,
    lq_aggregate,
    maximal_function,
    riesz_potential,
    vector_maximal_norm,
)
from .symbols.localized import LowHighLocalized
from .symbols.riesz import ShiftedRiesz, SumRiesz, ThetaDeriv

logger = logging.getLogger(__name__)

CHECKS = (
    "second_order_identity",
    "decomposition",
    "separable_vs_direct",
    "taylor_telescoping",
    "quadrature_convergence",
    "theta_derivative_fd",
    "commutator_identity",
    "corollary11_reconstruction",
    "corollary12_reconstruction",
    "lemma22_pointwise",
    "maximal_bound",
    "square_function",
    "fefferman_stein",
    "cone_homogeneity",
    "lemma11_k_stability",
)

CSV_COLUMNS = (
    "kind",
    "family",
    "lambda",
    "k",
    "s",
    "s1",
    "s2",
    "p",
    "p1",
    "p2",
    "lhs",
    "rhs",
    "ratio",
    "grid_N",
    "seed",
)

LOCALIZED_FAMILIES = ("localized_pair", "dilation")
REDISTRIBUTION_KINDS = ("kpv_cor1", "cor2")
# Grid size at which the exact-identity tolerances hold as written; FFT
# roundoff of D^2 grows with the largest resolved frequency.
IDENTITY_REFERENCE_POINTS = 256
CONE_ORDERS_S = (0.5, 1.0, 1.5, 2.0, 2.5)
FD_STEP = 1e-2


@dataclass(frozen=True)
class SweepPoint:
    """One (kind, family, spec) triple with its position in the plan."""

    index: int
    kind: str
    family: FamilySpec
    spec: EstimateSpec


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one identity or stability check, or one failing case of it."""

    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""
    params: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "check": self.name,
            "passed": self.passed,
            "value": self.value,
            "tolerance": self.tolerance,
            "detail": self.detail,
            "params": self.params,
        }


@dataclass
class SweepResult:
    """Report rows in plan order, check outcomes and inputs of failed rows."""

    reports: list[EstimateReport]
    checks: list[CheckResult]
    skipped: int = 0
    failed_inputs: dict[int, tuple[RealField, RealField]] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failures(self) -> list[dict[str, Any]]:
        return [check.to_dict() for check in self.checks if not check.passed]

    def verdict(self) -> dict[str, Any]:
        return {"pass": self.passed, "failures": self.failures()}


@dataclass(frozen=True)
class _Outcome:
    value: float
    passed: bool
    params: dict[str, Any]
    tolerance: float | None = None


@dataclass(frozen=True)
class CheckContext:
    """Everything a check needs: plan, tolerances, the working grid and generated pairs."""

    plan: SweepPlan
    tolerances: Tolerances
    grid: GridSpec
    fam: LPFamily
    pairs: dict[FamilySpec, tuple[RealField, RealField]]

    @property
    def offset(self) -> float:
        return self.plan.fixtures.symbol_exponent_offset

    @property
    def coefficient(self) -> str:
        return self.plan.fixtures.theta_coefficient

    def band_window(self) -> tuple[int, int]:
        """Bands for random band-limited samples, one band inside the family where possible."""
        if self.fam.j_max - self.fam.j_min >= 3:
            return self.fam.j_min + 1, self.fam.j_max - 1
        return self.fam.j_min, self.fam.j_max

    def sample_pairs(self, count: int) -> list[tuple[int, RealField, RealField]]:
        j_lo, j_hi = self.band_window()
        base = self.plan.samples.seed
        return [
            (
                base + 2 * i,
                random_bandlimited(self.grid, self.fam, j_lo, j_hi, base + 2 * i),
                random_bandlimited(self.grid, self.fam, j_lo, j_hi, base + 2 * i + 1),
            )
            for i in range(count)
        ]

    def sample_fields(self, count: int) -> list[tuple[int, RealField]]:
        j_lo, j_hi = self.band_window()
        base = self.plan.samples.seed
        return [
            (base + i, random_bandlimited(self.grid, self.fam, j_lo, j_hi, base + i))
            for i in range(count)
        ]

    def family_fields(self) -> list[tuple[str, RealField]]:
        """Family members living on the working grid."""
        fields_ = []
        for fspec, (f, g) in self.pairs.items():
            if fspec.grid == self.grid:
                fields_ += [(f"{fspec.label}:f", f), (f"{fspec.label}:g", g)]
        return fields_


def relative_gap(approximation: RealField, reference: RealField) -> float:
    """max |approximation - reference| / max |reference|."""
    scale = max(reference.max_abs(), np.finfo(float).tiny)
    return (approximation - reference).max_abs() / scale


def _describe(params: dict[str, Any]) -> str:
    return ", ".join(f"{key}={value}" for key, value in params.items())


def _summarize(name: str, tolerance: float, outcomes: Iterable[_Outcome]) -> list[CheckResult]:
    """One passing summary record, or one record per failing case."""
    outcomes = list(outcomes)
    failed = [o for o in outcomes if not o.passed]
    if not failed:
        worst = max((o.value for o in outcomes), default=0.0)
        return [CheckResult(name, True, worst, tolerance, f"{len(outcomes)} cases")]
    logger.info("%s: %d of %d cases failed", name, len(failed), len(outcomes))
    return [
        CheckResult(
            name,
            False,
            o.value,
            tolerance if o.tolerance is None else o.tolerance,
            _describe(o.params),
            o.params,
        )
        for o in failed
    ]


def _within(value: float, tolerance: float) -> bool:
    return math.isfinite(value) and value <= tolerance


def identity_tolerance(tolerance: float, points_per_axis: int) -> float:
    """An exact-identity tolerance widened linearly above the reference grid size."""
    return tolerance * max(1.0, points_per_axis / IDENTITY_REFERENCE_POINTS)


# Plan expansion


def family_specs(plan: SweepPlan, grid: GridSpec, fam: LPFamily) -> list[FamilySpec]:
    """Expand the plan's family entries; dilation instances live on their own grid."""
    specs: list[FamilySpec] = []
    dilation: tuple[GridSpec, LPFamily] | None = None
    for entry in plan.families:
        if entry.kind == "localized_pair":
            specs += [
                FamilySpec("localized_pair", grid, fam, k=k, seed=seed)
                for k in entry.k
                for seed in entry.seeds
            ]
        elif entry.kind == "gaussian":
            specs.append(FamilySpec("gaussian", grid, fam, center=entry.center, width=entry.width))
        elif entry.kind == "dilation":
            if dilation is None:
                dilation = dilation_grid()
            specs += [
                FamilySpec("dilation", dilation[0], dilation[1], k=k, t=t, seed=seed)
                for k in entry.k
                for seed in entry.seeds
                for t in entry.t
            ]
        else:
            specs += [
                FamilySpec(
                    "random_bandlimited", grid, fam, seed=seed, j_lo=entry.j_lo, j_hi=entry.j_hi
                )
                for seed in entry.seeds
            ]
    return specs


def spec_points(plan: SweepPlan) -> list[EstimateSpec]:
    """Every (s, split, triple) combination, splits given as the fraction of s put on f."""
    points = []
    seen = set()
    for s in plan.s:
        for fraction in plan.splits:
            s1 = s * fraction
            for p, p1, p2 in plan.triples:
                key = (s, s1, p, p1, p2)
                if key in seen:
                    continue
                seen.add(key)
                points.append(EstimateSpec(s, s1, s - s1, p, p1, p2))
    return points


def expand_points(
    plan: SweepPlan, families: Sequence[FamilySpec], specs: Sequence[EstimateSpec]
) -> tuple[list[SweepPoint], int]:
    """
    Cross kinds, families and specs, dropping points outside a kind's range.

    Localized-only kinds run on localized and dilation families only.

    Returns:
        (points, skipped): points in plan order and the number of invalid specs dropped.
    """
    points: list[SweepPoint] = []
    skipped = 0
    for kind in plan.kinds:
        estimate = EstimateKindRegistry.get(kind)
        for fspec in families:
            if estimate.info.localized_only and fspec.kind not in LOCALIZED_FAMILIES:
                continue
            for spec in specs:
                try:
                    estimate.validate(spec)
                except EstimateError:
                    skipped += 1
                    continue
                points.append(SweepPoint(len(points), kind, fspec, spec))
    return points, skipped


def _generate_all(
    families: Sequence[FamilySpec],
) -> tuple[dict[FamilySpec, tuple[RealField, RealField]], list[CheckResult]]:
    pairs = {}
    failures = []
    for fspec in families:
        try:
            pairs[fspec] = generate(fspec)
        except GenerationError as e:
            failures.append(
                CheckResult("generation", False, math.nan, 0.0, str(e), {"family": fspec.label})
            )
    return pairs, failures


def _evaluate(point: SweepPoint, pairs: dict[FamilySpec, tuple[RealField, RealField]]) -> EstimateReport:
    f, g = pairs[point.family]
    try:
        return estimate_report(
            point.kind,
            f,
            g,
            point.family.fam,
            point.spec,
            point.family.label,
            point.family.params(),
        )
    except Exception as e:  # failures are data, the row is marked instead
        logger.warning("%s on %s failed: %s", point.kind, point.family.label, e)
        return EstimateReport(
            kind=point.kind,
            spec=point.spec,
            lhs=math.nan,
            rhs=math.nan,
            ratio=math.nan,
            family_label=point.family.label,
            family_params=point.family.params(),
            hard_failure=True,
        )


# Ratio properties over report rows


def _row_params(report: EstimateReport) -> dict[str, Any]:
    return {"kind": report.kind, "family": report.family_label, **report.spec.to_dict()}


def _even_integer(value: float) -> bool:
    return float(value).is_integer() and int(value) % 2 == 0


def vanishes_identically(report: EstimateReport) -> bool:
    """cor2 at s = 2: the gradient-corrected symbol is zero, the ratio is roundoff."""
    return report.kind == "cor2" and report.spec.s == 2


def _spread_outcome(ratios: list[float], tolerance: float, floor: float, params: dict) -> _Outcome:
    """Relative spread (max - min)/max; groups below the floor count as vanishing."""
    high = max(ratios)
    if all(math.isfinite(r) for r in ratios) and high <= floor:
        return _Outcome(0.0, True, params)
    spread = (high - min(ratios)) / high if high > 0 else math.nan
    return _Outcome(spread, _within(spread, tolerance), params)


def _factor_outcome(ratios: list[float], tolerance: float, floor: float, params: dict) -> _Outcome:
    """max/min of a group; groups below the floor count as vanishing."""
    high = max(ratios)
    if all(math.isfinite(r) for r in ratios) and high <= floor:
        return _Outcome(1.0, True, params)
    factor = high / max(min(ratios), floor)
    return _Outcome(factor, _within(factor, tolerance), params)


def ratio_properties(reports: Sequence[EstimateReport], tolerances: Tolerances) -> list[CheckResult]:
    """Finiteness, the exact s = 2 identity, dilation invariance and the redistribution band."""
    results = _summarize(
        "finite_ratios",
        0.0,
        (
            _Outcome(r.ratio, r.finite and not r.hard_failure and r.lhs >= 0 and r.rhs >= 0, _row_params(r))
            for r in reports
        ),
    )
    identity = tolerances.second_order_identity
    identity_outcomes = []
    for r in reports:
        if vanishes_identically(r):
            points = r.family_params.get("N", IDENTITY_REFERENCE_POINTS)
            tolerance = identity_tolerance(identity, points)
            identity_outcomes.append(
                _Outcome(r.ratio, _within(r.ratio, tolerance), _row_params(r), tolerance)
            )
    results += _summarize("cor2_identity", identity, identity_outcomes)

    # Rows that vanish by construction carry no ratio to compare.
    compared = [r for r in reports if not vanishes_identically(r)]

    dilation: dict[tuple, list[EstimateReport]] = defaultdict(list)
    for r in compared:
        if r.family_params.get("kind") == "dilation":
            key = (r.kind, r.spec, r.family_params["k"], r.family_params["seed"])
            dilation[key].append(r)
    smooth_outcomes, rough_outcomes = [], []
    for (kind, spec, k, seed), group in dilation.items():
        if len(group) < 2:
            continue
        params = {"kind": kind, "k": k, "seed": seed, **spec.to_dict()}
        ratios = [r.ratio for r in group]
        if all(_even_integer(v) for v in (spec.p, spec.p1, spec.p2)):
            smooth_outcomes.append(
                _spread_outcome(ratios, tolerances.dilation_rel_tol, tolerances.ratio_floor, params)
            )
        else:
            rough_outcomes.append(
                _spread_outcome(ratios, tolerances.dilation_rel_tol_nonsmooth, tolerances.ratio_floor, params)
            )
    results += _summarize("dilation_invariance", tolerances.dilation_rel_tol, smooth_outcomes)
    if rough_outcomes:
        results += _summarize("dilation_invariance", tolerances.dilation_rel_tol_nonsmooth, rough_outcomes)

    splits: dict[tuple, list[float]] = defaultdict(list)
    for r in compared:
        if r.kind in REDISTRIBUTION_KINDS:
            splits[(r.kind, r.family_label, r.spec.s, r.spec.p, r.spec.p1, r.spec.p2)].append(r.ratio)
    for kind in REDISTRIBUTION_KINDS:
        factor = tolerances.redistribution_factor_for(kind)
        outcomes = [
            _factor_outcome(
                ratios,
                factor,
                tolerances.ratio_floor,
                {"kind": kind, "family": label, "s": s, "p": p, "p1": p1, "p2": p2},
            )
            for (group_kind, label, s, p, p1, p2), ratios in splits.items()
            if group_kind == kind and len(ratios) > 1
        ]
        if outcomes:
            results += _summarize("redistribution_band", factor, outcomes)
    return results


# Identity checks


def check_second_order_identity(ctx: CheckContext) -> list[CheckResult]:
    """||D^2(fg) - f D^2 g - g D^2 f + 2 grad f . grad g||_2 against ||Df||_4 ||Dg||_4."""
    base = ctx.tolerances.second_order_identity
    cases = [(fspec.label, f, g) for fspec, (f, g) in ctx.pairs.items()]
    if not cases:
        cases = [(f"seed={seed}", f, g) for seed, f, g in ctx.sample_pairs(3)]
    outcomes = []
    for label, f, g in cases:
        tolerance = identity_tolerance(base, f.grid.points_per_axis)
        residual = lp_norm(remainder_second_order(f, g, 2.0), 2)
        scale = lp_norm(riesz_potential(f, 1.0), 4) * lp_norm(riesz_potential(g, 1.0), 4)
        value = residual / scale if scale > 0 else residual
        outcomes.append(_Outcome(value, _within(value, tolerance), {"family": label}, tolerance))
    return _summarize("second_order_identity", base, outcomes)


def check_decomposition(ctx: CheckContext) -> list[CheckResult]:
    """Low-high + diagonal + high-low reconstructs the direct sum of |xi + eta|^s."""
    tolerance = ctx.tolerances.decomposition
    outcomes = []
    for seed, f, g in ctx.sample_pairs(ctx.plan.samples.decomposition):
        for s in (0.5, 1.5, 2.5):
            pieces = decompose(SumRiesz(s + ctx.offset), f, g, ctx.fam)
            if ctx.offset:
                value = relative_gap(pieces.total(), bilinear_apply_direct(SumRiesz(s), f, g))
            else:
                value = pieces.residual
            params = {"symbol": "sum-riesz", "s": s, "seed": seed}
            outcomes.append(_Outcome(value, _within(value, tolerance), params))
    return _summarize("decomposition", tolerance, outcomes)


def check_separable_vs_direct(ctx: CheckContext) -> list[CheckResult]:
    """The separable path for A^m_s(0), m in {0, 1, 2}, against the direct double sum."""
    tolerance = ctx.tolerances.separable_vs_direct
    outcomes = []
    for seed, f, g in ctx.sample_pairs(ctx.plan.samples.separable):
        for s in (0.5, 1.5, 2.5):
            for m in (0, 1, 2):
                fast = bilinear_apply_separable(ThetaDeriv(s + ctx.offset, 0.0, m, ctx.coefficient), f, g)
                direct = bilinear_apply_direct(ThetaDeriv(s, 0.0, m, ctx.coefficient), f, g)
                value = relative_gap(fast, direct)
                params = {"symbol": "theta-deriv", "s": s, "m": m, "seed": seed}
                outcomes.append(_Outcome(value, _within(value, tolerance), params))
    return _summarize("separable_vs_direct", tolerance, outcomes)


def check_taylor_telescoping(ctx: CheckContext) -> list[CheckResult]:
    """B_low_high(|xi + eta|^s) minus the corrections of order < l equals the order-l remainder."""
    tolerance = ctx.tolerances.taylor_telescoping
    outcomes = []
    for seed, f, g in ctx.sample_pairs(ctx.plan.samples.telescoping):
        for s in (0.5, 1.5, 2.0, 2.5, 3.0):
            lowhigh = bilinear_apply_direct(LowHighLocalized(SumRiesz(s), ctx.fam), f, g)
            used = s + ctx.offset
            for ell in (1, 2, 3):
                corrected = lowhigh - taylor_correction_lowhigh(used, ell, f, g, ctx.fam, ctx.coefficient)
                remainder = remainder_symbol_apply(used, ell, f, g, ctx.fam)
                scale = max(lowhigh.max_abs(), np.finfo(float).tiny)
                value = (corrected - remainder).max_abs() / scale
                params = {"s": s, "ell": ell, "seed": seed}
                outcomes.append(_Outcome(value, _within(value, tolerance), params))
    return _summarize("taylor_telescoping", tolerance, outcomes)


def check_quadrature_convergence(ctx: CheckContext) -> list[CheckResult]:
    """Remainder kernels at 16 and 64 Gauss-Legendre nodes agree."""
    tolerance = ctx.tolerances.quadrature_convergence
    outcomes = []
    [(seed, f, g)] = ctx.sample_pairs(1)
    for s in (0.5, 1.5, 2.5):
        for ell in (1, 2):
            coarse = remainder_symbol_apply(s, ell, f, g, ctx.fam, quad_order=16)
            fine = remainder_symbol_apply(s, ell, f, g, ctx.fam, quad_order=64)
            value = relative_gap(coarse, fine)
            outcomes.append(_Outcome(value, _within(value, tolerance), {"s": s, "ell": ell, "seed": seed}))
    return _summarize("quadrature_convergence", tolerance, outcomes)


def _shifted(s: float, theta: float, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
    return ShiftedRiesz(s, theta).evaluate(xi, eta)


def _theta_difference(s: float, theta: float, m: int, step: float, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
    if m == 1:
        return (_shifted(s, theta + step, xi, eta) - _shifted(s, theta - step, xi, eta)) / (2 * step)
    return (
        _shifted(s, theta + step, xi, eta)
        - 2 * _shifted(s, theta, xi, eta)
        + _shifted(s, theta - step, xi, eta)
    ) / step**2


def check_theta_derivative_fd(ctx: CheckContext) -> list[CheckResult]:
    """
    m! ThetaDeriv(s, theta, m) against Richardson-extrapolated central
    differences of |eta + theta xi|^s in theta.
    """
    tolerance = ctx.tolerances.theta_derivative_fd
    sample = ConeSample.default(ctx.grid.dim, scales=range(-2, 3))
    xi, eta = sample.xi, sample.eta
    xi_norm = np.sqrt(np.sum(xi**2, axis=-1))
    eta_norm = np.sqrt(np.sum(eta**2, axis=-1))
    outcomes = []
    for s in (0.5, 1.5, 2.5):
        for m in (1, 2):
            scale = eta_norm ** (s - m) * xi_norm**m
            for theta in (0.1, 0.3, 0.5, 0.7, 0.9):
                exact = math.factorial(m) * ThetaDeriv(s, theta, m, ctx.coefficient).evaluate(xi, eta)
                coarse = _theta_difference(s, theta, m, FD_STEP, xi, eta)
                fine = _theta_difference(s, theta, m, FD_STEP / 2, xi, eta)
                extrapolated = (4 * fine - coarse) / 3
                value = float(np.max(np.abs(extrapolated - exact) / scale))
                params = {"s": s, "m": m, "theta": theta, "coefficient": ctx.coefficient}
                outcomes.append(_Outcome(value, _within(value, tolerance), params))
    return _summarize("theta_derivative_fd", tolerance, outcomes)


def check_commutator_identity(ctx: CheckContext) -> list[CheckResult]:
    """[D^s, f] g - A^1_s(0)(f, g) through FFTs against three direct sums."""
    tolerance = ctx.tolerances.commutator_identity
    outcomes = []
    for seed, f, g in ctx.sample_pairs(ctx.plan.samples.commutator):
        for s in (0.5, 1.5, 2.5):
            product = bilinear_apply_direct(ShiftedRiesz(s, 1.0), f, g)
            direct = (
                product
                - bilinear_apply_direct(ShiftedRiesz(s, 0.0), f, g)
                - bilinear_apply_direct(ThetaDeriv(s, 0.0, 1), f, g)
            )
            fast = commutator_first_correction(f, g, s + ctx.offset)
            scale = max(product.max_abs(), np.finfo(float).tiny)
            value = (fast - direct).max_abs() / scale
            outcomes.append(_Outcome(value, _within(value, tolerance), {"s": s, "seed": seed}))
    return _summarize("commutator_identity", tolerance, outcomes)


def _reconstruction(
    ctx: CheckContext, name: str, orders: Sequence[float], pieces: Callable
) -> list[CheckResult]:
    tolerance = ctx.tolerances.corollary_reconstruction
    outcomes = []
    for seed, f, g in ctx.sample_pairs(ctx.plan.samples.telescoping):
        for s in orders:
            value = pieces(f, g, s, ctx.fam).residual
            outcomes.append(_Outcome(value, _within(value, tolerance), {"s": s, "seed": seed}))
    return _summarize(name, tolerance, outcomes)


def check_corollary11_reconstruction(ctx: CheckContext) -> list[CheckResult]:
    return _reconstruction(ctx, "corollary11_reconstruction", (0.5, 1.0, 1.5), corollary11_pieces)


def check_corollary12_reconstruction(ctx: CheckContext) -> list[CheckResult]:
    return _reconstruction(ctx, "corollary12_reconstruction", (2.0, 2.5, 3.0), corollary12_pieces)


def check_lemma22_pointwise(ctx: CheckContext) -> list[CheckResult]:
    """|D^s P_{<=k} f| <= 2^{sk} C_num Mf at every grid point."""
    tolerance = ctx.tolerances.lemma22_pointwise
    cases = ctx.family_fields() or [(f"seed={seed}", f) for seed, f in ctx.sample_fields(3)]
    outcomes = []
    for s in (0.0, 0.5, 1.0, 2.0):
        for k in (2, 4, 6):
            if k not in ctx.fam.bands:
                continue
            for label, f in cases:
                report = lemma22_bound_check(f, ctx.fam, s, k, tolerance)
                params = {"s": s, "k": k, "field": label, "violations": report.violations}
                outcomes.append(_Outcome(report.max_ratio, report.passed, params))
    return _summarize("lemma22_pointwise", tolerance, outcomes)


def check_maximal_bound(ctx: CheckContext) -> list[CheckResult]:
    """||Mf||_p / (3^{dim/p} p' ||f||_p) stays below the slack."""
    slack = ctx.tolerances.maximal_slack
    outcomes = []
    for seed, f in ctx.sample_fields(ctx.plan.samples.maximal):
        for p in (1.5, 2.0, 4.0):
            bound = 3.0 ** (ctx.grid.dim / p) * (p / (p - 1)) * lp_norm(f, p)
            value = lp_norm(maximal_function(f), p) / bound
            outcomes.append(_Outcome(value, _within(value, slack), {"p": p, "seed": seed}))
    return _summarize("maximal_bound", slack, outcomes)


def check_square_function(ctx: CheckContext) -> list[CheckResult]:
    """mu(p)^-1 <= ||f||_{F^0_{p,2}} / ||f||_p <= mu(p), up to the slack."""
    slack = ctx.tolerances.square_function_slack
    outcomes = []
    for seed, f in ctx.sample_fields(ctx.plan.samples.square_function):
        for p in (1.5, 2.0, 4.0):
            ratio = square_function_ratio(f, ctx.fam, p)
            value = max(ratio, 1 / ratio) / mu(p)
            outcomes.append(_Outcome(value, _within(value, slack), {"p": p, "seed": seed, "ratio": ratio}))
    return _summarize("square_function", slack, outcomes)


def _fefferman_stein_grids(ctx: CheckContext) -> list[GridSpec]:
    sizes = (128, 256, 512) if ctx.grid.dim == 1 else (64, 128, 256)
    return [GridSpec(ctx.grid.dim, n, ctx.grid.period) for n in sizes]


def check_fefferman_stein(ctx: CheckContext) -> list[CheckResult]:
    """
    ||(M f_j)||_{L^2(l^2)} / ||(f_j)||_{L^2(l^2)} for 8-term sequences, compared
    across grid sizes: the ratio must stay within a fixed band.
    """
    band = ctx.tolerances.fefferman_stein_band
    grids = _fefferman_stein_grids(ctx)
    j_max = math.floor(math.log2(grids[0].nyquist)) - 1
    if j_max < 1:
        return [CheckResult("fefferman_stein", True, 1.0, band, "grid too coarse, skipped")]
    families = [build_family(grid, 0, j_max) for grid in grids]
    j_hi = min(3, j_max)
    base = ctx.plan.samples.seed
    outcomes = []
    for i in range(ctx.plan.samples.fefferman_stein):
        seeds = [base + 8 * i + m for m in range(8)]
        ratios = []
        for grid, fam in zip(grids, families, strict=True):
            fs = [random_bandlimited(grid, fam, 0, j_hi, seed) for seed in seeds]
            denominator = lp_norm(RealField(grid, lq_aggregate(np.stack([f.values for f in fs]), 2)), 2)
            ratios.append(vector_maximal_norm(fs, 2.0, 2.0) / denominator)
        value = max(ratios) / min(ratios)
        outcomes.append(_Outcome(value, _within(value, band), {"seeds": f"{seeds[0]}..{seeds[-1]}"}))
    return _summarize("fefferman_stein", band, outcomes)


def cone_orders(dim: int, max_order: int = 4) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Every (alpha, beta) with |alpha| + |beta| <= max_order."""
    orders = []
    for a in range(max_order + 1):
        for b in range(max_order - a + 1):
            for alpha in MultiIndex.of_order(dim, a):
                for beta in MultiIndex.of_order(dim, b):
                    orders.append((alpha.entries, beta.entries))
    return orders


def _homogeneous(bound: ConeBound, tolerance: float) -> bool:
    return bound.finite and _within(bound.spread, tolerance)


def lemma12_scan(
    s_list: Sequence[float],
    order_list: Sequence[tuple[Sequence[int] | int, Sequence[int] | int]],
    dim: int = 1,
    sample: ConeSample | None = None,
    spread_tolerance: float = 1e-9,
) -> dict[str, Any]:
    """
    Normalized cone bounds Q(alpha, beta) of |eta + theta xi|^s per s and order.

    PASS iff every Q is finite and its per-scale spread is at most
    spread_tolerance (exact homogeneity).

    Raises:
        BilinearError: If some |alpha| + |beta| exceeds 4.
    """
    sample = sample or ConeSample.default(dim)
    bounds = [b for s in s_list for b in symbol_cone_bounds(s, order_list, sample)]
    failures = [b.to_dict() for b in bounds if not _homogeneous(b, spread_tolerance)]
    return {
        "pass": not failures,
        "spread_tolerance": spread_tolerance,
        "bounds": [b.to_dict() for b in bounds],
        "failures": failures,
    }


def check_cone_homogeneity(ctx: CheckContext) -> list[CheckResult]:
    tolerance = ctx.tolerances.cone_spread
    scales = range(-20, 20) if ctx.grid.dim == 1 else range(-4, 4)
    sample = ConeSample.default(ctx.grid.dim, scales=scales)
    orders = cone_orders(ctx.grid.dim)
    return _summarize(
        "cone_homogeneity",
        tolerance,
        (
            _Outcome(
                bound.spread,
                _homogeneous(bound, tolerance),
                {"s": bound.s, "alpha": list(bound.alpha), "beta": list(bound.beta)},
            )
            for s in CONE_ORDERS_S
            for bound in symbol_cone_bounds(s, orders, sample)
        ),
    )


def check_lemma11_k_stability(ctx: CheckContext) -> list[CheckResult]:
    """Commutator ratios of localized pairs stay within a factor band for k = 4..7."""
    factor = ctx.tolerances.k_stability_factor
    if not ctx.plan.triples:
        return [CheckResult("lemma11_k_stability", True, 1.0, factor, "no triples, skipped")]
    grid = GridSpec(1, 1024, 2 * math.pi)
    fam = build_family(grid, 0, 7)
    p, p1, p2 = ctx.plan.triples[0]
    pairs = [
        (k, generate(FamilySpec("localized_pair", grid, fam, k=k, seed=ctx.plan.samples.seed)))
        for k in range(4, 8)
    ]
    outcomes = []
    for s in ctx.plan.s:
        s1 = min(1.0, s / 2)
        spec = EstimateSpec(s, s1, s - s1, p, p1, p2)
        ratios = [estimate_report("lemma11_commutator", f, g, fam, spec).ratio for k, (f, g) in pairs]
        params = {"s": s, "s1": s1, "p": p, "p1": p1, "p2": p2}
        outcomes.append(_factor_outcome(ratios, factor, ctx.tolerances.ratio_floor, params))
    return _summarize("lemma11_k_stability", factor, outcomes)


CHECK_FUNCTIONS: dict[str, Callable[[CheckContext], list[CheckResult]]] = {
    "second_order_identity": check_second_order_identity,
    "decomposition": check_decomposition,
    "separable_vs_direct": check_separable_vs_direct,
    "taylor_telescoping": check_taylor_telescoping,
    "quadrature_convergence": check_quadrature_convergence,
    "theta_derivative_fd": check_theta_derivative_fd,
    "commutator_identity": check_commutator_identity,
    "corollary11_reconstruction": check_corollary11_reconstruction,
    "corollary12_reconstruction": check_corollary12_reconstruction,
    "lemma22_pointwise": check_lemma22_pointwise,
    "maximal_bound": check_maximal_bound,
    "square_function": check_square_function,
    "fefferman_stein": check_fefferman_stein,
    "cone_homogeneity": check_cone_homogeneity,
    "lemma11_k_stability": check_lemma11_k_stability,
}


def _run_check(name: str, ctx: CheckContext) -> list[CheckResult]:
    try:
        return CHECK_FUNCTIONS[name](ctx)
    except Exception as e:  # failures are data, the check is marked instead
        logger.warning("Check %s raised: %s", name, e)
        return [CheckResult(name, False, math.nan, 0.0, f"{type(e).__name__}: {e}")]


def run_sweep(
    plan: SweepPlan, tolerances: Tolerances | None = None, threads: int = 1
) -> SweepResult:
    """
    Execute every sweep triple and every selected check of a plan.

    Triples and checks run on a thread pool; rows come back in plan order, so
    the output does not depend on the thread count.

    Raises:
        ConfigurationError: If the plan's grid or band range is invalid.
    """
    tolerances = tolerances or load_tolerances()
    grid = plan.grid.to_grid()
    fam = plan.family_range.to_family(grid)

    families = family_specs(plan, grid, fam)
    pairs, generation_failures = _generate_all(families)
    points, skipped = expand_points(plan, [f for f in families if f in pairs], spec_points(plan))
    logger.info(
        "Sweep: %d points (%d specs outside kind ranges), %d checks",
        len(points),
        skipped,
        len(plan.selected_checks),
    )

    ctx = CheckContext(plan, tolerances, grid, fam, pairs)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        reports = list(pool.map(lambda point: _evaluate(point, pairs), points))
        futures = [pool.submit(_run_check, name, ctx) for name in plan.selected_checks]
        checks = [result for future in futures for result in future.result()]

    checks = generation_failures + ratio_properties(reports, tolerances) + checks
    failed_inputs = {
        point.index: pairs[point.family]
        for point, report in zip(points, reports, strict=True)
        if report.hard_failure or not report.finite
    }
    result = SweepResult(reports, checks, skipped, failed_inputs)
    logger.info("Sweep verdict: %s", "PASS" if result.passed else "FAIL")
    return result


# Artifacts


def _number(value: float) -> str:
    return format(float(value), ".17g")


def report_row(report: EstimateReport) -> dict[str, str]:
    """One CSV row; floats are written with 17 significant digits."""
    params = report.family_params
    spec = report.spec
    return {
        "kind": report.kind,
        "family": report.family_label,
        "lambda": str(params.get("lambda", 1)),
        "k": str(params.get("k", "")),
        "s": _number(spec.s),
        "s1": _number(spec.s1),
        "s2": _number(spec.s2),
        "p": _number(spec.p),
        "p1": _number(spec.p1),
        "p2": _number(spec.p2),
        "lhs": _number(report.lhs),
        "rhs": _number(report.rhs),
        "ratio": _number(report.ratio),
        "grid_N": str(params.get("N", "")),
        "seed": str(params.get("seed", "")),
    }


def write_reports_csv(reports: Sequence[EstimateReport], path: str | Path) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for report in reports:
            writer.writerow(report_row(report))
    return target


def _json_safe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, np.generic):
        return _json_safe(value.item())
    return value


def write_json(payload: dict[str, Any], path: str | Path) -> Path:
    """Sorted-key JSON; non-finite numbers are written as strings."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_json_safe(payload), indent=2, sort_keys=True, allow_nan=False)
    target.write_text(text + "\n", encoding="utf-8")
    return target


def write_artifacts(result: SweepResult, out_dir: str | Path) -> dict[str, Path]:
    """
    Write reports.csv, verdict.json and dumps of the inputs of failed rows.

    Returns:
        Mapping from artifact name to path.
    """
    root = Path(out_dir)
    written = {
        "reports": write_reports_csv(result.reports, root / "reports.csv"),
        "verdict": write_json(result.verdict(), root / "verdict.json"),
    }
    for index, (f, g) in sorted(result.failed_inputs.items()):
        written[f"row{index}_f"] = write_field(f, root / "failed" / f"row{index}_f.bin")
        written[f"row{index}_g"] = write_field(g, root / "failed" / f"row{index}_g.bin")
    return written
