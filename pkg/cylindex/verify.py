"""Named consistency checks grouped into suites.

appendix-a   symbolic kernels against the case analysis and the numeric oracle
quantization local indices of the model catalog
contrast     rr-loc character against the transverse index on cylinders
"""
from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Optional

from .config import RunConfig
from .errors import WorkbenchError
from .models import (
    LevelStatus,
    ModelKind,
    Polarity,
    RotationModel,
    chi_character_model,
    classify_level,
    level_holonomy,
    local_index,
    rr_loc_character_model,
    total_character_oracle,
    validate_fixed_point_oracle,
)
from .numeric_spectra import (
    Discretization,
    MatrixKind,
    convergence_study,
    decides_mode,
    low_eigenvalues,
    numeric_kernels,
    pairing_error,
    quadrature_solution,
    resolves_mode,
    schrodinger_matrix,
)
from .profiles import PerturbationParams, RhoSmoothing, make_profiles, mode_coefficient
from .symbolic_kernel import (
    End,
    Operator,
    WeightVariant,
    is_threshold_mode,
    kernel_weights,
    mode_in_kernel,
    rr_loc_character,
    solution_exponent,
)

log = logging.getLogger(__name__)

SUITES = ("appendix-a", "quantization", "contrast")

# parameter grid shared by the symbolic and numeric sweeps
GRID_M = (-2, -1, 0, 1, 2)
GRID_ST = (0.0, 0.5, 1.0, 2.0)
GRID_EPS = (0.0, 0.5, 1.0, 2.0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


CheckFn = Callable[[RunConfig], tuple[bool, str]]
_REGISTRY: dict[str, list[tuple[str, CheckFn]]] = {suite: [] for suite in SUITES}


def check(suite: str, name: str) -> Callable[[CheckFn], CheckFn]:
    def register(fn: CheckFn) -> CheckFn:
        _REGISTRY[suite].append((name, fn))
        return fn

    return register


def check_names(suite: str = "all") -> list[str]:
    return [name for s in _suites(suite) for name, _ in _REGISTRY[s]]


def _suites(suite: str) -> tuple[str, ...]:
    if suite == "all":
        return SUITES
    if suite not in _REGISTRY:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES + ('all',))}")
    return (suite,)


def run_checks(
    suite: str = "all", config: Optional[RunConfig] = None, names: Optional[Iterable[str]] = None
) -> list[CheckResult]:
    """Run a suite, or only the checks listed in `names`."""
    config = config or RunConfig()
    wanted = None if names is None else set(names)
    unknown = sorted((wanted or set()) - set(check_names(suite)))
    if unknown:
        raise ValueError(f"unknown checks: {', '.join(unknown)}")
    results = []
    for s in _suites(suite):
        for name, fn in _REGISTRY[s]:
            if wanted is not None and name not in wanted:
                continue
            try:
                passed, detail = fn(config)
            except (WorkbenchError, ArithmeticError, ValueError) as exc:
                passed, detail = False, f"{type(exc).__name__}: {exc}"
            result = CheckResult(f"{s}/{name}", bool(passed), detail)
            if not result.passed:
                log.error("check %s failed: %s", result.name, detail)
            results.append(result)
    return results


def parameter_grid() -> Iterator[PerturbationParams]:
    for m, s, t, e1, e2 in itertools.product(GRID_M, GRID_ST, GRID_ST, GRID_EPS, GRID_EPS):
        if s == 0 and t == 0:
            continue
        yield PerturbationParams(m, s, t, e1, e2)


def numeric_mismatches(
    params: PerturbationParams, modes, config: RunConfig, disc: Optional[Discretization] = None
) -> list[str]:
    """Modes in scope where the numeric decision differs from the symbolic one."""
    disc = disc or config.discretization()
    profiles = make_profiles(params.m, config.rho_smoothing, config.f_smoothing)
    scoped = [
        n
        for n in modes
        if not is_threshold_mode(params, n) and decides_mode(mode_coefficient(params, profiles, n), disc)
    ]
    reports = numeric_kernels(params, scoped, disc, config.thresholds(), profiles, config.jobs)
    out = []
    for report in reports:
        expected = (
            mode_in_kernel(params, report.n, Operator.D_PLUS),
            mode_in_kernel(params, report.n, Operator.D_MINUS),
        )
        if (report.kernel_plus, report.kernel_minus) != expected:
            out.append(f"{params} n={report.n}: numeric {report.kernel_plus, report.kernel_minus} expected {expected}")
    return out


def spectral_gap_mismatches(params: PerturbationParams, modes, config: RunConfig) -> list[str]:
    """Lowest eigenvalues on the wrong side of the thresholds, where the box spectrum alone is faithful."""
    disc = config.discretization()
    profiles = make_profiles(params.m, config.rho_smoothing, config.f_smoothing)
    out = []
    for n in modes:
        if is_threshold_mode(params, n):
            continue
        coef = mode_coefficient(params, profiles, n)
        for operator, kind in ((Operator.D_PLUS, MatrixKind.STAR_L_L), (Operator.D_MINUS, MatrixKind.L_STAR_L)):
            if not resolves_mode(coef, disc, operator=operator):
                continue
            lowest = float(low_eigenvalues(schrodinger_matrix(coef, disc, kind), 1)[0])
            if mode_in_kernel(params, n, operator):
                ok = lowest < config.tau_zero
            else:
                ok = lowest > config.tau_gap
            if not ok:
                out.append(f"{params} n={n} {operator.value}: lowest eigenvalue {lowest:.3g}")
    return out


# appendix-a


@check("appendix-a", "case-i-symbolic")
def _case_i_symbolic(config: RunConfig) -> tuple[bool, str]:
    bad = []
    for m in (-2, -1, 0, 1, 2):
        ws = kernel_weights(PerturbationParams(m, s=1, t=0, eps1=1, eps2=0))
        expected = WeightVariant.ALL_INTEGERS if m == 0 else WeightVariant.EMPTY
        if ws.variant is not expected or ws.case != "I":
            bad.append(f"m={m}: {ws.to_dict()}")
    return not bad, "; ".join(bad)


@check("appendix-a", "case-i-numeric")
def _case_i_numeric(config: RunConfig) -> tuple[bool, str]:
    bad = []
    for m in (-2, -1, 0, 1, 2):
        params = PerturbationParams(m, s=1, t=0, eps1=1, eps2=0)
        bad += numeric_mismatches(params, range(-5, 6), config)
        bad += spectral_gap_mismatches(params, range(-5, 6), config)
    return not bad, "; ".join(bad)


@check("appendix-a", "case-ii")
def _case_ii(config: RunConfig) -> tuple[bool, str]:
    bad = []
    for m in (-2, -1, 0, 1, 2):
        params = PerturbationParams(m, s=0, t=1, eps1=0, eps2=1)
        plus = kernel_weights(params, Operator.D_PLUS)
        minus = kernel_weights(params, Operator.D_MINUS)
        if plus.weights != (m,) or plus.case != "II" or minus.variant is not WeightVariant.EMPTY:
            bad.append(f"m={m}: plus {plus.to_dict()} minus {minus.to_dict()}")
        bad += numeric_mismatches(params, range(m - 6, m + 7), config)
    return not bad, "; ".join(bad)


def staircase(m: int, s: float) -> list[int]:
    """Integers in the open interval ((1 + s)(m - 1/2), (1 + s)(m + 1/2))."""
    lo, hi = (1 + s) * (m - 0.5), (1 + s) * (m + 0.5)
    return [n for n in range(int(lo) - 2, int(hi) + 3) if lo < n < hi]


@check("appendix-a", "case-iii-staircase")
def _case_iii(config: RunConfig) -> tuple[bool, str]:
    bad = []
    for m, s in itertools.product((0, 1), (0.0, 0.5, 1.0, 2.0, 3.0)):
        params = PerturbationParams(m, s=s, t=1, eps1=1, eps2=1)
        ws = kernel_weights(params)
        if list(ws.weights) != staircase(m, s):
            bad.append(f"m={m} s={s}: {list(ws.weights)} != {staircase(m, s)}")
        if kernel_weights(params.scaled(10.0)).weights != ws.weights:
            bad.append(f"m={m} s={s}: not invariant under (s, t) -> (10s, 10t)")
        bad += numeric_mismatches(params, ws.weights, config)
    return not bad, "; ".join(bad)


# (s, t) pairs and equal exponents sampled numerically by d-minus-empty
D_MINUS_ST = ((0.0, 1.0), (1.0, 0.0), (1.0, 1.0))
D_MINUS_EPS = (0.0, 1.0, 2.0)


@check("appendix-a", "d-minus-empty")
def _d_minus_empty(config: RunConfig) -> tuple[bool, str]:
    bad = []
    for params in parameter_grid():
        ws = kernel_weights(params, Operator.D_MINUS)
        if ws.variant is not WeightVariant.EMPTY:
            bad.append(f"{params}: {ws.to_dict()}")
    combos = 0
    disc = config.discretization()
    for m, (s, t), eps in itertools.product(GRID_M, D_MINUS_ST, D_MINUS_EPS):
        params = PerturbationParams(m, s, t, eps, eps)
        profiles = make_profiles(m, config.rho_smoothing, config.f_smoothing)
        modes = [
            n
            for n in range(m - 6, m + 7)
            if not is_threshold_mode(params, n) and decides_mode(mode_coefficient(params, profiles, n), disc)
        ]
        for report in numeric_kernels(params, modes, disc, config.thresholds(), profiles, config.jobs):
            combos += 1
            if report.kernel_minus:
                bad.append(f"{params} n={report.n}: numeric D- kernel")
    return not bad, "; ".join(bad) or f"{combos} numeric modes"


@check("appendix-a", "oracle-agreement")
def _oracle_agreement(config: RunConfig) -> tuple[bool, str]:
    bad = []
    for params in parameter_grid():
        bad += numeric_mismatches(params, range(params.m - 6, params.m + 7), config)
    return not bad, "; ".join(bad[:20]) + (f" (+{len(bad) - 20} more)" if len(bad) > 20 else "")


def _confining_draws(count: int, seed: int) -> list[tuple[PerturbationParams, int]]:
    rng = random.Random(seed)
    pool = [
        (params, n)
        for params in parameter_grid()
        # at eps = 2 the walls reach exp(h c) ~ 1e26, beyond a 1e-6 relative match
        if max(params.eps1, params.eps2) <= 1.0
        if (params.s > 0 and params.eps1 > 0) or (params.t > 0 and params.eps2 > 0)
        for n in range(params.m - 3, params.m + 4)
        if not is_threshold_mode(params, n)
    ]
    return rng.sample(pool, count)


@check("appendix-a", "susy-pairing")
def _susy_pairing(config: RunConfig) -> tuple[bool, str]:
    bad = []
    disc = config.discretization()
    for params, n in _confining_draws(10, seed=20240617):
        coef = mode_coefficient(params, make_profiles(params.m, config.rho_smoothing, config.f_smoothing), n)
        err = pairing_error(coef, disc, config.tau_gap, k=5)
        if not err <= 1e-6:
            bad.append(f"{params} n={n}: relative gap {err:.3g}")
    return not bad, "; ".join(bad)


@check("appendix-a", "truncation-stability")
def _truncation(config: RunConfig) -> tuple[bool, str]:
    bad = []
    cases = [
        PerturbationParams(0, s=1, t=0, eps1=1, eps2=0),
        PerturbationParams(1, s=0, t=1, eps1=0, eps2=1),
        PerturbationParams(1, s=1, t=1, eps1=1, eps2=1),
    ]
    for params in cases:
        for R in (8.0, 16.0):
            bad += numeric_mismatches(params, range(-3, 4), config, Discretization(R, config.h))
    return not bad, "; ".join(bad)


@check("appendix-a", "smoothing-robustness")
def _smoothing(config: RunConfig) -> tuple[bool, str]:
    bad = []
    for kind in RhoSmoothing:
        alt = config.merged({"rho_smoothing": kind.value})
        for m in (-1, 0, 1):
            bad += numeric_mismatches(PerturbationParams(m, s=0, t=1, eps1=0, eps2=1), range(m - 3, m + 4), alt)
    return not bad, "; ".join(bad)


@check("appendix-a", "h-convergence")
def _convergence(config: RunConfig) -> tuple[bool, str]:
    params = PerturbationParams(2, s=0, t=1, eps1=0, eps2=1)
    coef = mode_coefficient(params, make_profiles(2, RhoSmoothing.QUINTIC_SMOOTHSTEP), 2)
    study = convergence_study(coef, R=config.R, tau_gap=config.tau_gap)
    ratio = study.ratios[-1]
    return 3.5 <= ratio <= 4.5, f"ratios {[round(r, 3) for r in study.ratios]}"


@check("appendix-a", "quadrature-exponent")
def _quadrature(config: RunConfig) -> tuple[bool, str]:
    bad = []
    cases = [
        (PerturbationParams(2, s=0, t=1, eps1=0, eps2=0), 2),
        (PerturbationParams(0, s=1, t=0, eps1=1, eps2=0), 0),
        (PerturbationParams(1, s=0, t=1, eps1=0, eps2=1), 1),
        (PerturbationParams(0, s=2, t=1, eps1=1, eps2=1), 1),
    ]
    disc = config.discretization()
    for params, n in cases:
        profile = quadrature_solution(mode_coefficient(params, make_profiles(params.m), n), disc)
        for end in End:
            lead = solution_exponent(params, n, end).leading
            fitted = profile.fit(end).coefficient
            if lead is None or abs(fitted - lead.coefficient) > 0.02 * abs(lead.coefficient):
                bad.append(f"{params} n={n} {end.value}: fitted {fitted:.6g} vs {lead and lead.coefficient}")
    return not bad, "; ".join(bad)


# quantization

CATALOG = (
    [RotationModel.cylinder(m) for m in (-2, -1, 0, 1, 2, 3)]
    + [RotationModel.disc(0, "min"), RotationModel.disc(0, "max")]
    + [RotationModel.sphere(k) for k in range(1, 9)]
)


def _catalog_window(model: RotationModel) -> tuple[int, int]:
    if model.kind is ModelKind.DISC:
        return (0, 10) if model.polarity is Polarity.MIN else (-10, 0)
    if model.kind is ModelKind.SPHERE:
        return (-2, model.k + 2)
    return (model.m - 6, model.m + 6)


@check("quantization", "regular-levels")
def _regular_levels(config: RunConfig) -> tuple[bool, str]:
    bad = []
    for model in CATALOG:
        lo, hi = _catalog_window(model)
        for n in range(lo, hi + 1):
            if classify_level(model, n).status is LevelStatus.REGULAR and local_index(model, n) != 1:
                bad.append(f"{model.name} n={n}: local index {local_index(model, n)}")
    return not bad, "; ".join(bad)


@check("quantization", "closed-model")
def _closed_model(config: RunConfig) -> tuple[bool, str]:
    bad = []
    for k in range(1, 9):
        sphere = RotationModel.sphere(k)
        window = (-2, k + 2)
        local = rr_loc_character_model(sphere, window, jobs=config.jobs).values(*window)
        total = total_character_oracle(sphere).values(*window)
        if local != total:
            bad.append(f"{sphere.name}: {local} != {total}")
    return not bad, "; ".join(bad)


@check("quantization", "holonomy-gate")
def _holonomy_gate(config: RunConfig) -> tuple[bool, str]:
    bad = []
    for model in CATALOG:
        lo, hi = _catalog_window(model)
        for n in range(lo, hi + 1):
            if local_index(model, n) == 0:
                continue
            orbit = level_holonomy(model, n)
            if orbit is None or not orbit.parallel_section:
                bad.append(f"{model.name} n={n}")
    return not bad, "; ".join(bad)


@check("quantization", "fixed-point-oracle")
def _fixed_point(config: RunConfig) -> tuple[bool, str]:
    result = validate_fixed_point_oracle(tau_zero=config.tau_zero)
    return result.passed, f"zero modes {result.zero_modes_plus}/{result.zero_modes_minus}"


# contrast


@check("contrast", "cylinder-three")
def _cylinder_three(config: RunConfig) -> tuple[bool, str]:
    model = RotationModel.cylinder(3)
    rr = rr_loc_character_model(model, (-1, 6)).values(-1, 6)
    chi = chi_character_model(model).values(-1, 6)
    ok = rr == [1 if n == 3 else 0 for n in range(-1, 7)] and not any(chi)
    return ok, f"rr-loc {rr}, transverse {chi}"


@check("contrast", "cylinder-zero")
def _cylinder_zero(config: RunConfig) -> tuple[bool, str]:
    chi = chi_character_model(RotationModel.cylinder(0))
    values = chi.values(-5, 5)
    return values == [1] * 11 and chi.pattern == "all_integers", f"transverse {values}"


@check("contrast", "rr-loc-differs")
def _rr_loc_differs(config: RunConfig) -> tuple[bool, str]:
    bad = []
    for m in (-3, -2, -1, 1, 2, 3):
        model = RotationModel.cylinder(m)
        window = (m - 6, m + 6)
        model_values = rr_loc_character_model(model, window).values(*window)
        if model_values == chi_character_model(model).values(*window):
            bad.append(f"m={m}: rr-loc equals transverse")
        if model_values != rr_loc_character(m).values(*window):
            bad.append(f"m={m}: model character disagrees with the t-perturbed kernel")
    return not bad, "; ".join(bad)
