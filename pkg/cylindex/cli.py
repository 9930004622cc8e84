"""Command-line front end for Cylindex."""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence, Tuple

from .config import OUTPUT_FORMATS, RunConfig, resolve_config
from .errors import ConfigError, IndeterminateSpectrumError, ModelError, NonFredholmError
from .models import (
    ModelKind,
    Polarity,
    RotationModel,
    chi_character_model,
    classify_level,
    local_index,
    rr_loc_character_model,
    total_character_oracle,
)
from .numeric_spectra import numeric_kernel, numeric_kernels, quadrature_solution
from .profiles import FSmoothing, PerturbationParams, RhoSmoothing, make_profiles, mode_coefficient
from .reports import KernelReport, canonical_json, csv_text
from .symbolic_kernel import (
    Operator,
    chi_character,
    default_window,
    kernel_index,
    kernel_weights,
    rr_loc_character,
)
from .verify import SUITES, run_checks

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY = 2
EXIT_NON_FREDHOLM = 3
EXIT_INDETERMINATE = 4

# flags whose values may start with '-' (negative windows)
_VALUE_FLAGS = ("--window", "--ratios")


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


def parse_window(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition(":")
    try:
        window = (int(lo), int(hi))
    except ValueError:
        raise UsageError(f"--window expects lo:hi integers, got {text!r}") from None
    if not sep or window[0] > window[1]:
        raise UsageError(f"--window expects lo:hi with lo <= hi, got {text!r}")
    return window


def parse_ratios(text: str) -> list[float]:
    try:
        ratios = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise UsageError(f"--ratios expects comma-separated numbers, got {text!r}") from None
    if not ratios:
        raise UsageError("--ratios needs at least one value")
    return ratios


def _global_flags() -> argparse.ArgumentParser:
    # SUPPRESS keeps an absent flag from clobbering one given before the subcommand
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--output", choices=OUTPUT_FORMATS)
    common.add_argument("--R", type=float, dest="R")
    common.add_argument("--h", type=float, dest="h")
    common.add_argument("--tau-zero", type=float, dest="tau_zero")
    common.add_argument("--tau-gap", type=float, dest="tau_gap")
    common.add_argument("--jobs", type=int)
    common.add_argument("--rho-smoothing", choices=[k.value for k in RhoSmoothing], dest="rho_smoothing")
    common.add_argument("--f-smoothing", choices=[k.value for k in FSmoothing], dest="f_smoothing")
    common.add_argument("--config", dest="config_path")
    common.add_argument("--verbose", "-v", action="store_true")
    return common


def _param_flags(p: argparse.ArgumentParser, required_m: bool = True) -> None:
    p.add_argument("--m", type=int, required=required_m)
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--eps1", type=float, default=0.0)
    p.add_argument("--eps2", type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = _Parser(
        prog="cylindex",
        description="L2 kernels and index characters on the cylinder",
        parents=[common],
        allow_abbrev=False,
    )
    parser.add_argument("--web", action="store_true", help="serve the JSON routes instead of running a command")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=5050)
    sub = parser.add_subparsers(dest="command")

    kp = sub.add_parser(
        "kernel", parents=[common], allow_abbrev=False, help="symbolic (and numeric) kernel of D+ or D-"
    )
    _param_flags(kp)
    kp.add_argument("--n-min", type=int)
    kp.add_argument("--n-max", type=int)
    kp.add_argument("--operator", choices=[o.value for o in Operator], default=Operator.D_PLUS.value)
    kp.add_argument("--numeric", action="store_true")
    kp.add_argument("--save", dest="save_path", help="also write the JSON report to this path")

    ip = sub.add_parser("index", parents=[common], allow_abbrev=False, help="index character over a window")
    ip.add_argument("--scheme", choices=["transverse", "rr-loc", "general"], required=True)
    ip.add_argument("--m", type=int, required=True)
    for name in ("--s", "--t", "--eps1", "--eps2"):
        ip.add_argument(name, type=float)
    ip.add_argument("--window")

    sp = sub.add_parser("sweep", parents=[common], allow_abbrev=False, help="Case III staircase over s/t ratios")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--ratios", required=True)
    sp.add_argument("--eps", type=float, default=1.0)
    sp.add_argument("--t", type=float, default=1.0)

    mp = sub.add_parser(
        "model", parents=[common], allow_abbrev=False, help="levels and local indices of a catalog model"
    )
    mp.add_argument("--kind", choices=[k.value for k in ModelKind], required=True)
    mp.add_argument("--m", type=int, default=0)
    mp.add_argument("--level0", type=int, default=0)
    mp.add_argument("--polarity", choices=[p.value for p in Polarity], default=Polarity.MIN.value)
    mp.add_argument("--k", type=int, default=1)
    mp.add_argument("--window")

    spp = sub.add_parser("spectrum", parents=[common], allow_abbrev=False, help="spectral report for one mode")
    _param_flags(spp)
    spp.add_argument("--n", type=int, required=True)

    vp = sub.add_parser("verify", parents=[common], allow_abbrev=False, help="run the verification suites")
    vp.add_argument("--suite", choices=list(SUITES) + ["all"], default="all")
    vp.add_argument("--check", action="append", dest="checks", help="run only this check (repeatable)")
    return parser


def _join_value_flags(argv: Sequence[str]) -> list[str]:
    out: list[str] = []
    it = iter(argv)
    for arg in it:
        if arg in _VALUE_FLAGS:
            value = next(it, None)
            out.append(arg if value is None else f"{arg}={value}")
        else:
            out.append(arg)
    return out


def _config(ns: argparse.Namespace) -> RunConfig:
    keys = ("R", "h", "tau_zero", "tau_gap", "jobs", "output", "rho_smoothing", "f_smoothing")
    return resolve_config(getattr(ns, "config_path", None), {k: getattr(ns, k, None) for k in keys})


def _params(ns: argparse.Namespace) -> PerturbationParams:
    return PerturbationParams(ns.m, ns.s, ns.t, ns.eps1, ns.eps2)


def _emit(config: RunConfig, payload: dict, rows: list[dict], columns: Sequence[str]) -> str:
    if config.output == "csv":
        return csv_text(rows, columns)
    return canonical_json(payload)


def cmd_kernel(ns: argparse.Namespace, config: RunConfig) -> Tuple[int, str]:
    params = _params(ns)
    lo, hi = default_window(params.m)
    window = (lo if ns.n_min is None else ns.n_min, hi if ns.n_max is None else ns.n_max)
    if window[0] > window[1]:
        raise UsageError(f"--n-min {window[0]} exceeds --n-max {window[1]}")
    operator = Operator(ns.operator)
    weights = kernel_weights(params, operator, window)
    numeric = []
    if ns.numeric:
        profiles = make_profiles(params.m, config.rho_smoothing, config.f_smoothing)
        reports = numeric_kernels(
            params, range(window[0], window[1] + 1), config.discretization(), config.thresholds(), profiles, config.jobs
        )
        numeric = [r.to_dict() for r in reports]
    report = KernelReport(params, operator, weights, numeric, window)
    if ns.save_path:
        report.save(ns.save_path)
        log.info("kernel report written to %s", ns.save_path)
    return EXIT_OK, _emit(config, report.to_dict(), report.rows(), KernelReport.ROW_COLUMNS)


def _index_character(ns: argparse.Namespace):
    def pick(value: Optional[float], default: float) -> float:
        return default if value is None else value

    if ns.scheme == "transverse":
        if ns.t not in (None, 0.0) or ns.s not in (None, 1.0):
            raise UsageError("transverse scheme fixes s=1, t=0")
        return chi_character(ns.m, pick(ns.eps1, 1.0), pick(ns.eps2, 0.0))
    if ns.scheme == "rr-loc":
        if ns.s not in (None, 0.0) or ns.eps2 not in (None, 0.0):
            raise UsageError("rr-loc scheme fixes s=0, eps2=0")
        return rr_loc_character(ns.m, pick(ns.t, 1.0), pick(ns.eps1, 0.0))
    params = PerturbationParams(ns.m, pick(ns.s, 0.0), pick(ns.t, 0.0), pick(ns.eps1, 0.0), pick(ns.eps2, 0.0))
    return kernel_index(params)


def cmd_index(ns: argparse.Namespace, config: RunConfig) -> Tuple[int, str]:
    window = parse_window(ns.window) if ns.window else default_window(ns.m)
    character = _index_character(ns)
    payload = {"scheme": ns.scheme, "m": ns.m, "character": character.to_dict(window)}
    rows = [{"n": n, "multiplicity": character(n)} for n in range(window[0], window[1] + 1)]
    return EXIT_OK, _emit(config, payload, rows, ("n", "multiplicity"))


def cmd_sweep(ns: argparse.Namespace, config: RunConfig) -> Tuple[int, str]:
    ratios = parse_ratios(ns.ratios)
    if not ns.t > 0:
        raise UsageError(f"--t must be > 0 for a ratio sweep, got {ns.t}")

    def one(ratio: float) -> dict:
        params = PerturbationParams(ns.m, ratio * ns.t, ns.t, ns.eps, ns.eps)
        weights = kernel_weights(params)
        return {"ratio": ratio, "kernel_dim": weights.dimension, "weights": list(weights.weights)}

    with ThreadPoolExecutor(max_workers=config.jobs) as pool:
        rows = list(pool.map(one, ratios))
    payload = {"m": ns.m, "t": ns.t, "eps": ns.eps, "rows": rows}
    return EXIT_OK, _emit(config, payload, rows, ("ratio", "kernel_dim", "weights"))


def _model(ns: argparse.Namespace) -> RotationModel:
    kind = ModelKind(ns.kind)
    if kind is ModelKind.CYLINDER:
        return RotationModel.cylinder(ns.m)
    if kind is ModelKind.DISC:
        return RotationModel.disc(ns.level0, ns.polarity)
    return RotationModel.sphere(ns.k)


def _model_window(model: RotationModel) -> tuple[int, int]:
    if model.kind is ModelKind.CYLINDER:
        return default_window(model.m)
    if model.kind is ModelKind.SPHERE:
        return (-2, model.k + 2)
    if model.polarity is Polarity.MIN:
        return (model.level0, model.level0 + 10)
    return (model.level0 - 10, model.level0)


def cmd_model(ns: argparse.Namespace, config: RunConfig) -> Tuple[int, str]:
    model = _model(ns)
    window = parse_window(ns.window) if ns.window else _model_window(model)
    levels = [
        {"n": n, "status": classify_level(model, n).status.value, "local_index": local_index(model, n)}
        for n in range(window[0], window[1] + 1)
    ]
    payload = {
        "model": model.to_dict(),
        "levels": levels,
        "rr_loc": rr_loc_character_model(model, window, jobs=config.jobs).to_dict(window),
    }
    if model.kind is ModelKind.SPHERE:
        payload["sections"] = total_character_oracle(model).to_dict(window)
    if model.kind is ModelKind.CYLINDER:
        payload["transverse"] = chi_character_model(model).to_dict(window)
    return EXIT_OK, _emit(config, payload, levels, ("n", "status", "local_index"))


def cmd_spectrum(ns: argparse.Namespace, config: RunConfig) -> Tuple[int, str]:
    params = _params(ns)
    profiles = make_profiles(params.m, config.rho_smoothing, config.f_smoothing)
    disc = config.discretization()
    report = numeric_kernel(params, ns.n, disc, config.thresholds(), profiles, config.k)
    payload = report.to_dict()
    profile = quadrature_solution(mode_coefficient(params, profiles, ns.n), disc)
    payload["end_fits"] = [fit.to_dict() for fit in profile.fits]
    rows = [
        {"operator": name, "index": i, "eigenvalue": value}
        for name, values in (("plus", report.low_plus), ("minus", report.low_minus))
        for i, value in enumerate(values)
    ]
    return EXIT_OK, _emit(config, payload, rows, ("operator", "index", "eigenvalue"))


def cmd_verify(ns: argparse.Namespace, config: RunConfig) -> Tuple[int, str]:
    results = run_checks(ns.suite, config, ns.checks)
    failed = [r.name for r in results if not r.passed]
    for r in results:
        sys.stderr.write(f"{'PASS' if r.passed else 'FAIL'} {r.name} {r.detail}\n")
    payload = {"suite": ns.suite, "passed": not failed, "failed": failed, "checks": [r.to_dict() for r in results]}
    text = _emit(config, payload, [r.to_dict() for r in results], ("name", "passed", "detail"))
    return (EXIT_VERIFY if failed else EXIT_OK), text


def cmd_web(ns: argparse.Namespace, config: RunConfig) -> Tuple[int, str]:
    try:
        from . import web
    except ImportError:
        raise UsageError("web interface not available; install flask") from None
    sys.stderr.write(f"Starting Cylindex web on http://{ns.host}:{ns.port}\n")
    web.run_web(host=ns.host, port=ns.port)
    return EXIT_OK, ""


COMMANDS = {
    "kernel": cmd_kernel,
    "index": cmd_index,
    "sweep": cmd_sweep,
    "model": cmd_model,
    "spectrum": cmd_spectrum,
    "verify": cmd_verify,
}


def run(argv: Sequence[str]) -> Tuple[int, str]:
    """Run one command.
    Returns (exit_code, text) where text is the report or the error message.
    """
    try:
        ns = build_parser().parse_args(_join_value_flags(argv))
        config = _config(ns)
        log.debug("config %s", config.to_dict())
        if ns.web:
            return cmd_web(ns, config)
        if ns.command is None:
            raise UsageError("cylindex: a command is required, or --web")
        return COMMANDS[ns.command](ns, config)
    except NonFredholmError as e:
        return EXIT_NON_FREDHOLM, f"error: {e}"
    except IndeterminateSpectrumError as e:
        text = f"error: {e}"
        if e.report is not None:
            text += "\n" + canonical_json(e.report.to_dict())
        return EXIT_INDETERMINATE, text
    except (UsageError, ConfigError, ModelError, ValueError, OSError) as e:
        return EXIT_USAGE, f"error: {e}"


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(
        level=logging.DEBUG if ("--verbose" in argv or "-v" in argv) else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    code, text = run(argv)
    stream = sys.stdout if code in (EXIT_OK, EXIT_VERIFY) else sys.stderr
    if text:
        stream.write(text if text.endswith("\n") else text + "\n")
    return code
