"""
Command-line front end for STA Guard.

Subcommands: schemes, sensitivity, optimize, simulate, tables, pulse.
Settings come from (highest first) command-line flags, a JSON --config file
mirroring RunConfig, and the STA_* environment defaults.

Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from sta_guard.config import settings
from sta_guard.engine.ancillary import boundary_profile, scheme_from_descriptor
from sta_guard.engine.dynamics import HamiltonianSpec, beta_sweep, evolve, fit_transition_sensitivity
from sta_guard.engine.optimize import minimize_sensitivity, scheme_catalog, sensitivity_frontier
from sta_guard.engine.sensitivity import sensitivity_sweep
from sta_guard.engine.synthesis import pulse_metrics, resolve_pulse, synthesize
from sta_guard.engine.tables import three_level_table, two_level_table
from sta_guard.errors import ConfigError, STAGuardError, exit_code
from sta_guard.models.schemas import (
    AlphaMode, BaselineKind, OptProblem, PerturbedModel, PropagationMethod, RunConfig, SchemeKind
)
from sta_guard.storage.files import atomic_write_text, frame_to_csv, read_json, to_json, write_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0


# Output helpers

def _emit(text: str, out: Optional[str]) -> str:
    if out:
        atomic_write_text(out, text)
    else:
        sys.stdout.write(text)
    return text


def _emit_csv(frame, out: Optional[str]) -> str:
    return _emit(frame_to_csv(frame), out)


def _emit_json(payload, out: Optional[str]) -> str:
    return _emit(to_json(payload), out)


def _require_scheme(config: RunConfig):
    if config.scheme is None:
        raise ConfigError("This command needs a scheme (--scheme KIND or --scheme-file PATH)")
    return scheme_from_descriptor(config.scheme)


def _single_delta_t(config: RunConfig) -> float:
    values = config.delta_t_values()
    if len(values) != 1:
        raise ConfigError(f"Expected exactly one Delta*T value, got {len(values)}")
    return values[0]


# Commands

def cmd_schemes(config: RunConfig) -> str:
    """Catalog listing, or boundary profile and metrics of one scheme"""
    if config.scheme is None:
        return _emit_json({"schemes": scheme_catalog(), "version": settings.version}, config.out)
    scheme = scheme_from_descriptor(config.scheme)
    payload = {
        "scheme": scheme.descriptor().model_dump(mode="json"),
        "boundary": boundary_profile(scheme).model_dump(),
        "metrics": pulse_metrics(synthesize(scheme, config.alpha_mode, config.alpha0)).model_dump(),
        "version": settings.version,
    }
    return _emit_json(payload, config.out)


def cmd_sensitivity(config: RunConfig) -> str:
    """q or Q over the Delta*T grid as CSV"""
    scheme = _require_scheme(config)
    values = config.delta_t_values()
    if not values:
        raise ConfigError("No Delta*T values given (--delta-t or --grid)")
    return _emit_csv(sensitivity_sweep(scheme, values, abs_tol=config.tol), config.out)


def cmd_optimize(config: RunConfig) -> str:
    """JSON report for one Delta*T, frontier CSV for several"""
    family = config.family or (config.scheme.kind if config.scheme else None)
    if family is None:
        raise ConfigError("This command needs a family (--family KIND)")
    values = config.delta_t_values()
    if not values:
        raise ConfigError("No Delta*T values given (--delta-t or --grid)")
    T = config.scheme.T if config.scheme else 1.0
    if len(values) == 1:
        problem = OptProblem(
            family=family, T=T, objective=config.objective, delta_t=values[0],
            bounds=config.bounds, starts=config.starts, seed=config.seed,
            max_evaluations=config.max_evaluations, record_history=config.record_history,
        )
        return _emit_json(minimize_sensitivity(problem), config.out)
    frame = sensitivity_frontier(family, values, T=T, starts=config.starts,
                                 seed=config.seed, bounds=config.bounds)
    return _emit_csv(frame, config.out)


def cmd_simulate(config: RunConfig) -> str:
    """Target population versus beta as CSV; optional trajectory CSV next to it"""
    if config.trajectory and not config.out:
        raise ConfigError("--trajectory needs --out")
    pulse = resolve_pulse(config.pulse_source())
    if not config.betas:
        raise ConfigError("No beta values given (--betas)")
    delta_t = _single_delta_t(config)
    spec = HamiltonianSpec(pulse, PerturbedModel(delta=delta_t / pulse.T))
    frame = beta_sweep(spec, config.betas, method=config.method, tol=config.tol)
    if frame["beta"].abs().nunique() >= 2:
        fitted = fit_transition_sensitivity(frame["beta"], frame["P_target"])
        logger.info(f"Fitted transition sensitivity: {fitted:.6g}")
    trajectory = None
    if config.trajectory:
        trajectory = evolve(spec.with_model(beta=config.betas[0]), method=config.method,
                            tol=config.tol, record=True).populations

    # nothing is written until every frame has been computed
    text = _emit_csv(frame, config.out)
    if trajectory is not None:
        path = Path(config.out)
        write_csv(trajectory, path.with_name(f"{path.stem}_trajectory{path.suffix or '.csv'}"))
    return text


def cmd_tables(config: RunConfig) -> str:
    """Area / energy tables for the two- and three-level protocols"""
    out = Path(config.out or settings.output_dir)
    first = two_level_table(tune_delta0=config.tune_baseline)
    second = three_level_table()
    write_csv(first, out / "table_two_level.csv")
    write_csv(second, out / "table_three_level.csv")
    return frame_to_csv(first) + frame_to_csv(second)


def cmd_pulse(config: RunConfig) -> str:
    """Sampled physical controls as CSV"""
    pulse = resolve_pulse(config.pulse_source())
    return _emit_csv(pulse.sample(config.samples), config.out)


COMMANDS = {
    "schemes": cmd_schemes,
    "sensitivity": cmd_sensitivity,
    "optimize": cmd_optimize,
    "simulate": cmd_simulate,
    "tables": cmd_tables,
    "pulse": cmd_pulse,
}


# Argument parsing

def _key_value(text: str) -> tuple:
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got '{text}'")
    return name, value


def _parse_params(pairs: List[tuple]) -> Dict[str, float]:
    params = {}
    for name, value in pairs:
        try:
            params[name] = float(value)
        except ValueError:
            raise ConfigError(f"Parameter '{name}' is not a number: '{value}'")
    return params


def _parse_grid(text: str) -> Dict[str, Any]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"Grid must be START:STOP:NUM, got '{text}'")
    try:
        return {"start": float(parts[0]), "stop": float(parts[1]), "num": int(parts[2])}
    except ValueError:
        raise ConfigError(f"Grid must be START:STOP:NUM, got '{text}'")


def _parse_bounds(pairs: List[tuple]) -> Dict[str, List[float]]:
    bounds = {}
    for name, value in pairs:
        low, sep, high = value.partition(":")
        try:
            bounds[name] = [float(low), float(high)]
        except ValueError:
            raise ConfigError(f"Bounds for '{name}' must be LOW:HIGH, got '{value}'")
        if not sep:
            raise ConfigError(f"Bounds for '{name}' must be LOW:HIGH, got '{value}'")
    return bounds


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file mirroring RunConfig")
    common.add_argument("--out", help="Output file (directory for 'tables'); stdout if omitted")
    common.add_argument("--seed", type=int, help="Optimizer seed")
    common.add_argument("--samples", type=int, help="Pulse samples per CSV")
    common.add_argument("--tol", type=float, help="Quadrature / propagator tolerance")
    common.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        help="Logging level (default from STA_LOG_LEVEL)")

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("--scheme", choices=[k.value for k in SchemeKind if k != SchemeKind.CUSTOM],
                        help="Catalog scheme kind")
    source.add_argument("--scheme-file", help="JSON scheme descriptor (required for custom schemes)")
    source.add_argument("--param", action="append", type=_key_value, default=[],
                        metavar="NAME=VALUE", help="Scheme or baseline parameter (repeatable)")
    source.add_argument("--T", type=float, dest="duration", help="Protocol duration (default 1)")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--delta-t", action="extend", nargs="+", type=float, metavar="X",
                      help="Dimensionless Delta*T values")
    grid.add_argument("--grid", help="Uniform Delta*T grid START:STOP:NUM")

    alpha = argparse.ArgumentParser(add_help=False)
    alpha.add_argument("--alpha-mode", choices=[m.value for m in AlphaMode])
    alpha.add_argument("--alpha0", type=float, help="Constant alpha for --alpha-mode constant")

    parser = argparse.ArgumentParser(
        prog="sta_guard",
        description="Shortcut-to-adiabaticity pulse design robust against unwanted transitions",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    subparsers.add_parser("schemes", parents=[common, source, alpha],
                          help="List the scheme catalog or describe one scheme")
    subparsers.add_parser("sensitivity", parents=[common, source, grid],
                          help="Transition sensitivity over a Delta*T grid")

    optimize = subparsers.add_parser("optimize", parents=[common, source, grid],
                                     help="Minimize q or Q over a scheme family")
    optimize.add_argument("--family", choices=["optimized_2l", "num1_4l", "num2_4l"])
    optimize.add_argument("--starts", type=int, help="Sobol starts in addition to the published ones")
    optimize.add_argument("--max-evaluations", type=int, help="Objective evaluations per start")
    optimize.add_argument("--bound", action="append", type=_key_value, default=[],
                          metavar="NAME=LOW:HIGH", help="Override a parameter bound (repeatable)")
    optimize.add_argument("--history", action="store_true", help="Record every objective evaluation")

    simulate = subparsers.add_parser("simulate", parents=[common, source, grid, alpha],
                                     help="Propagate the perturbed system over a beta grid")
    simulate.add_argument("--baseline", choices=[k.value for k in BaselineKind])
    simulate.add_argument("--betas", action="extend", nargs="+", type=float, metavar="BETA")
    simulate.add_argument("--method", choices=[m.value for m in PropagationMethod])
    simulate.add_argument("--trajectory", action="store_true",
                          help="Also write populations versus time for the first beta")

    tables = subparsers.add_parser("tables", parents=[common], help="Pulse area and energy tables")
    tables.add_argument("--no-tune", action="store_true",
                        help="Skip the delta0 search for the adiabatic rows")

    pulse = subparsers.add_parser("pulse", parents=[common, source, alpha], help="Sample pulse controls")
    pulse.add_argument("--baseline", choices=[k.value for k in BaselineKind])
    return parser


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge CLI flags over the --config file over the settings defaults"""
    data: Dict[str, Any] = {}
    if args.config:
        data = read_json(args.config)
        if not isinstance(data, dict):
            raise ConfigError(f"{args.config} must hold a JSON object")

    params = _parse_params(getattr(args, "param", []))
    duration = getattr(args, "duration", None)
    scheme_flag = getattr(args, "scheme_file", None) or getattr(args, "scheme", None)
    if getattr(args, "scheme_file", None):
        data["scheme"] = read_json(args.scheme_file)
    elif getattr(args, "scheme", None):
        data["scheme"] = {"kind": args.scheme, "params": params}
        if duration is not None:
            data["scheme"]["T"] = duration
    if getattr(args, "baseline", None):
        data["baseline"] = {"kind": args.baseline, "params": params}
        if duration is not None:
            data["baseline"]["T"] = duration
        if not scheme_flag:
            data.pop("scheme", None)
    elif scheme_flag:
        data.pop("baseline", None)

    if getattr(args, "grid", None):
        data["grid"] = _parse_grid(args.grid)
    if getattr(args, "bound", None):
        data["bounds"] = {**data.get("bounds", {}), **_parse_bounds(args.bound)}

    flags = {
        "delta_t": getattr(args, "delta_t", None),
        "betas": getattr(args, "betas", None),
        "family": getattr(args, "family", None),
        "starts": getattr(args, "starts", None),
        "max_evaluations": getattr(args, "max_evaluations", None),
        "method": getattr(args, "method", None),
        "alpha_mode": getattr(args, "alpha_mode", None),
        "alpha0": getattr(args, "alpha0", None),
        "seed": args.seed,
        "samples": args.samples,
        "tol": args.tol,
        "out": args.out,
    }
    data.update({key: value for key, value in flags.items() if value is not None})
    if getattr(args, "history", False):
        data["record_history"] = True
    if getattr(args, "trajectory", False):
        data["trajectory"] = True
    if getattr(args, "no_tune", False):
        data["tune_baseline"] = False

    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {e}")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, (args.log_level or settings.log_level).upper()),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )
    try:
        config = build_config(args)
        COMMANDS[args.command](config)
    except ValidationError as e:
        logger.error(f"{args.command} failed: invalid configuration: {e}")
        return exit_code(ConfigError(str(e)))
    except STAGuardError as e:
        logger.error(f"{args.command} failed: {e}")
        return exit_code(e)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
