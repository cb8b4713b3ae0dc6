"""
Command-line front end of the hypergeometric monodromy toolkit.

    python app.py build-ghg --a 1/3,1/5 --b 1/2 --prec 256
    python app.py build-fc --a 1/3,1/5 --b 1/2,1/7
    python app.py scheme --a 1/3,1/5,1/7 --b 1/2,1/4
    python app.py verify --system fc --m 2 --trials 50 --seed 42
    python app.py oracle --a 1/3,1/5 --b 1/2 --eps 1/10

stdout carries exactly one JSON document; diagnostics and the summary go to stderr.
Exit codes: 0 success, 1 a check failed, 2 invalid or resonant parameters,
3 numeric failure.
"""

import argparse
import logging
import sys
import time
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from app_config.constants import CLIConfig, OracleConfig, SuiteConfig
from monodromy_core.errors import InvalidParameters, MonodromyError, NumericFailure
from monodromy_core.fc import build_fc_circuit_set
from monodromy_core.ghg import build_circuit_set, riemann_scheme
from monodromy_core.numerics import check_precision
from monodromy_core.oracle import compare_to_closed_form
from monodromy_core.params import FCParams, GHGParams, Params, parse_rational, parse_rational_list
from monodromy_core.verify import Report, run_suite
from monodromy_utils.encoding import dump_json
from monodromy_utils.logger import log_exceptions, log_performance, setup_logging
from monodromy_utils.validation import (
    validate_base_point,
    validate_positive_int,
    validate_precision,
    validate_tolerance,
)

COMMANDS = ("build-ghg", "build-fc", "verify", "oracle", "scheme")

# Flag values read from --config files are converted with these
_CONFIG_TYPES: Dict[str, Callable[[str], object]] = {
    "a": str,
    "b": str,
    "m": int,
    "p": int,
    "prec": int,
    "tol": str,
    "trials": int,
    "seed": int,
    "jobs": int,
    "format": str,
    "eps": str,
    "system": str,
    "exact": lambda text: text.strip().lower() in ("1", "true", "yes", "on"),
    "perturb": str,
    "dump_path": str,
}


class UsageError(ValueError):
    """A flag value that is syntactically fine but not acceptable."""


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--a", help="upper parameters, comma-separated rationals")
    common.add_argument("--b", help="lower parameters, comma-separated rationals")
    common.add_argument("--m", type=int, help="number of F_C variables (inferred from --b)")
    common.add_argument("--p", type=int, help="rank of the equation (inferred from --a)")
    common.add_argument("--prec", type=int, help="working precision in bits")
    common.add_argument("--tol", help="pass/fail tolerance as a decimal, e.g. 1e-40")
    common.add_argument("--trials", type=int, help="number of seeded trials")
    common.add_argument("--seed", type=int, help="suite seed")
    common.add_argument("--jobs", type=int, help="worker processes (default: all cores)")
    common.add_argument("--format", choices=CLIConfig.OUTPUT_FORMATS, help="output format")
    common.add_argument("--eps", help="oracle base point, a rational in (0, 1/2)")
    common.add_argument("--config", help="file of 'key = value' lines mirroring the flags")
    common.add_argument("--system", choices=("ghg", "fc"), help="suite to run")
    common.add_argument("--exact", action="store_const", const=True,
                        help="add cyclotomic exact-mode checks")
    common.add_argument("--perturb", help="negative control: add this decimal to one entry")
    common.add_argument("--dump-path", dest="dump_path", help="write the rho1 path here")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings only")

    parser = argparse.ArgumentParser(
        prog="monodromy",
        description="Closed-form monodromy of pFp-1 and Lauricella F_C, with verification.",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "build-ghg": "circuit matrices of the rank-p equation",
        "build-fc": "circuit matrices of the F_C system",
        "verify": "seeded identity suite",
        "oracle": "numerical continuation compared with the closed forms",
        "scheme": "Riemann scheme of the rank-p equation",
    }
    for name in COMMANDS:
        commands.add_parser(name, parents=[common], help=descriptions[name])
    return parser


def read_config(path: str) -> Dict[str, object]:
    """
    Parse a 'key = value' file. Keys are flag names without leading dashes;
    blank lines and '#' comments are ignored.
    """
    values: Dict[str, object] = {}
    with open(path) as handle:
        for number, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{number}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.lstrip("-").replace("-", "_")
            if key not in _CONFIG_TYPES:
                raise UsageError(f"{path}:{number}: unknown key '{key}'")
            try:
                values[key] = _CONFIG_TYPES[key](value)
            except ValueError as e:
                raise UsageError(f"{path}:{number}: bad value for '{key}': {e}")
    return values


def merge_config(args: argparse.Namespace) -> argparse.Namespace:
    """Fill flags left unset on the command line from --config."""
    if not args.config:
        return args
    for key, value in read_config(args.config).items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)
    return args


def _require(check: Tuple[bool, Optional[str]]) -> None:
    valid, message = check
    if not valid:
        raise UsageError(message)


def _precision(args, default: int) -> int:
    bits = default if args.prec is None else args.prec
    _require(validate_precision(bits))
    return check_precision(bits)


def _tolerance(args, default: Optional[str]) -> Optional[str]:
    if args.tol is None:
        return default
    _require(validate_tolerance(args.tol))
    return args.tol


def _jobs(args) -> Optional[int]:
    if args.jobs is not None:
        _require(validate_positive_int(args.jobs, "jobs"))
    return args.jobs


def _lists(args) -> Tuple[Tuple[Fraction, ...], Tuple[Fraction, ...]]:
    if args.a is None:
        raise UsageError("--a is required")
    if args.b is None:
        raise UsageError("--b is required")
    return parse_rational_list(args.a), parse_rational_list(args.b)


def ghg_params(args) -> GHGParams:
    a, b = _lists(args)
    if args.p is not None and args.p != len(a):
        raise UsageError(f"--p {args.p} does not match {len(a)} upper parameters")
    return GHGParams(a, b)


def fc_params(args) -> FCParams:
    a, b = _lists(args)
    if len(a) != 2:
        raise UsageError(f"F_C takes exactly two upper parameters, got {len(a)}")
    if args.m is not None and args.m != len(b):
        raise UsageError(f"--m {args.m} does not match {len(b)} lower parameters")
    return FCParams(a[0], a[1], b)


# --- Commands ---

def cmd_build_ghg(args) -> Tuple[dict, int]:
    circuit_set = build_circuit_set(ghg_params(args), _precision(args, 256))
    return circuit_set.to_json(), CLIConfig.EXIT_OK


def cmd_build_fc(args) -> Tuple[dict, int]:
    circuit_set = build_fc_circuit_set(fc_params(args), _precision(args, 256))
    return circuit_set.to_json(), CLIConfig.EXIT_OK


def cmd_scheme(args) -> Tuple[dict, int]:
    return riemann_scheme(ghg_params(args)).to_json(), CLIConfig.EXIT_OK


def _report_result(report: Report) -> Tuple[dict, int]:
    summary = report.summary()
    sys.stderr.write(
        f"{report.suite}: {summary['passed']} passed, {summary['failed']} failed, "
        f"{summary['skipped']} skipped ({report.wall_time:.2f}s)\n"
    )
    code = CLIConfig.EXIT_OK if report.all_passed else CLIConfig.EXIT_CHECK_FAILED
    return report.to_json(), code


def cmd_verify(args) -> Tuple[dict, int]:
    system = args.system or "ghg"
    params: Optional[Params] = None
    size = args.p if system == "ghg" else args.m
    if args.a is not None or args.b is not None:
        params = ghg_params(args) if system == "ghg" else fc_params(args)
        size = None
    if size is not None:
        _require(validate_positive_int(size, "p" if system == "ghg" else "m"))
    trials = SuiteConfig.DEFAULT_TRIALS if args.trials is None else args.trials
    _require(validate_positive_int(trials, "trials"))
    if args.perturb is not None:
        _require(validate_tolerance(args.perturb.lstrip("-")))
    report = run_suite(
        system,
        trials=trials,
        seed=SuiteConfig.DEFAULT_SEED if args.seed is None else args.seed,
        precision_bits=_precision(args, 256),
        size=size,
        params=params,
        tolerance=_tolerance(args, None),
        perturbation=args.perturb,
        exact_mode=bool(args.exact),
        jobs=_jobs(args),
    )
    return _report_result(report)


def cmd_oracle(args) -> Tuple[dict, int]:
    eps = OracleConfig.BASE_POINT if args.eps is None else parse_rational(args.eps)
    _require(validate_base_point(eps))
    start = time.perf_counter()
    report = compare_to_closed_form(
        ghg_params(args),
        precision_bits=_precision(args, OracleConfig.WORKING_PRECISION_BITS),
        tol=_tolerance(args, OracleConfig.DEFAULT_TOLERANCE),
        eps=eps,
        dump_path=args.dump_path,
        jobs=_jobs(args),
    )
    report.wall_time = time.perf_counter() - start
    return _report_result(report)


HANDLERS: Dict[str, Callable[[argparse.Namespace], Tuple[dict, int]]] = {
    "build-ghg": cmd_build_ghg,
    "build-fc": cmd_build_fc,
    "verify": cmd_verify,
    "oracle": cmd_oracle,
    "scheme": cmd_scheme,
}


def _error_document(kind: str, message: str, violations: Sequence = ()) -> dict:
    document = {"error": kind, "message": message}
    if violations:
        document["violations"] = [str(v) for v in violations]
    return document


# run() turns these into exit codes and error documents
@log_exceptions(expected=(MonodromyError, ValueError, OSError))
@log_performance
def dispatch(args: argparse.Namespace) -> Tuple[dict, int]:
    return HANDLERS[args.command](args)


def run(argv: Optional[List[str]] = None) -> int:
    """Parse argv, run the command, print the JSON document; returns the exit code."""
    args = build_parser().parse_args(argv)
    if args.verbose:
        setup_logging(logging.DEBUG)
    elif args.quiet:
        setup_logging(logging.WARNING)

    try:
        args = merge_config(args)
        document, code = dispatch(args)
    except InvalidParameters as e:
        for violation in e.violations:
            sys.stderr.write(f"violation: {violation}\n")
        document = _error_document("invalid_parameters", str(e), e.violations)
        code = CLIConfig.EXIT_INVALID_PARAMETERS
    except NumericFailure as e:
        sys.stderr.write(f"numeric failure: {e}\n")
        document = _error_document("numeric_failure", str(e))
        code = CLIConfig.EXIT_NUMERIC_FAILURE
    except (UsageError, ValueError, OSError) as e:
        sys.stderr.write(f"error: {e}\n")
        document = _error_document("invalid_input", str(e))
        code = CLIConfig.EXIT_INVALID_PARAMETERS
    except MonodromyError as e:
        sys.stderr.write(f"numeric failure: {e}\n")
        document = _error_document("numeric_failure", f"{type(e).__name__}: {e}")
        code = CLIConfig.EXIT_NUMERIC_FAILURE

    sys.stdout.write(dump_json(document))
    sys.stdout.flush()
    return code


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
