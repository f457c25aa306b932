"""
Command line surface for coreforge
Parses arguments, dispatches to RunManager and maps errors to exit codes
"""

import argparse
import sys

from elections import Quota
from elections.rationals import format_fraction, fraction_from_pair
from errors import BackendUnavailable, CertificateViolation, IntegrityError, ParameterError
from logging_config import get_logger, set_console_level
from programs import PriceKind
from solvers import BackendConfig, available_backends
from version import get_full_version_string
from cli.run_manager import ExitCode, RunManager

logger = get_logger(__name__)


def _solver_flags(parser):
    group = parser.add_argument_group("solver")
    group.add_argument("--solver", help="backend id (highs, gurobi)")
    group.add_argument("--tolerance", type=float, help="feasibility and verification tolerance")
    group.add_argument("--timeout", type=float, help="time limit in seconds")
    group.add_argument("--threads", type=int, help="solver threads, 0 for the solver default")
    group.add_argument("--seed", type=int, help="solver seed and random instance seed")


def _size_positionals(parser):
    parser.add_argument("m", type=int, help="number of candidates")
    parser.add_argument("k", type=int, help="committee size")


def _size_flags(parser, quota_default="hare"):
    parser.add_argument("--m", type=int, required=True, help="number of candidates")
    parser.add_argument("--k", type=int, required=True, help="committee size")
    parser.add_argument("--quota", default=quota_default, choices=[q.label for q in Quota])


def build_parser():
    parser = argparse.ArgumentParser(
        prog="coreforge",
        description="Core stability of approval-based committees: search, certificates and priceability",
    )
    parser.add_argument("--version", action="version", version=f"coreforge {get_full_version_string()}")
    parser.add_argument("--output-dir", help="directory for run records and artifacts")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="show DEBUG messages on the console")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="only show errors on the console")
    sub = parser.add_subparsers(dest="command", required=True)

    search = sub.add_parser("search", help="solve the search program for (m, k)")
    _size_positionals(search)
    search.add_argument("--quota", default="hare", choices=[q.label for q in Quota])
    _solver_flags(search)
    search.add_argument("--export-lp", action="store_true", help="also write the model in LP format")
    search.add_argument("--export-mps", action="store_true", help="also write the model in MPS format")
    search.add_argument("--warm-start", action="store_true", help="start from the hand-built lower bound")
    search.add_argument("--max-deviation-size", type=int, help="only deviations up to this size")

    check = sub.add_parser("check", help="exact stability verdict for one committee")
    check.add_argument("instance", help="distribution or profile JSON file")
    check.add_argument("--committee", required=True, help="comma-separated 0-based indices")
    check.add_argument("--k", type=int, help="committee size (defaults to the committee's)")
    check.add_argument("--quota", default="hare", choices=[q.label for q in Quota])

    certify = sub.add_parser("certify", help="emit or verify constructive certificates")
    _size_positionals(certify)
    certify.add_argument("quota", nargs="?", default="hare", choices=[q.label for q in Quota])
    certify.add_argument("mode", nargs="?", default="lower-bound",
                         choices=["lower-bound", "singleton", "kplusone", "verify"])
    _solver_flags(certify)
    certify.add_argument("--deviations", help="deviation function JSON file")
    certify.add_argument("--certificate", help="dual certificate JSON file (verify mode)")
    certify.add_argument("--warm-start", action="store_true", help="also solve the search program from the lower bound")

    price = sub.add_parser("priceability", help="weak, Lindahl or Peters priceability of one committee")
    price.add_argument("instance", help="distribution or profile JSON file")
    price.add_argument("--committee", required=True, help="comma-separated 0-based indices")
    price.add_argument("--kind", default="weak", choices=[kind.value for kind in PriceKind])
    price.add_argument("--k", type=int, help="committee size (defaults to the committee's)")
    _solver_flags(price)

    counter = sub.add_parser("counterexample", help="search for a stable committee that is not priceable")
    _size_flags(counter, quota_default="droop")
    _solver_flags(counter)
    counter.add_argument("--kind", default="weak", choices=[PriceKind.WEAK.value, PriceKind.LINDAHL.value])
    counter.add_argument("--candidates", help="JSON file with one distribution or a list of them")

    proof = sub.add_parser("render-proof", help="print the proof encoded by an infeasibility certificate")
    proof.add_argument("certificate", help="infeasibility certificate JSON file")
    proof.add_argument("--clear-denominators", action="store_true", help="scale multipliers to integers")

    table = sub.add_parser("table", help="search every 1 <= k < m <= max_m")
    table.add_argument("--max-m", type=int, required=True)
    table.add_argument("--min-m", type=int, default=2)
    table.add_argument("--quota", default="hare", choices=[q.label for q in Quota])
    _solver_flags(table)

    sub.add_parser("backends", help="list solver backends and whether they are installed")
    return parser


def _backend(args):
    return BackendConfig.from_config(
        solver=getattr(args, "solver", None),
        tolerance=getattr(args, "tolerance", None),
        time_limit=getattr(args, "timeout", None),
        threads=getattr(args, "threads", None),
        seed=getattr(args, "seed", None),
    )


def _pair(value):
    return format_fraction(fraction_from_pair(value)) if value is not None else "-"


def _summary(record):
    """One console line per run, plus the artifacts written"""
    result = record.result
    command = record.command
    if "error" in result and record.exit_code != ExitCode.OK:
        print(f"error: {result['error']}", file=sys.stderr)
    elif "violation" in result:
        print(f"certificate rejected: {result['violation']}")
    elif command == "search":
        solution = result.get("solution", {})
        print(f"status: {solution.get('status')}  mu: {solution.get('mu')}  bound: {solution.get('bound')}"
              f"  reference: {_pair(result.get('reference_value'))}")
        if "verification" in result:
            print(f"verification: {result['verification'].get('message')}")
    elif command == "check":
        verdict = "stable" if result["stable"] else "NOT stable"
        print(f"{result['committee']} is {verdict}; worst deviation {result['worst_deviation_label']}"
              f" with excess {result['excess_text']}")
    elif command == "certify":
        if "mu_text" in result:
            print(f"lower-bound assignment: mu = {result['mu_text']}, violations: {len(result['violations'])}")
        else:
            print(f"certificate verified, objective {result['objective_text']}"
                  + ("" if result.get("within_bound", True) else " (above the expected bound)"))
    elif command == "priceability":
        print(f"{result['status']}: {result['message']}")
    elif command == "counterexample":
        print(f"{result['status']} via {result['method']}: {result['message']}")
    elif command == "table":
        for row in result["rows"]:
            mark = {True: "ok", False: "MISMATCH", None: "-"}[row.get("matches")]
            print(f"m={row['m']} k={row['k']}  mu*={row['mu']}  reference={row['reference']}  {mark}")
    for name, path in record.artifacts.items():
        print(f"  {name}: {path}")


def _dispatch(manager, args):
    if args.command == "search":
        return manager.search(args.m, args.k, Quota.parse(args.quota), args.export_lp, args.export_mps,
                              args.warm_start, args.max_deviation_size)
    if args.command == "check":
        return manager.check(args.instance, args.committee, args.k, Quota.parse(args.quota))
    if args.command == "certify":
        return manager.certify(args.m, args.k, Quota.parse(args.quota), args.mode, args.deviations,
                               args.certificate, args.seed, args.warm_start)
    if args.command == "priceability":
        return manager.priceability(args.instance, args.committee, PriceKind.parse(args.kind), args.k)
    if args.command == "counterexample":
        return manager.counterexample(args.m, args.k, Quota.parse(args.quota), PriceKind.parse(args.kind),
                                      args.candidates)
    if args.command == "render-proof":
        record, text = manager.render_proof(args.certificate, args.clear_denominators)
        if text is not None:
            print(text, end="")
        return record
    if args.command == "table":
        return manager.table(args.max_m, Quota.parse(args.quota), args.min_m)
    raise ParameterError(f"unknown command {args.command!r}")


def main(argv=None):
    """
    Entry point; returns the process exit code.

    0 ok, 1 property fails or certificate rejected, 2 undecided,
    3 bad parameters or files, 4 time limit, 5 backend or integrity failure.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # usage errors exit 3; argparse would exit 2, which is UNDECIDED here
        if exc.code in (0, None):
            return int(ExitCode.OK)
        return int(ExitCode.PARAMETER_ERROR)
    if args.verbose:
        set_console_level("DEBUG")
    elif args.quiet:
        set_console_level("ERROR")

    if args.command == "backends":
        for name, installed in available_backends().items():
            print(f"{name}: {'installed' if installed else 'missing'}")
        return int(ExitCode.OK)

    parameters = {key: value for key, value in vars(args).items() if key != "command"}
    try:
        manager = RunManager(args.output_dir, _backend(args))
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return int(ExitCode.PARAMETER_ERROR)

    try:
        record = _dispatch(manager, args)
    except CertificateViolation as exc:
        logger.error(f"{args.command}: certificate violation: {exc}")
        record = manager.record_failure(args.command, parameters, exc, ExitCode.PROPERTY_FAILS)
    except (ParameterError, FileNotFoundError, ValueError) as exc:
        logger.error(f"{args.command}: {exc}")
        record = manager.record_failure(args.command, parameters, exc, ExitCode.PARAMETER_ERROR)
    except (IntegrityError, BackendUnavailable) as exc:
        logger.error(f"{args.command}: {exc}")
        record = manager.record_failure(args.command, parameters, exc, ExitCode.BACKEND_ERROR)

    _summary(record)
    return record.exit_code


if __name__ == "__main__":
    sys.exit(main())
