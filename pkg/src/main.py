#!/usr/bin/env python3
"""
fixcycle - find, verify and search for fixed-point cycles in edge-labeled
complete bidirected graphs.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from config.settings import ALGORITHMS, RunConfig, build_run_config, load_config
from core.errors import (
    CertificateError,
    FormatError,
    FrontierExceeded,
    InvariantViolation,
    LabelingError,
    OracleLimitExceeded,
)
from core.formats import format_certificate, format_labeling, read_certificate, read_labeling, write_certificate, write_labeling
from core.labeling import Labeling, verify_certificate
from core.results import SolverResult, SolveStatus
from services.bounds import bound, cubic_threshold, permutation_bound, permutation_threshold
from services.constructions import (
    LabelClass,
    group_from_spec,
    group_labels_to_labeling,
    group_product,
    lower_bound_labeling,
    random_group_labeling,
    random_labeling,
    read_group_labeling,
    recover_identity_product_cycle,
    write_group_labeling,
)
from services.cubic_solver import find_cycle_cubic
from services.perm_solver import find_cycle_permutation
from services.recursive_solver import find_cycle_recursive
from services.search import brute_force_cycle, extremal_search, write_report
from utils.logger import setup_logger

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NOT_FOUND = 1
EXIT_INPUT_ERROR = 2
EXIT_INVARIANT = 3
EXIT_FRONTIER = 4


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(description="Fixed-point cycles in edge-labeled complete bidirected graphs")
    parser.add_argument("--config", type=str, default="config.yaml", help="Path to configuration file")
    parser.add_argument("--debug", action="store_true", help="Enable debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", help="Generate a labeling")
    gen.add_argument("kind", choices=["lower-bound", "random", "random-group"])
    gen.add_argument("--n", type=int, help="Vertex count (random kinds)")
    gen.add_argument("--d", type=int, help="Value-domain size")
    gen.add_argument("--seed", type=int, help="Random seed (default: config, then FIXCYCLE_SEED, then 0)")
    gen.add_argument("--class", dest="label_class", choices=[c.value for c in LabelClass], help="Label class")
    gen.add_argument("--group", type=str, help="Group for random-group: cyclic:<d> or symmetric:<m>")
    gen.add_argument("--output", "-o", type=str, help="Output file (default: stdout)")
    gen.add_argument("--group-output", type=str, help="GRPT file for random-group (default: <output>.grpt)")

    find = commands.add_parser("find", help="Find a fixed-point cycle")
    find.add_argument("input", type=str, help="FPCL labeling file")
    find.add_argument("--algorithm", choices=ALGORITHMS, help="Solver (default: config, usually auto)")
    find.add_argument("--oracle-max-n", type=int, help="Largest n the brute-force oracle accepts")
    find.add_argument("--output", "-o", type=str, help="FPCY certificate file (default: stdout)")
    find.add_argument("--stats", action="store_true", help="Log solver statistics")

    verify = commands.add_parser("verify", help="Check a certificate against a labeling")
    verify.add_argument("labeling", type=str, help="FPCL labeling file")
    verify.add_argument("certificate", type=str, help="FPCY certificate file")

    search = commands.add_parser("search", help="Search for a fixed-point-free labeling")
    search.add_argument("--n", type=int, required=True)
    search.add_argument("--d", type=int, required=True)
    search.add_argument("--class", dest="label_class", choices=[c.value for c in LabelClass], default="general")
    search.add_argument("--workers", type=int, help="Worker processes")
    search.add_argument("--no-prune", action="store_true", help="Check cycles only on complete assignments")
    search.add_argument("--max-assignments", type=int, help="Frontier limit")
    search.add_argument("--override", action="store_true", help="Run even beyond the frontier limit")
    search.add_argument("--output", "-o", type=str, help="Report file (default: stdout)")

    reduce = commands.add_parser("reduce", help="Turn a group labeling into a function labeling")
    reduce.add_argument("group_labeling", type=str, help="GLBL group labeling file")
    reduce.add_argument("--output", "-o", type=str, help="FPCL output file (default: stdout)")

    lift = commands.add_parser("lift", help="Read a certificate of the reduction as an identity-product cycle")
    lift.add_argument("group_labeling", type=str, help="GLBL group labeling file")
    lift.add_argument("certificate", type=str, help="FPCY certificate against the reduced labeling")

    bound_cmd = commands.add_parser("bound", help="Print the proven upper bound")
    bound_cmd.add_argument("--d", type=int, required=True)
    bound_cmd.add_argument("--class", dest="label_class", choices=["general", "permutation"], default="general")

    return parser.parse_args(argv)


def _emit(text: str, output: Optional[Path]) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text)
        logger.info(f"Wrote {output}")


def select_algorithm(l: Labeling, oracle_max_n: int) -> str:
    """The auto rule: use a solver whose guarantee covers the instance whenever one does."""
    if l.is_permutation_labeling() and l.n >= permutation_threshold(l.d):
        return "perm"
    if l.n >= cubic_threshold(l.d):
        return "cubic"
    if l.n <= oracle_max_n:
        return "brute"
    return "recursive"


def run_solver(l: Labeling, algorithm: str, oracle_max_n: int) -> SolverResult:
    if algorithm == "brute":
        certificate = brute_force_cycle(l, oracle_max_n)
        if certificate is None:
            return SolverResult.failure(SolveStatus.NOT_FOUND, f"no fixed-point cycle on n={l.n} (exhaustive)")
        return SolverResult.success(certificate)
    if algorithm == "perm":
        return find_cycle_permutation(l)
    if algorithm == "cubic":
        return find_cycle_cubic(l)
    return find_cycle_recursive(l, oracle_max_n)


def cmd_gen(args: argparse.Namespace, run: RunConfig) -> int:
    output = run.paths.get("output")
    if args.kind == "lower-bound":
        if args.d is None:
            raise LabelingError("gen lower-bound needs --d")
        _emit(format_labeling(lower_bound_labeling(args.d)), output)
        return EXIT_OK

    if args.kind == "random":
        if args.n is None or args.d is None:
            raise LabelingError("gen random needs --n and --d")
        l = random_labeling(args.n, args.d, run.seed, run.label_class)
        _emit(format_labeling(l), output)
        return EXIT_OK

    if args.n is None or args.group is None or output is None:
        raise LabelingError("gen random-group needs --n, --group and --output")
    group = group_from_spec(args.group)
    group_output = run.paths.get("group_output", output.with_suffix(".grpt"))
    gl = random_group_labeling(args.n, group, run.seed)
    write_group_labeling(output, gl, group_output)
    return EXIT_OK


def cmd_find(args: argparse.Namespace, run: RunConfig) -> int:
    l = read_labeling(run.paths["input"])
    run.require_permutation_labels(l)
    algorithm = run.algorithm if run.algorithm != "auto" else select_algorithm(l, run.oracle_max_n)
    logger.info(f"Solving n={l.n} d={l.d} with the {algorithm} solver")

    result = run_solver(l, algorithm, run.oracle_max_n)
    if args.stats:
        logger.info(f"Solver statistics: {result.stats}")
    if not result.found:
        print(f"NOT FOUND {result.status.value}: {result.detail}")
        return EXIT_NOT_FOUND

    check = verify_certificate(l, result.certificate)
    if not check:
        raise InvariantViolation(f"{algorithm} solver returned a certificate that fails verification: {check.reason}")
    if "output" in run.paths:
        write_certificate(run.paths["output"], result.certificate)
    else:
        sys.stdout.write(format_certificate(result.certificate))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, run: RunConfig) -> int:
    l = read_labeling(run.paths["labeling"])
    c = read_certificate(run.paths["certificate"])
    check = verify_certificate(l, c)
    if check:
        print("OK")
        return EXIT_OK
    print(f"FAILED: {check.reason}")
    return EXIT_NOT_FOUND


def cmd_search(args: argparse.Namespace, run: RunConfig) -> int:
    report = extremal_search(
        args.n,
        args.d,
        args.label_class,
        prune=run.prune,
        workers=run.workers,
        max_assignments=run.max_assignments,
        override=run.override_frontier,
    )
    if "output" in run.paths:
        write_report(run.paths["output"], report)
        print(f"RESULT {'exists' if report.exists else 'none'}")
    else:
        sys.stdout.write(report.to_text())
    return EXIT_OK


def cmd_reduce(args: argparse.Namespace, run: RunConfig) -> int:
    gl = read_group_labeling(run.paths["group_labeling"])
    l = group_labels_to_labeling(gl)
    if "output" in run.paths:
        write_labeling(run.paths["output"], l)
    else:
        sys.stdout.write(format_labeling(l))
    return EXIT_OK


def cmd_lift(args: argparse.Namespace, run: RunConfig) -> int:
    gl = read_group_labeling(run.paths["group_labeling"])
    c = read_certificate(run.paths["certificate"])
    cycle = recover_identity_product_cycle(gl, c)
    k = len(cycle)
    product = group_product(gl.group, (gl.element(cycle[i], cycle[(i + 1) % k]) for i in range(k)))
    print("cycle " + " ".join(str(v + 1) for v in cycle))
    print(f"product {product + 1}")
    return EXIT_OK


def cmd_bound(args: argparse.Namespace, run: RunConfig) -> int:
    value = permutation_bound(args.d) if args.label_class == "permutation" else bound(args.d)
    print(value)
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen,
    "find": cmd_find,
    "verify": cmd_verify,
    "search": cmd_search,
    "reduce": cmd_reduce,
    "lift": cmd_lift,
    "bound": cmd_bound,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Run one fixcycle command and return its exit code."""
    args = parse_args(argv)

    # Setup logging
    setup_logger(logging.DEBUG if args.debug else logging.INFO)

    try:
        config = load_config(args.config)
        run = build_run_config(args, config)
        setup_logger(run.verbosity, run.log_dir)
        logger.debug(f"Running {run.subcommand} with {run}")
        return COMMANDS[args.command](args, run)

    except (FormatError, LabelingError, OracleLimitExceeded, OSError) as e:
        logger.error(f"Input error: {str(e)}")
        return EXIT_INPUT_ERROR
    except CertificateError as e:
        logger.error(f"Certificate rejected: {str(e)}")
        return EXIT_NOT_FOUND
    except FrontierExceeded as e:
        logger.error(f"Search refused: {str(e)}")
        return EXIT_FRONTIER
    except InvariantViolation as e:
        logger.error(f"Internal invariant violated: {str(e)}")
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
