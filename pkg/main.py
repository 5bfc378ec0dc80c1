import sys
import json
import logging
import argparse
from pathlib import Path

import numpy as np

from config.settings import LOG_CONFIG
from src import __version__
from src.catalog.scenes import export_catalog
from src.errors import DecompositionFailure, SceneValidationError
from src.models.report import Report
from src.report.runner import run_verification
from src.report.scene_file import load_scene

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3

logger = logging.getLogger("bendcheck")


def configure_logging(verbose: bool = False, debug: bool = False):
    level = logging.DEBUG if debug else logging.INFO if verbose else LOG_CONFIG['level']
    logging.basicConfig(level=level, format=LOG_CONFIG['format'], force=True)


def _error(kind: str, message: str, code: int, **fields) -> int:
    print(json.dumps(dict({'error': kind, 'message': message}, **fields)), file=sys.stderr)
    return code


def print_summary(report: Report):
    print("=" * 70)
    print(f"BENDCHECK {__version__} - {report.scene.get('name', '?')}".center(70))
    print("=" * 70)
    print(f"{'Check':<24}{'Status':<16}{'Observed':<16}{'Residual'}")
    print("-" * 70)
    for check in report.checks:
        observed = check.observed.outcome.value if check.observed else "-"
        residual = f"{check.observed.residual:.3e}" if check.observed and check.observed.residual is not None else "-"
        print(f"{check.name:<24}{check.status.value:<16}{observed:<16}{residual}")
    print("-" * 70)
    for mismatch in report.mismatches:
        print(f"strict: {mismatch}")
    print(f"{'ALL CHECKS MATCH' if report.matched else 'MISMATCH'} ({report.points} points, seed {report.seed}, "
          f"{report.wall_time:.2f}s)")


def verify(args) -> int:
    try:
        scene = load_scene(args.scene)
    except FileNotFoundError as e:
        return _error('file_not_found', str(e), EXIT_USAGE, path=str(args.scene))
    except OSError as e:
        return _error('io_error', str(e), EXIT_USAGE, path=str(args.scene))
    except SceneValidationError as e:
        return _error('scene_validation', e.message, EXIT_USAGE, pointer=e.pointer)

    checks = [name.strip() for name in args.checks.split(',') if name.strip()] if args.checks else None
    try:
        report = run_verification(scene, checks=checks, samples=args.samples, seed=args.seed,
                                  tol_pointwise=args.tol_pointwise, strict=args.strict, workers=args.workers)
    except DecompositionFailure as e:
        return _error('decomposition_failure', str(e), EXIT_INTERNAL)
    except np.linalg.LinAlgError as e:
        return _error('numeric_failure', str(e), EXIT_INTERNAL)
    except ValueError as e:
        return _error('usage', str(e), EXIT_USAGE)
    except ArithmeticError as e:
        return _error('numeric_failure', str(e), EXIT_INTERNAL)

    if args.report:
        Path(args.report).write_text(report.to_json() + "\n")
        logger.info("report written to %s", args.report)
    print_summary(report)
    return EXIT_OK if report.matched else EXIT_MISMATCH


def catalog(args) -> int:
    try:
        written = export_catalog(args.out)
    except OSError as e:
        return _error('io_error', str(e), EXIT_USAGE, path=str(args.out))
    for path in written:
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bendcheck",
                                     description="Verify infinitesimal bendings of submanifolds on JSON scenes.")
    parser.add_argument("--version", action="version", version=f"bendcheck {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("verify", help="Run the checks of a scene file.")
    run.add_argument("scene", help="Scene JSON file.")
    run.add_argument("--report", help="Write the JSON report to this path.")
    run.add_argument("--checks", help="Comma-separated check names; defaults to the scene's list.")
    run.add_argument("--samples", type=int, help="Number of random sample points besides the center.")
    run.add_argument("--seed", type=int, help="Sampling seed.")
    run.add_argument("--tol-pointwise", type=float, help="Override the pointwise tolerance.")
    run.add_argument("--strict", action="store_true",
                     help="Require an expectation for every executed check and vice versa.")
    run.add_argument("--workers", type=int, help="Threads for per-point evaluation.")
    run.add_argument("--verbose", action="store_true", help="Log stage transitions.")
    run.add_argument("--debug", action="store_true", help="Log per-point numbers.")
    run.set_defaults(handler=verify)

    export = commands.add_parser("catalog", help="Export the catalog scenes as JSON files.")
    export.add_argument("--out", required=True, help="Output directory.")
    export.add_argument("--verbose", action="store_true", help="Log written files.")
    export.add_argument("--debug", action="store_true", help=argparse.SUPPRESS)
    export.set_defaults(handler=catalog)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.debug)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
