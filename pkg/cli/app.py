"""Argument parsing and dispatch for the ``chabauty`` command line."""

import argparse
import json
import sys
from typing import Optional, Sequence

from core import __version__
from core.config import SUITES, ConfigManager
from core.debug_logger import DebugLogger, log
from core.errors import (
    ChabautyError,
    DescriptorParseError,
    PreconditionError,
    ResourceCapError,
    SchemaError,
)
from core.report import Verdict

from . import commands

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_PRECONDITION = 3
EXIT_RESOURCE = 4


class _Parser(argparse.ArgumentParser):
    """Usage errors become a JSON error object and exit code 2."""

    def error(self, message):
        _emit_error({"code": "usage", "message": message, "details": {}})
        raise SystemExit(EXIT_USAGE)


def _emit_error(error: dict) -> None:
    print(json.dumps({"error": error}, sort_keys=True), file=sys.stderr)


def _emit(value) -> None:
    print(json.dumps(value, indent=2, sort_keys=True, ensure_ascii=False))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="u64 seed for trial generation")
    common.add_argument("--r-cut", dest="r_cut", help="truncation radius, e.g. 8 or 15/2")
    common.add_argument("--delta", help="sampling step, e.g. 1/40")
    common.add_argument("--params", help="metric parameters as JSON text or file")
    common.add_argument("--cap", type=int, help="enumeration cap")
    common.add_argument("--net-cap", dest="net_cap", type=int, help="net size cap")
    common.add_argument("--cd", help="transference constant (default: dimension)")
    common.add_argument("--out", help="report output path")
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument("--workers", type=int, help="process pool size for suite trials")
    common.add_argument("--trials", type=int, help="trial count for the chosen suite")
    common.add_argument("--config", help="config file path")
    common.add_argument("--quiet", action="store_true", help="no progress bar")

    parser = _Parser(prog="chabauty", description="Chabauty spaces of elementary LCA groups")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("dual", parents=[common], help="orthogonal of a subgroup")
    p.add_argument("subgroup", help="subgroup JSON text or file")

    p = sub.add_parser("classify", parents=[common], help="descriptor invariants")
    p.add_argument("descriptor", help='e.g. "R*Z*T" or "" for the trivial group')

    p = sub.add_parser("distance", parents=[common], help="certified Chabauty distance")
    p.add_argument("left")
    p.add_argument("right")

    p = sub.add_parser("enumerate", parents=[common], help="subgroup lattice of a finite group")
    p.add_argument("group", help='e.g. {"invariant_factors": [2, 4]}')

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("suite", choices=SUITES)

    p = sub.add_parser("config", parents=[common], help="show, save, import or export settings")
    p.add_argument("--save", action="store_true", help="persist the given flags to the config file")
    p.add_argument("--import", dest="import_path", metavar="PATH", help="replace the config file with PATH")
    p.add_argument("--export", dest="export_path", metavar="PATH", help="write the effective settings to PATH")
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    out = {
        "seed": args.seed,
        "r_cut": args.r_cut,
        "delta": args.delta,
        "cap": args.cap,
        "net_cap": args.net_cap,
        "cd": args.cd,
        "out": args.out,
        "format": args.format,
        "workers": args.workers,
    }
    if args.params:
        out.update(commands.load_params_override(args.params))
    if args.trials is not None and getattr(args, "suite", None):
        out["trials"] = {args.suite: args.trials}
    return out


def _exit_code(error: ChabautyError) -> int:
    if isinstance(error, DescriptorParseError):
        return EXIT_USAGE
    if isinstance(error, ResourceCapError):
        return EXIT_RESOURCE
    if isinstance(error, (PreconditionError, SchemaError)):
        return EXIT_PRECONDITION
    return EXIT_FAIL


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        manager = ConfigManager(args.config)
        overrides = _overrides(args)
        config = manager.resolve(overrides)
        valid, error = config.validate()
        if not valid:
            raise SchemaError(error)
        if config.debug_log:
            DebugLogger.get_instance().enable_file()

        if args.command == "dual":
            _emit(commands.cmd_dual(args.subgroup))
        elif args.command == "classify":
            _emit(commands.cmd_classify(args.descriptor))
        elif args.command == "distance":
            _emit(commands.cmd_distance(args.left, args.right, config))
        elif args.command == "enumerate":
            _emit(commands.cmd_enumerate(args.group, config))
        elif args.command == "config":
            _emit(commands.cmd_config(manager, overrides, args.save, args.import_path, args.export_path))
        else:
            progress = not args.quiet and sys.stderr.isatty()
            report = commands.cmd_verify(args.suite, config, progress)
            _emit({"suite": report.suite, "verdict": report.verdict.value,
                   "summary": report.counts, "out": config.out})
            if report.verdict is Verdict.FAIL:
                log(f"suite {report.suite} failed: {len(report.failures)} cases")
                return EXIT_FAIL
    except ChabautyError as e:
        _emit_error(e.to_dict())
        return _exit_code(e)
    return EXIT_OK
