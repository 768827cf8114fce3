"""``check``: per-config checks or the full acceptance battery."""

from __future__ import annotations

import argparse
import logging
from typing import Sequence

from refless.commands.output import emit
from refless.commands.schemas import ConfigSchemaError, load_config
from refless.core.config import DEFAULT_TOLERANCES
from refless.services.checks import CONFIG_CHECKS, CheckResult, run_config_checks, run_suite

logger = logging.getLogger(__name__)


def parse_tolerances(items: Sequence[str] | None) -> dict[str, float]:
    tolerances: dict[str, float] = {}
    for item in items or ():
        name, sep, raw = item.partition("=")
        if not sep or name not in DEFAULT_TOLERANCES:
            raise ConfigSchemaError(f"--tol expects NAME=VALUE with a known NAME, got {item!r}")
        try:
            tolerances[name] = float(raw)
        except ValueError as exc:
            raise ConfigSchemaError(f"--tol {name}: {raw!r} is not a number") from exc
    return tolerances


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("check", help="Run property checks")
    target = parser.add_mutually_exclusive_group(required=True)
    target.add_argument("--config")
    target.add_argument("--suite", action="store_true", help="Run the acceptance battery")
    parser.add_argument("--check", action="append", choices=CONFIG_CHECKS, dest="checks")
    parser.add_argument("--t", type=float, help="Band point for the reflectionless check")
    parser.add_argument("--tol", action="append", metavar="NAME=VALUE")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    tolerances = parse_tolerances(args.tol)
    results: list[CheckResult]
    if args.suite:
        results = run_suite(tolerances)
    else:
        system = load_config(args.config).to_system()
        results = run_config_checks(system, args.checks, args.t, tolerances)
    for result in results:
        emit(result.format_line())
    failed = [result.name for result in results if not result.passed]
    if failed:
        logger.warning(f"{len(failed)} check(s) failed: {', '.join(failed)}")
        return 1
    return 0
