"""``distance``: the Herglotz metric between two systems."""

from __future__ import annotations

import argparse
import logging

from refless.commands.output import emit, format_record
from refless.commands.schemas import load_system
from refless.services.systems import system_distance

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("distance", help="Metric distance between two systems")
    parser.add_argument("first", help="Config path or const:a")
    parser.add_argument("second", help="Config path or const:a")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    first = load_system(args.first)
    second = load_system(args.second)
    emit(format_record([("distance", system_distance(first, second))]))
    return 0
