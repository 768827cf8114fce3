"""Command-line parser factory for the reflectionless toolkit."""

import argparse
import logging

from refless import __version__
from refless.commands import build as build_command
from refless.commands import check as check_command
from refless.commands import distance as distance_command
from refless.commands import eval as eval_command
from refless.commands import orbit as orbit_command
from refless.core.config import get_settings

logger = logging.getLogger(__name__)


def create_parser() -> argparse.ArgumentParser:
    """Create and configure the argument parser with every subcommand."""
    settings = get_settings()

    parser = argparse.ArgumentParser(
        prog=settings.app_name,
        description="m-function toolkit for reflectionless canonical systems",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--log-level",
        default=settings.log_level,
        help="Logging level for stderr diagnostics (default from REFLESS_LOG_LEVEL)",
    )

    subparsers = parser.add_subparsers(dest="command", required=True)
    build_command.register(subparsers)
    eval_command.register(subparsers)
    orbit_command.register(subparsers)
    check_command.register(subparsers)
    distance_command.register(subparsers)
    return parser
