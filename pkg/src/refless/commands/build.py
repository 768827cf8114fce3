"""``build``: validate a config and print the system summary."""

from __future__ import annotations

import argparse
import logging

from refless.commands.output import emit, format_record
from refless.commands.schemas import SystemConfig, load_config
from refless.services.systems import ReflectionlessSystem, Side, eval_m

logger = logging.getLogger(__name__)


def summary_pairs(system: ReflectionlessSystem) -> list[tuple[str, object]]:
    return [
        ("case", system.gap_set.case.value),
        ("N", system.gap_set.bounded_gap_count),
        ("A", system.rep.A),
        ("nu_total", system.rep.nu_total),
        ("w", list(system.rep.w)),
        ("nu_infinity", system.rep.nu_infinity),
        ("m_plus_i", eval_m(system, Side.PLUS, 1j)),
        ("config", SystemConfig.from_system(system).to_json()),
    ]


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("build", help="Validate a config and print its summary")
    parser.add_argument("--config", required=True, help="Path to a system config (JSON)")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    system = load_config(args.config).to_system()
    emit(format_record(summary_pairs(system)))
    return 0
