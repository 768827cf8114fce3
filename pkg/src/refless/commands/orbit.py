"""``orbit``: normal forms under the PSL(2, R) action."""

from __future__ import annotations

import argparse
import logging

from refless.commands.build import summary_pairs
from refless.commands.output import emit, format_record
from refless.commands.schemas import load_config
from refless.services.orbits import (
    dirac_representative,
    jacobi_orbit_data,
    jacobi_representative,
    schrodinger_representative,
)

logger = logging.getLogger(__name__)

REPRESENTATIVES = {
    "dirac": dirac_representative,
    "schroedinger": schrodinger_representative,
    "jacobi": jacobi_representative,
}
KINDS = (*REPRESENTATIVES, "jacobi-data")


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("orbit", help="Normalise a system within its orbit")
    parser.add_argument("--config", required=True)
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    system = load_config(args.config).to_system()
    if args.kind == "jacobi-data":
        data = jacobi_orbit_data(system)
        emit(
            format_record(
                [
                    ("kind", args.kind),
                    ("transform", list(data.transform.entries())),
                    ("t", data.t),
                    ("a0", data.a0),
                    ("shift", data.b),
                ]
            )
        )
        emit(format_record([("a", list(data.coefficients.a)), ("b", list(data.coefficients.b))]))
        return 0

    representative = REPRESENTATIVES[args.kind](system)
    emit(format_record([("kind", args.kind), ("transform", list(representative.transform.entries()))]))
    emit(format_record(summary_pairs(representative.system)))
    return 0
