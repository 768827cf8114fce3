"""``eval``: sample m_plus or m_minus over a grid and write CSV rows."""

from __future__ import annotations

import argparse
import logging
from typing import Sequence

import numpy as np

from refless.commands.output import write_rows
from refless.commands.schemas import ConfigSchemaError, GridSpec, load_config
from refless.services.systems import Side

logger = logging.getLogger(__name__)

REGION_FLAGS = ("--grid", "--boundary")


def attach_region_values(argv: Sequence[str]) -> list[str]:
    """Join "--grid -1,1,..." into "--grid=-1,1,..." so a leading minus is not read as a flag."""

    joined: list[str] = []
    items = iter(argv)
    for item in items:
        if item in REGION_FLAGS:
            value = next(items, None)
            joined.append(item if value is None else f"{item}={value}")
        else:
            joined.append(item)
    return joined


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("eval", help="Evaluate an m-function on a grid")
    parser.add_argument("--config", required=True)
    region = parser.add_mutually_exclusive_group(required=True)
    region.add_argument(REGION_FLAGS[0], help="re_lo,re_hi,im_lo,im_hi,n")
    region.add_argument(REGION_FLAGS[1], help="t_lo,t_hi,eps,n")
    parser.add_argument("--side", choices=[side.value for side in Side], default=Side.PLUS.value)
    parser.add_argument("--out", help="Output CSV path (stdout when omitted)")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    if args.boundary is not None:
        grid = GridSpec.from_flag(args.boundary, boundary=True)
    elif args.grid is not None:
        grid = GridSpec.from_flag(args.grid)
    else:
        raise ConfigSchemaError("one of --grid or --boundary is required")
    system = load_config(args.config).to_system()

    z = grid.points()
    values = system.values(Side(args.side), z)
    if grid.is_boundary:
        first, second = z.real, np.full(z.shape, grid.region.epsilon)
    else:
        first, second = z.real, z.imag
    rows = zip(first, second, values.real, values.imag)
    write_rows(args.out, grid.header, rows)
    logger.info(f"Evaluated m_{args.side} at {len(z)} point(s)")
    return 0
