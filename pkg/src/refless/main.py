"""Console entry point."""

from __future__ import annotations

import logging
import sys
from typing import Sequence

from pydantic import ValidationError

from refless.commands.eval import attach_region_values
from refless.commands.schemas import describe_validation_error
from refless.core.application import create_parser

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def configure_logging(level: str | int = "WARNING") -> None:
    if isinstance(level, str):
        level = level.upper()
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def main(argv: Sequence[str] | None = None) -> int:
    parser = create_parser()
    args = parser.parse_args(attach_region_values(sys.argv[1:] if argv is None else argv))
    configure_logging(args.log_level)

    try:
        return args.handler(args)
    except ValidationError as exc:
        logger.error(describe_validation_error(exc))
        return 2
    except OSError as exc:
        logger.error(f"I/O error: {exc}")
        return 4
    except Exception as exc:
        exit_code = getattr(exc, "exit_code", None)
        if exit_code is None:
            logger.error(f"Unexpected failure: {exc}", exc_info=True)
            return 3
        logger.error(getattr(exc, "message", str(exc)))
        return exit_code


if __name__ == "__main__":
    sys.exit(main())
