"""Record formatting shared by the subcommands."""

from __future__ import annotations

import csv
import io
import logging
import math
import sys
from pathlib import Path
from typing import Any, Iterable, Sequence

from refless.commands.schemas import OutputError
from refless.services.moebius import INFINITY

logger = logging.getLogger(__name__)


def format_number(value: float) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.17g}"


def format_value(value: Any) -> str:
    """17 significant digits for reals; ``re+imj`` for complex values."""

    if value is INFINITY:
        return "inf"
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_number(value)
    if isinstance(value, complex):
        sign = "-" if math.copysign(1.0, value.imag) < 0 else "+"
        return f"{format_number(value.real)}{sign}{format_number(abs(value.imag))}j"
    if isinstance(value, (list, tuple)):
        return ",".join(format_value(item) for item in value)
    return str(value)


def format_record(pairs: Iterable[tuple[str, Any]]) -> str:
    return " ".join(f"{key}={format_value(value)}" for key, value in pairs)


def emit(line: str) -> None:
    sys.stdout.write(line + "\n")


def write_rows(path: str | Path | None, header: Sequence[str], rows: Iterable[Sequence[float]]) -> None:
    """Write comma-separated rows; ``None`` writes to stdout."""

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    count = 0
    for row in rows:
        writer.writerow([format_number(float(item)) for item in row])
        count += 1
    if path is None:
        sys.stdout.write(buffer.getvalue())
        return
    try:
        Path(path).write_text(buffer.getvalue(), encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"Cannot write {path}: {exc.strerror}") from exc
    logger.info(f"Wrote {count} row(s) to {path}")
