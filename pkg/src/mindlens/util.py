"""Shared plumbing: error types, NDJSON I/O, deterministic serialization, rounding."""

from __future__ import annotations

import json
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Any, Iterable, Iterator


class MindlensError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(MindlensError):
    """Bad configuration or malformed user input detected before work starts."""


class DataError(MindlensError):
    """Integrity problem in data files discovered while processing."""


def read_ndjson(path: str | Path) -> Iterator[dict]:
    """Yield one parsed object per non-empty line; malformed lines raise DataError."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: invalid JSON: {exc}") from exc


def write_ndjson(path: str | Path, rows: Iterable[dict]) -> int:
    """Write rows as one JSON object per line. Returns the number of rows written."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = 0
    with path.open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(dumps_compact(row))
            fh.write("\n")
            n += 1
    return n


def dumps_compact(obj: Any) -> str:
    """Single-line JSON with stable key order, suitable for NDJSON records."""
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def write_json(path: str | Path, obj: Any) -> None:
    """Write pretty JSON with sorted keys; byte-stable for identical inputs."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def round_percent(count: int, total: int) -> float:
    """Percentage rounded half-up to one decimal; 0.0 when total is zero."""
    if total == 0:
        return 0.0
    pct = (Decimal(count) * 100 / Decimal(total)).quantize(
        Decimal("0.1"), rounding=ROUND_HALF_UP
    )
    return float(pct)
