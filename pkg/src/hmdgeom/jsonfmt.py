"""Deterministic JSON/CSV number formatting.

All exported numbers are rounded to 9 significant decimal digits before
serialization; the rounded doubles print via Python's shortest round-trip
repr, so identical inputs always serialize to identical bytes on any
platform.
"""

from __future__ import annotations

import json
import math

SIG_DIGITS = 9


def round_sig(value: float, digits: int = SIG_DIGITS) -> float:
    if value == 0 or not math.isfinite(value):
        return value
    return float(f"{value:.{digits}g}")


def format_sig(value: float, digits: int = SIG_DIGITS) -> str:
    """Fixed significant-digit text form, used for CSV cells."""
    return f"{value:.{digits}g}"


def jsonable(obj):
    """Recursively convert a payload to JSON-ready values with rounded floats."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)):
        return obj
    if isinstance(obj, float):
        return round_sig(obj)
    if isinstance(obj, dict):
        return {key: jsonable(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(item) for item in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__} to JSON")


def dumps(payload) -> str:
    """Canonical JSON text shared by the CLI and the HTTP service."""
    return json.dumps(jsonable(payload), separators=(",", ":"), ensure_ascii=False)
