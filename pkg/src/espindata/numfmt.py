"""Minimal decimal rendering for numbers embedded in canonical text forms.

Canonical encodings (morphology strings, CSV exports) must be byte-stable
and must round-trip floats exactly, so numbers are rendered as the shortest
plain decimal that reparses to the identical float.  Scientific notation is
neither emitted nor accepted.
"""

from __future__ import annotations

import math
import re
from decimal import Decimal

from .errors import InvalidNumber

_NUMBER_RE = re.compile(r"^-?\d+(\.\d+)?$")


def render_number(value: float) -> str:
    """Render ``value`` as the shortest plain decimal that round-trips."""
    value = float(value)
    if not math.isfinite(value):
        raise InvalidNumber(f"cannot render non-finite value {value!r}")
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    text = repr(value)
    if "e" in text or "E" in text:
        # repr switches to scientific notation outside ~[1e-4, 1e16);
        # Decimal(repr(v)) is exact, so expanding it preserves round-trip.
        text = format(Decimal(text), "f")
    return text


def parse_number(token: str) -> float:
    """Parse a plain decimal token (integers and decimals only)."""
    if not _NUMBER_RE.match(token):
        raise InvalidNumber(f"not a plain decimal number: {token!r}")
    return float(token)
