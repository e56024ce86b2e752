"""Display-only rounding and formatting. The engine itself stays exact."""

from __future__ import annotations

import math
from fractions import Fraction

from .core import RealLike, exact


def round_half_up(value: RealLike) -> int:
    """Nearest integer, halves up; how node-hour weights are displayed."""
    return int(math.floor(exact(value) + Fraction(1, 2)))


def format_su(value: RealLike) -> str:
    """Service units for humans: thousands separators, 6 significant digits."""
    quantity = exact(value)
    if quantity.denominator == 1:
        return f"{int(quantity):,}"
    return f"{float(quantity):,.6g}"


def format_real(value: RealLike) -> str:
    """Machine-readable real: dot-decimal, 6 significant digits."""
    return f"{float(exact(value)):.6g}"


def format_threshold(value: RealLike) -> str:
    """A speedup threshold at two decimals, trailing zeros trimmed."""
    text = f"{float(exact(value)):.2f}"
    return text.rstrip("0").rstrip(".")
