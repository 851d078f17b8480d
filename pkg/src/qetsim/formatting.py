"""Fixture-stable numeric formatting: 12 significant digits everywhere."""

from __future__ import annotations


def fmt(x: float) -> str:
    """Format a float at 12 significant digits (machine-output convention)."""
    x = float(x)
    if x == 0.0:
        x = 0.0  # normalise -0.0
    return format(x, ".12g")


def fnum(x: float) -> float:
    """Round a float to 12 significant digits (for JSON payloads)."""
    return float(fmt(x))
