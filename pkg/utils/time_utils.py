"""
Utility functions for timestamps and durations.
"""
import argparse
import re
import time

now = time.perf_counter
"""Monotonic high-resolution clock used for every request timing."""


def parse_duration(duration_str: str) -> float | None:
    """
    Parses a duration string (e.g., "500us", "2ms", "1.5s") into seconds.
    A bare number is taken as milliseconds. Returns None if the format is invalid.
    """
    match = re.fullmatch(r"\s*(\d+(?:\.\d+)?)\s*(us|ms|s)?\s*", duration_str.lower())
    if not match:
        return None

    value, unit = float(match.group(1)), match.group(2) or 'ms'
    if unit == 'us':
        return value / 1_000_000
    if unit == 'ms':
        return value / 1000
    return value


def duration_arg(text: str) -> float:
    """argparse type: a non-negative duration in seconds, parsed like ``parse_duration``."""
    seconds = parse_duration(text)
    if seconds is None:
        raise argparse.ArgumentTypeError(f"not a duration (e.g. 500us, 2ms, 1.5s): {text!r}")
    return seconds


def format_duration(seconds: float) -> str:
    """Formats seconds with a unit that keeps three significant digits readable."""
    if seconds < 1e-3:
        return f"{seconds * 1e6:.1f} µs"
    if seconds < 1:
        return f"{seconds * 1e3:.3f} ms"
    return f"{seconds:.3f} s"
