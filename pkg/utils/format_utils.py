"""
Utility functions for printing benchmark results on the console.
"""
from utils.time_utils import format_duration


def format_rate(rate: float) -> str:
    """Formats an insertion rate."""
    return f"{rate:,.1f} entries/s"


def format_half_width(mean: float, half_width: float | None) -> str:
    """Formats a half-width with its share of the mean, or n/a when not computable."""
    if half_width is None:
        return "n/a"
    if mean == 0:
        return f"±{half_width:.3g}"
    return f"±{half_width:.3g} ({100 * half_width / abs(mean):.2f}%)"


def format_records(records) -> str:
    """Renders per-batch-size records as an aligned text table."""
    header = f"{'batch':>7}  {'insertion rate':>22}  {'rate CI':>22}  {'response time':>13}  {'runs':>5}"
    lines = [header, "-" * len(header)]
    for r in records:
        lines.append(
            f"{r.batch_size:>7}  {format_rate(r.mean_insertion_rate):>22}  "
            f"{format_half_width(r.mean_insertion_rate, r.ci_halfwidth_rate):>22}  "
            f"{format_duration(r.mean_response_time):>13}  {r.runs_used:>5}"
        )
    return "\n".join(lines)
