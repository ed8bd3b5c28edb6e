"""
Benchmark metrics and Student-t confidence intervals.
"""
import math
from typing import Iterable, Protocol, Sequence

import numpy as np
from scipy import stats

from runtime.errors import InsufficientSamplesError, ZeroDurationError


class SweepResult(Protocol):
    batch_size: int
    mean_insertion_rate: float
    mean_response_time: float


def request_count(entries: int, batch_size: int) -> int:
    """Number of requests ``entries`` take when sent ``batch_size`` at a time."""
    if batch_size < 1:
        raise ValueError("batch_size must be at least 1")
    return math.ceil(entries / batch_size)


def insertion_rate(entries: int, cumulative_time: float) -> float:
    """Entries per second."""
    if cumulative_time <= 0:
        raise ZeroDurationError(f"cumulative time must be positive, got {cumulative_time}")
    return entries / cumulative_time


def response_time(entries: int, batch_size: int, cumulative_time: float) -> float:
    """Seconds per request, derived from the cumulative time of a whole run."""
    if cumulative_time <= 0:
        raise ZeroDurationError(f"cumulative time must be positive, got {cumulative_time}")
    requests = request_count(entries, batch_size)
    if requests == 0:
        raise ValueError("a run without requests has no response time")
    return cumulative_time / requests


def bonferroni_alpha(overall_significance: float, comparisons: int) -> float:
    """Per-test significance that keeps the family-wise level at ``overall_significance``."""
    if not 0 < overall_significance < 1:
        raise ValueError("overall significance must lie strictly between 0 and 1")
    if comparisons < 1:
        raise ValueError("at least one comparison is needed")
    return overall_significance / comparisons


def t_quantile(per_test_alpha: float, df: int) -> float:
    """Two-sided critical value t_{1-alpha/2, df}."""
    if not 0 < per_test_alpha < 1:
        raise ValueError("per-test alpha must lie strictly between 0 and 1")
    if df < 1:
        raise InsufficientSamplesError("a t quantile needs at least one degree of freedom")
    return float(stats.t.ppf(1 - per_test_alpha / 2, df=df))


def confidence_interval(samples: Sequence[float], per_test_alpha: float) -> tuple[float, float]:
    """Returns (mean, half-width) of the two-sided Student-t interval."""
    data = np.asarray(samples, dtype=float)
    if data.size < 2:
        raise InsufficientSamplesError(
            f"a confidence interval needs at least 2 samples, got {data.size}"
        )
    mean = float(data.mean())
    deviation = float(data.std(ddof=1))
    half_width = t_quantile(per_test_alpha, data.size - 1) * deviation / math.sqrt(data.size)
    return mean, half_width


def below_fraction(mean: float, half_width: float | None, fraction: float = 0.01) -> bool:
    """Whether a half-width is smaller than ``fraction`` of its mean."""
    return half_width is not None and half_width < fraction * abs(mean)


def recommend_batch_size(records: Iterable[SweepResult],
                         max_response_time: float) -> SweepResult | None:
    """Largest swept batch size whose mean response time stays within the limit."""
    fitting = [r for r in records if r.mean_response_time <= max_response_time]
    return max(fitting, key=lambda r: r.batch_size, default=None)
