import math
import random
import statistics

import pytest
from scipy import stats

from benchmark.records import BenchRecord
from benchmark.stats import (
    below_fraction,
    bonferroni_alpha,
    confidence_interval,
    insertion_rate,
    recommend_batch_size,
    request_count,
    response_time,
    t_quantile,
)
from runtime.errors import InsufficientSamplesError, ZeroDurationError


def test_insertion_rate_examples():
    assert insertion_rate(1000, 2.0) == 500
    assert insertion_rate(30000, 26.455) == pytest.approx(1134, abs=0.5)
    assert insertion_rate(0, 1.0) == 0


def test_response_time_examples():
    assert response_time(30000, 1, 30.0) == pytest.approx(0.001)
    assert response_time(30000, 30000, 0.6) == pytest.approx(0.6)
    assert response_time(10, 3, 4.0) == pytest.approx(1.0)
    assert request_count(10, 3) == 4


@pytest.mark.parametrize("duration", [0.0, -1.0])
def test_zero_duration(duration):
    with pytest.raises(ZeroDivisionError):
        insertion_rate(10, duration)
    with pytest.raises(ZeroDurationError):
        response_time(10, 1, duration)


def test_rate_and_response_time_identities():
    rng = random.Random(3)
    for _ in range(500):
        entries = rng.randint(1, 100000)
        batch_size = rng.randint(1, entries)
        duration = rng.uniform(1e-4, 100.0)
        rate = insertion_rate(entries, duration)
        assert rate * duration == pytest.approx(entries, rel=1e-12)
        rt = response_time(entries, batch_size, duration)
        assert rt * math.ceil(entries / batch_size) == pytest.approx(duration, rel=1e-12)


def test_bonferroni():
    assert bonferroni_alpha(0.01, 10) == pytest.approx(0.001)
    with pytest.raises(ValueError):
        bonferroni_alpha(1.0, 10)
    with pytest.raises(ValueError):
        bonferroni_alpha(0.01, 0)


def test_t_quantile_reference_value():
    assert t_quantile(0.001, 99) == pytest.approx(3.392, abs=1e-3)


def test_three_sample_interval():
    mean, half = confidence_interval([1.0, 2.0, 3.0], 0.05)
    # With two degrees of freedom the quantile has the closed form sqrt(2 q^2 / (1 - q^2)).
    q = 0.95
    t = math.sqrt(2 * q * q / (1 - q * q))
    assert mean == pytest.approx(2.0, abs=1e-6)
    assert half == pytest.approx(t / math.sqrt(3), abs=1e-6)
    assert half == pytest.approx(2.484, abs=1e-3)


def test_equal_samples_have_zero_half_width():
    assert confidence_interval([5.0] * 10, 0.01) == (5.0, 0.0)


def test_too_few_samples():
    with pytest.raises(InsufficientSamplesError):
        confidence_interval([1.0], 0.05)
    with pytest.raises(InsufficientSamplesError):
        confidence_interval([], 0.05)


def test_interval_matches_reference():
    rng = random.Random(8)
    for _ in range(100):
        samples = [rng.gauss(100, 15) for _ in range(rng.randint(2, 50))]
        low, high = stats.t.interval(0.99, len(samples) - 1,
                                     loc=statistics.fmean(samples),
                                     scale=statistics.stdev(samples) / math.sqrt(len(samples)))
        mean, half = confidence_interval(samples, 0.01)
        assert mean == pytest.approx((low + high) / 2, rel=1e-6)
        assert half == pytest.approx((high - low) / 2, rel=1e-6)


def test_below_fraction():
    assert below_fraction(1000.0, 9.0)
    assert not below_fraction(1000.0, 10.0)
    assert not below_fraction(1000.0, None)


def record(batch_size, rt):
    return BenchRecord(batch_size, batch_size / rt, rt, None, None, 1)


def test_recommend_batch_size():
    records = [record(1, 0.001), record(100, 0.004), record(1000, 0.03)]
    assert recommend_batch_size(records, 0.005).batch_size == 100
    assert recommend_batch_size(records, 1.0).batch_size == 1000
    assert recommend_batch_size(records, 0.0005) is None
