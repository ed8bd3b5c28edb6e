"""
Data classes describing a benchmark experiment, its per-run samples and per-batch-size
summaries.
"""
from dataclasses import asdict, dataclass, field

from benchmark.stats import below_fraction, bonferroni_alpha
from config import Config

MAX_SEED = 2 ** 64 - 1


@dataclass
class ExperimentConfig:
    """A batch-size sweep: ``runs`` insertions of ``total_entries`` per batch size."""
    total_entries: int = Config.BENCH_ENTRIES
    batch_sizes: list[int] = field(default_factory=lambda: list(Config.BENCH_BATCH_SIZES))
    runs: int = Config.BENCH_RUNS
    overall_significance: float = Config.BENCH_SIGNIFICANCE
    response_delay_ms: float = 0.0
    rng_seed: int = 0
    table_name: str = Config.BENCH_TABLE
    action_name: str = "permit"

    def __post_init__(self):
        if self.total_entries < 1:
            raise ValueError("total_entries must be at least 1")
        if not self.batch_sizes:
            raise ValueError("at least one batch size is required")
        if len(set(self.batch_sizes)) != len(self.batch_sizes):
            raise ValueError(f"duplicate batch sizes in {self.batch_sizes}")
        for batch_size in self.batch_sizes:
            if not 1 <= batch_size <= self.total_entries:
                raise ValueError(
                    f"batch size {batch_size} outside 1..{self.total_entries} (total entries)"
                )
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        if not 0 < self.overall_significance < 1:
            raise ValueError("overall_significance must lie strictly between 0 and 1")
        if self.response_delay_ms < 0:
            raise ValueError("response_delay_ms must be non-negative")
        if not 0 <= self.rng_seed <= MAX_SEED:
            raise ValueError("rng_seed must be a 64-bit unsigned integer")

    @property
    def paradigm(self) -> str:
        """``local`` for an undelayed target, ``remote`` when network latency is emulated."""
        return "local" if self.response_delay_ms == 0 else "remote"

    @property
    def per_test_alpha(self) -> float:
        return bonferroni_alpha(self.overall_significance, len(self.batch_sizes))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class RunSample:
    batch_size: int
    run: int
    cumulative_seconds: float
    insertion_rate: float
    response_time_seconds: float


@dataclass(frozen=True)
class BenchRecord:
    """Means and confidence half-widths for one batch size.

    Half-widths are None when fewer than two runs were made.
    """
    batch_size: int
    mean_insertion_rate: float
    mean_response_time: float
    ci_halfwidth_rate: float | None
    ci_halfwidth_rt: float | None
    runs_used: int

    @property
    def ci_below_1pct(self) -> bool:
        return (below_fraction(self.mean_insertion_rate, self.ci_halfwidth_rate)
                and below_fraction(self.mean_response_time, self.ci_halfwidth_rt))
