"""
Result files of a benchmark sweep: per-run CSV, summary CSV, metadata JSON and
whitespace-separated plot data.
"""
import csv
import json
import logging
import platform
from datetime import datetime, timezone
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import scipy

from benchmark.records import BenchRecord
from config import Config

if TYPE_CHECKING:
    from benchmark.harness import ExperimentResult

logger = logging.getLogger(__name__)

RUNS_FILE = "runs.csv"
SUMMARY_FILE = "summary.csv"
METADATA_FILE = "metadata.json"
RATE_PLOT_FILE = "insertion_rate.dat"
RT_PLOT_FILE = "response_time.dat"

RUNS_COLUMNS = ["batch_size", "run", "cumulative_seconds", "insertion_rate",
                "response_time_seconds"]
SUMMARY_COLUMNS = ["batch_size", "mean_rate", "rate_ci_halfwidth", "mean_rt",
                   "rt_ci_halfwidth", "runs"]


def _optional(value: float | None) -> str:
    return "" if value is None else repr(value)


def write_runs(path: Path, samples):
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(RUNS_COLUMNS)
        for s in samples:
            writer.writerow([s.batch_size, s.run, repr(s.cumulative_seconds),
                             repr(s.insertion_rate), repr(s.response_time_seconds)])


def write_summary(path: Path, records):
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(SUMMARY_COLUMNS)
        for r in records:
            writer.writerow([r.batch_size, repr(r.mean_insertion_rate),
                             _optional(r.ci_halfwidth_rate), repr(r.mean_response_time),
                             _optional(r.ci_halfwidth_rt), r.runs_used])


def read_summary(path: str | Path) -> list[BenchRecord]:
    """Loads the records of a summary CSV written by ``write_summary``."""
    records = []
    with Path(path).open(newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        missing = set(SUMMARY_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path} lacks summary column(s) {sorted(missing)}")
        for row in reader:
            records.append(BenchRecord(
                batch_size=int(row["batch_size"]),
                mean_insertion_rate=float(row["mean_rate"]),
                mean_response_time=float(row["mean_rt"]),
                ci_halfwidth_rate=float(row["rate_ci_halfwidth"]) if row["rate_ci_halfwidth"] else None,
                ci_halfwidth_rt=float(row["rt_ci_halfwidth"]) if row["rt_ci_halfwidth"] else None,
                runs_used=int(row["runs"]),
            ))
    return records


def write_plot_data(path: Path, records, mean_attr: str, half_attr: str):
    """Three columns: batch size, mean, half-width (nan when not computable)."""
    rows = np.array([
        [r.batch_size, getattr(r, mean_attr),
         np.nan if getattr(r, half_attr) is None else getattr(r, half_attr)]
        for r in records
    ], dtype=float).reshape(-1, 3)
    np.savetxt(path, rows, fmt=["%d", "%.9g", "%.9g"], header="batch_size mean ci_halfwidth")


def metadata(result: "ExperimentResult") -> dict:
    config = result.config
    return {
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "tool": f"{Config.PROJECT_NAME} {Config.PROJECT_VERSION}",
        "config": config.to_dict(),
        "endpoint": result.endpoint,
        "paradigm": config.paradigm,
        "confidence_interval": {
            "distribution": "student-t, two-sided",
            "correction": "bonferroni",
            "overall_significance": config.overall_significance,
            "comparisons": len(config.batch_sizes),
            "per_test_alpha": config.per_test_alpha,
        },
        "response_time_method": "cumulative time divided by request count",
        "ci_below_1pct": result.ci_below_1pct,
        "environment": {
            "python": platform.python_version(),
            "platform": platform.platform(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
    }


def write_results(out_dir: str | Path, result: "ExperimentResult") -> Path:
    """Writes every result file into ``out_dir``; returns the directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_runs(out / RUNS_FILE, result.samples)
    write_summary(out / SUMMARY_FILE, result.records)
    write_plot_data(out / RATE_PLOT_FILE, result.records, "mean_insertion_rate", "ci_halfwidth_rate")
    write_plot_data(out / RT_PLOT_FILE, result.records, "mean_response_time", "ci_halfwidth_rt")
    (out / METADATA_FILE).write_text(json.dumps(metadata(result), indent=2), encoding="utf-8")
    logger.info("Wrote results for %d batch size(s) to %s", len(result.records), out)
    return out
