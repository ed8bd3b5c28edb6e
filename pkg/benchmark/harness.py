"""
Batch-size sweep: measures the cumulative time to insert a workload, per batch size and run,
and summarizes insertion rate and response time with confidence intervals.
"""
import logging
from contextlib import AsyncExitStack
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from benchmark import output
from benchmark.records import BenchRecord, ExperimentConfig, RunSample
from benchmark.stats import confidence_interval, insertion_rate, response_time
from benchmark.workload import generate_workload
from controller.session import Session, connect
from database.result_store import ResultStore
from runtime.errors import BenchmarkRunError, RuntimeControlError
from runtime.schema import load_schema
from runtime.wire import TableUpdate
from switch.server import TargetServer
from switch.state import TargetState

logger = logging.getLogger(__name__)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    endpoint: str
    samples: list[RunSample] = field(default_factory=list)
    records: list[BenchRecord] = field(default_factory=list)
    experiment_id: int | None = None

    @property
    def ci_below_1pct(self) -> bool:
        return bool(self.records) and all(r.ci_below_1pct for r in self.records)


async def run_once(session: Session, table_name: str, workload: Sequence[TableUpdate],
                   batch_size: int) -> float:
    """Inserts the workload into an empty table; returns the cumulative time in seconds.

    The cumulative time runs from the creation of the first request to the response of
    the last one. Any failed update aborts the run.
    """
    if not workload:
        raise ValueError("cannot time an empty workload")
    reports = await session.insert_all(workload, batch_size, stop_on_failure=True)
    last = reports[-1].report
    if not last.ok:
        index, status = last.failures()[0]
        offset = (len(reports) - 1) * batch_size + index
        raise RuntimeControlError(
            f"update {offset} failed with {status.status.name}: {status.message}"
        )
    cumulative = reports[-1].response_received_at - reports[0].request_created_at

    stored = await session.read(table_name)
    if len(stored) != len(workload):
        raise RuntimeControlError(
            f"table {table_name!r} holds {len(stored)} entries after inserting {len(workload)}"
        )
    return cumulative


def summarize(batch_size: int, samples: Sequence[RunSample], per_test_alpha: float) -> BenchRecord:
    rates = [s.insertion_rate for s in samples]
    times = [s.response_time_seconds for s in samples]
    if len(samples) < 2:
        return BenchRecord(batch_size, rates[0], times[0], None, None, len(samples))
    mean_rate, rate_half = confidence_interval(rates, per_test_alpha)
    mean_rt, rt_half = confidence_interval(times, per_test_alpha)
    return BenchRecord(batch_size, mean_rate, mean_rt, rate_half, rt_half, len(samples))


async def _start_local_target(config: ExperimentConfig, schema_path: str) -> TargetServer:
    state = TargetState(load_schema(schema_path), config.response_delay_ms / 1000)
    server = TargetServer(state, "127.0.0.1", 0)
    await server.start()
    return server


async def run_experiment(config: ExperimentConfig, endpoint: str | None = None, *,
                         schema_path: str | None = None, out_dir: str | Path | None = None,
                         store: ResultStore | None = None) -> ExperimentResult:
    """Runs the full sweep.

    Without an endpoint a target is started in this process on an ephemeral loopback port,
    serving ``schema_path`` with the configured response delay. Results are written to
    ``out_dir`` and ``store`` when given.
    """
    async with AsyncExitStack() as stack:
        if endpoint is None:
            if schema_path is None:
                raise ValueError("an in-process target needs a schema path")
            server = await _start_local_target(config, schema_path)
            stack.push_async_callback(server.close)
            endpoint = server.endpoint
        session = await connect(endpoint)
        stack.push_async_callback(session.close)

        table = session.table(config.table_name)
        workload = generate_workload(table, config.total_entries, config.rng_seed,
                                     config.action_name)
        result = ExperimentResult(config, endpoint)
        alpha = config.per_test_alpha
        logger.info(
            "Sweeping %d batch size(s) x %d run(s) of %d entries against %s (%s, per-test alpha %.5f)",
            len(config.batch_sizes), config.runs, config.total_entries, endpoint,
            config.paradigm, alpha,
        )

        for batch_size in config.batch_sizes:
            samples = []
            for run in range(config.runs):
                try:
                    await session.clear_table(config.table_name)
                    cumulative = await run_once(session, config.table_name, workload, batch_size)
                    sample = RunSample(
                        batch_size, run, cumulative,
                        insertion_rate(config.total_entries, cumulative),
                        response_time(config.total_entries, batch_size, cumulative),
                    )
                except RuntimeControlError as e:
                    raise BenchmarkRunError(str(e), batch_size, run) from e
                samples.append(sample)
            result.samples.extend(samples)
            record = summarize(batch_size, samples, alpha)
            result.records.append(record)
            logger.info(
                "Batch size %d: %.1f entries/s, %.6f s/request over %d run(s)",
                batch_size, record.mean_insertion_rate, record.mean_response_time,
                record.runs_used,
            )
        await session.clear_table(config.table_name)

    if out_dir is not None:
        output.write_results(out_dir, result)
    if store is not None:
        result.experiment_id = await store.save_experiment(result)
    return result
