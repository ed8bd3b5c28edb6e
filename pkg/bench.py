"""Module chính cho benchmark đo tốc độ chèn theo kích thước batch."""

import argparse
import asyncio
import logging
import sys

from benchmark.harness import run_experiment
from benchmark.output import read_summary
from benchmark.records import ExperimentConfig
from benchmark.stats import recommend_batch_size
from config import Config
from database.result_store import ResultStore
from runtime.errors import RuntimeControlError
from utils.format_utils import format_rate, format_records
from utils.log_utils import configure_logging
from utils.time_utils import duration_arg, format_duration

logger = logging.getLogger(__name__)


def batch_size_list(text: str) -> list[int]:
    try:
        sizes = [int(x.strip()) for x in text.split(',') if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}") from None
    if not sizes:
        raise argparse.ArgumentTypeError("at least one batch size is required")
    return sizes


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Batched table-configuration benchmark.")
    parser.add_argument('--log-level', default=Config.LOG_LEVEL)
    commands = parser.add_subparsers(dest='command', required=True)

    run = commands.add_parser('run', help='Sweep batch sizes and measure insertion rate')
    run.add_argument('--schema', default=Config.TARGET_SCHEMA_PATH,
                     help='Schema for the in-process target (ignored with --endpoint)')
    run.add_argument('--endpoint', default=None,
                     help='host:port of a running target; omitted = start one in-process')
    run.add_argument('--table', default=Config.BENCH_TABLE)
    run.add_argument('--entries', type=int, default=Config.BENCH_ENTRIES)
    run.add_argument('--batch-sizes', type=batch_size_list,
                     default=list(Config.BENCH_BATCH_SIZES))
    run.add_argument('--runs', type=int, default=Config.BENCH_RUNS)
    run.add_argument('--significance', type=float, default=Config.BENCH_SIGNIFICANCE,
                     help='Overall significance level, split across batch sizes')
    run.add_argument('--delay', '--delay-ms', dest='delay', type=duration_arg, default=0.0,
                     help='Response delay of the in-process target (bare number = ms)')
    run.add_argument('--seed', type=int, default=0)
    run.add_argument('--out', default=Config.BENCH_OUT_DIR)
    run.add_argument('--db', default=Config.BENCH_RESULTS_DB,
                     help='SQLite result store; an empty string disables it')

    show = commands.add_parser('show', help='List stored experiments')
    show.add_argument('--db', default=Config.BENCH_RESULTS_DB)
    show.add_argument('--limit', type=int, default=10)
    show.add_argument('--experiment', type=int, default=None, help='Only this experiment id')
    show.add_argument('--samples', action='store_true', help='Also list per-run cumulative times')

    recommend = commands.add_parser('recommend',
                                     help='Largest batch size within a response-time limit')
    recommend.add_argument('--summary', required=True, help='summary.csv of a sweep')
    recommend.add_argument('--max-response', '--max-response-ms', dest='max_response',
                           type=duration_arg, required=True,
                           help='Per-request response-time limit (bare number = ms)')
    return parser


async def cmd_run(args) -> int:
    """Chạy một sweep và in bảng kết quả."""
    if args.endpoint and args.delay:
        # The delay is injected by the target; a running one keeps its own setting.
        logger.error("--delay only applies to the in-process target; set it on the target instead")
        return 2
    try:
        config = ExperimentConfig(
            total_entries=args.entries, batch_sizes=args.batch_sizes, runs=args.runs,
            overall_significance=args.significance, response_delay_ms=args.delay * 1000,
            rng_seed=args.seed, table_name=args.table,
        )
    except ValueError as e:
        logger.error("Invalid benchmark configuration: %s", e)
        return 2

    store = ResultStore(args.db) if args.db else None
    try:
        if store:
            await store.initialize()
        result = await run_experiment(config, args.endpoint, schema_path=args.schema,
                                      out_dir=args.out, store=store)
    except (RuntimeControlError, ValueError, OSError) as e:
        logger.error("Benchmark failed: %s", e)
        return 1
    finally:
        if store:
            await store.close()

    print(format_records(result.records))
    print(f"\nparadigm: {config.paradigm}; all half-widths below 1% of mean: "
          f"{'yes' if result.ci_below_1pct else 'no'}")
    return 0


async def cmd_show(args) -> int:
    """Liệt kê các thí nghiệm đã lưu trong cơ sở dữ liệu."""
    async with ResultStore(args.db) as store:
        experiments = await store.list_experiments(args.limit)
        if args.experiment is not None:
            experiments = [e for e in experiments if e.experiment_id == args.experiment]
        if not experiments:
            print("No stored experiments.")
            return 1
        for e in experiments:
            print(f"#{e.experiment_id} {e.created_at} {e.paradigm} "
                  f"(delay {e.response_delay_ms} ms, {e.total_entries} entries, "
                  f"{e.runs} runs, seed {e.rng_seed}) @ {e.endpoint}")
            print(format_records(await store.get_records(e.experiment_id)))
            if args.samples:
                for batch_size, run, seconds in await store.get_samples(e.experiment_id):
                    print(f"  batch {batch_size:>7} run {run:>3}: {format_duration(seconds)}")
            print()
    return 0


def cmd_recommend(args) -> int:
    """Gợi ý batch size lớn nhất trong giới hạn thời gian phản hồi."""
    try:
        records = read_summary(args.summary)
    except (OSError, ValueError) as e:
        logger.error("Cannot read %s: %s", args.summary, e)
        return 1
    best = recommend_batch_size(records, args.max_response)
    if best is None:
        print(f"No swept batch size answers within {format_duration(args.max_response)}.")
        return 1
    print(f"batch size {best.batch_size}: {format_rate(best.mean_insertion_rate)} at "
          f"{format_duration(best.mean_response_time)} per request")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    if args.command == 'run':
        return asyncio.run(cmd_run(args))
    if args.command == 'show':
        return asyncio.run(cmd_show(args))
    return cmd_recommend(args)


if __name__ == "__main__":
    sys.exit(main())
