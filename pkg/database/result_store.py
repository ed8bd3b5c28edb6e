"""
SQLite store for benchmark experiments, so sweeps of different paradigms can be compared later.
"""
import json
import logging
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import TYPE_CHECKING

import aiosqlite

from benchmark.records import BenchRecord

if TYPE_CHECKING:
    from benchmark.harness import ExperimentResult

logger = logging.getLogger(__name__)


@dataclass
class ExperimentRow:
    """One stored experiment, without its samples."""
    experiment_id: int
    created_at: str
    endpoint: str
    paradigm: str
    response_delay_ms: float
    total_entries: int
    runs: int
    per_test_alpha: float
    rng_seed: int


class ResultStore:
    """
    Persists experiments, their run samples and their per-batch-size records.
    """
    def __init__(self, db_path: str | Path):
        self.db_path = str(db_path)
        self.conn: aiosqlite.Connection | None = None

    async def initialize(self):
        """Opens the database and creates tables if they don't exist."""
        if self.conn:
            return
        try:
            if self.db_path != ":memory:":
                Path(self.db_path).parent.mkdir(parents=True, exist_ok=True)
            self.conn = await aiosqlite.connect(self.db_path)
            self.conn.row_factory = aiosqlite.Row
            await self.conn.execute("PRAGMA foreign_keys = ON")

            await self._create_experiments_table()
            await self._create_samples_table()
            await self._create_records_table()

            logger.info("Result store ready at %s", self.db_path)
        except aiosqlite.Error as e:
            logger.critical("Failed to initialize result store: %s", e)
            raise e

    async def _create_experiments_table(self):
        await self.conn.execute("""
            CREATE TABLE IF NOT EXISTS experiments (
                experiment_id INTEGER PRIMARY KEY AUTOINCREMENT,
                created_at TIMESTAMP NOT NULL,
                endpoint TEXT NOT NULL,
                paradigm TEXT NOT NULL,
                response_delay_ms REAL NOT NULL,
                total_entries INTEGER NOT NULL,
                runs INTEGER NOT NULL,
                overall_significance REAL NOT NULL,
                per_test_alpha REAL NOT NULL,
                rng_seed TEXT NOT NULL,
                config_json TEXT NOT NULL
            )
        """)
        await self.conn.commit()

    async def _create_samples_table(self):
        await self.conn.execute("""
            CREATE TABLE IF NOT EXISTS samples (
                experiment_id INTEGER NOT NULL,
                batch_size INTEGER NOT NULL,
                run INTEGER NOT NULL,
                cumulative_seconds REAL NOT NULL,
                insertion_rate REAL NOT NULL,
                response_time_seconds REAL NOT NULL,
                PRIMARY KEY (experiment_id, batch_size, run),
                FOREIGN KEY (experiment_id) REFERENCES experiments (experiment_id) ON DELETE CASCADE
            )
        """)
        await self.conn.commit()

    async def _create_records_table(self):
        await self.conn.execute("""
            CREATE TABLE IF NOT EXISTS records (
                experiment_id INTEGER NOT NULL,
                batch_size INTEGER NOT NULL,
                mean_rate REAL NOT NULL,
                rate_ci_halfwidth REAL,
                mean_rt REAL NOT NULL,
                rt_ci_halfwidth REAL,
                runs INTEGER NOT NULL,
                PRIMARY KEY (experiment_id, batch_size),
                FOREIGN KEY (experiment_id) REFERENCES experiments (experiment_id) ON DELETE CASCADE
            )
        """)
        await self.conn.commit()

    async def close(self):
        if self.conn:
            await self.conn.close()
            self.conn = None
            logger.info("Result store closed.")

    async def __aenter__(self):
        await self.initialize()
        return self

    async def __aexit__(self, *exc_info):
        await self.close()

    async def save_experiment(self, result: "ExperimentResult") -> int | None:
        """Stores an experiment with all of its samples and records; returns its id."""
        config = result.config
        try:
            cursor = await self.conn.execute(
                """
                INSERT INTO experiments (created_at, endpoint, paradigm, response_delay_ms,
                    total_entries, runs, overall_significance, per_test_alpha, rng_seed, config_json)
                VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?)
                """,
                (
                    datetime.now(timezone.utc).isoformat(), result.endpoint, config.paradigm,
                    config.response_delay_ms, config.total_entries, config.runs,
                    config.overall_significance, config.per_test_alpha,
                    # Seeds can exceed SQLite's signed 64-bit INTEGER
                    str(config.rng_seed), json.dumps(config.to_dict()),
                ),
            )
            experiment_id = cursor.lastrowid
            await self.conn.executemany(
                "INSERT INTO samples VALUES (?, ?, ?, ?, ?, ?)",
                [
                    (experiment_id, s.batch_size, s.run, s.cumulative_seconds,
                     s.insertion_rate, s.response_time_seconds)
                    for s in result.samples
                ],
            )
            await self.conn.executemany(
                "INSERT INTO records VALUES (?, ?, ?, ?, ?, ?, ?)",
                [
                    (experiment_id, r.batch_size, r.mean_insertion_rate, r.ci_halfwidth_rate,
                     r.mean_response_time, r.ci_halfwidth_rt, r.runs_used)
                    for r in result.records
                ],
            )
            await self.conn.commit()
            logger.info("Stored experiment %d (%s)", experiment_id, config.paradigm)
            return experiment_id
        except aiosqlite.Error as e:
            logger.error("Error storing experiment: %s", e)
            await self.conn.rollback()
            return None

    async def list_experiments(self, limit: int = 20) -> list[ExperimentRow]:
        """Most recent experiments first."""
        query = """
            SELECT experiment_id, created_at, endpoint, paradigm, response_delay_ms,
                   total_entries, runs, per_test_alpha, rng_seed
            FROM experiments ORDER BY experiment_id DESC LIMIT ?
        """
        try:
            async with self.conn.cursor() as cursor:
                await cursor.execute(query, (limit,))
                rows = await cursor.fetchall()
        except aiosqlite.Error as e:
            logger.error("Error listing experiments: %s", e)
            return []
        return [
            ExperimentRow(
                row["experiment_id"], row["created_at"], row["endpoint"], row["paradigm"],
                row["response_delay_ms"], row["total_entries"], row["runs"],
                row["per_test_alpha"], int(row["rng_seed"]),
            )
            for row in rows
        ]

    async def get_records(self, experiment_id: int) -> list[BenchRecord]:
        query = """
            SELECT batch_size, mean_rate, mean_rt, rate_ci_halfwidth, rt_ci_halfwidth, runs
            FROM records WHERE experiment_id = ? ORDER BY batch_size
        """
        try:
            async with self.conn.cursor() as cursor:
                await cursor.execute(query, (experiment_id,))
                return [BenchRecord(*row) for row in await cursor.fetchall()]
        except aiosqlite.Error as e:
            logger.error("Error getting records of experiment %d: %s", experiment_id, e)
            return []

    async def get_samples(self, experiment_id: int, batch_size: int | None = None) -> list[tuple]:
        """(batch_size, run, cumulative_seconds) triples in run order."""
        query = "SELECT batch_size, run, cumulative_seconds FROM samples WHERE experiment_id = ?"
        params: tuple = (experiment_id,)
        if batch_size is not None:
            query += " AND batch_size = ?"
            params += (batch_size,)
        query += " ORDER BY batch_size, run"
        try:
            async with self.conn.cursor() as cursor:
                await cursor.execute(query, params)
                return [tuple(row) for row in await cursor.fetchall()]
        except aiosqlite.Error as e:
            logger.error("Error getting samples of experiment %d: %s", experiment_id, e)
            return []
