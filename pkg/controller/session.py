"""
Controller-side session with a target: handshake, batched writes with timing, reads and
lookup-miss subscriptions.
"""
import asyncio
import inspect
import logging
from dataclasses import dataclass
from typing import Any, Awaitable, Callable, Mapping, Sequence

from config import Config
from controller.entries import (
    build_delete,
    build_entry,
    build_key,
    build_modify,
    build_register_write,
    build_test_packet,
    decode_values,
    delete_for,
)
from runtime.errors import (
    ConnectFailedError,
    InvalidKeyError,
    MalformedFrameError,
    NotFoundError,
    RemoteMalformedError,
    RuntimeControlError,
    SchemaMismatchError,
    TransportError,
)
from runtime.schema import (
    ProgramSchema,
    TableKind,
    TableSchema,
    parse_schema,
    table_by_id,
    table_by_name,
)
from runtime.wire import (
    Body,
    GetSchema,
    Hello,
    HelloAck,
    Message,
    Notify,
    Read,
    ReadAck,
    SchemaDoc,
    TableUpdate,
    TestPacket,
    Write,
    WriteAck,
    WriteBatch,
    WriteReport,
    decode,
    encode,
    read_frame,
)
from utils.net_utils import parse_endpoint
from utils.time_utils import now

logger = logging.getLogger(__name__)

NotifyHandler = Callable[[Notify], Awaitable[None] | None]


@dataclass(frozen=True, slots=True)
class TimedReport:
    """A write report with the monotonic timestamps that bracket its request."""
    report: WriteReport
    request_created_at: float
    response_received_at: float

    @property
    def elapsed(self) -> float:
        return self.response_received_at - self.request_created_at


class Subscription:
    """Delivers Notify messages to one handler, in arrival order, on its own task."""

    def __init__(self, session: "Session", handler: NotifyHandler):
        self.session = session
        self.handler = handler
        self.queue: asyncio.Queue[Notify | None] = asyncio.Queue()
        self.error: Exception | None = None
        self.delivered = 0
        self._task = asyncio.create_task(self._dispatch())

    async def _dispatch(self):
        while (notify := await self.queue.get()) is not None:
            try:
                result = self.handler(notify)
                if inspect.isawaitable(result):
                    await result
                self.delivered += 1
            except Exception as e:
                logger.error("Notification handler failed: %s", e, exc_info=True)

    def _end(self, error: Exception | None = None):
        if error is not None and self.error is None:
            self.error = error
            logger.error("Subscription ended: %s", error)
        self.queue.put_nowait(None)

    @property
    def active(self) -> bool:
        return not self._task.done()

    async def wait_closed(self):
        await self._task

    async def cancel(self):
        """Stops the subscription after already queued notifications are handled."""
        if self in self.session.subscriptions:
            self.session.subscriptions.remove(self)
        self._end()
        await self._task


class Session:
    """A connection to one target. Requests alternate strictly with their acks."""

    def __init__(self, endpoint: str, reader: asyncio.StreamReader,
                 writer: asyncio.StreamWriter, name: str = Config.CLIENT_NAME):
        self.endpoint = endpoint
        self.name = name
        self.schema: ProgramSchema | None = None
        self.next_request_id = 1
        self.subscriptions: list[Subscription] = []
        self._reader = reader
        self._writer = writer
        self._lock = asyncio.Lock()
        self._pending: asyncio.Future | None = None
        self._pending_id = 0
        self._failure: RuntimeControlError | None = None
        self._reader_task = asyncio.create_task(self._read_loop())

    def __repr__(self):
        return f"<Session {self.name}@{self.endpoint}>"

    @property
    def closed(self) -> bool:
        return self._failure is not None

    # --- Transport ---

    async def _read_loop(self):
        try:
            while True:
                frame = await read_frame(self._reader, Config.TARGET_MAX_FRAME_BYTES)
                received_at = now()
                msg = decode(frame)
                if isinstance(msg.body, Notify):
                    for subscription in list(self.subscriptions):
                        subscription.queue.put_nowait(msg.body)
                    continue
                if self._pending is None or msg.request_id != self._pending_id:
                    raise MalformedFrameError(
                        f"unexpected response with request_id {msg.request_id}", 6
                    )
                if not self._pending.done():
                    self._pending.set_result((msg, received_at))
        except (asyncio.IncompleteReadError, ConnectionError) as e:
            self._fail(TransportError(f"connection to {self.endpoint} lost: {e}"))
        except MalformedFrameError as e:
            self._fail(RemoteMalformedError(f"undecodable frame from target: {e}"))
        except asyncio.CancelledError:
            self._fail(TransportError("session closed"))
            raise

    def _fail(self, error: RuntimeControlError):
        if self._failure is None:
            self._failure = error
            logger.warning("%r failed: %s", self, error)
        if self._pending is not None and not self._pending.done():
            self._pending.set_exception(error)
        for subscription in self.subscriptions:
            subscription._end(error)
        self.subscriptions.clear()
        self._writer.close()

    async def _exchange(self, body: Body, expect: type, created_at: float | None = None):
        """Sends one request and waits for its ack; returns (ack body, created, received)."""
        async with self._lock:
            if self._failure is not None:
                raise TransportError(f"session is closed: {self._failure.message}")
            created_at = now() if created_at is None else created_at
            request_id = self.next_request_id
            self.next_request_id += 1
            frame = encode(Message(request_id, body))

            self._pending = asyncio.get_running_loop().create_future()
            self._pending_id = request_id
            try:
                self._writer.write(frame)
                await self._writer.drain()
                msg, received_at = await self._pending
            except ConnectionError as e:
                self._fail(TransportError(f"connection to {self.endpoint} lost: {e}"))
                raise self._failure from e
            finally:
                self._pending = None

        if not isinstance(msg.body, expect):
            error = RemoteMalformedError(
                f"expected {expect.__name__}, got {type(msg.body).__name__}"
            )
            self._fail(error)
            raise error
        return msg.body, created_at, received_at

    async def _send_unacknowledged(self, body: Body):
        async with self._lock:
            if self._failure is not None:
                raise TransportError(f"session is closed: {self._failure.message}")
            request_id = self.next_request_id
            self.next_request_id += 1
            try:
                self._writer.write(encode(Message(request_id, body)))
                await self._writer.drain()
            except ConnectionError as e:
                self._fail(TransportError(f"connection to {self.endpoint} lost: {e}"))
                raise self._failure from e

    # --- Handshake ---

    async def _handshake(self, expected_program: str | None):
        ack, _, _ = await self._exchange(Hello(self.name), HelloAck)
        doc, _, _ = await self._exchange(GetSchema(), SchemaDoc)
        schema = parse_schema(doc.document)
        if schema.schema_digest != ack.schema_digest:
            raise SchemaMismatchError(
                f"target announced digest {ack.schema_digest:016x} but its schema hashes to "
                f"{schema.schema_digest:016x}"
            )
        if ack.name != schema.program_name:
            raise SchemaMismatchError(
                f"target announced program {ack.name!r} but sent schema for "
                f"{schema.program_name!r}"
            )
        if expected_program is not None and schema.program_name != expected_program:
            raise SchemaMismatchError(
                f"expected program {expected_program!r}, target serves {schema.program_name!r}"
            )
        self.schema = schema
        logger.info(
            "Connected to %s: program '%s' with %d table(s)",
            self.endpoint, schema.program_name, len(schema.tables),
        )

    def table(self, name: str) -> TableSchema:
        try:
            return table_by_name(self.schema, name)
        except NotFoundError as e:
            raise SchemaMismatchError(e.message) from e

    # --- Writes ---

    async def write(self, batch: WriteBatch, created_at: float | None = None) -> TimedReport:
        """Sends one batch in one request and waits for its acknowledgment."""
        ack, created, received = await self._exchange(Write(batch), WriteAck, created_at)
        if len(ack.report.per_op) != len(batch.updates):
            error = RemoteMalformedError(
                f"report has {len(ack.report.per_op)} statuses for {len(batch.updates)} updates"
            )
            self._fail(error)
            raise error
        return TimedReport(ack.report, created, received)

    async def write_updates(self, updates: Sequence[TableUpdate],
                            atomic: bool = False) -> TimedReport:
        """Like ``write``; the creation timestamp is taken before the batch is assembled."""
        created = now()
        return await self.write(WriteBatch(tuple(updates), atomic), created)

    async def insert_all(self, updates: Sequence[TableUpdate], batch_size: int,
                         atomic: bool = False, *,
                         stop_on_failure: bool = False) -> list[TimedReport]:
        """Sends updates in consecutive batches, one at a time, each after the previous ack.

        With ``stop_on_failure`` no further batch is sent after a report that is not OK.
        """
        if batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        reports = []
        for start in range(0, len(updates), batch_size):
            timed = await self.write_updates(updates[start:start + batch_size], atomic)
            logger.debug(
                "Batch %d (%d updates): %s in %.6f s", len(reports),
                min(batch_size, len(updates) - start), timed.report.overall.name, timed.elapsed,
            )
            reports.append(timed)
            if stop_on_failure and not timed.report.ok:
                break
        return reports

    # --- Reads ---

    async def read(self, table_name: str, key_values: Mapping[str, Any] | None = None,
                   *, priority: int = 0) -> list[TableUpdate]:
        """Reads all entries of a table, or the entry stored under the given key."""
        table = self.table(table_name)
        key = None if key_values is None else build_key(table, key_values, priority)
        ack, _, _ = await self._exchange(Read(table.table_id, key), ReadAck)
        return list(ack.entries)

    async def clear_table(self, table_name: str) -> int:
        """Deletes every entry of a table in one batch; returns how many were removed."""
        entries = await self.read(table_name)
        if not entries:
            return 0
        timed = await self.write(WriteBatch(tuple(delete_for(e) for e in entries)))
        if not timed.report.ok:
            index, status = timed.report.failures()[0]
            raise RuntimeControlError(
                f"clearing {table_name!r} failed at op {index}: {status.status.name} "
                f"{status.message}"
            )
        return len(entries)

    # --- Registers and ports ---

    async def write_register(self, table_name: str, index: int, value: Any) -> WriteReport:
        update = build_register_write(self.table(table_name), index, value)
        return (await self.write(WriteBatch((update,)))).report

    async def read_register(self, table_name: str, index: int) -> int:
        table = self.table(table_name)
        if table.kind is not TableKind.REGISTER:
            raise SchemaMismatchError(f"table {table_name!r} is not a register")
        if not 0 <= index < table.capacity:
            raise InvalidKeyError(f"register index {index} outside 0..{table.capacity - 1}")
        entries = await self.read(table_name, {table.key_fields[0].name: index})
        return int.from_bytes(entries[0].action_params[0][1], "big")

    async def configure_port(self, table_name: str, port: int, action_name: str,
                             params: Mapping[str, Any] | None = None) -> WriteReport:
        """Adds a port or replaces its configuration."""
        table = self._port_table(table_name)
        key_values = {table.key_fields[0].name: port}
        exists = bool(await self.read(table_name, key_values))
        build = build_modify if exists else build_entry
        update = build(table, key_values, action_name, params)
        return (await self.write(WriteBatch((update,)))).report

    async def remove_port(self, table_name: str, port: int) -> WriteReport:
        table = self._port_table(table_name)
        update = build_delete(table, {table.key_fields[0].name: port})
        return (await self.write(WriteBatch((update,)))).report

    async def read_ports(self, table_name: str) -> dict[int, TableUpdate]:
        """Configured ports by port number."""
        self._port_table(table_name)
        return {
            int.from_bytes(entry.key.fields[0][1].value, "big"): entry
            for entry in await self.read(table_name)
        }

    def _port_table(self, table_name: str) -> TableSchema:
        table = self.table(table_name)
        if table.kind is not TableKind.PORT:
            raise SchemaMismatchError(f"table {table_name!r} is not a port table")
        return table

    # --- Events ---

    async def subscribe(self, handler: NotifyHandler) -> Subscription:
        """Calls ``handler`` for every Notify the target sends to this session."""
        if self._failure is not None:
            raise TransportError(f"session is closed: {self._failure.message}")
        subscription = Subscription(self, handler)
        self.subscriptions.append(subscription)
        return subscription

    async def send_test_packet(self, table_name: str, values: Mapping[str, Any]):
        """Injects a packet into the target's lookup; misses come back as Notify."""
        table = self.table(table_name)
        await self._send_unacknowledged(TestPacket(table.table_id, build_test_packet(table, values)))

    def decode_notify(self, notify: Notify) -> tuple[str, dict[str, int]]:
        """Table name and {field name: int} of a lookup-miss notification."""
        try:
            table = table_by_id(self.schema, notify.table_id)
        except NotFoundError as e:
            raise SchemaMismatchError(e.message) from e
        return table.name, decode_values(table, notify.values)

    # --- Lifecycle ---

    async def close(self):
        for subscription in self.subscriptions:
            subscription._end()
        self.subscriptions.clear()
        if self._failure is None:
            self._failure = TransportError("session closed")
        self._fail(self._failure)
        self._reader_task.cancel()
        await asyncio.gather(self._reader_task, return_exceptions=True)
        try:
            await self._writer.wait_closed()
        except ConnectionError:
            pass
        logger.info("Session to %s closed", self.endpoint)

    async def __aenter__(self):
        return self

    async def __aexit__(self, *exc_info):
        await self.close()


async def connect(endpoint: str, expected_program: str | None = None, *,
                  name: str = Config.CLIENT_NAME,
                  timeout: float = Config.CLIENT_CONNECT_TIMEOUT) -> Session:
    """Opens a session: Hello, schema download and digest verification."""
    host, port = parse_endpoint(endpoint)
    try:
        reader, writer = await asyncio.wait_for(asyncio.open_connection(host, port), timeout)
    except (OSError, asyncio.TimeoutError) as e:
        raise ConnectFailedError(f"cannot reach {endpoint}: {e}") from e

    session = Session(endpoint, reader, writer, name)
    try:
        await session._handshake(expected_program)
    except BaseException:
        await session.close()
        raise
    return session
