"""
TCP server exposing a TargetState to controllers.

Each connection is a session: frames are read and answered in order, and everything sent to
the peer goes through the session's outbox so notifications never hold up an acknowledgment.
"""
import asyncio
import logging

from config import Config
from runtime.errors import (
    EncodeInvariantError,
    InvalidKeyError,
    MalformedFrameError,
    SchemaMismatchError,
)
from runtime.schema import serialize_schema
from runtime.wire import (
    GetSchema,
    Hello,
    HelloAck,
    Message,
    OpStatus,
    Read,
    ReadAck,
    SchemaDoc,
    TestPacket,
    Write,
    WriteAck,
    WriteReport,
    decode,
    encode,
    read_frame,
)
from switch.state import TargetState
from utils.net_utils import parse_endpoint

logger = logging.getLogger(__name__)


class TargetSession:
    """Một phiên kết nối của controller."""

    def __init__(self, server: "TargetServer", reader: asyncio.StreamReader,
                 writer: asyncio.StreamWriter):
        self.server = server
        self.reader = reader
        self.writer = writer
        self.peer = writer.get_extra_info("peername")
        self.client_name: str | None = None
        self.outbox: asyncio.Queue[bytes | None] = asyncio.Queue()

    def __repr__(self):
        return f"<TargetSession {self.client_name or '?'}@{self.peer}>"

    def notify(self, message: Message):
        """Queues an unsolicited message; drops it if the peer is far behind."""
        if self.outbox.qsize() >= self.server.notify_backlog:
            logger.warning("Dropping notification for %r: outbox backlog full", self)
            return
        self.outbox.put_nowait(encode(message))

    async def _pump_outbox(self):
        while (frame := await self.outbox.get()) is not None:
            self.writer.write(frame)
            await self.writer.drain()

    async def _respond(self, request_id: int, body):
        await self.server.apply_response_delay()
        try:
            frame = encode(Message(request_id, body))
        except EncodeInvariantError as e:
            if not isinstance(body, WriteAck):
                raise
            # A Write is always acknowledged; fall back to bare status codes.
            logger.error("Cannot encode WriteAck for %r, dropping messages: %s", self, e)
            report = body.report
            bare = tuple(OpStatus(s.status) for s in report.per_op)
            frame = encode(Message(request_id, WriteAck(WriteReport(report.overall, bare))))
        self.outbox.put_nowait(frame)

    async def run(self):
        pump = asyncio.create_task(self._pump_outbox())
        logger.info("Session opened from %s", self.peer)
        try:
            while not pump.done():
                frame = await read_frame(self.reader, self.server.max_frame_bytes)
                await self._dispatch(decode(frame))
        except asyncio.IncompleteReadError as e:
            if e.partial:
                logger.warning("%r disconnected mid-frame (%d bytes)", self, len(e.partial))
        except MalformedFrameError as e:
            logger.warning("Closing %r: %s", self, e)
        except ConnectionError as e:
            logger.info("%r connection lost: %s", self, e)
        finally:
            self.server.state.remove_subscriber(self)
            self.outbox.put_nowait(None)
            try:
                await asyncio.wait_for(pump, timeout=1.0)
            except (asyncio.TimeoutError, ConnectionError):
                pump.cancel()
            self.writer.close()
            logger.info("Session %r closed", self)

    async def _dispatch(self, msg: Message):
        state = self.server.state
        body = msg.body
        if isinstance(body, Hello):
            self.client_name = body.name
            state.add_subscriber(self)
            await self._respond(msg.request_id,
                                HelloAck(state.schema.schema_digest, state.schema.program_name))
        elif isinstance(body, GetSchema):
            await self._respond(msg.request_id, SchemaDoc(serialize_schema(state.schema)))
        elif isinstance(body, Write):
            report = state.apply_write(body.batch)
            await self._respond(msg.request_id, WriteAck(report))
        elif isinstance(body, Read):
            try:
                entries = state.read_entries(body.table_id, body.key)
            except (SchemaMismatchError, InvalidKeyError) as e:
                logger.warning("Read from %r answered empty: %s", self, e)
                entries = []
            await self._respond(msg.request_id, ReadAck(tuple(entries)))
        elif isinstance(body, TestPacket):
            try:
                fields = state.packet_fields(body.table_id, body.values)
                state.handle_test_packet(body.table_id, fields)
            except (SchemaMismatchError, InvalidKeyError) as e:
                logger.warning("Ignoring test packet from %r: %s", self, e)
        else:
            raise MalformedFrameError(f"unexpected {type(body).__name__} from a controller", 5)


class TargetServer:
    """Máy chủ TCP nhận các phiên controller cho một TargetState."""

    def __init__(self, state: TargetState, host: str = "127.0.0.1", port: int = 0, *,
                 max_frame_bytes: int = Config.TARGET_MAX_FRAME_BYTES,
                 notify_backlog: int = Config.TARGET_NOTIFY_BACKLOG):
        self.state = state
        self.host = host
        self.port = port
        self.max_frame_bytes = max_frame_bytes
        self.notify_backlog = notify_backlog
        self.sessions: set[asyncio.Task] = set()
        self._server: asyncio.Server | None = None

    @property
    def address(self) -> tuple[str, int]:
        """The bound (host, port); the port is resolved when 0 was requested."""
        if self._server is None:
            return self.host, self.port
        sockname = self._server.sockets[0].getsockname()
        return sockname[0], sockname[1]

    @property
    def endpoint(self) -> str:
        host, port = self.address
        return f"{host}:{port}"

    async def start(self):
        if self._server:
            return
        self._server = await asyncio.start_server(self._accept, self.host, self.port)
        logger.info(
            "Target serving program '%s' on %s (response delay %.3f ms)",
            self.state.schema.program_name, self.endpoint, self.state.response_delay * 1000,
        )

    async def _accept(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        task = asyncio.current_task()
        self.sessions.add(task)
        try:
            await TargetSession(self, reader, writer).run()
        except Exception as e:
            logger.error("Unexpected error in session: %s", e, exc_info=True)
            writer.close()
        finally:
            self.sessions.discard(task)

    async def apply_response_delay(self):
        """Sleeps for the configured response delay, never returning early."""
        if self.state.response_delay <= 0:
            return
        loop = asyncio.get_running_loop()
        deadline = loop.time() + self.state.response_delay
        while (remaining := deadline - loop.time()) > 0:
            await asyncio.sleep(remaining)

    async def serve_forever(self):
        await self.start()
        await self._server.serve_forever()

    async def close(self):
        """Ngừng nhận kết nối mới và đóng tất cả các phiên đang mở."""
        if self._server is None:
            return
        logger.info("Shutting down target on %s...", self.endpoint)
        self._server.close()
        for task in list(self.sessions):
            task.cancel()
        if self.sessions:
            await asyncio.gather(*self.sessions, return_exceptions=True)
        await self._server.wait_closed()
        self._server = None

    async def __aenter__(self):
        await self.start()
        return self

    async def __aexit__(self, *exc_info):
        await self.close()


async def serve(state: TargetState, endpoint: str):
    """Runs a target on ``host:port`` until cancelled."""
    host, port = parse_endpoint(endpoint)
    server = TargetServer(state, host, port)
    try:
        await server.serve_forever()
    finally:
        await server.close()
