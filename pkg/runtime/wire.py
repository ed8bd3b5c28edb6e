"""
Runtime messages exchanged between controller and target, and their binary encoding.

Frame: magic u32 | version u8 | msg_type u8 | request_id u32 | payload_len u32 | payload
All integers are big-endian (network order).
"""
import asyncio
import logging
import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import ClassVar, Union

from runtime.errors import (
    EncodeInvariantError,
    InvalidActionError,
    InvalidKeyError,
    MalformedFrameError,
)
from runtime.schema import ActionSpec, MatchKind, TableSchema

logger = logging.getLogger(__name__)

MAGIC = 0x42465254
VERSION = 0x01
MAX_UPDATES = 2 ** 31

# magic[4B] | version[1B] | msg_type[1B] | request_id[4B] | payload_len[4B]
HEADER = struct.Struct(">IBBII")
HEADER_SIZE = HEADER.size

_U8 = struct.Struct(">B")
_U16 = struct.Struct(">H")
_U32 = struct.Struct(">I")
_U64 = struct.Struct(">Q")
_UPDATE_HEAD = struct.Struct(">BIH")     # op, table_id, key_field_count
_FIELD_HEAD = struct.Struct(">IBH")      # field_id, match_kind, value_len
_UPDATE_ACTION = struct.Struct(">IIH")   # priority, action_id, param_count
_PARAM_HEAD = struct.Struct(">IH")       # param_id, len
_OP_STATUS = struct.Struct(">BH")        # status, msg_len
_BATCH_HEAD = struct.Struct(">BI")       # flags, count

FLAG_ATOMIC = 0x01
# Longest OpStatus message, in UTF-8 bytes; longer ones are cut on a character boundary
MAX_STATUS_MESSAGE = 1024


class MsgType(IntEnum):
    HELLO = 0x01
    HELLO_ACK = 0x02
    GET_SCHEMA = 0x03
    SCHEMA_DOC = 0x04
    WRITE = 0x05
    WRITE_ACK = 0x06
    READ = 0x07
    READ_ACK = 0x08
    NOTIFY = 0x0B
    TEST_PACKET = 0x0C


class UpdateOp(IntEnum):
    INSERT = 1
    MODIFY = 2
    DELETE = 3


class Status(IntEnum):
    """Per-operation status codes, fixed by the wire contract."""
    OK = 0
    ALREADY_EXISTS = 1
    NOT_FOUND = 2
    TABLE_FULL = 3
    INVALID_KEY = 4
    INVALID_ACTION = 5
    SCHEMA_MISMATCH = 6
    MALFORMED = 7


class Overall(IntEnum):
    OK = 0
    PARTIAL = 1
    FAILED = 2


class NotifyReason(IntEnum):
    LOOKUP_MISS = 0


# --- Value types ---

@dataclass(frozen=True, slots=True)
class MatchValue:
    """One key field value. ``prefix_len`` is used by LPM, ``mask`` by TERNARY."""
    match_kind: MatchKind
    value: bytes
    prefix_len: int = 0
    mask: bytes = b""

    @classmethod
    def exact(cls, value: bytes) -> "MatchValue":
        return cls(MatchKind.EXACT, value)

    @classmethod
    def lpm(cls, value: bytes, prefix_len: int) -> "MatchValue":
        return cls(MatchKind.LPM, value, prefix_len=prefix_len)

    @classmethod
    def ternary(cls, value: bytes, mask: bytes) -> "MatchValue":
        return cls(MatchKind.TERNARY, value, mask=mask)


@dataclass(frozen=True, slots=True)
class MatchKey:
    """Ordered (field_id, value) pairs; priority only matters for ternary tables."""
    fields: tuple[tuple[int, MatchValue], ...]
    priority: int = 0

    @property
    def has_ternary(self) -> bool:
        return any(v.match_kind is MatchKind.TERNARY for _, v in self.fields)


@dataclass(frozen=True, slots=True)
class TableUpdate:
    """One table operation. DELETE carries action_id 0 and no params."""
    op: UpdateOp
    table_id: int
    key: MatchKey
    action_id: int = 0
    action_params: tuple[tuple[int, bytes], ...] = ()


@dataclass(frozen=True, slots=True)
class WriteBatch:
    updates: tuple[TableUpdate, ...]
    atomic: bool = False


@dataclass(frozen=True, slots=True)
class OpStatus:
    status: Status
    message: str = ""

    def __post_init__(self):
        raw = self.message.encode("utf-8")
        if len(raw) > MAX_STATUS_MESSAGE:
            object.__setattr__(
                self, "message", raw[:MAX_STATUS_MESSAGE].decode("utf-8", errors="ignore")
            )

    @property
    def ok(self) -> bool:
        return self.status == Status.OK


@dataclass(frozen=True, slots=True)
class WriteReport:
    overall: Overall
    per_op: tuple[OpStatus, ...]

    @classmethod
    def from_statuses(cls, per_op, atomic: bool) -> "WriteReport":
        per_op = tuple(per_op)
        if all(s.ok for s in per_op):
            overall = Overall.OK
        elif atomic:
            overall = Overall.FAILED
        else:
            overall = Overall.PARTIAL
        return cls(overall, per_op)

    @property
    def ok(self) -> bool:
        return self.overall == Overall.OK

    def failures(self) -> list[tuple[int, OpStatus]]:
        return [(index, s) for index, s in enumerate(self.per_op) if not s.ok]


# --- Message bodies ---

@dataclass(frozen=True, slots=True)
class Hello:
    msg_type: ClassVar[MsgType] = MsgType.HELLO
    name: str


@dataclass(frozen=True, slots=True)
class HelloAck:
    msg_type: ClassVar[MsgType] = MsgType.HELLO_ACK
    schema_digest: int
    name: str


@dataclass(frozen=True, slots=True)
class GetSchema:
    msg_type: ClassVar[MsgType] = MsgType.GET_SCHEMA


@dataclass(frozen=True, slots=True)
class SchemaDoc:
    msg_type: ClassVar[MsgType] = MsgType.SCHEMA_DOC
    document: str


@dataclass(frozen=True, slots=True)
class Write:
    msg_type: ClassVar[MsgType] = MsgType.WRITE
    batch: WriteBatch


@dataclass(frozen=True, slots=True)
class WriteAck:
    msg_type: ClassVar[MsgType] = MsgType.WRITE_ACK
    report: WriteReport


@dataclass(frozen=True, slots=True)
class Read:
    msg_type: ClassVar[MsgType] = MsgType.READ
    table_id: int
    key: MatchKey | None = None


@dataclass(frozen=True, slots=True)
class ReadAck:
    msg_type: ClassVar[MsgType] = MsgType.READ_ACK
    entries: tuple[TableUpdate, ...] = ()


@dataclass(frozen=True, slots=True)
class TestPacket:
    msg_type: ClassVar[MsgType] = MsgType.TEST_PACKET
    __test__: ClassVar[bool] = False  # not a pytest test class
    table_id: int
    values: tuple[tuple[int, bytes], ...]


@dataclass(frozen=True, slots=True)
class Notify:
    msg_type: ClassVar[MsgType] = MsgType.NOTIFY
    table_id: int
    values: tuple[tuple[int, bytes], ...]
    reason: NotifyReason = NotifyReason.LOOKUP_MISS


Body = Union[Hello, HelloAck, GetSchema, SchemaDoc, Write, WriteAck, Read, ReadAck,
             TestPacket, Notify]


@dataclass(frozen=True, slots=True)
class Message:
    request_id: int
    body: Body


# --- Invariants ---

def _check_match_value(value: MatchValue):
    if not isinstance(value.value, bytes) or not value.value:
        raise EncodeInvariantError("match value must be non-empty bytes")
    kind = value.match_kind
    if kind is MatchKind.EXACT:
        if value.prefix_len or value.mask:
            raise EncodeInvariantError("exact value carries prefix_len or mask")
    elif kind is MatchKind.LPM:
        if value.mask:
            raise EncodeInvariantError("lpm value carries a mask")
        if not 0 <= value.prefix_len <= 8 * len(value.value):
            raise EncodeInvariantError(f"prefix_len {value.prefix_len} exceeds value width")
    elif kind is MatchKind.TERNARY:
        if value.prefix_len:
            raise EncodeInvariantError("ternary value carries prefix_len")
        if len(value.mask) != len(value.value):
            raise EncodeInvariantError("ternary value and mask differ in length")
        if int.from_bytes(value.value, "big") & ~int.from_bytes(value.mask, "big"):
            raise EncodeInvariantError("ternary value has bits set outside its mask")
    else:
        raise EncodeInvariantError(f"unknown match kind {kind!r}")


def _check_key(key: MatchKey):
    for _, value in key.fields:
        _check_match_value(value)
    if key.priority and not key.has_ternary:
        raise EncodeInvariantError("priority must be 0 without a ternary field")


def _check_update(update: TableUpdate):
    _check_key(update.key)
    if update.op is UpdateOp.DELETE and (update.action_id or update.action_params):
        raise EncodeInvariantError("DELETE carries action data")


def _check_values(values):
    for _, value in values:
        if not isinstance(value, bytes) or not value:
            raise EncodeInvariantError("packet field values must be non-empty bytes")


def _check_message(msg: Message):
    body = msg.body
    if isinstance(body, Notify):
        if msg.request_id != 0:
            raise EncodeInvariantError("Notify must carry request_id 0")
    elif msg.request_id == 0:
        raise EncodeInvariantError("request_id 0 is reserved for Notify")

    if isinstance(body, Write):
        if not 1 <= len(body.batch.updates) <= MAX_UPDATES:
            raise EncodeInvariantError("a write batch needs 1..2^31 updates")
        for update in body.batch.updates:
            _check_update(update)
    elif isinstance(body, WriteAck):
        per_op = body.report.per_op
        if not per_op:
            raise EncodeInvariantError("a write report needs at least one status")
        if (body.report.overall == Overall.OK) != all(s.ok for s in per_op):
            raise EncodeInvariantError("overall status disagrees with per-op statuses")
    elif isinstance(body, Read):
        if body.key is not None:
            _check_key(body.key)
    elif isinstance(body, ReadAck):
        for entry in body.entries:
            if entry.op is not UpdateOp.INSERT:
                raise EncodeInvariantError("read entries must be INSERT-shaped")
            _check_update(entry)
    elif isinstance(body, (TestPacket, Notify)):
        _check_values(body.values)


# --- Encoding ---

def _encode_key(parts: list, key: MatchKey):
    for field_id, value in key.fields:
        parts.append(_FIELD_HEAD.pack(field_id, value.match_kind, len(value.value)))
        parts.append(value.value)
        if value.match_kind is MatchKind.LPM:
            parts.append(_U16.pack(value.prefix_len))
        elif value.match_kind is MatchKind.TERNARY:
            parts.append(value.mask)


def _encode_update(parts: list, update: TableUpdate):
    parts.append(_UPDATE_HEAD.pack(update.op, update.table_id, len(update.key.fields)))
    _encode_key(parts, update.key)
    parts.append(_UPDATE_ACTION.pack(update.key.priority, update.action_id,
                                     len(update.action_params)))
    for param_id, data in update.action_params:
        parts.append(_PARAM_HEAD.pack(param_id, len(data)))
        parts.append(data)


def _encode_text(parts: list, text: str):
    raw = text.encode("utf-8")
    parts.append(_U16.pack(len(raw)))
    parts.append(raw)


def _encode_values(parts: list, values):
    parts.append(_U16.pack(len(values)))
    for field_id, value in values:
        parts.append(_FIELD_HEAD.pack(field_id, MatchKind.EXACT, len(value)))
        parts.append(value)


def _encode_body(body: Body) -> list:
    parts: list = []
    if isinstance(body, Hello):
        _encode_text(parts, body.name)
    elif isinstance(body, HelloAck):
        parts.append(_U64.pack(body.schema_digest))
        _encode_text(parts, body.name)
    elif isinstance(body, GetSchema):
        pass
    elif isinstance(body, SchemaDoc):
        parts.append(body.document.encode("utf-8"))
    elif isinstance(body, Write):
        flags = FLAG_ATOMIC if body.batch.atomic else 0
        parts.append(_BATCH_HEAD.pack(flags, len(body.batch.updates)))
        for update in body.batch.updates:
            _encode_update(parts, update)
    elif isinstance(body, WriteAck):
        parts.append(_BATCH_HEAD.pack(body.report.overall, len(body.report.per_op)))
        for status in body.report.per_op:
            raw = status.message.encode("utf-8")
            parts.append(_OP_STATUS.pack(status.status, len(raw)))
            parts.append(raw)
    elif isinstance(body, Read):
        parts.append(_U32.pack(body.table_id))
        if body.key is None:
            parts.append(_U8.pack(0))
        else:
            parts.append(_U8.pack(1))
            parts.append(_U16.pack(len(body.key.fields)))
            _encode_key(parts, body.key)
            parts.append(_U32.pack(body.key.priority))
    elif isinstance(body, ReadAck):
        parts.append(_U32.pack(len(body.entries)))
        for entry in body.entries:
            _encode_update(parts, entry)
    elif isinstance(body, TestPacket):
        parts.append(_U32.pack(body.table_id))
        _encode_values(parts, body.values)
    elif isinstance(body, Notify):
        parts.append(_U32.pack(body.table_id))
        _encode_values(parts, body.values)
        parts.append(_U8.pack(body.reason))
    else:
        raise EncodeInvariantError(f"unknown message body {type(body).__name__}")
    return parts


def encode(msg: Message) -> bytes:
    try:
        _check_message(msg)
        payload = b"".join(_encode_body(msg.body))
        header = HEADER.pack(MAGIC, VERSION, msg.body.msg_type, msg.request_id, len(payload))
    except EncodeInvariantError:
        raise
    except (struct.error, TypeError, AttributeError, UnicodeEncodeError, OverflowError) as e:
        raise EncodeInvariantError(f"cannot encode {type(msg.body).__name__}: {e}") from e
    return header + payload


# --- Decoding ---

class _Reader:
    __slots__ = ("data", "pos", "end")

    def __init__(self, data: bytes, pos: int, end: int):
        self.data = data
        self.pos = pos
        self.end = end

    def _need(self, size: int):
        if self.pos + size > self.end:
            raise MalformedFrameError(
                f"payload ends after {self.end - self.pos} of {size} needed bytes", self.end
            )

    def unpack(self, fmt: struct.Struct) -> tuple:
        self._need(fmt.size)
        values = fmt.unpack_from(self.data, self.pos)
        self.pos += fmt.size
        return values

    def u8(self) -> int:
        return self.unpack(_U8)[0]

    def u16(self) -> int:
        return self.unpack(_U16)[0]

    def u32(self) -> int:
        return self.unpack(_U32)[0]

    def u64(self) -> int:
        return self.unpack(_U64)[0]

    def raw(self, size: int) -> bytes:
        self._need(size)
        chunk = self.data[self.pos:self.pos + size]
        self.pos += size
        return chunk

    def text(self, size: int) -> str:
        start = self.pos
        try:
            return self.raw(size).decode("utf-8")
        except UnicodeDecodeError as e:
            raise MalformedFrameError(f"invalid UTF-8: {e.reason}", start + e.start) from e


def _enum(enum_cls, value: int, offset: int):
    try:
        return enum_cls(value)
    except ValueError:
        raise MalformedFrameError(f"unknown {enum_cls.__name__} {value}", offset) from None


def _decode_key_fields(reader: _Reader, count: int) -> tuple:
    fields = []
    for _ in range(count):
        kind_offset = reader.pos + 4
        field_id, kind, value_len = reader.unpack(_FIELD_HEAD)
        kind = _enum(MatchKind, kind, kind_offset)
        value = reader.raw(value_len)
        if kind is MatchKind.LPM:
            fields.append((field_id, MatchValue(kind, value, prefix_len=reader.u16())))
        elif kind is MatchKind.TERNARY:
            fields.append((field_id, MatchValue(kind, value, mask=reader.raw(value_len))))
        else:
            fields.append((field_id, MatchValue(kind, value)))
    return tuple(fields)


def _decode_update(reader: _Reader) -> TableUpdate:
    op_offset = reader.pos
    op, table_id, field_count = reader.unpack(_UPDATE_HEAD)
    op = _enum(UpdateOp, op, op_offset)
    fields = _decode_key_fields(reader, field_count)
    priority, action_id, param_count = reader.unpack(_UPDATE_ACTION)
    params = []
    for _ in range(param_count):
        param_id, size = reader.unpack(_PARAM_HEAD)
        params.append((param_id, reader.raw(size)))
    return TableUpdate(op, table_id, MatchKey(fields, priority), action_id, tuple(params))


def _decode_values(reader: _Reader) -> tuple:
    values = []
    for _ in range(reader.u16()):
        kind_offset = reader.pos + 4
        field_id, kind, size = reader.unpack(_FIELD_HEAD)
        if kind != MatchKind.EXACT:
            raise MalformedFrameError("packet values must be exact", kind_offset)
        values.append((field_id, reader.raw(size)))
    return tuple(values)


def _decode_body(msg_type: MsgType, reader: _Reader) -> Body:
    if msg_type is MsgType.HELLO:
        return Hello(reader.text(reader.u16()))
    if msg_type is MsgType.HELLO_ACK:
        digest = reader.u64()
        return HelloAck(digest, reader.text(reader.u16()))
    if msg_type is MsgType.GET_SCHEMA:
        return GetSchema()
    if msg_type is MsgType.SCHEMA_DOC:
        return SchemaDoc(reader.text(reader.end - reader.pos))
    if msg_type is MsgType.WRITE:
        flags_offset = reader.pos
        flags, count = reader.unpack(_BATCH_HEAD)
        if flags & ~FLAG_ATOMIC:
            raise MalformedFrameError(f"reserved flag bits set: {flags:#04x}", flags_offset)
        updates = tuple(_decode_update(reader) for _ in range(count))
        return Write(WriteBatch(updates, atomic=bool(flags & FLAG_ATOMIC)))
    if msg_type is MsgType.WRITE_ACK:
        overall_offset = reader.pos
        overall, count = reader.unpack(_BATCH_HEAD)
        overall = _enum(Overall, overall, overall_offset)
        per_op = []
        for _ in range(count):
            status_offset = reader.pos
            status, size = reader.unpack(_OP_STATUS)
            if size > MAX_STATUS_MESSAGE:
                raise MalformedFrameError(
                    f"status message of {size} bytes exceeds {MAX_STATUS_MESSAGE}", status_offset + 1
                )
            per_op.append(OpStatus(_enum(Status, status, status_offset), reader.text(size)))
        return WriteAck(WriteReport(overall, tuple(per_op)))
    if msg_type is MsgType.READ:
        table_id = reader.u32()
        flag_offset = reader.pos
        has_key = reader.u8()
        if has_key == 0:
            return Read(table_id)
        if has_key != 1:
            raise MalformedFrameError(f"has_key must be 0 or 1, got {has_key}", flag_offset)
        fields = _decode_key_fields(reader, reader.u16())
        return Read(table_id, MatchKey(fields, reader.u32()))
    if msg_type is MsgType.READ_ACK:
        count = reader.u32()
        return ReadAck(tuple(_decode_update(reader) for _ in range(count)))
    if msg_type is MsgType.TEST_PACKET:
        table_id = reader.u32()
        return TestPacket(table_id, _decode_values(reader))
    # MsgType.NOTIFY
    table_id = reader.u32()
    values = _decode_values(reader)
    reason_offset = reader.pos
    return Notify(table_id, values, _enum(NotifyReason, reader.u8(), reason_offset))


def decode_header(data: bytes) -> tuple[MsgType, int, int]:
    """Validates a frame header; returns (msg_type, request_id, payload_len)."""
    if len(data) >= 4 and _U32.unpack_from(data, 0)[0] != MAGIC:
        raise MalformedFrameError(f"bad magic {_U32.unpack_from(data, 0)[0]:#010x}", 0)
    if len(data) < HEADER_SIZE:
        raise MalformedFrameError("truncated header", len(data))
    _, version, msg_type, request_id, payload_len = HEADER.unpack_from(data, 0)
    if version != VERSION:
        raise MalformedFrameError(f"unsupported version {version}", 4)
    return _enum(MsgType, msg_type, 5), request_id, payload_len


def decode(data: bytes) -> Message:
    """Decodes exactly one frame; any deviation from the encoding is MALFORMED."""
    data = bytes(data)
    msg_type, request_id, payload_len = decode_header(data)
    end = HEADER_SIZE + payload_len
    if len(data) < end:
        raise MalformedFrameError("truncated payload", len(data))
    if len(data) > end:
        raise MalformedFrameError(f"{len(data) - end} trailing byte(s)", end)

    reader = _Reader(data, HEADER_SIZE, end)
    body = _decode_body(msg_type, reader)
    if reader.pos != end:
        raise MalformedFrameError(f"{end - reader.pos} unread payload byte(s)", reader.pos)

    msg = Message(request_id, body)
    try:
        _check_message(msg)
    except EncodeInvariantError as e:
        raise MalformedFrameError(e.message, HEADER_SIZE) from e
    return msg


async def read_frame(reader: asyncio.StreamReader, max_payload: int) -> bytes:
    """Reads one whole frame from a stream.

    Raises ``asyncio.IncompleteReadError`` when the peer closes mid-frame and
    ``MalformedFrameError`` on a bad header or an oversized payload.
    """
    header = await reader.readexactly(HEADER_SIZE)
    _, _, payload_len = decode_header(header)
    if payload_len > max_payload:
        raise MalformedFrameError(f"payload of {payload_len} bytes exceeds limit", 10)
    return header + await reader.readexactly(payload_len)


# --- Canonicalization ---

def _to_int(data: bytes) -> int:
    return int.from_bytes(data, "big")


def _id_list(ids, limit: int = 8) -> str:
    ids = sorted(ids) if isinstance(ids, set) else list(ids)
    shown = ", ".join(map(str, ids[:limit]))
    return f"[{shown}, ...]" if len(ids) > limit else f"[{shown}]"


def canonicalize_key(key: MatchKey, table: TableSchema) -> MatchKey:
    """Normalizes a key against its table.

    Fields are put in table order and zero-padded to the schema width, LPM host bits and
    ternary masked-out bits are cleared, and priority is forced to 0 for tables without a
    ternary field. Idempotent.
    """
    by_id = {}
    for field_id, value in key.fields:
        if field_id in by_id:
            raise InvalidKeyError(f"field id {field_id} given twice for table {table.name!r}")
        by_id[field_id] = value
    unknown = set(by_id) - {f.field_id for f in table.key_fields}
    if unknown:
        raise InvalidKeyError(
            f"{len(unknown)} unknown field id(s) {_id_list(unknown)} for table {table.name!r}"
        )

    fields = []
    for spec in table.key_fields:
        value = by_id.get(spec.field_id)
        if value is None:
            raise InvalidKeyError(f"missing key field {spec.name!r}")
        if value.match_kind != spec.match_kind:
            raise InvalidKeyError(
                f"field {spec.name!r} is {spec.match_kind.name}, got {MatchKind(value.match_kind).name}"
            )
        width = spec.bit_width
        number = _to_int(value.value)
        if number >> width:
            raise InvalidKeyError(f"value for {spec.name!r} exceeds {width} bits")

        if spec.match_kind is MatchKind.LPM:
            if not 0 <= value.prefix_len <= width:
                raise InvalidKeyError(
                    f"prefix_len {value.prefix_len} for {spec.name!r} outside 0..{width}"
                )
            prefix_mask = ((1 << value.prefix_len) - 1) << (width - value.prefix_len)
            canonical = MatchValue(
                MatchKind.LPM, (number & prefix_mask).to_bytes(spec.byte_width, "big"),
                prefix_len=value.prefix_len,
            )
        elif spec.match_kind is MatchKind.TERNARY:
            mask = _to_int(value.mask)
            if mask >> width:
                raise InvalidKeyError(f"mask for {spec.name!r} exceeds {width} bits")
            canonical = MatchValue(
                MatchKind.TERNARY, (number & mask).to_bytes(spec.byte_width, "big"),
                mask=mask.to_bytes(spec.byte_width, "big"),
            )
        else:
            canonical = MatchValue(MatchKind.EXACT, number.to_bytes(spec.byte_width, "big"))
        fields.append((spec.field_id, canonical))

    priority = key.priority if table.has_ternary else 0
    if not 0 <= priority <= 0xFFFFFFFF:
        raise InvalidKeyError(f"priority {priority} outside the 32-bit range")
    return MatchKey(tuple(fields), priority)


def canonicalize_params(params, action: ActionSpec) -> tuple[tuple[int, bytes], ...]:
    """Checks params against the action, in order, and pads them to schema width."""
    params = tuple(params)
    expected = [p.field_id for p in action.params]
    given = [param_id for param_id, _ in params]
    if given != expected:
        raise InvalidActionError(
            f"action {action.name!r} expects param ids {_id_list(expected)}, got {_id_list(given)}"
        )
    canonical = []
    for spec, (param_id, data) in zip(action.params, params):
        number = _to_int(data)
        if number >> spec.bit_width:
            raise InvalidActionError(f"param {spec.name!r} exceeds {spec.bit_width} bits")
        canonical.append((param_id, number.to_bytes(spec.byte_width, "big")))
    return tuple(canonical)
