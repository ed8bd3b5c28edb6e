"""
Program schema: the tables (including registers and ports) a target exposes.

Schemas are loaded from a JSON document, validated, and fingerprinted with a 64-bit digest
over their canonical serialization so controller and target can confirm they agree.
"""
import json
import logging
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Any

from runtime.errors import InvalidSchemaError, MalformedSchemaError, NotFoundError

logger = logging.getLogger(__name__)

MAX_BIT_WIDTH = 128
MAX_ID = 0xFFFFFFFF

FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3
FNV64_MASK = 0xFFFFFFFFFFFFFFFF


class MatchKind(IntEnum):
    """Key matching discipline; the integer value is the wire code."""
    EXACT = 0
    LPM = 1
    TERNARY = 2


class TableKind(Enum):
    """What kind of entity a table models."""
    MATCH_ACTION = "match_action"
    REGISTER = "register"
    PORT = "port"


_MATCH_NAMES = {"exact": MatchKind.EXACT, "lpm": MatchKind.LPM, "ternary": MatchKind.TERNARY}
_MATCH_TEXT = {kind: name for name, kind in _MATCH_NAMES.items()}


@dataclass(frozen=True)
class FieldSpec:
    """A key field or an action parameter."""
    field_id: int
    name: str
    bit_width: int
    match_kind: MatchKind | None = None

    @property
    def byte_width(self) -> int:
        return (self.bit_width + 7) // 8


@dataclass(frozen=True)
class ActionSpec:
    """An action a table entry may select, with its ordered parameters."""
    action_id: int
    name: str
    params: tuple[FieldSpec, ...] = ()


@dataclass(frozen=True)
class TableSchema:
    """Declarative description of one table."""
    table_id: int
    name: str
    capacity: int
    key_fields: tuple[FieldSpec, ...]
    actions: tuple[ActionSpec, ...]
    kind: TableKind = TableKind.MATCH_ACTION

    def key_field(self, field_id: int) -> FieldSpec | None:
        for spec in self.key_fields:
            if spec.field_id == field_id:
                return spec
        return None

    def key_field_by_name(self, name: str) -> FieldSpec | None:
        for spec in self.key_fields:
            if spec.name == name:
                return spec
        return None

    def action(self, action_id: int) -> ActionSpec | None:
        for spec in self.actions:
            if spec.action_id == action_id:
                return spec
        return None

    def action_by_name(self, name: str) -> ActionSpec | None:
        for spec in self.actions:
            if spec.name == name:
                return spec
        return None

    @property
    def has_ternary(self) -> bool:
        return any(f.match_kind is MatchKind.TERNARY for f in self.key_fields)

    @property
    def has_lpm(self) -> bool:
        return any(f.match_kind is MatchKind.LPM for f in self.key_fields)


@dataclass(frozen=True)
class ProgramSchema:
    """All tables of one program plus the digest of its canonical form."""
    program_name: str
    tables: tuple[TableSchema, ...] = ()
    schema_digest: int = 0

    @classmethod
    def build(cls, program_name: str, tables: tuple[TableSchema, ...] | list[TableSchema]):
        """Creates a schema with its digest filled in."""
        draft = cls(program_name, tuple(tables), 0)
        return cls(program_name, tuple(tables), compute_digest(draft))


# --- Serialization ---

def _field_document(spec: FieldSpec) -> dict[str, Any]:
    doc = {"id": spec.field_id, "name": spec.name, "bits": spec.bit_width}
    if spec.match_kind is not None:
        doc["match"] = _MATCH_TEXT[spec.match_kind]
    return doc


def schema_document(schema: ProgramSchema) -> dict[str, Any]:
    """Returns the schema as a plain JSON-compatible document."""
    return {
        "program": schema.program_name,
        "tables": [
            {
                "id": table.table_id,
                "name": table.name,
                "kind": table.kind.value,
                "capacity": table.capacity,
                "key": [_field_document(f) for f in table.key_fields],
                "actions": [
                    {
                        "id": action.action_id,
                        "name": action.name,
                        "params": [_field_document(p) for p in action.params],
                    }
                    for action in table.actions
                ],
            }
            for table in schema.tables
        ],
    }


def serialize_schema(schema: ProgramSchema) -> str:
    """Canonical form: sorted keys, no insignificant whitespace, arrays in declaration order."""
    return json.dumps(schema_document(schema), sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False)


def compute_digest(schema: ProgramSchema) -> int:
    """64-bit FNV-1a over the canonical serialization."""
    digest = FNV64_OFFSET
    for byte in serialize_schema(schema).encode("utf-8"):
        digest ^= byte
        digest = (digest * FNV64_PRIME) & FNV64_MASK
    return digest


# --- Parsing ---

def _require_object(value: Any, path: str, allowed: set[str], required: set[str]) -> dict:
    if not isinstance(value, dict):
        raise MalformedSchemaError(f"{path}: expected an object")
    unknown = set(value) - allowed
    if unknown:
        raise MalformedSchemaError(f"{path}: unknown key(s) {sorted(unknown)}")
    missing = required - set(value)
    if missing:
        raise MalformedSchemaError(f"{path}: missing key(s) {sorted(missing)}")
    return value


def _require_list(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise MalformedSchemaError(f"{path}: expected an array")
    return value


def _require_str(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise MalformedSchemaError(f"{path}: expected a string")
    if not value:
        raise InvalidSchemaError("must not be empty", path)
    return value


def _require_int(value: Any, path: str) -> int:
    # bool is an int subclass; a schema saying `true` for a width is a mistake.
    if not isinstance(value, int) or isinstance(value, bool):
        raise MalformedSchemaError(f"{path}: expected an integer")
    return value


def _parse_id(value: Any, path: str) -> int:
    ident = _require_int(value, path)
    if not 1 <= ident <= MAX_ID:
        raise InvalidSchemaError(f"id {ident} outside 1..{MAX_ID}", path)
    return ident


def _parse_field(doc: Any, path: str, is_key: bool) -> FieldSpec:
    allowed = {"id", "name", "bits", "match"} if is_key else {"id", "name", "bits"}
    obj = _require_object(doc, path, allowed, allowed)
    bits = _require_int(obj["bits"], f"{path}.bits")
    if not 1 <= bits <= MAX_BIT_WIDTH:
        raise InvalidSchemaError(f"bit width {bits} outside 1..{MAX_BIT_WIDTH}", f"{path}.bits")
    match_kind = None
    if is_key:
        match_text = obj["match"]
        if not isinstance(match_text, str) or match_text not in _MATCH_NAMES:
            raise MalformedSchemaError(
                f"{path}.match: expected one of {sorted(_MATCH_NAMES)}, got {match_text!r}"
            )
        match_kind = _MATCH_NAMES[match_text]
    return FieldSpec(
        field_id=_parse_id(obj["id"], f"{path}.id"),
        name=_require_str(obj["name"], f"{path}.name"),
        bit_width=bits,
        match_kind=match_kind,
    )


def _check_unique(items, attr: str, path: str, what: str):
    seen = set()
    for index, item in enumerate(items):
        value = getattr(item, attr)
        if value in seen:
            raise InvalidSchemaError(f"duplicate {what} {value!r}", f"{path}[{index}]")
        seen.add(value)


def _parse_action(doc: Any, path: str) -> ActionSpec:
    obj = _require_object(doc, path, {"id", "name", "params"}, {"id", "name", "params"})
    params = tuple(
        _parse_field(p, f"{path}.params[{i}]", is_key=False)
        for i, p in enumerate(_require_list(obj["params"], f"{path}.params"))
    )
    _check_unique(params, "field_id", f"{path}.params", "param id")
    _check_unique(params, "name", f"{path}.params", "param name")
    return ActionSpec(
        action_id=_parse_id(obj["id"], f"{path}.id"),
        name=_require_str(obj["name"], f"{path}.name"),
        params=params,
    )


def _check_kind(table: TableSchema, path: str):
    """Registers and ports must look like index/port-number tables."""
    if table.kind is TableKind.MATCH_ACTION:
        return
    single_exact = (
        len(table.key_fields) == 1 and table.key_fields[0].match_kind is MatchKind.EXACT
    )
    if not single_exact:
        raise InvalidSchemaError(
            f"{table.kind.value} table needs exactly one exact key field", f"{path}.key"
        )
    if table.kind is TableKind.REGISTER:
        if len(table.actions) != 1 or len(table.actions[0].params) != 1:
            raise InvalidSchemaError(
                "register table needs exactly one action with one param", f"{path}.actions"
            )


def _parse_table(doc: Any, path: str) -> TableSchema:
    keys = {"id", "name", "kind", "capacity", "key", "actions"}
    obj = _require_object(doc, path, keys, keys)
    try:
        kind = TableKind(obj["kind"])
    except ValueError:
        raise MalformedSchemaError(
            f"{path}.kind: expected one of {[k.value for k in TableKind]}, got {obj['kind']!r}"
        ) from None
    capacity = _require_int(obj["capacity"], f"{path}.capacity")
    if capacity < 1:
        raise InvalidSchemaError("capacity must be positive", f"{path}.capacity")
    key_fields = tuple(
        _parse_field(f, f"{path}.key[{i}]", is_key=True)
        for i, f in enumerate(_require_list(obj["key"], f"{path}.key"))
    )
    actions = tuple(
        _parse_action(a, f"{path}.actions[{i}]")
        for i, a in enumerate(_require_list(obj["actions"], f"{path}.actions"))
    )
    _check_unique(key_fields, "field_id", f"{path}.key", "field id")
    _check_unique(key_fields, "name", f"{path}.key", "field name")
    _check_unique(actions, "action_id", f"{path}.actions", "action id")
    _check_unique(actions, "name", f"{path}.actions", "action name")
    table = TableSchema(
        table_id=_parse_id(obj["id"], f"{path}.id"),
        name=_require_str(obj["name"], f"{path}.name"),
        capacity=capacity,
        key_fields=key_fields,
        actions=actions,
        kind=kind,
    )
    _check_kind(table, path)
    return table


def parse_schema(document: str) -> ProgramSchema:
    """Parses and validates a schema document."""
    try:
        raw = json.loads(document)
    except json.JSONDecodeError as e:
        raise MalformedSchemaError(f"line {e.lineno} column {e.colno}: {e.msg}") from e

    obj = _require_object(raw, "$", {"program", "tables"}, {"program", "tables"})
    program = _require_str(obj["program"], "$.program")
    tables = tuple(
        _parse_table(t, f"$.tables[{i}]")
        for i, t in enumerate(_require_list(obj["tables"], "$.tables"))
    )
    _check_unique(tables, "table_id", "$.tables", "table id")
    _check_unique(tables, "name", "$.tables", "table name")

    schema = ProgramSchema.build(program, tables)
    logger.debug(
        "Parsed schema '%s' with %d table(s), digest %016x",
        schema.program_name, len(schema.tables), schema.schema_digest,
    )
    return schema


def load_schema(path: str) -> ProgramSchema:
    """Reads and parses a schema file."""
    with open(path, encoding="utf-8") as handle:
        return parse_schema(handle.read())


def table_by_name(schema: ProgramSchema, name: str) -> TableSchema:
    for table in schema.tables:
        if table.name == name:
            return table
    raise NotFoundError(f"no table named {name!r} in program {schema.program_name!r}")


def table_by_id(schema: ProgramSchema, table_id: int) -> TableSchema:
    for table in schema.tables:
        if table.table_id == table_id:
            return table
    raise NotFoundError(f"no table with id {table_id} in program {schema.program_name!r}")
