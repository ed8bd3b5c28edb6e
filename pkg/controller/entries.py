"""
Builders that turn names and friendly values into canonical table updates.

Key values may be ints, big-endian bytes or strings (IPv4/IPv6, MAC, hex, decimal).
LPM fields take ``(value, prefix_len)`` or ``"a.b.c.d/n"``; ternary fields take
``(value, mask)``.
"""
from typing import Any, Mapping

from runtime.errors import (
    InvalidActionError,
    InvalidKeyError,
    RuntimeControlError,
    ValueOverflowError,
)
from runtime.schema import FieldSpec, MatchKind, TableKind, TableSchema
from runtime.wire import MatchKey, MatchValue, TableUpdate, UpdateOp, canonicalize_key
from utils.net_utils import split_prefix, text_to_int


def value_to_int(value: Any, spec: FieldSpec,
                 error: type[RuntimeControlError] = InvalidKeyError) -> int:
    """Converts one friendly value and checks it fits the field.

    Values that cannot be read raise ``error``: InvalidKeyError for key and packet fields,
    InvalidActionError for action params. Values that are too wide raise ValueOverflowError.
    """
    if isinstance(value, bool):
        raise error(f"boolean is not a valid value for {spec.name!r}")
    if isinstance(value, int):
        number = value
    elif isinstance(value, (bytes, bytearray)):
        number = int.from_bytes(value, "big")
    elif isinstance(value, str):
        try:
            number = text_to_int(value)
        except ValueError as e:
            raise error(f"bad value for {spec.name!r}: {e}") from e
    else:
        raise error(f"unsupported value type {type(value).__name__} for {spec.name!r}")
    if number < 0 or number >> spec.bit_width:
        raise ValueOverflowError(f"value {value!r} does not fit {spec.bit_width}-bit {spec.name!r}")
    return number


def to_bytes(value: Any, spec: FieldSpec,
             error: type[RuntimeControlError] = InvalidKeyError) -> bytes:
    return value_to_int(value, spec, error).to_bytes(spec.byte_width, "big")


def _match_value(spec: FieldSpec, value: Any) -> MatchValue:
    if spec.match_kind is MatchKind.LPM:
        if isinstance(value, str) and "/" in value:
            try:
                number, prefix_len = split_prefix(value)
            except ValueError as e:
                raise InvalidKeyError(f"bad prefix for {spec.name!r}: {e}") from e
        elif isinstance(value, tuple) and len(value) == 2:
            number, prefix_len = value_to_int(value[0], spec), value[1]
        else:
            number, prefix_len = value_to_int(value, spec), spec.bit_width
        if number >> spec.bit_width:
            raise ValueOverflowError(f"value for {spec.name!r} exceeds {spec.bit_width} bits")
        if isinstance(prefix_len, bool) or not isinstance(prefix_len, int):
            raise InvalidKeyError(f"prefix_len for {spec.name!r} must be an int")
        if not 0 <= prefix_len <= spec.bit_width:
            raise InvalidKeyError(f"prefix_len {prefix_len} outside 0..{spec.bit_width}")
        return MatchValue.lpm(number.to_bytes(spec.byte_width, "big"), prefix_len)
    if spec.match_kind is MatchKind.TERNARY:
        if isinstance(value, tuple) and len(value) == 2:
            number, mask = value_to_int(value[0], spec), value_to_int(value[1], spec)
        else:
            number, mask = value_to_int(value, spec), (1 << spec.bit_width) - 1
        return MatchValue.ternary((number & mask).to_bytes(spec.byte_width, "big"),
                                  mask.to_bytes(spec.byte_width, "big"))
    return MatchValue.exact(to_bytes(value, spec))


def build_key(table: TableSchema, key_values: Mapping[str, Any], priority: int = 0) -> MatchKey:
    """Builds a canonical key from values given by field name."""
    unknown = set(key_values) - {f.name for f in table.key_fields}
    if unknown:
        raise InvalidKeyError(f"unknown key field(s) {sorted(unknown)} for {table.name!r}")
    fields = []
    for spec in table.key_fields:
        if spec.name not in key_values:
            raise InvalidKeyError(f"missing key field {spec.name!r} for {table.name!r}")
        fields.append((spec.field_id, _match_value(spec, key_values[spec.name])))
    return canonicalize_key(MatchKey(tuple(fields), priority), table)


def build_params(table: TableSchema, action_name: str,
                 params: Mapping[str, Any] | None = None) -> tuple[int, tuple]:
    """Resolves an action by name; returns (action_id, canonical params)."""
    action = table.action_by_name(action_name)
    if action is None:
        raise InvalidActionError(f"table {table.name!r} has no action {action_name!r}")
    params = params or {}
    unknown = set(params) - {p.name for p in action.params}
    if unknown:
        raise InvalidActionError(f"unknown param(s) {sorted(unknown)} for {action_name!r}")
    missing = [p.name for p in action.params if p.name not in params]
    if missing:
        raise InvalidActionError(f"missing param(s) {missing} for {action_name!r}")
    return action.action_id, tuple(
        (spec.field_id, to_bytes(params[spec.name], spec, InvalidActionError))
        for spec in action.params
    )


def build_entry(table: TableSchema, key_values: Mapping[str, Any], action_name: str,
                params: Mapping[str, Any] | None = None, *, priority: int = 0) -> TableUpdate:
    """INSERT update for a new entry."""
    key = build_key(table, key_values, priority)
    action_id, action_params = build_params(table, action_name, params)
    return TableUpdate(UpdateOp.INSERT, table.table_id, key, action_id, action_params)


def build_modify(table: TableSchema, key_values: Mapping[str, Any], action_name: str,
                 params: Mapping[str, Any] | None = None, *, priority: int = 0) -> TableUpdate:
    """MODIFY update replacing an entry's action data."""
    key = build_key(table, key_values, priority)
    action_id, action_params = build_params(table, action_name, params)
    return TableUpdate(UpdateOp.MODIFY, table.table_id, key, action_id, action_params)


def build_delete(table: TableSchema, key_values: Mapping[str, Any], *,
                 priority: int = 0) -> TableUpdate:
    return TableUpdate(UpdateOp.DELETE, table.table_id, build_key(table, key_values, priority))


def delete_for(entry: TableUpdate) -> TableUpdate:
    """DELETE for an entry as returned by a read."""
    return TableUpdate(UpdateOp.DELETE, entry.table_id, entry.key)


def build_register_write(table: TableSchema, index: int, value: Any) -> TableUpdate:
    """Writes one register cell."""
    if table.kind is not TableKind.REGISTER:
        raise InvalidKeyError(f"table {table.name!r} is not a register")
    if not 0 <= index < table.capacity:
        raise InvalidKeyError(f"register index {index} outside 0..{table.capacity - 1}")
    action = table.actions[0]
    index_field = table.key_fields[0]
    return build_entry(table, {index_field.name: index}, action.name,
                       {action.params[0].name: value})


def build_test_packet(table: TableSchema,
                      values: Mapping[str, Any]) -> tuple[tuple[int, bytes], ...]:
    """Packet field values, one per key field, at schema width."""
    unknown = set(values) - {f.name for f in table.key_fields}
    if unknown:
        raise InvalidKeyError(f"unknown key field(s) {sorted(unknown)} for {table.name!r}")
    missing = [f.name for f in table.key_fields if f.name not in values]
    if missing:
        raise InvalidKeyError(f"missing packet field(s) {missing} for {table.name!r}")
    return tuple((spec.field_id, to_bytes(values[spec.name], spec)) for spec in table.key_fields)


def decode_values(table: TableSchema, values) -> dict[str, int]:
    """Maps (field_id, bytes) pairs back to {field name: int}."""
    names = {f.field_id: f.name for f in table.key_fields}
    return {names.get(fid, str(fid)): int.from_bytes(data, "big") for fid, data in values}
