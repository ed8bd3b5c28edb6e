"""
The simulated switch state: one store per table, write/read/test-packet handling and
lookup-miss notifications.
"""
import logging
from typing import Protocol, Sequence

from runtime.errors import InvalidActionError, InvalidKeyError, SchemaMismatchError
from runtime.schema import ProgramSchema, TableKind
from runtime.wire import (
    MatchKey,
    Message,
    Notify,
    NotifyReason,
    OpStatus,
    Status,
    TableUpdate,
    UpdateOp,
    WriteBatch,
    WriteReport,
    canonicalize_key,
    canonicalize_params,
)
from switch.tables import LookupResult, StoredEntry, TableStore

logger = logging.getLogger(__name__)

ROLLED_BACK = "rolled back"


class Subscriber(Protocol):
    """Anything that can take an unsolicited message without blocking."""

    def notify(self, message: Message) -> None:
        ...


def _register_index(key: MatchKey) -> int:
    return int.from_bytes(key.fields[0][1].value, "big")


class TargetState:
    """Per-table entry stores plus the set of notification subscribers."""

    def __init__(self, schema: ProgramSchema, response_delay: float = 0.0):
        if response_delay < 0:
            raise ValueError("response_delay must be non-negative")
        self.schema = schema
        self.stores: dict[int, TableStore] = {t.table_id: TableStore(t) for t in schema.tables}
        self.subscribers: set[Subscriber] = set()
        self.response_delay = response_delay

    def store(self, table_id: int) -> TableStore:
        try:
            return self.stores[table_id]
        except KeyError:
            raise SchemaMismatchError(f"unknown table id {table_id}") from None

    def occupancy(self, table_id: int) -> int:
        return len(self.store(table_id))

    def snapshot(self) -> dict[int, tuple]:
        return {table_id: store.snapshot() for table_id, store in self.stores.items()}

    # --- Writes ---

    def apply_write(self, batch: WriteBatch) -> WriteReport:
        """Applies a batch in order.

        Non-atomic batches skip failing updates and keep going. Atomic batches are rolled
        back entirely if any update fails, including the insertion counters.
        """
        undo: list | None = [] if batch.atomic else None
        seq_marks = {tid: s.next_seq for tid, s in self.stores.items()} if batch.atomic else None

        statuses = [self._apply_update(update, undo) for update in batch.updates]
        failed = any(not s.ok for s in statuses)

        if batch.atomic and failed:
            for step in reversed(undo):
                step()
            for table_id, next_seq in seq_marks.items():
                self.stores[table_id].next_seq = next_seq
            statuses = [OpStatus(Status.OK, ROLLED_BACK) if s.ok else s for s in statuses]
            logger.debug("Atomic batch of %d rolled back", len(statuses))

        return WriteReport.from_statuses(statuses, batch.atomic)

    def _apply_update(self, update: TableUpdate, undo: list | None) -> OpStatus:
        store = self.stores.get(update.table_id)
        if store is None:
            return OpStatus(Status.SCHEMA_MISMATCH, f"unknown table id {update.table_id}")
        table = store.schema
        try:
            key = canonicalize_key(update.key, table)
        except InvalidKeyError as e:
            return OpStatus(Status.INVALID_KEY, e.message)

        is_register = table.kind is TableKind.REGISTER
        if is_register and _register_index(key) >= table.capacity:
            return OpStatus(Status.INVALID_KEY, f"register index outside 0..{table.capacity - 1}")

        existing = store.get(key)
        if update.op is UpdateOp.DELETE:
            if existing is None:
                # Resetting an unwritten register cell is a no-op.
                if is_register:
                    return OpStatus(Status.OK)
                return OpStatus(Status.NOT_FOUND, "no entry with this key")
            store.remove(key)
            if undo is not None:
                undo.append(lambda: store.restore(existing))
            return OpStatus(Status.OK)

        action = table.action(update.action_id)
        if action is None:
            return OpStatus(Status.INVALID_ACTION, f"unknown action id {update.action_id}")
        try:
            params = canonicalize_params(update.action_params, action)
        except InvalidActionError as e:
            return OpStatus(Status.INVALID_ACTION, e.message)

        if update.op is UpdateOp.INSERT and not (is_register and existing is not None):
            if existing is not None:
                return OpStatus(Status.ALREADY_EXISTS, "entry with this key exists")
            if len(store) >= table.capacity:
                return OpStatus(Status.TABLE_FULL, f"table holds {table.capacity} entries")
            store.insert(key, action.action_id, params)
            if undo is not None:
                undo.append(lambda: store.remove(key))
            return OpStatus(Status.OK)

        # MODIFY, or a register write to an already written cell.
        if existing is None:
            if is_register:
                store.insert(key, action.action_id, params)
                if undo is not None:
                    undo.append(lambda: store.remove(key))
                return OpStatus(Status.OK)
            return OpStatus(Status.NOT_FOUND, "no entry with this key")
        old_action, old_params = existing.action_id, existing.action_params
        store.modify(key, action.action_id, params)
        if undo is not None:
            undo.append(lambda: store.modify(key, old_action, old_params))
        return OpStatus(Status.OK)

    # --- Reads ---

    @staticmethod
    def _as_update(table_id: int, entry: StoredEntry) -> TableUpdate:
        return TableUpdate(UpdateOp.INSERT, table_id, entry.key, entry.action_id,
                           entry.action_params)

    def read_entries(self, table_id: int, key: MatchKey | None = None) -> list[TableUpdate]:
        """All entries in insertion order, or the one entry stored under ``key``."""
        store = self.store(table_id)
        if key is None:
            return [self._as_update(table_id, e) for e in store.ordered()]

        table = store.schema
        key = canonicalize_key(key, table)
        entry = store.get(key)
        if entry is not None:
            return [self._as_update(table_id, entry)]
        if table.kind is TableKind.REGISTER:
            if _register_index(key) >= table.capacity:
                raise InvalidKeyError(f"register index outside 0..{table.capacity - 1}")
            action = table.actions[0]
            zero = tuple((p.field_id, bytes(p.byte_width)) for p in action.params)
            return [TableUpdate(UpdateOp.INSERT, table_id, key, action.action_id, zero)]
        return []

    # --- Packets ---

    def packet_fields(self, table_id: int, values: Sequence[tuple[int, bytes]]) -> list[bytes]:
        table = self.store(table_id).schema
        by_id = dict(values)
        if len(by_id) != len(values) or set(by_id) != {f.field_id for f in table.key_fields}:
            raise InvalidKeyError(f"packet fields do not match the key of {table.name!r}")
        return [by_id[f.field_id] for f in table.key_fields]

    def lookup(self, table_id: int, packet_fields: Sequence[bytes]) -> LookupResult | None:
        return self.store(table_id).lookup(packet_fields)

    def handle_test_packet(
        self, table_id: int, packet_fields: Sequence[bytes]
    ) -> LookupResult | None:
        """Looks a packet up; a miss is announced to every subscriber."""
        result = self.lookup(table_id, packet_fields)
        if result is None and self.subscribers:
            table = self.stores[table_id].schema
            values = tuple(
                (spec.field_id, bytes(data)) for spec, data in zip(table.key_fields, packet_fields)
            )
            message = Message(0, Notify(table_id, values, NotifyReason.LOOKUP_MISS))
            for subscriber in list(self.subscribers):
                subscriber.notify(message)
        return result

    def add_subscriber(self, subscriber: Subscriber):
        self.subscribers.add(subscriber)

    def remove_subscriber(self, subscriber: Subscriber):
        self.subscribers.discard(subscriber)
