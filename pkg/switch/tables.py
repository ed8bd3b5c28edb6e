"""
Entry storage and lookup for a single table.

Entries are grouped by their combined key mask (tuple-space search): a lookup masks the
packet once per group and probes a dict, so exact tables cost one probe, LPM tables one probe
per distinct prefix length, and ternary tables one probe per distinct mask.
"""
import logging
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from runtime.errors import InvalidKeyError
from runtime.schema import MatchKind, TableSchema
from runtime.wire import MatchKey

logger = logging.getLogger(__name__)


class LookupResult(NamedTuple):
    action_id: int
    action_params: tuple[tuple[int, bytes], ...]


@dataclass(slots=True, eq=False)
class StoredEntry:
    key: MatchKey
    action_id: int
    action_params: tuple[tuple[int, bytes], ...]
    insertion_seq: int
    value_bits: int
    mask_bits: int
    rank: int

    def result(self) -> LookupResult:
        return LookupResult(self.action_id, self.action_params)


class TableStore:
    """Holds the canonical entries of one table.

    Keys handed to this class must already be canonical (``canonicalize_key``); capacity and
    existence rules are enforced by the caller, which decides the per-op status.
    """

    def __init__(self, schema: TableSchema):
        self.schema = schema
        self.entries: dict[MatchKey, StoredEntry] = {}
        self.next_seq = 0
        self._groups: dict[int, dict[int, list[StoredEntry]]] = {}
        self._ternary = schema.has_ternary

    def __len__(self):
        return len(self.entries)

    def get(self, key: MatchKey) -> StoredEntry | None:
        return self.entries.get(key)

    def _key_bits(self, key: MatchKey) -> tuple[int, int, int]:
        """Packs a canonical key into (value, mask, rank) over the concatenated key width."""
        value_bits = mask_bits = prefix_total = 0
        for spec, (_, value) in zip(self.schema.key_fields, key.fields):
            width = spec.bit_width
            number = int.from_bytes(value.value, "big")
            if spec.match_kind is MatchKind.LPM:
                mask = ((1 << value.prefix_len) - 1) << (width - value.prefix_len)
                prefix_total += value.prefix_len
            elif spec.match_kind is MatchKind.TERNARY:
                mask = int.from_bytes(value.mask, "big")
            else:
                mask = (1 << width) - 1
            value_bits = (value_bits << width) | number
            mask_bits = (mask_bits << width) | mask
        rank = key.priority if self._ternary else prefix_total
        return value_bits, mask_bits, rank

    def _link(self, entry: StoredEntry):
        self.entries[entry.key] = entry
        bucket = self._groups.setdefault(entry.mask_bits, {})
        bucket.setdefault(entry.value_bits, []).append(entry)

    def insert(self, key: MatchKey, action_id: int, action_params) -> StoredEntry:
        value_bits, mask_bits, rank = self._key_bits(key)
        entry = StoredEntry(key, action_id, tuple(action_params), self.next_seq,
                            value_bits, mask_bits, rank)
        self.next_seq += 1
        self._link(entry)
        return entry

    def restore(self, entry: StoredEntry):
        """Puts back a previously removed entry, keeping its insertion order."""
        self._link(entry)

    def modify(self, key: MatchKey, action_id: int, action_params):
        """Replaces action data only; key and insertion order are kept."""
        entry = self.entries[key]
        entry.action_id = action_id
        entry.action_params = tuple(action_params)

    def remove(self, key: MatchKey) -> StoredEntry:
        entry = self.entries.pop(key)
        bucket = self._groups[entry.mask_bits]
        remaining = [e for e in bucket[entry.value_bits] if e is not entry]
        if remaining:
            bucket[entry.value_bits] = remaining
        else:
            del bucket[entry.value_bits]
            if not bucket:
                del self._groups[entry.mask_bits]
        return entry

    def ordered(self) -> list[StoredEntry]:
        return sorted(self.entries.values(), key=lambda e: e.insertion_seq)

    def _packet_bits(self, packet_fields: Sequence[bytes]) -> int:
        fields = self.schema.key_fields
        if len(packet_fields) != len(fields):
            raise InvalidKeyError(
                f"table {self.schema.name!r} needs {len(fields)} packet value(s), "
                f"got {len(packet_fields)}"
            )
        packet = 0
        for spec, data in zip(fields, packet_fields):
            if len(data) != spec.byte_width:
                raise InvalidKeyError(
                    f"value for {spec.name!r} must be {spec.byte_width} byte(s), got {len(data)}"
                )
            number = int.from_bytes(data, "big")
            if number >> spec.bit_width:
                raise InvalidKeyError(f"value for {spec.name!r} exceeds {spec.bit_width} bits")
            packet = (packet << spec.bit_width) | number
        return packet

    def lookup(self, packet_fields: Sequence[bytes]) -> LookupResult | None:
        """Finds the winning entry for a packet.

        Ternary tables: highest priority, then earliest insertion. LPM tables: longest total
        prefix, then earliest insertion. Exact tables: the single equal key.
        """
        packet = self._packet_bits(packet_fields)
        best = None
        for mask, bucket in self._groups.items():
            candidates = bucket.get(packet & mask)
            if not candidates:
                continue
            for entry in candidates:
                if best is None or entry.rank > best.rank or (
                    entry.rank == best.rank and entry.insertion_seq < best.insertion_seq
                ):
                    best = entry
        return best.result() if best else None

    def snapshot(self) -> tuple:
        """Hashable image of the store, used to compare states."""
        return (
            self.next_seq,
            tuple(
                (e.insertion_seq, e.key, e.action_id, e.action_params) for e in self.ordered()
            ),
        )
