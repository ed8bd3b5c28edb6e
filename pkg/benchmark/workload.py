"""
Deterministic benchmark workloads: unique INSERT entries for one table.
"""
import logging
import random

from controller.entries import build_entry
from runtime.schema import TableSchema
from runtime.wire import TableUpdate

logger = logging.getLogger(__name__)


def key_space(table: TableSchema) -> int:
    return 1 << sum(f.bit_width for f in table.key_fields)


def generate_workload(table: TableSchema, count: int, seed: int,
                      action_name: str = "permit") -> list[TableUpdate]:
    """Generates ``count`` INSERT updates with pairwise distinct keys.

    Key values are drawn uniformly per field; action params, if the action has any, are
    drawn the same way. The same seed always produces the same list.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    if count > table.capacity:
        raise ValueError(f"{count} entries exceed the capacity of {table.name!r} ({table.capacity})")
    if count > key_space(table):
        raise ValueError(f"{table.name!r} has fewer than {count} distinct keys")
    action = table.action_by_name(action_name)
    if action is None:
        raise ValueError(f"table {table.name!r} has no action {action_name!r}")

    rng = random.Random(seed)
    seen = set()
    updates = []
    while len(updates) < count:
        key = tuple(rng.getrandbits(f.bit_width) for f in table.key_fields)
        if key in seen:
            continue
        seen.add(key)
        params = {p.name: rng.getrandbits(p.bit_width) for p in action.params}
        key_values = {f.name: value for f, value in zip(table.key_fields, key)}
        updates.append(build_entry(table, key_values, action_name, params))

    logger.debug("Generated %d entries for '%s' (seed %d)", count, table.name, seed)
    return updates
