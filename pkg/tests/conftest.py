"""Shared fixtures: schemas, an in-process target and a connected session."""
import random
from pathlib import Path

import pytest

from controller.session import connect
from runtime.schema import load_schema, table_by_name
from switch.server import TargetServer
from switch.state import TargetState

SCHEMA_DIR = Path(__file__).resolve().parent.parent / "schemas"
FIREWALL_SCHEMA = SCHEMA_DIR / "firewall.json"
ROUTER_SCHEMA = SCHEMA_DIR / "router.json"


@pytest.fixture(scope="session")
def firewall_schema():
    return load_schema(str(FIREWALL_SCHEMA))


@pytest.fixture(scope="session")
def router_schema():
    return load_schema(str(ROUTER_SCHEMA))


@pytest.fixture
def firewall_table(firewall_schema):
    return table_by_name(firewall_schema, "firewall_entries")


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture
def firewall_state(firewall_schema):
    return TargetState(firewall_schema)


@pytest.fixture
async def target(firewall_state):
    async with TargetServer(firewall_state) as server:
        yield server


@pytest.fixture
async def session(target):
    s = await connect(target.endpoint, "firewall", name="test-controller")
    yield s
    await s.close()


@pytest.fixture
async def router_target(router_schema):
    async with TargetServer(TargetState(router_schema)) as server:
        yield server


@pytest.fixture
async def router_session(router_target):
    s = await connect(router_target.endpoint, "router")
    yield s
    await s.close()
