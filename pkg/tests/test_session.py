import asyncio

import pytest

from benchmark.workload import generate_workload
from controller.entries import build_entry, decode_values
from controller.session import connect
from runtime.errors import (
    ConnectFailedError,
    InvalidKeyError,
    SchemaMismatchError,
    TransportError,
)
from runtime.wire import Hello, Message, Notify, NotifyReason, Overall, decode, encode
from switch.server import TargetServer
from switch.state import TargetState
from utils.time_utils import now


def fw(table, src, dst, action="permit"):
    return build_entry(table, {"src_ip": src, "dst_ip": dst}, action)


async def notifications(session) -> asyncio.Queue:
    queue: asyncio.Queue[Notify] = asyncio.Queue()
    await session.subscribe(queue.put_nowait)
    return queue


async def test_connect_downloads_schema(session, firewall_schema):
    assert session.schema == firewall_schema
    # Hello and GetSchema used the first two ids.
    assert session.next_request_id == 3


async def test_connect_to_closed_port(firewall_state):
    async with TargetServer(firewall_state) as server:
        endpoint = server.endpoint
    with pytest.raises(ConnectFailedError):
        await connect(endpoint, timeout=1.0)


async def test_connect_expecting_another_program(target):
    with pytest.raises(SchemaMismatchError):
        await connect(target.endpoint, "other")


async def test_single_write(session, firewall_table, firewall_state):
    timed = await session.write_updates([fw(firewall_table, "10.0.0.1", "10.0.0.2")])
    assert timed.report.overall is Overall.OK
    assert timed.elapsed >= 0
    assert firewall_state.occupancy(1) == 1


async def test_request_ids_increase(session, firewall_table):
    first = session.next_request_id
    await session.write_updates([fw(firewall_table, 1, 1)])
    await session.read("firewall_entries")
    assert session.next_request_id == first + 2


async def test_sent_frames_carry_increasing_request_ids(session, firewall_table, monkeypatch):
    sent = []
    write = session._writer.write

    def capture(data):
        sent.append(bytes(data))
        write(data)

    monkeypatch.setattr(session._writer, "write", capture)
    workload = generate_workload(firewall_table, 30, seed=9)
    await asyncio.gather(
        session.insert_all(workload[:15], batch_size=4),
        session.insert_all(workload[15:], batch_size=6),
        session.read("firewall_entries"),
        session.send_test_packet("firewall_entries", {"src_ip": 1, "dst_ip": 1}),
    )
    ids = [decode(frame).request_id for frame in sent]
    assert len(ids) == 4 + 3 + 1 + 1
    assert all(a < b for a, b in zip(ids, ids[1:]))
    assert ids[-1] == session.next_request_id - 1


async def test_elapsed_times_fit_in_wall_clock(session, firewall_table):
    workload = generate_workload(firewall_table, 200, seed=8)
    started = now()
    reports = await session.insert_all(workload, batch_size=7)
    wall = now() - started
    assert len(reports) == 29
    assert all(r.elapsed > 0 for r in reports)
    assert sum(r.elapsed for r in reports) <= wall


async def test_insert_all_splits_into_batches(session, firewall_table):
    workload = generate_workload(firewall_table, 10, seed=1)
    reports = await session.insert_all(workload, batch_size=3)
    assert [len(r.report.per_op) for r in reports] == [3, 3, 3, 1]
    assert all(r.report.ok for r in reports)
    assert await session.read("firewall_entries") == workload


async def test_insert_all_stops_on_failure(session, firewall_table):
    workload = generate_workload(firewall_table, 9, seed=2)
    workload[4] = workload[0]
    reports = await session.insert_all(workload, batch_size=3, stop_on_failure=True)
    assert len(reports) == 2
    assert reports[1].report.overall is Overall.PARTIAL


async def test_batch_size_does_not_change_final_state(session, firewall_table):
    workload = generate_workload(firewall_table, 50, seed=3)
    contents = []
    for batch_size in (1, 7, 50):
        await session.clear_table("firewall_entries")
        await session.insert_all(workload, batch_size)
        contents.append(await session.read("firewall_entries"))
    assert contents[0] == contents[1] == contents[2] == workload


async def test_read_single_key(session, firewall_table):
    await session.write_updates([fw(firewall_table, 1, 2), fw(firewall_table, 3, 4)])
    [entry] = await session.read("firewall_entries", {"src_ip": 3, "dst_ip": 4})
    assert entry == fw(firewall_table, 3, 4)
    assert await session.read("firewall_entries", {"src_ip": 5, "dst_ip": 6}) == []


async def test_unknown_table(session):
    with pytest.raises(SchemaMismatchError):
        await session.read("nonexistent")


async def test_clear_table(session, firewall_table):
    await session.insert_all(generate_workload(firewall_table, 10, seed=4), batch_size=5)
    assert await session.clear_table("firewall_entries") == 10
    assert await session.read("firewall_entries") == []
    assert await session.clear_table("firewall_entries") == 0


async def test_write_after_target_closed(session, target, firewall_table):
    await target.close()
    with pytest.raises(TransportError):
        await session.write_updates([fw(firewall_table, 1, 1)])
    assert session.closed


async def test_write_after_session_closed(session, firewall_table):
    await session.close()
    with pytest.raises(TransportError):
        await session.write_updates([fw(firewall_table, 1, 1)])


async def test_garbage_closes_only_that_connection(session, target, firewall_table):
    reader, writer = await asyncio.open_connection(*target.address)
    writer.write(b"this is not a frame at all")
    await writer.drain()
    assert await asyncio.wait_for(reader.read(), 1.0) == b""
    writer.close()

    timed = await session.write_updates([fw(firewall_table, 1, 1)])
    assert timed.report.ok


async def test_concurrent_controllers(target, session, firewall_table, firewall_state):
    workload = generate_workload(firewall_table, 200, seed=5)
    async with await connect(target.endpoint, "firewall", name="second") as other:
        await asyncio.gather(
            session.insert_all(workload[:100], batch_size=10),
            other.insert_all(workload[100:], batch_size=10),
        )
    assert firewall_state.occupancy(1) == 200


async def test_response_delay_is_a_lower_bound(firewall_schema, firewall_table):
    async with TargetServer(TargetState(firewall_schema, response_delay=0.002)) as server:
        async with await connect(server.endpoint) as session:
            reports = await session.insert_all(
                generate_workload(firewall_table, 5, seed=6), batch_size=1
            )
    assert all(r.elapsed >= 0.002 for r in reports)


# --- Notifications ---

async def test_miss_is_notified(session, firewall_table):
    queue = await notifications(session)
    await session.send_test_packet("firewall_entries", {"src_ip": "10.0.0.1", "dst_ip": "10.0.0.2"})
    notify = await asyncio.wait_for(queue.get(), 1.0)
    assert notify.table_id == 1
    assert notify.reason is NotifyReason.LOOKUP_MISS
    assert decode_values(firewall_table, notify.values) == {
        "src_ip": 0x0A000001, "dst_ip": 0x0A000002,
    }


async def test_hit_is_not_notified(session, firewall_table):
    await session.write_updates([fw(firewall_table, 1, 2)])
    queue = await notifications(session)
    await session.send_test_packet("firewall_entries", {"src_ip": 1, "dst_ip": 2})
    # Notifications arrive in order, so the first one received must be the later miss.
    await session.send_test_packet("firewall_entries", {"src_ip": 9, "dst_ip": 9})
    notify = await asyncio.wait_for(queue.get(), 1.0)
    assert decode_values(firewall_table, notify.values) == {"src_ip": 9, "dst_ip": 9}


async def test_each_subscriber_is_notified_once(target, session, firewall_table):
    async with await connect(target.endpoint, "firewall", name="second") as other:
        queues = [await notifications(session), await notifications(other)]
        await session.send_test_packet("firewall_entries", {"src_ip": 5, "dst_ip": 6})
        for queue in queues:
            notify = await asyncio.wait_for(queue.get(), 1.0)
            assert other.decode_notify(notify) == ("firewall_entries", {"src_ip": 5, "dst_ip": 6})
        # Round trips on both sessions flush anything the target queued before them.
        await session.read("firewall_entries")
        await other.read("firewall_entries")
        await asyncio.sleep(0.05)
        assert all(queue.empty() for queue in queues)


async def test_stalled_peer_does_not_hold_up_acks(firewall_schema, firewall_table):
    state = TargetState(firewall_schema)
    async with TargetServer(state, notify_backlog=50) as server:
        # A peer that says Hello and then never reads what it is sent.
        _, stalled = await asyncio.open_connection(*server.address)
        stalled.write(encode(Message(1, Hello("stalled"))))
        await stalled.drain()
        async with await connect(server.endpoint, "firewall") as session:
            while len(state.subscribers) < 2:
                await asyncio.sleep(0.01)
            for i in range(2000):
                await session.send_test_packet("firewall_entries", {"src_ip": i, "dst_ip": i})
            timed = await asyncio.wait_for(session.write_updates([fw(firewall_table, 1, 2)]), 1.0)
            assert timed.report.ok
        stalled.close()


async def test_slow_handler_does_not_hold_up_writes(session, firewall_table):
    started, release = asyncio.Event(), asyncio.Event()

    async def slow(notify: Notify):
        started.set()
        await release.wait()

    subscription = await session.subscribe(slow)
    await session.send_test_packet("firewall_entries", {"src_ip": 7, "dst_ip": 7})
    await asyncio.wait_for(started.wait(), 1.0)
    for i in range(5):
        timed = await asyncio.wait_for(session.write_updates([fw(firewall_table, i, i)]), 1.0)
        assert timed.report.ok
    assert subscription.delivered == 0

    release.set()
    await subscription.cancel()
    assert subscription.delivered == 1


async def test_learning_firewall(session, firewall_table):
    learned = asyncio.Event()

    async def learn(notify: Notify):
        table_name, values = session.decode_notify(notify)
        assert table_name == "firewall_entries"
        update = fw(session.table(table_name), values["src_ip"], values["dst_ip"])
        report = (await session.write_updates([update])).report
        assert report.ok
        learned.set()

    subscription = await session.subscribe(learn)
    await session.send_test_packet("firewall_entries", {"src_ip": "10.9.9.9", "dst_ip": "10.0.0.1"})
    await asyncio.wait_for(learned.wait(), 1.0)
    assert await session.read("firewall_entries") == [fw(firewall_table, "10.9.9.9", "10.0.0.1")]
    assert subscription.delivered == 1

    await subscription.cancel()
    assert not subscription.active
    assert session.subscriptions == []


async def test_notify_for_unknown_table(session):
    with pytest.raises(SchemaMismatchError):
        session.decode_notify(Notify(42, ((1, b"\x01"),), NotifyReason.LOOKUP_MISS))


async def test_subscription_ends_with_session(session):
    subscription = await session.subscribe(lambda notify: None)
    await session.close()
    await asyncio.wait_for(subscription.wait_closed(), 1.0)
    assert subscription.error is None
    with pytest.raises(TransportError):
        await session.subscribe(lambda notify: None)


# --- Registers and ports ---

async def test_registers(router_session):
    assert await router_session.read_register("packet_counters", 5) == 0
    report = await router_session.write_register("packet_counters", 5, 99)
    assert report.ok
    assert await router_session.read_register("packet_counters", 5) == 99
    with pytest.raises(InvalidKeyError):
        await router_session.read_register("packet_counters", 512)
    with pytest.raises(SchemaMismatchError):
        await router_session.read_register("acl", 0)


async def test_ports(router_session):
    params = {"speed_gbps": 100, "enabled": 1}
    assert (await router_session.configure_port("ports", 1, "configure", params)).ok
    params["speed_gbps"] = 40
    assert (await router_session.configure_port("ports", 1, "configure", params)).ok

    ports = await router_session.read_ports("ports")
    assert list(ports) == [1]
    assert ports[1].action_params[0][1] == (40).to_bytes(2, "big")

    assert (await router_session.remove_port("ports", 1)).ok
    assert await router_session.read_ports("ports") == {}
    with pytest.raises(SchemaMismatchError):
        await router_session.configure_port("acl", 1, "configure", params)


@pytest.mark.slow
async def test_bulk_insert_over_the_wire(session, firewall_table, firewall_state):
    workload = generate_workload(firewall_table, 30000, seed=7)
    reports = await session.insert_all(workload, batch_size=1000)
    assert len(reports) == 30
    assert all(r.report.ok for r in reports)
    assert firewall_state.occupancy(1) == 30000
    assert await session.read("firewall_entries") == workload
