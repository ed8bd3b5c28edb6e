import pytest

from controller.entries import (
    build_delete,
    build_entry,
    build_modify,
    build_register_write,
    build_test_packet,
    decode_values,
    delete_for,
    value_to_int,
)
from runtime.errors import InvalidActionError, InvalidKeyError, ValueOverflowError
from runtime.schema import MatchKind, table_by_name
from runtime.wire import (
    MatchValue,
    Message,
    UpdateOp,
    Write,
    WriteBatch,
    canonicalize_key,
    encode,
)


def test_firewall_permit_entry(firewall_table):
    update = build_entry(firewall_table, {"src_ip": "10.0.0.1", "dst_ip": "10.0.0.2"}, "permit")
    assert update.op is UpdateOp.INSERT
    assert update.table_id == 1
    assert update.action_id == 1
    assert update.action_params == ()
    assert [v for _, v in update.key.fields] == [
        MatchValue.exact(bytes.fromhex("0A000001")),
        MatchValue.exact(bytes.fromhex("0A000002")),
    ]
    assert canonicalize_key(update.key, firewall_table) == update.key


def test_value_forms_agree(firewall_table):
    spec = firewall_table.key_fields[0]
    assert value_to_int("10.0.0.1", spec) == value_to_int(0x0A000001, spec)
    assert value_to_int(b"\x0a\x00\x00\x01", spec) == 0x0A000001
    assert value_to_int("0x0a000001", spec) == 0x0A000001


def test_forty_bit_value_overflows(firewall_table):
    with pytest.raises(ValueOverflowError):
        build_entry(firewall_table, {"src_ip": 1 << 39, "dst_ip": 1}, "permit")


def test_unknown_action(firewall_table):
    with pytest.raises(InvalidActionError):
        build_entry(firewall_table, {"src_ip": 1, "dst_ip": 2}, "reject")


def test_missing_and_unknown_key_fields(firewall_table):
    with pytest.raises(InvalidKeyError):
        build_entry(firewall_table, {"src_ip": 1}, "permit")
    with pytest.raises(InvalidKeyError):
        build_entry(firewall_table, {"src_ip": 1, "dst_ip": 2, "port": 3}, "permit")


@pytest.mark.parametrize("src", [True, "10.0.0.300", "not-an-address", 1.5, None],
                         ids=["bool", "bad-octet", "text", "float", "none"])
def test_unreadable_key_values(firewall_table, src):
    with pytest.raises(InvalidKeyError):
        build_entry(firewall_table, {"src_ip": src, "dst_ip": 2}, "permit")
    with pytest.raises(InvalidKeyError):
        build_test_packet(firewall_table, {"src_ip": src, "dst_ip": 2})


def test_unreadable_param_values(router_schema):
    routes = table_by_name(router_schema, "ipv4_routes")
    for mac in ["00:11:22:33:44", False, 3.0]:
        with pytest.raises(InvalidActionError):
            build_entry(routes, {"dst_ip": "10.0.0.0/8"}, "forward", {"port": 1, "next_hop_mac": mac})
    with pytest.raises(ValueOverflowError):
        build_entry(routes, {"dst_ip": "10.0.0.0/8"}, "forward", {"port": 512, "next_hop_mac": 0})


def test_lpm_forms(router_schema):
    routes = table_by_name(router_schema, "ipv4_routes")
    params = {"port": 3, "next_hop_mac": "00:11:22:33:44:55"}
    by_text = build_entry(routes, {"dst_ip": "10.1.2.3/16"}, "forward", params)
    by_tuple = build_entry(routes, {"dst_ip": (0x0A010203, 16)}, "forward", params)
    assert by_text == by_tuple
    value = by_text.key.fields[0][1]
    assert value.match_kind is MatchKind.LPM
    assert value.value == bytes.fromhex("0A010000")
    assert value.prefix_len == 16
    assert by_text.action_params == ((1, b"\x00\x03"), (2, bytes.fromhex("001122334455")))

    host = build_entry(routes, {"dst_ip": "10.1.2.3"}, "drop")
    assert host.key.fields[0][1].prefix_len == 32
    with pytest.raises(InvalidKeyError):
        build_entry(routes, {"dst_ip": (0x0A000000, 33)}, "drop")
    for bad in ["10.0.0.0/x", "10.0.0.300/8", (0x0A000000, "8")]:
        with pytest.raises(InvalidKeyError):
            build_entry(routes, {"dst_ip": bad}, "drop")


def test_ternary_with_priority(router_schema):
    acl = table_by_name(router_schema, "acl")
    update = build_entry(acl, {"src_ip": ("10.0.0.7", "255.255.255.0"), "dst_port": 443,
                               "protocol": 6}, "block", priority=20)
    src, port, proto = (v for _, v in update.key.fields)
    assert src == MatchValue.ternary(bytes.fromhex("0A000000"), bytes.fromhex("FFFFFF00"))
    assert port == MatchValue.ternary(b"\x01\xbb", b"\xff\xff")
    assert proto == MatchValue.exact(b"\x06")
    assert update.key.priority == 20


def test_modify_and_delete_builders(firewall_table):
    key_values = {"src_ip": "10.0.0.1", "dst_ip": "10.0.0.2"}
    insert = build_entry(firewall_table, key_values, "permit")
    modify = build_modify(firewall_table, key_values, "deny")
    delete = build_delete(firewall_table, key_values)
    assert modify.op is UpdateOp.MODIFY and modify.action_id == 2
    assert delete.op is UpdateOp.DELETE and delete.action_id == 0 and not delete.action_params
    assert modify.key == delete.key == insert.key
    assert delete_for(insert) == delete
    encode(Message(1, Write(WriteBatch((insert, modify, delete)))))


def test_register_write(router_schema):
    counters = table_by_name(router_schema, "packet_counters")
    update = build_register_write(counters, 7, 1000)
    assert update.key.fields[0][1].value == (7).to_bytes(4, "big")
    assert update.action_params == ((1, (1000).to_bytes(8, "big")),)
    with pytest.raises(InvalidKeyError):
        build_register_write(counters, 512, 1)


def test_test_packet_values(firewall_table):
    values = build_test_packet(firewall_table, {"dst_ip": "10.0.0.2", "src_ip": "10.0.0.1"})
    assert values == ((1, bytes.fromhex("0A000001")), (2, bytes.fromhex("0A000002")))
    assert decode_values(firewall_table, values) == {"src_ip": 0x0A000001, "dst_ip": 0x0A000002}
    with pytest.raises(InvalidKeyError):
        build_test_packet(firewall_table, {"src_ip": 1})
