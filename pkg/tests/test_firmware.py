"""Firmware graph loading, inventory handling, and fact emission tests."""

from __future__ import annotations

from pathlib import Path

import pytest

from firmgraph.datalog import parse_program
from firmgraph.errors import SchemaError
from firmgraph.firmware import (
    DuplicateBinaryError,
    MalformedLineError,
    SanitationCollisionError,
    UnknownLinkTypeError,
    binary_term,
    emit_topology_facts,
    load_firmware_graph,
    load_version_list,
    merge_inventory,
    sanitize_name,
)

DATA = Path(__file__).parent / "data"

EXPECTED_TOPOLOGY = parse_program(
    """
    dataFlow(uhttpd, opkg, 'environment').
    dataFlow(uhttpd, proccgi, 'environment').
    dataFlow(uhttpd, net_cgi, 'exec').
    dataFlow(opkg, afpd, 'exec').
    dataFlow(opkg, wget, 'environment').
    dataFlow(opkg, busybox, 'environment').
    dataFlow(opkg, tar, 'exec').
    externalInteraction('Internet', uhttpd, internet).
    """
)


@pytest.fixture()
def router_text() -> str:
    return (DATA / "router_graph.json").read_text()


@pytest.fixture()
def router(router_text):
    return load_firmware_graph(router_text)


def test_load_router_graph(router):
    assert router.fw_name == "NETGEAR_R7800_da9"
    assert set(router.binaries) == {"uhttpd", "opkg"}
    uhttpd = router.binaries["uhttpd"]
    assert len(uhttpd.peers) == 4
    border = [p for p in uhttpd.peers if p.link_type == "border_binary"]
    assert len(border) == 1 and border[0].target == "INTERNET"
    assert router.binaries["opkg"].versions == ("0.1.8", "v1", "v2")
    # info normalization: strings become singleton lists, "" becomes empty
    assert uhttpd.peers[0].info == ("PATH",)
    assert uhttpd.peers[2].info == ()


def test_empty_graph():
    fw = load_firmware_graph('{"fW_name":"x","graph":{}}')
    assert fw.fw_name == "x"
    assert fw.binaries == {}
    assert emit_topology_facts(fw).facts == ()


def test_unknown_link_type(router_text):
    doc = router_text.replace('"type": "exec"', '"type": "pipe"', 1)
    with pytest.raises(UnknownLinkTypeError) as excinfo:
        load_firmware_graph(doc)
    assert "pipe" in str(excinfo.value)
    assert "uhttpd.peers[2].type" in excinfo.value.path


def test_duplicate_binary_key():
    doc = (
        '{"fW_name":"x","graph":{'
        '"a": {"peers": [], "version": []},'
        '"a": {"peers": [], "version": []}}}'
    )
    with pytest.raises(DuplicateBinaryError):
        load_firmware_graph(doc)


def test_missing_graph_key():
    with pytest.raises(SchemaError) as excinfo:
        load_firmware_graph('{"fW_name":"x"}')
    assert excinfo.value.path == "graph"


def test_border_links_must_carry_empty_info():
    doc = {
        "fW_name": "x",
        "graph": {
            "a": {
                "peers": [
                    {"name": "INTERNET", "type": "border_binary", "info": ["x"]}
                ],
                "version": [],
            }
        },
    }
    with pytest.raises(SchemaError):
        load_firmware_graph(doc)


def test_dangling_targets_are_warned_and_kept(router):
    dangling = set(router.dangling_targets())
    assert dangling == {"proccgi", "net-cgi", "afpd", "wget", "busybox", "tar"}
    assert len(router.warnings) == len(dangling)


def test_sanitation():
    assert sanitize_name("net-cgi") == "net_cgi"
    assert binary_term("net-cgi").format() == "net_cgi"
    assert binary_term("Updater").format() == "'Updater'"
    assert binary_term("7zip").format() == "'7zip'"


def test_sanitation_collision_rejected():
    doc = {
        "fW_name": "x",
        "graph": {
            "net-cgi": {"peers": [], "version": []},
            "net_cgi": {"peers": [], "version": []},
        },
    }
    with pytest.raises(SanitationCollisionError):
        load_firmware_graph(doc)


def test_emit_topology_matches_expected_facts(router):
    facts = emit_topology_facts(router)
    assert sorted(f.format() for f in facts.facts) == sorted(
        c.format() for c in EXPECTED_TOPOLOGY.clauses
    )
    # fact counts follow the link counts
    assert len(facts.data_flows) == 7
    assert len(facts.external_interactions) == 1


def test_emit_is_deterministic_and_idempotent(router):
    first = emit_topology_facts(router)
    second = emit_topology_facts(router)
    assert first == second


def test_self_loops_are_retained():
    fw = load_firmware_graph(
        {
            "fW_name": "x",
            "graph": {
                "a": {
                    "peers": [{"name": "a", "type": "socket", "info": ""}],
                    "version": [],
                }
            },
        }
    )
    facts = emit_topology_facts(fw)
    assert [f.format() for f in facts.facts] == ["dataFlow(a, a, 'socket')."]


def test_load_version_list():
    inv = load_version_list((DATA / "router_versions.txt").read_text())
    assert len(inv.entries) == 12
    pairs = {(e.name, e.version) for e in inv.entries}
    assert ("opkg", "0.1.8") in pairs
    assert ("uhttpd", "*") in pairs
    assert ("tar", "4.2BSD") in pairs


def test_version_list_empty_and_duplicates():
    assert load_version_list("").entries == []
    inv = load_version_list("a, 1\na, 1\na, 2\n")
    assert [(e.name, e.version) for e in inv.entries] == [("a", "1"), ("a", "2")]


def test_version_list_malformed_line():
    with pytest.raises(MalformedLineError) as excinfo:
        load_version_list("busybox")
    assert excinfo.value.line_no == 1
    with pytest.raises(MalformedLineError) as excinfo:
        load_version_list("ok, 1\nbad,\n")
    assert excinfo.value.line_no == 2


def test_merge_inventory_unions_versions(router):
    inv = load_version_list((DATA / "router_versions.txt").read_text())
    merged = merge_inventory(router, inv)
    assert set(merged.versions_for("opkg")) == {"0.1.8", "v1", "v2", "1"}
    # graph-only binaries with no version anywhere get the wildcard
    assert merged.versions_for("uhttpd") == ["*"]


def test_merge_inventory_empty():
    fw = load_firmware_graph('{"fW_name":"x","graph":{}}')
    merged = merge_inventory(fw, load_version_list(""))
    assert merged.entries == []


def test_merge_inventory_wildcard_for_versionless_binary():
    fw = load_firmware_graph(
        {"fW_name": "x", "graph": {"proccgi": {"peers": [], "version": []}}}
    )
    merged = merge_inventory(fw, load_version_list(""))
    assert [(e.name, e.version) for e in merged.entries] == [("proccgi", "*")]
