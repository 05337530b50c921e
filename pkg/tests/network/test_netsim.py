import json

import pytest

from cover import cmt, netsim
from cover.cmt import SymbolId
from cover.fixtures import coding_fraud_example
from cover.ledger import Header
from cover.publisher import Channel


def header_message():
    return netsim.HeaderMessage(Header(bytes(32), bytes(32), 8, 1))


def test_graph_is_seeded():
    a = netsim.generate_graph(30, 0.2, seed=5, alpha=0.2)
    b = netsim.generate_graph(30, 0.2, seed=5, alpha=0.2)
    assert a.edges == b.edges
    assert a.honest_mask == b.honest_mask
    assert len(a.dishonest_nodes) == 6
    assert a.N_h == 24


def test_graph_parameters_are_checked():
    with pytest.raises(ValueError):
        netsim.generate_graph(5, 1.5, seed=0)
    with pytest.raises(ValueError):
        netsim.generate_graph(5, 0.5, seed=0, alpha=1.0)


def test_gossip_reaches_every_node_of_a_connected_graph():
    graph = netsim.generate_graph(20, 1.0, seed=1)
    trace = netsim.gossip(graph, 0, header_message(), delta=3, seed=2)
    assert trace.reached() == set(range(20))
    assert trace.first_receipt[0] == 0
    assert all(1 <= t <= 3 for n, t in trace.first_receipt.items() if n)


def test_gossip_is_deterministic():
    graph = netsim.generate_graph(25, 0.3, seed=7)
    first = netsim.gossip(graph, 0, header_message(), seed=3)
    second = netsim.gossip(graph, 0, header_message(), seed=3)
    assert first.first_receipt == second.first_receipt
    assert first.rows == second.rows


def test_validator_stops_forwarding():
    graph = netsim.generate_graph(10, 1.0, seed=1)
    trace = netsim.gossip(
        graph, 0, header_message(), validator=lambda node, msg: False
    )
    assert {row.sender for row in trace.rows} == {0}


def test_silent_nodes_do_not_forward():
    graph = netsim.generate_graph(12, 1.0, seed=1, alpha=0.5)
    origin = graph.honest_nodes[0]
    trace = netsim.gossip(graph, origin, header_message())
    senders = {row.sender for row in trace.rows}
    assert not senders & set(graph.dishonest_nodes)


def test_selective_broadcast_delivers_to_interested_nodes():
    example = coding_fraud_example()
    tree = example.honest
    graph = netsim.generate_graph(8, 1.0, seed=4)
    wanted = SymbolId(3, 2)
    interests = {node: {wanted} for node in range(1, 8)}
    publications = [(0, tree.shares([wanted])[0])]
    trace, network = netsim.selective_broadcast_round(
        graph, interests, publications
    )
    assert trace.holders(wanted) == set(range(8))
    symbol_rows = [r for r in trace.rows if r.message_type == "symbol"]
    assert len(symbol_rows) <= 7 * 7
    assert network.received_bytes(1, Channel.SYMBOL) > 0


def test_uninterested_nodes_get_nothing():
    tree = coding_fraud_example().honest
    graph = netsim.generate_graph(6, 1.0, seed=4)
    wanted = SymbolId(4, 1)
    interests = {1: {wanted}}
    publications = [(0, tree.shares([wanted])[0])]
    trace, network = netsim.selective_broadcast_round(
        graph, interests, publications
    )
    assert trace.holders(wanted) == {0, 1}
    assert network.received_bytes(2, Channel.SYMBOL) == 0


def test_late_interest_is_served_from_backlog():
    tree = coding_fraud_example().honest
    graph = netsim.generate_graph(4, 1.0, seed=4)
    wanted = SymbolId(2, 3)
    publications = [(0, tree.shares([wanted])[0])]
    trace, _ = netsim.selective_broadcast_round(
        graph, {}, publications, late_interests={3: {wanted}}
    )
    assert 3 in trace.holders(wanted)


def test_invalid_shares_are_dropped():
    example = coding_fraud_example()
    share = example.honest.shares([SymbolId(3, 1)])[0]
    graph = netsim.generate_graph(3, 1.0, seed=4)
    interests = {n: {share.id} for n in range(3)}
    root = example.honest.root_commitment
    trace, _ = netsim.selective_broadcast_round(
        graph,
        interests,
        [(0, cmt.SymbolShare(share.id, bytes(len(share.payload)), share.proof))],
        validator=lambda node, s: s.verify(root),
    )
    assert trace.holders(share.id) == {0}


def test_interest_messages_are_sized_per_entry():
    message = netsim.InterestMessage(0, frozenset({SymbolId(2, 0), SymbolId(3, 1)}))
    assert message.size == 12


def test_interest_subgraph_connectivity():
    graph = netsim.generate_graph(4, 0.0, seed=0)
    sid = SymbolId(2, 0)
    assert netsim.interest_subgraph_connected(graph, {0: {sid}}, sid)
    assert not netsim.interest_subgraph_connected(
        graph, {0: {sid}, 1: {sid}}, sid
    )
    full = netsim.generate_graph(4, 1.0, seed=0)
    assert netsim.interest_subgraph_connected(
        full, {0: {sid}, 1: {sid}, 3: {sid}}, sid
    )


def test_trace_export(tmp_path):
    graph = netsim.generate_graph(5, 1.0, seed=1)
    trace = netsim.gossip(graph, 0, header_message())
    path = tmp_path / "trace.ndjson"
    netsim.export_trace(trace.rows, path)
    lines = path.read_text().splitlines()
    assert len(lines) == len(trace.rows)
    assert set(json.loads(lines[0])) == {
        "tick",
        "sender",
        "receiver",
        "message_type",
        "size",
    }


def test_network_counts_bytes_both_ways():
    graph = netsim.generate_graph(2, 1.0, seed=0)
    network = netsim.Network(graph, delta=1)
    message = header_message()
    got = []
    network.subscribe(1, Channel.HEADER, lambda sender, msg: got.append(sender))
    network.send(0, 1, message)
    network.run()
    assert got == [0]
    assert network.sent_bytes(0) == message.size
    assert network.received_bytes(1, Channel.HEADER) == message.size
    with pytest.raises(ValueError):
        netsim.Network(graph, delta=0)
