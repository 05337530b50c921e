"""
    Deterministic discrete-event network simulation.

    Nodes sit on a seeded Erdős–Rényi graph. Every send is delivered to a
    neighbor after an integer delay drawn from `[1, delta]`; a
    `simpy.Environment` orders deliveries, breaking ties by send order, so a
    run is a pure function of its seeds.

    Two dissemination modes are provided:

    - `gossip`: flooding with seen-set suppression, where honest nodes only
      forward messages their validator callback accepts;
    - selective broadcast: nodes first exchange interest lists with their
      neighbors, then forward each symbol only to neighbors interested in
      it (`Relay`, `selective_broadcast_round`).
"""
import json
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, FrozenSet, List, NamedTuple, Optional, Set

import networkx as nx
import simpy
from networkx.utils import UnionFind

from cover.cmt import SymbolId, SymbolShare
from cover.constants import DEFAULT_DELTA, INTEREST_ENTRY_SIZE
from cover.hashcommit import Writer, digest
from cover.ledger import (
    FraudProof,
    Header,
    SectionIndexFraudProof,
    SortingFraudProof,
)
from cover.publisher import Channel, Publisher
from cover.utility import derive_seed, make_rng

logger = logging.getLogger(__name__)


# ----- topology -----


@dataclass(frozen=True)
class NetworkGraph:
    """A seeded topology with honesty flags.

    Attributes:

        N (int):
            Node count.

        p (float):
            Edge probability.

        seed (int):
            Seed of the edge set.

        alpha (float):
            Dishonest fraction.

        honest_mask (Tuple[bool, ...]):
            Honesty of every node.

        graph (networkx.Graph):
            The undirected graph.
    """

    N: int
    p: float
    seed: int
    alpha: float
    honest_mask: tuple
    graph: nx.Graph = field(repr=False, compare=False)

    @cached_property
    def edges(self):
        return frozenset(
            (min(u, v), max(u, v)) for u, v in self.graph.edges()
        )

    def neighbors(self, node):
        return sorted(self.graph.neighbors(node))

    def is_honest(self, node):
        return self.honest_mask[node]

    @property
    def honest_nodes(self):
        return [n for n in range(self.N) if self.honest_mask[n]]

    @property
    def dishonest_nodes(self):
        return [n for n in range(self.N) if not self.honest_mask[n]]

    @property
    def N_h(self):
        return sum(self.honest_mask)


def generate_graph(N, p, seed, alpha=0.0, placement_seed=None):
    """Sample an Erdős–Rényi graph and flag `floor(alpha * N)` nodes
    dishonest, uniformly at random.

    Parameters:

        N (int):
            Node count.

        p (float):
            Edge probability, `0 <= p <= 1`.

        seed (int):
            Seed of the edge set.

        alpha (float):
            Dishonest fraction, `0 <= alpha < 1`.

        placement_seed (Optional[int]):
            Seed of the dishonest placement; derived from `seed` when
            omitted.

    Returns:

        NetworkGraph:
            The topology.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability {p} outside [0, 1]")
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"dishonest fraction {alpha} outside [0, 1)")
    graph = nx.gnp_random_graph(N, p, seed=int(seed) % 2**32)
    if placement_seed is None:
        placement_seed = derive_seed(seed, "placement")
    honest = [True] * N
    dishonest = math.floor(alpha * N)
    if dishonest:
        rng = make_rng(placement_seed)
        for node in rng.choice(N, size=dishonest, replace=False):
            honest[int(node)] = False
    return NetworkGraph(N, p, seed, alpha, tuple(honest), graph)


# ----- messages -----


class _Message:
    channel: Channel

    def to_bytes(self):
        raise NotImplementedError

    @cached_property
    def size(self):
        return len(self.to_bytes())

    @cached_property
    def key(self):
        """De-duplication key: hash of the canonical bytes."""
        return digest(self.to_bytes(), self.channel.value.encode())


@dataclass(frozen=True, eq=False)
class HeaderMessage(_Message):
    header: Header
    channel = Channel.HEADER

    def to_bytes(self):
        return self.header.to_bytes()


@dataclass(frozen=True, eq=False)
class SymbolMessage(_Message):
    share: SymbolShare
    channel = Channel.SYMBOL

    def to_bytes(self):
        return self.share.to_bytes()


FRAUD_KINDS = {
    FraudProof: 1,
    SortingFraudProof: 2,
    SectionIndexFraudProof: 3,
}


@dataclass(frozen=True, eq=False)
class FraudProofMessage(_Message):
    proof: object
    channel = Channel.FRAUD_PROOF

    def to_bytes(self):
        kind = FRAUD_KINDS[type(self.proof)]
        return Writer().u8(kind).raw(self.proof.to_bytes()).getvalue()


@dataclass(frozen=True, eq=False)
class CodingFraudMessage(_Message):
    proof: object
    channel = Channel.CODING_FRAUD

    def to_bytes(self):
        return self.proof.to_bytes()


@dataclass(frozen=True, eq=False)
class InterestMessage(_Message):
    """A node's interest list: the symbols it wishes to receive."""

    node: int
    ids: FrozenSet[SymbolId]
    channel = Channel.INTEREST

    def to_bytes(self):
        w = Writer().u32(self.node).u32(len(self.ids))
        for sid in sorted(self.ids):
            w.u16(sid.layer).u32(sid.index)
        return w.getvalue()

    @property
    def size(self):
        return INTEREST_ENTRY_SIZE * len(self.ids)


# ----- the network -----


class TraceRow(NamedTuple):
    tick: int
    sender: int
    receiver: int
    message_type: str
    size: int


class Network:
    """Message delivery over a `NetworkGraph`.

    Nodes subscribe handlers per channel through `publisher`; a handler is
    called as `func(sender, message)` at delivery time.
    """

    def __init__(self, graph, delta=DEFAULT_DELTA, seed=0):
        if delta < 1:
            raise ValueError("delta must be at least 1")
        self.graph = graph
        self.delta = delta
        self.env = simpy.Environment()
        self.publisher = Publisher()
        self.rows: List[TraceRow] = []
        self.bytes_in: Dict[int, Counter] = defaultdict(Counter)
        self.bytes_out: Dict[int, Counter] = defaultdict(Counter)
        self._rng = make_rng(seed, "delay")

    @property
    def now(self):
        return int(self.env.now)

    def subscribe(self, node, channel, func):
        self.publisher.subscribe(node, func, channel)

    def send(self, sender, receiver, message):
        """Schedule delivery to a neighbor within `[1, delta]` ticks."""
        delay = int(self._rng.integers(1, self.delta + 1))
        self.bytes_out[sender][message.channel.value] += message.size
        self.env.process(self._deliver(sender, receiver, message, delay))

    def broadcast(self, sender, message, exclude=()):
        for neighbor in self.graph.neighbors(sender):
            if neighbor not in exclude:
                self.send(sender, neighbor, message)

    def _deliver(self, sender, receiver, message, delay):
        yield self.env.timeout(delay)
        size = message.size
        self.bytes_in[receiver][message.channel.value] += size
        self.rows.append(
            TraceRow(self.now, sender, receiver, message.channel.value, size)
        )
        self.publisher.publish_message(
            receiver, message.channel, sender, message
        )

    def at(self, tick, func, *args):
        """Call `func(*args)` at an absolute tick."""

        def waiter():
            yield self.env.timeout(max(0, tick - self.env.now))
            func(*args)

        self.env.process(waiter())

    def run(self, until=None):
        self.env.run(until=until)

    def received_bytes(self, node, channel=None):
        counts = self.bytes_in[node]
        if channel is None:
            return sum(counts.values())
        return counts[channel.value]

    def sent_bytes(self, node, channel=None):
        counts = self.bytes_out[node]
        if channel is None:
            return sum(counts.values())
        return counts[channel.value]


@dataclass
class DeliveryTrace:
    """First-receipt ticks of a dissemination run.

    Attributes:

        first_receipt (Dict[int, int]):
            Tick a node first received the (gossiped) message.

        symbols (Dict[Tuple[int, SymbolId], int]):
            Tick a node first received each symbol.

        rows (List[TraceRow]):
            Every delivery, in delivery order.
    """

    first_receipt: Dict[int, int] = field(default_factory=dict)
    symbols: Dict[tuple, int] = field(default_factory=dict)
    rows: List[TraceRow] = field(default_factory=list)

    def reached(self):
        return set(self.first_receipt)

    def holders(self, sid):
        return {node for node, s in self.symbols if s == sid}


def export_trace(rows, path):
    """Write trace rows as newline-delimited JSON."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row._asdict(), sort_keys=True))
            fh.write("\n")


# ----- gossip -----


def silent(network, node, sender, message):
    """Dishonest behavior that drops everything."""
    return None


def gossip(
    graph,
    origin,
    message,
    validator: Optional[Callable] = None,
    delta=DEFAULT_DELTA,
    seed=0,
    dishonest: Callable = silent,
    until=None,
):
    """Flood `message` from `origin`.

    An honest node forwards a message the first time it sees it, and only
    if `validator(node, message)` accepts it. Dishonest nodes hand every
    delivery to `dishonest(network, node, sender, message)`.

    Returns:

        DeliveryTrace:
            First-receipt ticks (the origin at tick 0) and the rows.
    """
    network = Network(graph, delta, seed)
    trace = DeliveryTrace()
    seen: Dict[int, Set[bytes]] = defaultdict(set)
    accept = validator or (lambda node, msg: True)

    def make_handler(node):
        def handle(sender, msg):
            trace.first_receipt.setdefault(node, network.now)
            if not graph.is_honest(node):
                dishonest(network, node, sender, msg)
                return
            if msg.key in seen[node]:
                return
            seen[node].add(msg.key)
            if accept(node, msg):
                network.broadcast(node, msg, exclude=(sender,))

        return handle

    for node in range(graph.N):
        network.subscribe(node, message.channel, make_handler(node))
    trace.first_receipt[origin] = 0
    seen[origin].add(message.key)
    network.broadcast(origin, message)
    network.run(until=until)
    trace.rows = network.rows
    return trace


# ----- selective broadcast -----


class Relay:
    """Selective-broadcast state of one node.

    Keeps the interest lists its neighbors registered and the symbols it
    holds. A symbol is offered to every interested neighbor once; when an
    interest arrives after the symbol, the held symbol is re-offered.
    """

    def __init__(self, network, node):
        self.network = network
        self.node = node
        self.neighbor_interest: Dict[int, Set[SymbolId]] = defaultdict(set)
        self.held: Dict[SymbolId, SymbolShare] = {}
        self._offered: Set[tuple] = set()

    def announce(self, ids):
        """Send this node's interest list to every neighbor."""
        message = InterestMessage(self.node, frozenset(ids))
        self.network.broadcast(self.node, message)

    def register(self, sender, message):
        """Record a neighbor's interests and re-offer matching backlog."""
        wanted = self.neighbor_interest[sender]
        new = set(message.ids) - wanted
        wanted.update(new)
        for sid in sorted(new & self.held.keys()):
            self._send(sender, self.held[sid])

    def hold(self, share, exclude=None):
        """Keep a symbol and offer it to interested neighbors."""
        self.held[share.id] = share
        for neighbor in self.network.graph.neighbors(self.node):
            if neighbor == exclude:
                continue
            if share.id in self.neighbor_interest[neighbor]:
                self._send(neighbor, share)

    def _send(self, neighbor, share):
        if (neighbor, share.id) in self._offered:
            return
        self._offered.add((neighbor, share.id))
        self.network.send(self.node, neighbor, SymbolMessage(share))


def selective_broadcast_round(
    graph,
    interests,
    publications,
    delta=DEFAULT_DELTA,
    seed=0,
    validator: Optional[Callable] = None,
    dishonest: Callable = silent,
    late_interests=None,
):
    """Run one interest exchange followed by symbol dissemination.

    Parameters:

        graph (NetworkGraph):
            The topology.

        interests (Mapping[int, Iterable[SymbolId]]):
            Every node's interest list.

        publications (Iterable[Tuple[int, SymbolShare]]):
            `(node, share)` pairs published once interests are exchanged.

        validator (Optional[Callable[[int, SymbolShare], bool]]):
            Honest nodes drop shares it rejects.

        dishonest (Callable):
            Behavior of dishonest nodes.

        late_interests (Optional[Mapping[int, Iterable[SymbolId]]]):
            Interests announced only after publication starts.

    Returns:

        Tuple[DeliveryTrace, Network]:
            The symbol receipts and the network with its counters.
    """
    network = Network(graph, delta, seed)
    trace = DeliveryTrace()
    accept = validator or (lambda node, share: True)
    relays = {node: Relay(network, node) for node in range(graph.N)}

    def make_symbol_handler(node):
        relay = relays[node]

        def handle(sender, msg):
            if not graph.is_honest(node):
                dishonest(network, node, sender, msg)
                return
            share = msg.share
            if share.id in relay.held or not accept(node, share):
                return
            trace.symbols[(node, share.id)] = network.now
            relay.hold(share, exclude=sender)

        return handle

    for node in range(graph.N):
        network.subscribe(node, Channel.INTEREST, relays[node].register)
        network.subscribe(node, Channel.SYMBOL, make_symbol_handler(node))
        relays[node].announce(interests.get(node, ()))

    def publish():
        for node, share in publications:
            trace.symbols.setdefault((node, share.id), network.now)
            relays[node].hold(share)
        for node, ids in (late_interests or {}).items():
            relays[node].announce(ids)

    network.at(delta, publish)
    network.run()
    trace.rows = network.rows
    return trace, network


def interest_subgraph_connected(graph, interests, sid):
    """True iff the honest nodes interested in `sid` form one connected
    component of the subgraph they induce."""
    members = [
        node
        for node in graph.honest_nodes
        if sid in interests.get(node, ())
    ]
    if len(members) <= 1:
        return True
    member_set = set(members)
    components = UnionFind(members)
    for u, v in graph.edges:
        if u in member_set and v in member_set:
            components.union(u, v)
    return len(list(components.to_sets())) == 1
