"""
    The light-node validator.

    For every block a `ValidatorNode`

    1. takes the header and registers interest in its sampled subtree, the
       symbols of every parity touching it, and the base symbols of its
       section;
    2. decodes the subtree layer by layer together with its neighbors:
       it peels needed parities, checks each decoded symbol against the
       digest committed in the layer above and rebroadcasts it with a
       proof;
    3. validates its section's transactions once the bottom layer is done;
    4. gossips and checks fraud proofs, then decides at the deadline.

    `run_round` wires a block production, honest validators and Byzantine
    nodes together on one simulated network.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, List, Mapping, Optional, Set, Tuple

from cover import cmt, ledger
from cover.cmt import ROOT_ID, SymbolId, SymbolShare
from cover.constants import (
    ACCEPT,
    CODING_FRAUD,
    DEFAULT_D_L,
    DEFAULT_D_R,
    DEFAULT_DELTA,
    DEFAULT_TAU,
    FRAUD_PROOF,
    MALFORMED_HEADER,
    PENDING,
    REJECT,
    ROOT_LAYER,
    SAMPLING_TIMEOUT,
    UNAVAILABLE,
    VALID,
)
from cover.errors import InsufficientChainError
from cover.hashcommit import symbol_digest
from cover.netsim import (
    CodingFraudMessage,
    FraudProofMessage,
    HeaderMessage,
    Relay,
)
from cover.publisher import Channel
from cover.utility import derive_seed, make_rng, xor_bytes

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProtocolParams:
    """Protocol parameters shared by every validator.

    Attributes:

        k (int):
            Number of sections.

        c (Optional[int]):
            Bottom-layer samples per node; `L // k` when None.

        delta (int):
            Maximum per-hop delay.

        tau (Optional[int]):
            Expiry window; None never expires.

        t_stall (Optional[int]):
            Ticks without progress before a layer is declared stalled;
            `delta * (N + 1)` when None.

        deadline (Optional[int]):
            Ticks from publication to the verdict; `(depth + 3) * t_stall`
            when None.

        d_L (int):
            Symbol degree every header's codes must use.

        d_R (int):
            Parity degree every header's codes must use.
    """

    k: int = 1
    c: Optional[int] = None
    delta: int = DEFAULT_DELTA
    tau: Optional[int] = DEFAULT_TAU
    t_stall: Optional[int] = None
    deadline: Optional[int] = None
    d_L: int = DEFAULT_D_L
    d_R: int = DEFAULT_D_R

    def sample_count(self, shape):
        c = self.c if self.c is not None else max(1, shape.L // self.k)
        return max(1, min(c, shape.bottom_width))

    def stall_ticks(self, N):
        if self.t_stall is not None:
            return self.t_stall
        return self.delta * (N + 1)

    def deadline_ticks(self, depth, N):
        if self.deadline is not None:
            return self.deadline
        return (depth + 3) * self.stall_ticks(N)


class LayerStatus(Enum):
    """Outcome of one decoding pass over a layer.

    Attributes:

        PROGRESSED (1):
            New symbols were decoded but the layer is not complete.

        DONE (2):
            Every desired and needed symbol is known and every needed
            parity holds.

        FRAUD (3):
            A coding fraud proof was produced.

        STALLED (4):
            The stall timer expired on this layer.

        WAITING (5):
            Nothing to peel yet; the stall timer is running.
    """

    PROGRESSED = 1
    DONE = 2
    FRAUD = 3
    STALLED = 4
    WAITING = 5


@dataclass(frozen=True)
class Verdict:
    """A node's decision on a block.

    `artifact` holds the verified proof behind a fraud rejection; `layer`
    the stalled layer behind an unavailability rejection.
    """

    decision: str
    reason: Optional[str] = None
    layer: Optional[int] = None
    artifact: object = field(default=None, compare=False, repr=False)

    @property
    def accepted(self):
        return self.decision == ACCEPT

    @property
    def rejected(self):
        return self.decision == REJECT


PENDING_VERDICT = Verdict(PENDING)
ACCEPT_VERDICT = Verdict(ACCEPT, VALID)


@dataclass(frozen=True)
class VerdictRow:
    height: int
    node: int
    decision: str
    reason: str
    ticks: int
    bytes_down: int
    bytes_up: int
    hash_ops: int
    symbols_stored: int

    def as_dict(self):
        return dict(self.__dict__)


def needed_sets(code, desired):
    """Parities touching `desired` and every symbol they involve."""
    checks = sorted({c for v in desired for c in code.symbol_checks[v]})
    symbols = {v for c in checks for v in code.parity_graph[c]}
    return tuple(checks), frozenset(symbols)


class RoundState:
    """Per-block working state of a validator."""

    def __init__(self, header, codes, subtree, desired, sections, warming):
        self.header = header
        self.codes = codes
        self.shape = cmt.TreeShape.for_count(header.length)
        self.layout = header.layout
        self.subtree = subtree
        self.desired: Dict[int, FrozenSet[int]] = desired
        self.sections = sections
        self.warming = warming
        self.needed_checks: Dict[int, Tuple[int, ...]] = {}
        self.needed: Dict[int, FrozenSet[int]] = {ROOT_LAYER: frozenset({0})}
        for layer in self.shape.coded_layers:
            checks, symbols = needed_sets(codes[layer], desired[layer])
            self.needed_checks[layer] = checks
            self.needed[layer] = symbols | desired[layer]
        self.interests = frozenset(
            SymbolId(layer, index)
            for layer, indices in self.needed.items()
            for index in indices
        )
        self.known: Dict[SymbolId, bytes] = {}
        self.proofs: Dict[SymbolId, cmt.SymbolProof] = {}
        self.status: Dict[int, LayerStatus] = {}
        self.layer = ROOT_LAYER
        self.decoded = False
        self.validated = False
        self.rejection: Optional[Verdict] = None
        self.pending_updates: List[ledger.PlacedTxn] = []
        self.seen_proofs: Set[bytes] = set()
        self.decided_at: Optional[int] = None
        self.hash_ops = 0
        self.watchdog = 0
        self.chain = None

    @property
    def height(self):
        return self.header.height

    @property
    def finished(self):
        return self.rejection is not None or self.validated

    def lookup(self, sid):
        return self.known[sid]


class ValidatorNode:
    """An honest light node.

    Parameters:

        node_id (int):
            The node's id on the graph.

        params (ProtocolParams):
            Protocol parameters.

        scheme (SignatureScheme):
            Verifies transaction signatures.

        chain (HeaderChain):
            The accepted header chain; the node keeps its own copy.

        section (Optional[int]):
            The validated section; drawn from the node's seed when None.

        seed (int):
            Master seed; the node derives its section and samples from it.

        bottom (Optional[Sequence[int]]):
            Fixed bottom-layer samples instead of random ones.

        codes (Optional[Mapping[int, LdpcCode]]):
            Per-layer codes overriding those the header describes.
    """

    def __init__(
        self,
        node_id,
        params,
        scheme,
        chain,
        section=None,
        seed=0,
        bottom=None,
        codes=None,
    ):
        self.id = node_id
        self.params = params
        self.scheme = scheme
        self.chain = chain.copy()
        self.seed = derive_seed(seed, "node", node_id)
        if section is None:
            section = self.draw_section(0)
        self.section = section
        self.spent = ledger.SpentTxoTable()
        self.switch: Optional[Tuple[int, int]] = None
        self.bottom = None if bottom is None else tuple(bottom)
        self.codes = codes
        self.round: Optional[RoundState] = None
        self.verdict = PENDING_VERDICT
        self.history: List[Verdict] = []
        self.refused: Optional[ledger.Header] = None
        self.network = None
        self.relay = None
        self.t_stall = None

    # ----- wiring -----

    def attach(self, network):
        """Subscribe to a round's network."""
        self.network = network
        self.relay = Relay(network, self.id)
        self.t_stall = self.params.stall_ticks(network.graph.N)
        self.round = None
        self.refused = None
        self.verdict = PENDING_VERDICT
        network.subscribe(self.id, Channel.HEADER, self._on_header)
        network.subscribe(self.id, Channel.INTEREST, self.relay.register)
        network.subscribe(self.id, Channel.SYMBOL, self._on_symbol)
        network.subscribe(self.id, Channel.FRAUD_PROOF, self._on_fraud)
        network.subscribe(self.id, Channel.CODING_FRAUD, self._on_coding_fraud)

    @property
    def now(self):
        return self.network.now if self.network is not None else 0

    # ----- sections -----

    def switch_section(self, new_section, start_height):
        """Move to `new_section` from `start_height`.

        Blocks `start_height .. start_height + tau - 1` are a warm-up: the
        new section is validated alongside the old one, against the spent
        outputs recorded so far. A double spend whose first spend predates
        the warm-up goes unnoticed there; conflicting spends are never
        more than `tau - 1` blocks apart, so from `start_height + tau` the
        table is complete, the new section is the node's only section and
        the old section's entries are dropped.
        """
        if self.params.tau is None:
            raise ValueError("section switching needs a finite tau")
        if not 0 <= new_section < self.params.k:
            raise ValueError(f"section {new_section} outside [0, {self.params.k})")
        pending = self.switch
        if pending is not None and start_height >= pending[1] + self.params.tau:
            self._finish_switch()
        if new_section == self.section:
            self.switch = None
            return
        self.switch = (new_section, start_height)

    def _finish_switch(self):
        k = self.params.k
        old, new_section = self.section, self.switch[0]
        self.spent.remove_where(
            lambda key, entry: ledger.section_of(entry.txn.sender, k) == old
        )
        logger.info(
            "node %d switched from section %d to %d", self.id, old, new_section
        )
        self.section = new_section
        self.switch = None

    def draw_section(self, epoch):
        """The section this node picks for `epoch`; epoch 0 is its first."""
        if epoch == 0:
            return int(make_rng(self.seed, "section").integers(self.params.k))
        return int(make_rng(self.seed, "section", epoch).integers(self.params.k))

    def _sections_for(self, height):
        if self.switch is None:
            return (self.section,), ()
        new_section, start = self.switch
        if height >= start + self.params.tau:
            self._finish_switch()
            return (self.section,), ()
        if height >= start:
            return (self.section,), (new_section,)
        return (self.section,), ()

    # ----- header -----

    def _on_header(self, sender, message):
        self.on_new_header(message.header, sender)

    def on_new_header(self, header, sender=None):
        """Register interests for a new header and pass it on.

        Headers that do not extend the node's chain are ignored.
        """
        if self.round is not None and self.round.header == header:
            return
        if header == self.refused:
            return
        if not self.chain.extends(header):
            logger.debug("node %d ignores header %d", self.id, header.height)
            return
        try:
            layout, codes = self.check_header(header)
        except ValueError as exc:
            self._refuse(header, sender, exc)
            return
        shape = cmt.TreeShape.for_count(header.length)
        sections, warming = self._sections_for(header.height)
        if self.bottom is not None:
            bottom = self.bottom
            subtree = None
        else:
            subtree = cmt.sample_subtree(
                shape,
                self.params.sample_count(shape),
                derive_seed(self.seed, "sample", header.height),
            )
            bottom = subtree.bottom
        positions = set(bottom)
        for section in sections + warming:
            positions |= set(self._section_positions(layout, header, section))
        desired = cmt.subtree_closure(shape, sorted(positions))
        state = RoundState(header, codes, subtree, desired, sections, warming)
        state.chain = self.chain.copy()
        state.chain.append(header)
        self.round = state
        if self.relay is not None:
            self.relay.announce(state.interests)
            self.network.broadcast(
                self.id, HeaderMessage(header), exclude=(sender,)
            )
        logger.debug(
            "node %d took header %d with %d interests",
            self.id,
            header.height,
            len(state.interests),
        )

    def check_header(self, header):
        """Parse a header's block layout and codes.

        The layout must use the protocol's `k`, `d_L` and `d_R`, and its
        section offsets must split the block's transactions.

        Returns:

            Tuple[BlockLayout, Mapping[int, LdpcCode]]:
                The layout and the per-layer codes.

        Raises:

            ValueError:
                When the header does not describe a block these
                parameters allow.
        """
        params = self.params
        layout = header.layout
        if layout.k != params.k:
            raise ValueError(f"header has {layout.k} sections, not {params.k}")
        if (layout.d_L, layout.d_R) != (params.d_L, params.d_R):
            raise ValueError(
                f"header codes have degrees ({layout.d_L}, {layout.d_R}), "
                f"not ({params.d_L}, {params.d_R})"
            )
        offsets = layout.offsets
        if offsets[0] != 0 or offsets[-1] != header.length:
            raise ValueError("section offsets do not span the block")
        if any(a > b for a, b in zip(offsets, offsets[1:])):
            raise ValueError("section offsets decrease")
        if layout.symbol_size < 1:
            raise ValueError("empty base symbols")
        codes = self.codes or header.codes()
        return layout, codes

    def _refuse(self, header, sender, reason):
        logger.warning(
            "node %d refuses header %d: %s", self.id, header.height, reason
        )
        if self.round is not None:
            return
        self.refused = header
        if self.network is not None:
            self.network.broadcast(
                self.id, HeaderMessage(header), exclude=(sender,)
            )

    @staticmethod
    def _section_positions(layout, header, section):
        span = layout.section_range(section)
        lo = max(0, span.start - 1)
        hi = min(header.length, span.stop + 1)
        return range(lo, hi)

    @property
    def interests(self):
        return self.round.interests if self.round else frozenset()

    # ----- symbols -----

    def _on_symbol(self, sender, message):
        self.accept_share(message.share, sender)

    def receive_publication(self, share):
        """A symbol handed to this node by the miner."""
        self.accept_share(share, None)

    def accept_share(self, share, sender):
        state = self.round
        if state is None or share.id not in state.interests:
            return
        if share.id in self.relay.held:
            return
        state.hash_ops += share.id.layer + 1
        if not share.verify(state.header.root):
            logger.debug(
                "node %d drops %s from %s: bad proof", self.id, share.id, sender
            )
            return
        self.relay.hold(share, exclude=sender)
        if state.finished or state.decoded or share.id.layer < state.layer:
            return
        state.known[share.id] = bytes(share.payload)
        state.proofs[share.id] = share.proof
        self._touch()
        self.decode_subtree()

    def start_watchdog(self):
        if self.round is not None:
            self._touch()

    def _touch(self):
        state = self.round
        state.watchdog += 1
        token = state.watchdog
        self.network.at(self.now + self.t_stall, self._check_stall, state, token)

    def _check_stall(self, state, token):
        if state is not self.round or token != state.watchdog:
            return
        if state.finished or state.decoded:
            return
        state.status[state.layer] = LayerStatus.STALLED
        self._reject(Verdict(REJECT, UNAVAILABLE, layer=state.layer))
        logger.info("node %d stalled on layer %d", self.id, state.layer)

    # ----- decoding -----

    def decode_subtree(self):
        """Decode layers in order until one waits, stalls or proves fraud.

        Returns:

            bool:
                True once every layer of the subtree is decoded.
        """
        state = self.round
        while not state.decoded and state.rejection is None:
            status = self.collab_decode_layer(state.layer)
            state.status[state.layer] = status
            if status is LayerStatus.DONE:
                self._finish_layer(state.layer)
                if state.layer == state.shape.depth:
                    state.decoded = True
                    self.validate_section()
                else:
                    state.layer += 1
                continue
            break
        return state.decoded

    def collab_decode_layer(self, layer):
        """One decoding pass over `layer`.

        Peels needed parities whose only unknown symbol is desired,
        checking each decoded symbol against its committed digest and
        rebroadcasting it. Once every desired and needed symbol is known,
        every needed parity must sum to zero.

        Returns:

            LayerStatus:
                The outcome of the pass.
        """
        state = self.round
        if state.status.get(layer) is LayerStatus.STALLED:
            return LayerStatus.STALLED
        if layer == ROOT_LAYER:
            return LayerStatus.DONE if ROOT_ID in state.known else LayerStatus.WAITING

        code = state.codes[layer]
        desired = state.desired[layer]
        progressed = False
        while True:
            peel = self._find_degree_one(layer, code, desired)
            if peel is None:
                break
            check_id, index = peel
            sid = SymbolId(layer, index)
            others = [v for v in code.parity_graph[check_id] if v != index]
            value = xor_bytes(*(state.known[SymbolId(layer, v)] for v in others))
            parent, slot = cmt.parent_of(sid)
            state.hash_ops += 1
            if symbol_digest(value) != cmt.digest_slot(state.known[parent], slot):
                proof = self._coding_fraud_proof(layer, check_id, index)
                self._emit_coding_fraud(proof)
                return LayerStatus.FRAUD
            state.known[sid] = value
            share_proof = cmt.proof_from_layers(state.lookup, sid)
            state.proofs[sid] = share_proof
            self.relay.hold(SymbolShare(sid, value, share_proof))
            progressed = True

        needed = state.needed[layer]
        if all(SymbolId(layer, v) in state.known for v in needed):
            for check_id in state.needed_checks[layer]:
                members = code.parity_graph[check_id]
                combined = xor_bytes(
                    *(state.known[SymbolId(layer, v)] for v in members)
                )
                if any(combined):
                    target = min(v for v in members if v in desired)
                    proof = self._coding_fraud_proof(layer, check_id, target)
                    self._emit_coding_fraud(proof)
                    return LayerStatus.FRAUD
            return LayerStatus.DONE
        if progressed:
            self._touch()
            return LayerStatus.PROGRESSED
        return LayerStatus.WAITING

    def _find_degree_one(self, layer, code, desired):
        known = self.round.known
        for check_id in self.round.needed_checks[layer]:
            unknown = [
                v
                for v in code.parity_graph[check_id]
                if SymbolId(layer, v) not in known
            ]
            if len(unknown) == 1 and unknown[0] in desired:
                return check_id, unknown[0]
        return None

    def _coding_fraud_proof(self, layer, check_id, index):
        state = self.round
        return cmt.make_coding_fraud_proof(
            layer,
            check_id,
            index,
            state.codes[layer],
            state.lookup,
            prove=self._proof_of,
        )

    def _proof_of(self, sid):
        state = self.round
        if sid in state.proofs:
            return state.proofs[sid]
        return cmt.proof_from_layers(state.lookup, sid)

    def _finish_layer(self, layer):
        state = self.round
        if layer == ROOT_LAYER:
            return
        w = state.shape.data_width(layer)
        for index in range(w, 2 * w):
            state.known.pop(SymbolId(layer, index), None)

    # ----- validation -----

    def _placed(self, position):
        state = self.round
        sid = SymbolId(state.shape.depth, position)
        payload = cmt.unframe_base_symbol(state.known[sid])
        txn = ledger.Transaction.from_bytes(payload)
        proof = ledger.InclusionProof(
            state.height, position, cmt.proof_from_layers(state.lookup, sid)
        )
        return ledger.PlacedTxn(txn, proof)

    def validate_section(self):
        """Validate the node's sections once the bottom layer is decoded.

        Checks ordering around each section range, the section index, then
        every transaction in block order. The first failure is gossiped as
        a fraud proof.

        Returns:

            Optional[object]:
                The fraud proof, or None when the sections are valid.
        """
        state = self.round
        layout = state.layout
        scratch = self.spent.overlay()
        fraud = None
        try:
            for section in dict.fromkeys(state.sections + state.warming):
                fraud = self._validate_one(section, layout, scratch)
                if fraud is not None:
                    break
        except InsufficientChainError as exc:
            logger.error("node %d cannot validate: %s", self.id, exc)
            state.pending_updates.clear()
            return None
        state.validated = True
        if fraud is not None:
            self._emit_fraud(fraud)
        elif state.decided_at is None:
            state.decided_at = self.now
        return fraud

    def _validate_one(self, section, layout, scratch):
        state = self.round
        placed = []
        for position in self._section_positions(layout, state.header, section):
            try:
                placed.append(self._placed(position))
            except (KeyError, ValueError):
                logger.warning(
                    "node %d cannot read base symbol %d", self.id, position
                )
        fraud = ledger.check_sorted(placed, layout.k)
        if fraud is None:
            fraud = ledger.check_section_index(placed, layout)
        if fraud is not None:
            return fraud

        span = layout.section_range(section)
        for item in placed:
            if item.proof.index not in span:
                continue
            check = ledger.validate_transaction(
                item.txn,
                scratch,
                state.chain,
                state.height,
                self.scheme,
                self.params.tau,
                proof=item.proof,
            )
            if not check.ok:
                return check.fraud_proof
            ledger.update_state(item.txn, scratch, item.proof, state.height)
            state.pending_updates.append(item)
        return None

    # ----- fraud proofs -----

    def _reject(self, verdict):
        state = self.round
        if state.rejection is None:
            state.rejection = verdict
            state.decided_at = self.now

    def _emit_fraud(self, proof):
        message = FraudProofMessage(proof)
        self.round.seen_proofs.add(message.key)
        self._reject(Verdict(REJECT, FRAUD_PROOF, artifact=proof))
        logger.info(
            "node %d emits %s at height %d",
            self.id,
            type(proof).__name__,
            self.round.height,
        )
        self.network.broadcast(self.id, message)

    def _emit_coding_fraud(self, proof):
        message = CodingFraudMessage(proof)
        self.round.seen_proofs.add(message.key)
        self._reject(Verdict(REJECT, CODING_FRAUD, layer=proof.layer, artifact=proof))
        logger.info(
            "node %d emits a coding fraud proof for layer %d check %d",
            self.id,
            proof.layer,
            proof.check_id,
        )
        self.network.broadcast(self.id, message)

    def verify_fraud(self, proof):
        """Check a transaction-level fraud proof for the current block."""
        state = self.round
        if isinstance(proof, ledger.FraudProof):
            return proof.height == state.height and ledger.is_valid_fraud_proof(
                proof, state.chain, self.scheme, self.params.tau
            )
        if isinstance(proof, ledger.SortingFraudProof):
            return (
                proof.first.proof.height == state.height
                and ledger.verify_sorting_fraud_proof(proof, state.chain)
            )
        if isinstance(proof, ledger.SectionIndexFraudProof):
            return (
                proof.placed.proof.height == state.height
                and ledger.verify_section_index_fraud_proof(proof, state.chain)
            )
        return False

    def _on_fraud(self, sender, message):
        state = self.round
        if state is None or message.key in state.seen_proofs:
            return
        state.seen_proofs.add(message.key)
        if not self.verify_fraud(message.proof):
            logger.warning("node %d drops an invalid fraud proof", self.id)
            return
        self._reject(Verdict(REJECT, FRAUD_PROOF, artifact=message.proof))
        self.network.broadcast(self.id, message, exclude=(sender,))

    def _on_coding_fraud(self, sender, message):
        state = self.round
        if state is None or message.key in state.seen_proofs:
            return
        state.seen_proofs.add(message.key)
        proof = message.proof
        if not cmt.verify_coding_fraud_proof(
            state.header.root, proof, state.codes
        ):
            logger.warning("node %d drops an invalid coding fraud proof", self.id)
            return
        self._reject(
            Verdict(REJECT, CODING_FRAUD, layer=proof.layer, artifact=proof)
        )
        self.network.broadcast(self.id, message, exclude=(sender,))

    # ----- verdict -----

    def finalize(self, deadline=None):
        """Decide on the current block.

        Reject on a verified fraud proof, a stalled layer or a refused
        header, and on sampling or validation left unfinished at the
        deadline; accept otherwise. Accepting extends the chain and
        applies the section's spent outputs.

        Returns:

            Verdict:
                The decision; unchanged by later calls.
        """
        state = self.round
        if self.verdict is not PENDING_VERDICT:
            return self.verdict
        if state is None:
            reason = SAMPLING_TIMEOUT if self.refused is None else MALFORMED_HEADER
            verdict = Verdict(REJECT, reason)
        elif state.rejection is not None:
            verdict = state.rejection
        elif not state.validated:
            verdict = Verdict(REJECT, SAMPLING_TIMEOUT, layer=state.layer)
            state.decided_at = deadline if deadline is not None else self.now
        else:
            verdict = ACCEPT_VERDICT
            self.chain.append(state.header)
            for item in state.pending_updates:
                ledger.update_state(item.txn, self.spent, item.proof, state.height)
            ledger.prune_expired(self.spent, state.height, self.params.tau)
        self.verdict = verdict
        self.history.append(verdict)
        logger.debug("node %d decides %s", self.id, verdict)
        return verdict

    def verdict_row(self, start=0):
        state = self.round
        network = self.network
        ticks = 0
        stored = 0
        hash_ops = 0
        height = -1
        if state is not None:
            height = state.height
            end = state.decided_at if state.decided_at is not None else self.now
            ticks = max(0, end - start)
            stored = len(state.known)
            hash_ops = state.hash_ops
        return VerdictRow(
            height,
            self.id,
            self.verdict.decision,
            self.verdict.reason or "",
            ticks,
            network.received_bytes(self.id) if network else 0,
            network.sent_bytes(self.id) if network else 0,
            hash_ops,
            stored,
        )


# ----- rounds -----


@dataclass
class RoundResult:
    """Verdicts and accounting of one simulated block."""

    verdicts: Dict[int, Verdict]
    rows: List[VerdictRow]
    network: object
    published_at: int
    deadline: int

    @property
    def honest_decisions(self):
        return {v.decision for v in self.verdicts.values()}

    @property
    def unanimous(self):
        return len(self.honest_decisions) == 1

    def unanimous_decision(self, decision):
        return self.unanimous and decision in self.honest_decisions


def run_round(
    network,
    validators: Mapping[int, ValidatorNode],
    production,
    params,
    seed=0,
    byzantine=None,
):
    """Simulate one block from header to verdicts.

    The header is handed to one random honest node and gossiped. Once
    every interest list can have arrived, each published symbol is handed
    to one random honest node interested in it. Honest nodes decide at the
    deadline.

    Parameters:

        network (Network):
            A fresh network over the round's graph.

        validators (Mapping[int, ValidatorNode]):
            The honest nodes by id.

        production (BlockProduction):
            The miner's header and publication set.

        params (ProtocolParams):
            Protocol parameters.

        seed (int):
            Seed of the header origin and publication placement.

        byzantine (Optional[Mapping[int, object]]):
            Dishonest nodes, each with an `attach(network)` method.

    Returns:

        RoundResult:
            Verdicts and rows of every honest node.
    """
    rng = make_rng(seed, "round")
    graph = network.graph
    for node in validators.values():
        node.attach(network)
    for node in (byzantine or {}).values():
        node.attach(network)

    honest = sorted(validators)
    origin = honest[int(rng.integers(len(honest)))]
    validators[origin].on_new_header(production.header)

    t_stall = params.stall_ticks(graph.N)
    published_at = t_stall
    depth = cmt.TreeShape.for_count(production.header.length).depth
    deadline = published_at + params.deadline_ticks(depth, graph.N)

    def publish():
        for node in honest:
            validators[node].start_watchdog()
        for share in production.publications:
            holders = [n for n in honest if share.id in validators[n].interests]
            if holders:
                chosen = holders[int(rng.integers(len(holders)))]
                validators[chosen].receive_publication(share)

    network.at(published_at, publish)
    network.run(until=deadline)
    verdicts = {n: validators[n].finalize(deadline) for n in honest}
    rows = [validators[n].verdict_row(published_at) for n in honest]
    logger.info(
        "block %d: %s",
        production.header.height,
        ", ".join(
            f"{d}={sum(v.decision == d for v in verdicts.values())}"
            for d in (ACCEPT, REJECT)
        ),
    )
    return RoundResult(verdicts, rows, network, published_at, deadline)
