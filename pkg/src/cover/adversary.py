"""
    Scripted miners and Byzantine validators.

    A miner strategy turns pending transactions into a `BlockProduction`:
    the block, its header, the symbols actually published, and the ground
    truth an audit needs (hidden symbols, the corrupted symbol, the
    invalid transaction).

    A Byzantine strategy decides what a dishonest node sends in response
    to each message it receives. Fakes are well formed but can never
    verify, since they cannot forge digests.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import ClassVar, FrozenSet, Optional, Tuple

from cover import cmt, ldpc, ledger
from cover.cmt import SymbolId, SymbolProof, SymbolShare
from cover.constants import (
    BAD_INPUT_PROOF,
    BAD_SIG,
    BAD_SUM,
    CODING_FRAUD_MINER,
    DEFAULT_D_L,
    DEFAULT_D_R,
    DEFAULT_SYMBOL_SIZE,
    DOUBLE_SPEND,
    DROP_SELECTIVE,
    EXHAUSTIVE_LIMIT,
    EXPIRED,
    FAKE_FRAUD_PROOF_SPAM,
    FAKE_SYMBOL_SPAM,
    HIDE_STOPPING_SET,
    HONEST,
    INVALID_TXN,
    INVALID_TXN_CLASSES,
    SILENT,
    UNSORTED,
    WITHHOLD_RANDOM,
)
from cover.errors import ConfigError, StoppingSetError
from cover.netsim import (
    CodingFraudMessage,
    FraudProofMessage,
    HeaderMessage,
    Relay,
    SymbolMessage,
)
from cover.publisher import Channel
from cover.utility import make_rng, xor_bytes

logger = logging.getLogger(__name__)


# ----- miner strategies -----


class MinerStrategy:
    kind: ClassVar[str]

    def as_dict(self):
        data = {"kind": self.kind}
        for name, value in self.__dict__.items():
            data[name] = list(value) if isinstance(value, tuple) else value
        return data


@dataclass(frozen=True)
class Honest(MinerStrategy):
    kind: ClassVar[str] = HONEST


@dataclass(frozen=True)
class HideStoppingSet(MinerStrategy):
    """Withhold a stopping set of one layer.

    An empty `symbols` picks a smallest stopping set: exhaustively on
    small layers, otherwise the smallest grown witness. `layer` None is the
    bottom layer.
    """

    kind: ClassVar[str] = HIDE_STOPPING_SET
    layer: Optional[int] = None
    symbols: Tuple[int, ...] = ()


@dataclass(frozen=True)
class CodingFraud(MinerStrategy):
    """Corrupt one member of a parity and recommit the layers above.

    The member defaults to the one in the fewest parities, ties broken
    towards the highest index. `corruption` is XORed into the start of
    its payload.
    """

    kind: ClassVar[str] = CODING_FRAUD_MINER
    layer: Optional[int] = None
    check_id: int = 0
    corruption: bytes = b"\x01"
    index: Optional[int] = None

    def as_dict(self):
        data = super().as_dict()
        data["corruption"] = self.corruption.hex()
        return data


@dataclass(frozen=True)
class InvalidTxn(MinerStrategy):
    kind: ClassVar[str] = INVALID_TXN
    txn_class: str = BAD_SIG


@dataclass(frozen=True)
class WithholdRandom(MinerStrategy):
    """Omit each symbol independently with probability `fraction`.

    None uses 90% of the bottom layer's stopping fraction.
    """

    kind: ClassVar[str] = WITHHOLD_RANDOM
    fraction: Optional[float] = None


MINER_STRATEGIES = {
    cls.kind: cls
    for cls in (Honest, HideStoppingSet, CodingFraud, InvalidTxn, WithholdRandom)
}


def miner_strategy_from_dict(data):
    """Parse a scenario file entry such as `{"kind": "invalid_txn",
    "txn_class": "double_spend"}`.

    Raises:

        ConfigError:
            On an unknown kind or parameter.
    """
    if isinstance(data, str):
        data = {"kind": data}
    data = dict(data)
    kind = data.pop("kind", None)
    cls = MINER_STRATEGIES.get(kind)
    if cls is None:
        raise ConfigError([f"unknown miner strategy {kind!r}"])
    if "symbols" in data:
        data["symbols"] = tuple(data["symbols"])
    if "corruption" in data:
        data["corruption"] = bytes.fromhex(data["corruption"])
    try:
        strategy = cls(**data)
    except TypeError as exc:
        raise ConfigError([f"miner strategy {kind}: {exc}"]) from None
    if isinstance(strategy, InvalidTxn) and strategy.txn_class not in INVALID_TXN_CLASSES:
        raise ConfigError([f"unknown invalid transaction class {strategy.txn_class!r}"])
    if isinstance(strategy, WithholdRandom) and strategy.fraction is not None:
        if not 0 <= strategy.fraction <= 1:
            raise ConfigError(["withhold fraction must lie in [0, 1]"])
    return strategy


# ----- block production -----


@dataclass(frozen=True)
class MinerContext:
    """What a miner knows beyond the pending transactions.

    Attributes:

        scheme (SignatureScheme):
            Signs the transactions the miner forges.

        keys (Mapping[bytes, KeyPair]):
            Keys by account.

        history (Sequence[Block]):
            Every earlier block, indexed by height.

        k (int):
            Number of sections.
    """

    scheme: ledger.SignatureScheme
    keys: dict = field(repr=False)
    history: tuple = field(repr=False)
    k: int = 1
    symbol_size: int = DEFAULT_SYMBOL_SIZE
    code_seed: int = 0
    d_L: int = DEFAULT_D_L
    d_R: int = DEFAULT_D_R
    tau: Optional[int] = None
    seed: int = 0

    @property
    def tip(self):
        return self.history[-1].header if self.history else None

    @property
    def height(self):
        return len(self.history)


@dataclass(frozen=True)
class BlockProduction:
    """A produced block with the publication set and the ground truth."""

    strategy: MinerStrategy
    block: ledger.Block
    publications: Tuple[SymbolShare, ...] = field(repr=False)
    hidden: FrozenSet[SymbolId] = frozenset()
    corrupted: Optional[SymbolId] = None
    invalid_txn: Optional[ledger.Transaction] = None

    @property
    def header(self):
        return self.block.header

    @property
    def tree(self):
        return self.block.tree

    @property
    def published_ids(self):
        return frozenset(share.id for share in self.publications)


def _victim(transactions):
    for position, txn in enumerate(transactions):
        if not txn.is_mint and txn.inputs:
            return position, txn
    raise ValueError("no spending transaction to corrupt")


def _resign(txn, context):
    return txn.signed(context.scheme, context.keys[txn.sender])


def _invalid_transactions(txn_class, transactions, context):
    """Return the transaction list with one invalid transaction of the
    given class, and that transaction."""
    txns = list(transactions)
    position, victim = _victim(txns)
    if txn_class == BAD_SIG:
        signature = bytearray(victim.signature)
        signature[0] ^= 0x01
        bad = replace(victim, signature=bytes(signature))
    elif txn_class == BAD_SUM:
        outputs = list(victim.outputs)
        outputs[0] = ledger.TxOutput(outputs[0].recipient, outputs[0].amount + 1)
        bad = _resign(replace(victim, outputs=tuple(outputs)), context)
    elif txn_class == BAD_INPUT_PROOF:
        first = victim.input_proofs[0]
        inclusion = first.inclusion
        moved = replace(inclusion, index=inclusion.index + 1)
        proofs = (replace(first, inclusion=moved),) + victim.input_proofs[1:]
        bad = replace(victim, input_proofs=proofs)
    elif txn_class == DOUBLE_SPEND:
        keypair = context.keys[victim.sender]
        others = [a for a in sorted(context.keys) if a != victim.sender]
        recipient = others[0] if others else victim.sender
        total = sum(amount for _, amount in victim.outputs)
        bad = replace(
            victim,
            outputs=(ledger.TxOutput(recipient, total),),
        ).signed(context.scheme, keypair)
        txns.insert(position + 1, bad)
        return txns, bad
    elif txn_class == EXPIRED:
        oldest = min(p.inclusion.height for p in victim.input_proofs)
        if context.tau is None or context.height - oldest <= context.tau:
            raise ValueError(
                "an expired spend needs the block more than tau above its funding"
            )
        bad = victim
    else:
        raise ValueError(f"unknown invalid transaction class {txn_class!r}")
    txns[position] = bad
    return txns, bad


def _unsorted(transactions, k):
    txns = sorted(transactions, key=lambda t: ledger.sort_key(t, k))
    for i in range(len(txns) - 1):
        if ledger.sort_key(txns[i], k) != ledger.sort_key(txns[i + 1], k):
            txns[i], txns[i + 1] = txns[i + 1], txns[i]
            return txns, txns[i]
    raise ValueError("an unsorted block needs two distinct senders")


def coding_fraud_target(code, check_id):
    """The member of `check_id` in the fewest parities, highest index on
    ties."""
    members = code.parity_graph[check_id]
    return max(members, key=lambda v: (-len(code.symbol_checks[v]), v))


def choose_stopping_set(code, symbols=()):
    """The given symbols, checked, or a smallest stopping set found."""
    if symbols:
        chosen = frozenset(symbols)
        if not ldpc.is_stopping_set(code, chosen):
            raise StoppingSetError("not a stopping set")
        return chosen
    if code.length <= EXHAUSTIVE_LIMIT:
        _, sets = ldpc.stopping_sets_exhaustive(code)
        return sets[0]
    _, witness = ldpc.estimate_stopping_fraction(code)
    return witness


def stopping_fraction(code):
    """Measured `f_min` when small enough, else the grown-witness bound."""
    if code.f_min is not None:
        return code.f_min
    if code.length <= EXHAUSTIVE_LIMIT:
        return ldpc.stopping_sets_exhaustive(code)[0]
    return ldpc.estimate_stopping_fraction(code)[0]


def produce_block(strategy, transactions, context):
    """Build and publish a block the way `strategy` dictates.

    Parameters:

        strategy (MinerStrategy):
            The miner's behavior for this block.

        transactions (Sequence[Transaction]):
            The pending transactions.

        context (MinerContext):
            Keys, earlier blocks and block parameters.

    Returns:

        BlockProduction:
            The block, what was published, and the ground truth.

    Raises:

        StoppingSetError:
            When a hidden set is not a stopping set.

        ValueError:
            When the strategy does not fit the block.
    """
    options = dict(
        k=context.k,
        symbol_size=context.symbol_size,
        code_seed=context.code_seed,
        d_L=context.d_L,
        d_R=context.d_R,
    )
    txns = list(transactions)
    invalid = None
    sort = True
    if isinstance(strategy, InvalidTxn):
        if strategy.txn_class == UNSORTED:
            txns, invalid = _unsorted(txns, context.k)
            sort = False
        else:
            txns, invalid = _invalid_transactions(
                strategy.txn_class, txns, context
            )
    block = ledger.assemble_block(txns, context.tip, sort=sort, **options)
    tree = block.tree
    hidden = frozenset()
    corrupted = None

    if isinstance(strategy, CodingFraud):
        layer = strategy.layer or tree.depth
        if layer < 2 or layer > tree.depth:
            raise ValueError(f"layer {layer} has no parity to corrupt")
        code = tree.codes[layer]
        if not 0 <= strategy.check_id < code.n:
            raise ValueError(f"check {strategy.check_id} outside layer {layer}")
        index = strategy.index
        if index is None:
            index = coding_fraud_target(code, strategy.check_id)
        elif index not in code.parity_graph[strategy.check_id]:
            raise ValueError(f"symbol {index} is not in check {strategy.check_id}")
        corrupted = SymbolId(layer, index)
        payload = tree.symbol(corrupted)
        mask = strategy.corruption[: len(payload)].ljust(len(payload), b"\x00")
        if not any(mask):
            raise ValueError("corruption must change the symbol")
        tree = cmt.recommit(tree, corrupted, xor_bytes(payload, mask))
        header = replace(block.header, root=tree.root_commitment)
        block = ledger.Block(header, block.transactions, tree)
    elif isinstance(strategy, HideStoppingSet):
        layer = strategy.layer or tree.depth
        if layer < 2 or layer > tree.depth:
            raise ValueError(f"layer {layer} is not coded")
        chosen = choose_stopping_set(tree.codes[layer], strategy.symbols)
        hidden = frozenset(SymbolId(layer, v) for v in chosen)
    elif isinstance(strategy, WithholdRandom):
        fraction = strategy.fraction
        if fraction is None:
            fraction = 0.9 * stopping_fraction(tree.codes[tree.depth])
        rng = make_rng(context.seed, "withhold", block.height)
        ids = list(tree.shape.all_ids())
        hidden = frozenset(
            sid for sid, u in zip(ids, rng.random(len(ids))) if u < fraction
        )

    publications = tuple(
        share for share in tree.shares() if share.id not in hidden
    )
    logger.info(
        "miner %s produced block %d: %d transactions, %d of %d symbols published",
        strategy.kind,
        block.height,
        len(block.transactions),
        len(publications),
        tree.shape.size,
    )
    return BlockProduction(
        strategy, block, publications, hidden, corrupted, invalid
    )


# ----- byzantine strategies -----


class ByzantineStrategy:
    kind: ClassVar[str]

    def as_dict(self):
        return {"kind": self.kind, **self.__dict__}


@dataclass(frozen=True)
class Silent(ByzantineStrategy):
    kind: ClassVar[str] = SILENT


@dataclass(frozen=True)
class DropSelective(ByzantineStrategy):
    """Relay everything except symbols on `layer` (every layer when None)
    drawn with probability `fraction`."""

    kind: ClassVar[str] = DROP_SELECTIVE
    layer: Optional[int] = None
    fraction: float = 1.0

    def drops(self, sid, rng):
        if self.layer is not None and sid.layer != self.layer:
            return False
        return rng.random() < self.fraction


@dataclass(frozen=True)
class FakeSymbolSpam(ByzantineStrategy):
    """Relay, and answer every symbol with `rate` forgeries of it."""

    kind: ClassVar[str] = FAKE_SYMBOL_SPAM
    rate: int = 1


@dataclass(frozen=True)
class FakeFraudProofSpam(ByzantineStrategy):
    """Relay, and answer every header and symbol with `rate` forged
    fraud proofs, alternating transaction and coding ones."""

    kind: ClassVar[str] = FAKE_FRAUD_PROOF_SPAM
    rate: int = 1


BYZANTINE_STRATEGIES = {
    cls.kind: cls
    for cls in (Silent, DropSelective, FakeSymbolSpam, FakeFraudProofSpam)
}


def byzantine_strategy_from_dict(data):
    if isinstance(data, str):
        data = {"kind": data}
    data = dict(data)
    kind = data.pop("kind", None)
    cls = BYZANTINE_STRATEGIES.get(kind)
    if cls is None:
        raise ConfigError([f"unknown byzantine strategy {kind!r}"])
    try:
        strategy = cls(**data)
    except TypeError as exc:
        raise ConfigError([f"byzantine strategy {kind}: {exc}"]) from None
    if getattr(strategy, "rate", 1) < 0:
        raise ConfigError(["spam rate must be nonnegative"])
    return strategy


def _fake_share(share, rng):
    payload = rng.bytes(len(share.payload))
    return SymbolShare(share.id, payload, share.proof)


def _fake_proof(height, depth, size, rng, coding):
    if coding:
        return cmt.CodingFraudProof(
            depth,
            0,
            0,
            rng.bytes(size),
            rng.bytes(32),
            SymbolProof(),
            (),
        )
    forged = ledger.mint_transaction([(rng.bytes(32), 1)])
    return ledger.FraudProof(
        forged, ledger.InclusionProof(height, 0, SymbolProof())
    )


def byzantine_behavior(strategy, message, rng, header=None):
    """Messages a dishonest node sends after receiving `message`.

    Parameters:

        strategy (ByzantineStrategy):
            The node's behavior.

        message:
            The received message.

        rng (numpy.random.Generator):
            The node's random stream.

        header (Optional[Header]):
            The block being disseminated; forged proofs target it.

    Returns:

        List:
            Messages to send: the received message itself when relayed,
            plus forgeries.
    """
    if isinstance(strategy, Silent):
        return []
    out = []
    is_symbol = isinstance(message, SymbolMessage)
    if isinstance(strategy, DropSelective):
        if not (is_symbol and strategy.drops(message.share.id, rng)):
            out.append(message)
        return out
    if isinstance(message, (HeaderMessage, SymbolMessage)):
        out.append(message)
    if isinstance(strategy, FakeSymbolSpam) and is_symbol:
        for _ in range(strategy.rate):
            out.append(SymbolMessage(_fake_share(message.share, rng)))
    if isinstance(strategy, FakeFraudProofSpam) and header is not None:
        if isinstance(message, (HeaderMessage, SymbolMessage)):
            depth = header.shape.depth
            size = header.layout.symbol_size
            for i in range(strategy.rate):
                fake = _fake_proof(header.height, depth, size, rng, i % 2 == 1)
                if i % 2:
                    out.append(CodingFraudMessage(fake))
                else:
                    out.append(FraudProofMessage(fake))
    return out


class ByzantineNode:
    """A dishonest node on the simulated network.

    It registers interest in every symbol of each header it sees, then
    acts on every message through `byzantine_behavior`. Relayed symbols
    reach only interested neighbors; everything else is broadcast.
    """

    def __init__(self, node_id, strategy, seed=0):
        self.id = node_id
        self.strategy = strategy
        self.rng = make_rng(seed, "byzantine", node_id)
        self.network = None
        self.relay = None
        self.header = None
        self.received = 0
        self.seen = set()

    def attach(self, network):
        self.network = network
        self.relay = Relay(network, self.id)
        self.header = None
        self.seen = set()
        network.subscribe(self.id, Channel.INTEREST, self.relay.register)
        for channel in (
            Channel.HEADER,
            Channel.SYMBOL,
            Channel.FRAUD_PROOF,
            Channel.CODING_FRAUD,
        ):
            network.subscribe(self.id, channel, self.on_message)

    def on_message(self, sender, message):
        self.received += 1
        if isinstance(message, HeaderMessage):
            if self.header == message.header:
                return
            self.header = message.header
            if not isinstance(self.strategy, Silent):
                shape = cmt.TreeShape.for_count(message.header.length)
                self.relay.announce(shape.all_ids())
        elif isinstance(message, SymbolMessage):
            if message.share.id in self.relay.held:
                return
        elif message.key in self.seen:
            return
        else:
            self.seen.add(message.key)
        outgoing = byzantine_behavior(
            self.strategy, message, self.rng, self.header
        )
        for out in outgoing:
            if out is message and isinstance(out, SymbolMessage):
                self.relay.hold(out.share, exclude=sender)
            else:
                self.network.broadcast(self.id, out, exclude=(sender,))
