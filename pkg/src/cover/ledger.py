"""
    Ledger data model: transactions with input proofs, blocks and headers,
    transaction validation against a spent-output table, state updates,
    expiry, and transaction fraud proofs.

    A transaction's inputs each carry an `InputProof`: the full funding
    transaction and an `InclusionProof` placing it in the coded Merkle tree
    of an earlier block. Validation runs four checks in order:

    1. `signature` - the sender signed the txid, within the size caps;
    2. `sums` - inputs exist, belong to the sender and sum to the outputs;
    3. `input_proofs` - every funding transaction is committed in the
       header it claims and has not expired;
    4. `spent` - no input is already in the spent-output table.

    Any failure produces a `FraudProof` that a node holding only the header
    chain can check with `is_valid_fraud_proof`.
"""
import hashlib
import hmac
import logging
from abc import ABC, abstractmethod
from collections import ChainMap
from dataclasses import dataclass, field, replace
from typing import Dict, NamedTuple, Optional, Sequence, Tuple

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.serialization import (
    Encoding,
    PublicFormat,
)

from cover import cmt
from cover.constants import (
    ACCOUNT_SIZE,
    CHECK_INPUT_PROOFS,
    CHECK_SIGNATURE,
    CHECK_SPENT,
    CHECK_SUMS,
    DEFAULT_D_L,
    DEFAULT_D_R,
    DEFAULT_SYMBOL_SIZE,
    DIGEST_SIZE,
    MAX_AMOUNT,
    MAX_TXN_INPUTS,
    MAX_TXN_OUTPUTS,
    NEVER_EXPIRES,
)
from cover.errors import ConflictingStateError, InsufficientChainError
from cover.hashcommit import Reader, Writer, digest

logger = logging.getLogger(__name__)

ZERO_DIGEST = bytes(DIGEST_SIZE)
MINT_ACCOUNT = bytes(ACCOUNT_SIZE)


# ----- signatures -----


class KeyPair(NamedTuple):
    account: bytes
    secret: bytes


class SignatureScheme(ABC):
    """Signs txids on behalf of accounts.

    Accounts are 32-byte public identities.
    """

    @abstractmethod
    def keypair(self, label):
        """Return the deterministic `KeyPair` for `label`."""

    @abstractmethod
    def sign(self, keypair, message):
        """Sign `message` with `keypair`."""

    @abstractmethod
    def verify(self, account, message, signature):
        """True iff `signature` is `account`'s signature of `message`."""


class Ed25519Scheme(SignatureScheme):
    """Ed25519 signatures; the account is the raw public key."""

    def keypair(self, label):
        seed = digest(str(label).encode(), b"ed25519-seed")
        private = Ed25519PrivateKey.from_private_bytes(seed)
        account = private.public_key().public_bytes(
            Encoding.Raw, PublicFormat.Raw
        )
        return KeyPair(account, seed)

    def sign(self, keypair, message):
        return Ed25519PrivateKey.from_private_bytes(keypair.secret).sign(
            message
        )

    def verify(self, account, message, signature):
        try:
            Ed25519PublicKey.from_public_bytes(account).verify(
                signature, message
            )
        except (InvalidSignature, ValueError, TypeError):
            return False
        return True


class KeyedTestScheme(SignatureScheme):
    """Deterministic keyed-hash tags for golden vectors.

    Only accounts created through this instance can be verified.
    """

    def __init__(self):
        self._secrets: Dict[bytes, bytes] = {}

    def keypair(self, label):
        secret = digest(str(label).encode(), b"test-secret")
        account = digest(secret, b"test-account")
        self._secrets[account] = secret
        return KeyPair(account, secret)

    def sign(self, keypair, message):
        return hmac.new(keypair.secret, message, hashlib.sha256).digest()

    def verify(self, account, message, signature):
        secret = self._secrets.get(bytes(account))
        if secret is None:
            return False
        expected = hmac.new(secret, message, hashlib.sha256).digest()
        return hmac.compare_digest(expected, bytes(signature))


# ----- transactions -----


class TxOutput(NamedTuple):
    recipient: bytes
    amount: int


class TxInput(NamedTuple):
    txid: bytes
    output_index: int


@dataclass(frozen=True)
class InclusionProof:
    """Proof that a transaction is base symbol `index` of block `height`."""

    height: int
    index: int
    symbol_proof: cmt.SymbolProof

    def to_bytes(self):
        w = Writer().u64(self.height).u32(self.index)
        return w.raw(self.symbol_proof.to_bytes()).getvalue()

    @classmethod
    def read(cls, reader):
        height, index = reader.u64(), reader.u32()
        return cls(height, index, cmt.SymbolProof.read(reader))

    @classmethod
    def from_bytes(cls, data):
        reader = Reader(data)
        proof = cls.read(reader)
        reader.expect_end()
        return proof


@dataclass(frozen=True)
class InputProof:
    inclusion: InclusionProof
    funding: bytes

    def to_bytes(self):
        return Writer().raw(self.inclusion.to_bytes()).blob(
            self.funding
        ).getvalue()

    @classmethod
    def read(cls, reader):
        inclusion = InclusionProof.read(reader)
        return cls(inclusion, reader.blob())


@dataclass(frozen=True)
class Transaction:
    """A signed transfer.

    Attributes:

        sender (bytes):
            The spending account.

        outputs (Tuple[TxOutput, ...]):
            Recipients and amounts, indexed from 0.

        inputs (Tuple[TxInput, ...]):
            The spent outputs.

        signature (bytes):
            The sender's signature of `txid`.

        input_proofs (Tuple[InputProof, ...]):
            One proof per input, in input order.
    """

    sender: bytes
    outputs: Tuple[TxOutput, ...]
    inputs: Tuple[TxInput, ...] = ()
    signature: bytes = b""
    input_proofs: Tuple[InputProof, ...] = ()

    def core_bytes(self):
        w = Writer().raw(self.sender).u16(len(self.outputs))
        for recipient, amount in self.outputs:
            w.raw(recipient).u64(amount)
        w.u16(len(self.inputs))
        for txid, index in self.inputs:
            w.raw(txid).u16(index)
        return w.getvalue()

    @property
    def txid(self):
        return digest(self.core_bytes())

    def to_bytes(self):
        w = Writer().raw(self.core_bytes()).blob(self.signature)
        w.u16(len(self.input_proofs))
        for proof in self.input_proofs:
            w.raw(proof.to_bytes())
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data):
        reader = Reader(data)
        sender = reader.raw(ACCOUNT_SIZE)
        outputs = tuple(
            TxOutput(reader.raw(ACCOUNT_SIZE), reader.u64())
            for _ in range(reader.u16())
        )
        inputs = tuple(
            TxInput(reader.raw(DIGEST_SIZE), reader.u16())
            for _ in range(reader.u16())
        )
        signature = reader.blob()
        proofs = tuple(InputProof.read(reader) for _ in range(reader.u16()))
        reader.expect_end()
        return cls(sender, outputs, inputs, signature, proofs)

    @property
    def is_mint(self):
        return self.sender == MINT_ACCOUNT and not self.inputs

    def signed(self, scheme, keypair):
        return replace(self, signature=scheme.sign(keypair, self.txid))


def make_transaction(scheme, keypair, outputs, funding=()):
    """Build and sign a transaction.

    Parameters:

        scheme (SignatureScheme):
            The signature scheme.

        keypair (KeyPair):
            The sender's keys.

        outputs (Sequence[Tuple[bytes, int]]):
            `(recipient, amount)` pairs.

        funding (Sequence[Tuple[Transaction, int, InclusionProof]]):
            Spent outputs as `(funding transaction, output index, its
            inclusion proof)`.

    Returns:

        Transaction:
            The signed transaction.
    """
    txn = Transaction(
        keypair.account,
        tuple(TxOutput(bytes(r), int(a)) for r, a in outputs),
        tuple(TxInput(f.txid, j) for f, j, _ in funding),
        b"",
        tuple(InputProof(p, f.to_bytes()) for f, _, p in funding),
    )
    return txn.signed(scheme, keypair)


def mint_transaction(outputs):
    """An unsigned input-less transaction from the mint account."""
    return Transaction(
        MINT_ACCOUNT, tuple(TxOutput(bytes(r), int(a)) for r, a in outputs)
    )


def section_of(sender, k):
    """Section of a sender: `k` equal contiguous ranges of the 256-bit
    account space."""
    if k < 1:
        raise ValueError("k must be at least 1")
    return int.from_bytes(bytes(sender), "big") * k >> (8 * ACCOUNT_SIZE)


def sort_key(txn, k):
    return section_of(txn.sender, k), bytes(txn.sender)


# ----- headers and blocks -----


@dataclass(frozen=True)
class BlockLayout:
    """Block parameters carried in a header's `other` field.

    `offsets` has `k + 1` entries: section `s` occupies base positions
    `[offsets[s], offsets[s + 1])`.
    """

    symbol_size: int
    code_seed: int
    d_L: int
    d_R: int
    offsets: Tuple[int, ...]

    @property
    def k(self):
        return len(self.offsets) - 1

    def section_range(self, section):
        return range(self.offsets[section], self.offsets[section + 1])

    def section_at(self, position):
        for section in range(self.k):
            if position in self.section_range(section):
                return section
        return None

    def to_bytes(self):
        w = Writer().u32(self.symbol_size).u64(self.code_seed)
        w.u32(self.d_L).u32(self.d_R).u32(len(self.offsets))
        for offset in self.offsets:
            w.u32(offset)
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data):
        reader = Reader(data)
        size, seed = reader.u32(), reader.u64()
        d_L, d_R = reader.u32(), reader.u32()
        offsets = tuple(reader.u32() for _ in range(reader.u32()))
        reader.expect_end()
        return cls(size, seed, d_L, d_R, offsets)


@dataclass(frozen=True)
class Header:
    prev_hash: bytes
    root: bytes
    length: int
    height: int
    other: bytes = b""

    def to_bytes(self):
        w = Writer().raw(self.prev_hash).raw(self.root)
        w.u32(self.length).u64(self.height).blob(self.other)
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data):
        reader = Reader(data)
        header = cls(
            reader.raw(DIGEST_SIZE),
            reader.raw(DIGEST_SIZE),
            reader.u32(),
            reader.u64(),
            reader.blob(),
        )
        reader.expect_end()
        return header

    @property
    def hash(self):
        return digest(self.to_bytes())

    @property
    def layout(self):
        return BlockLayout.from_bytes(self.other)

    @property
    def shape(self):
        return cmt.TreeShape.for_count(self.length)

    def codes(self):
        layout = self.layout
        return cmt.make_codes(
            self.shape.L, layout.code_seed, layout.d_L, layout.d_R
        )


class HeaderChain:
    """Headers by height; each appended header must link to its
    predecessor when the predecessor is present."""

    def __init__(self, headers=()):
        self._headers: Dict[int, Header] = {}
        for header in headers:
            self.append(header)

    def extends(self, header):
        if header.height in self._headers:
            return False
        previous = self._headers.get(header.height - 1)
        if previous is None:
            return not self._headers or header.height == 0
        return header.prev_hash == previous.hash

    def append(self, header):
        if not self.extends(header):
            raise ValueError(
                f"header at height {header.height} does not extend the chain"
            )
        self._headers[header.height] = header

    def get(self, height):
        return self._headers.get(height)

    def require(self, height):
        header = self._headers.get(height)
        if header is None:
            raise InsufficientChainError(
                f"insufficient chain: no header at height {height}"
            )
        return header

    @property
    def tip(self):
        return self._headers[max(self._headers)] if self._headers else None

    def __contains__(self, height):
        return height in self._headers

    def __len__(self):
        return len(self._headers)

    def copy(self):
        chain = HeaderChain()
        chain._headers = dict(self._headers)
        return chain


@dataclass(frozen=True)
class Block:
    header: Header
    transactions: Tuple[Transaction, ...]
    tree: cmt.CodedMerkleTree = field(repr=False, compare=False)

    @property
    def height(self):
        return self.header.height

    @property
    def layout(self):
        return self.header.layout

    def inclusion_proof(self, position):
        sid = cmt.SymbolId(self.tree.depth, position)
        return InclusionProof(
            self.height, position, cmt.symbol_proof(self.tree, sid)
        )

    def position_of(self, txn):
        return self.transactions.index(txn)

    def section_transactions(self, section):
        return [
            (position, self.transactions[position])
            for position in self.layout.section_range(section)
        ]


def section_offsets(transactions, k):
    counts = [0] * k
    for txn in transactions:
        counts[section_of(txn.sender, k)] += 1
    offsets = [0]
    for count in counts:
        offsets.append(offsets[-1] + count)
    return tuple(offsets)


def assemble_block(
    transactions,
    prev_header,
    k=1,
    symbol_size=DEFAULT_SYMBOL_SIZE,
    code_seed=0,
    d_L=DEFAULT_D_L,
    d_R=DEFAULT_D_R,
    sort=True,
    codes=None,
):
    """Frame, order and commit a block's transactions.

    Parameters:

        transactions (Sequence[Transaction]):
            The block's transactions.

        prev_header (Optional[Header]):
            The previous header; None for height 0.

        k (int):
            Number of sections recorded in the section index.

        symbol_size (int):
            Base-symbol size in bytes.

        code_seed (int):
            Seed of the block's per-layer codes.

        sort (bool):
            Order by `(section, sender)`; disabled only to build unsorted
            blocks on purpose.

        codes (Mapping[int, LdpcCode]):
            Optional explicit per-layer codes.

    Returns:

        Block:
            The block with its header and tree.
    """
    txns = list(transactions)
    if sort:
        txns.sort(key=lambda t: sort_key(t, k))
    symbols = [cmt.frame_base_symbol(t.to_bytes(), symbol_size) for t in txns]
    if not symbols:
        symbols = [cmt.padding_symbol(symbol_size)]
    tree = cmt.build_tree(symbols, code_seed, d_L, d_R, codes=codes)
    layout = BlockLayout(
        symbol_size, code_seed, d_L, d_R, section_offsets(txns, k)
    )
    height = 0 if prev_header is None else prev_header.height + 1
    prev_hash = ZERO_DIGEST if prev_header is None else prev_header.hash
    header = Header(
        prev_hash, tree.root_commitment, len(txns), height, layout.to_bytes()
    )
    logger.debug("assembled block %d with %d transactions", height, len(txns))
    return Block(header, tuple(txns), tree)


def genesis_block(allocations, **options):
    """Height-0 block of one mint transaction per `(account, amount)`."""
    mints = [mint_transaction([(account, amount)]) for account, amount in allocations]
    return assemble_block(mints, None, **options)


def verify_inclusion(proof, txn_bytes, chain):
    """Check an inclusion proof against the header chain.

    Raises:

        InsufficientChainError:
            When the chain has no header at `proof.height`.
    """
    header = chain.require(proof.height)
    try:
        if not 0 <= proof.index < header.length:
            return False
        layout = header.layout
        framed = cmt.frame_base_symbol(txn_bytes, layout.symbol_size)
        sid = cmt.SymbolId(header.shape.depth, proof.index)
        return cmt.verify_symbol(header.root, sid, framed, proof.symbol_proof)
    except (AttributeError, TypeError, ValueError):
        return False


# ----- spent outputs -----


class SpentEntry(NamedTuple):
    txn: Transaction
    proof: InclusionProof
    height: int


class SpentTxoTable:
    """Map from spent outputs `(txid, output_index)` to their spender."""

    def __init__(self, entries=None):
        self._entries = ChainMap(dict(entries or {}))

    def __contains__(self, key):
        return tuple(key) in self._entries

    def __len__(self):
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def get(self, key):
        return self._entries.get(tuple(key))

    def items(self):
        return self._entries.items()

    def snapshot(self):
        """Plain dict of the entries, for comparing tables."""
        return dict(self._entries)

    def overlay(self):
        """A scratch table whose writes do not reach this one."""
        table = SpentTxoTable()
        table._entries = self._entries.new_child()
        return table

    def conflicts(self, key, txid):
        current = self._entries.get(tuple(key))
        return current is not None and current.txn.txid != txid

    def insert(self, key, entry):
        key = tuple(key)
        if self.conflicts(key, entry.txn.txid):
            raise ConflictingStateError(
                f"conflicting state: output {key[0].hex()[:16]}:{key[1]} "
                "already spent"
            )
        self._entries[key] = entry

    def remove_where(self, predicate):
        """Drop this table's own entries matching `predicate`.

        An overlay only drops what was written to it; the table it was
        made from is left alone.
        """
        own = self._entries.maps[0]
        doomed = [key for key, entry in own.items() if predicate(key, entry)]
        for key in doomed:
            del own[key]
        return len(doomed)


def update_state(txn, spent, proof, height):
    """Record every input of a validated transaction as spent.

    Nothing is written unless every input can be.

    Raises:

        ConflictingStateError:
            When an input is already spent by another transaction.
    """
    for txin in txn.inputs:
        if spent.conflicts(txin, txn.txid):
            raise ConflictingStateError(
                f"conflicting state: output {txin.txid.hex()[:16]}:"
                f"{txin.output_index} already spent"
            )
    entry = SpentEntry(txn, proof, height)
    for txin in txn.inputs:
        spent.insert(txin, entry)


def prune_expired(spent, current_height, tau):
    """Drop entries spent before `current_height - tau`.

    Returns:

        int:
            The number of entries removed.
    """
    if tau is NEVER_EXPIRES:
        return 0
    if tau < 1:
        raise ValueError("tau must be at least 1")
    cutoff = current_height - tau
    removed = spent.remove_where(lambda key, entry: entry.height < cutoff)
    if removed:
        logger.debug("pruned %d spent outputs below height %d", removed, cutoff)
    return removed


# ----- validation and fraud proofs -----


@dataclass(frozen=True)
class FraudProof:
    """Evidence that a committed transaction is invalid.

    `past_txn` and `past_proof` are present for double spends only.
    """

    invalid_txn: Transaction
    invalid_proof: InclusionProof
    past_txn: Optional[Transaction] = None
    past_proof: Optional[InclusionProof] = None

    @property
    def height(self):
        return self.invalid_proof.height

    def to_bytes(self):
        w = Writer().blob(self.invalid_txn.to_bytes())
        w.raw(self.invalid_proof.to_bytes())
        if self.past_txn is None:
            return w.u8(0).getvalue()
        w.u8(1).blob(self.past_txn.to_bytes())
        return w.raw(self.past_proof.to_bytes()).getvalue()

    @classmethod
    def from_bytes(cls, data):
        reader = Reader(data)
        txn = Transaction.from_bytes(reader.blob())
        proof = InclusionProof.read(reader)
        past = past_proof = None
        if reader.u8():
            past = Transaction.from_bytes(reader.blob())
            past_proof = InclusionProof.read(reader)
        reader.expect_end()
        return cls(txn, proof, past, past_proof)


@dataclass(frozen=True)
class TxnCheck:
    ok: bool
    failed: Optional[str] = None
    fraud_proof: Optional[FraudProof] = None

    def __bool__(self):
        return self.ok


def _check_signature(txn, scheme):
    if len(txn.inputs) > MAX_TXN_INPUTS or len(txn.outputs) > MAX_TXN_OUTPUTS:
        return False
    if len(txn.input_proofs) != len(txn.inputs):
        return False
    return scheme.verify(txn.sender, txn.txid, txn.signature)


def _checked_sum(amounts):
    total = 0
    for amount in amounts:
        total += amount
        if total > MAX_AMOUNT:
            return None
    return total


def _check_sums(txn):
    if len(set(txn.inputs)) != len(txn.inputs):
        return False
    amounts = []
    for txin, proof in zip(txn.inputs, txn.input_proofs):
        try:
            funding = Transaction.from_bytes(proof.funding)
        except ValueError:
            return False
        if funding.txid != txin.txid:
            return False
        if txin.output_index >= len(funding.outputs):
            return False
        recipient, amount = funding.outputs[txin.output_index]
        if recipient != txn.sender:
            return False
        amounts.append(amount)
    total_in = _checked_sum(amounts)
    total_out = _checked_sum(amount for _, amount in txn.outputs)
    return total_in is not None and total_in == total_out


def _check_input_proofs(txn, chain, height, tau):
    for proof in txn.input_proofs:
        funding_height = proof.inclusion.height
        if funding_height >= height:
            return False
        if tau is not NEVER_EXPIRES and height - funding_height > tau:
            return False
        if not verify_inclusion(proof.inclusion, proof.funding, chain):
            return False
    return True


def validate_transaction(
    txn, spent, chain, height, scheme, tau=NEVER_EXPIRES, proof=None
):
    """Run the four transaction checks in order.

    Parameters:

        txn (Transaction):
            The transaction.

        spent (SpentTxoTable):
            The validator's spent-output table.

        chain (HeaderChain):
            The header chain; must hold every height the input proofs
            reference.

        height (int):
            Height of the block containing `txn`.

        scheme (SignatureScheme):
            The signature scheme.

        tau (Optional[int]):
            Expiry window; None never expires.

        proof (Optional[InclusionProof]):
            `txn`'s own inclusion proof; a fraud proof is attached to a
            failure only when it is given.

    Returns:

        TxnCheck:
            The outcome, naming the first failing check.

    Raises:

        InsufficientChainError:
            When a referenced header is missing.
    """

    def fail(check, past=None):
        fraud = None
        if proof is not None:
            if past is None:
                fraud = FraudProof(txn, proof)
            else:
                fraud = FraudProof(txn, proof, past.txn, past.proof)
        logger.debug("transaction %s fails %s", txn.txid.hex()[:16], check)
        return TxnCheck(False, check, fraud)

    if not _check_signature(txn, scheme):
        return fail(CHECK_SIGNATURE)
    if not _check_sums(txn):
        return fail(CHECK_SUMS)
    if not _check_input_proofs(txn, chain, height, tau):
        return fail(CHECK_INPUT_PROOFS)
    for txin in txn.inputs:
        entry = spent.get(txin)
        if entry is not None:
            return fail(CHECK_SPENT, entry)
    return TxnCheck(True)


def is_valid_txn(txn, spent, chain, height, scheme, tau=NEVER_EXPIRES):
    return validate_transaction(txn, spent, chain, height, scheme, tau).ok


def is_valid_fraud_proof(fp, chain, scheme, tau=NEVER_EXPIRES):
    """Check a transaction fraud proof. Never raises.

    Both inclusion proofs must verify. The proof then holds when the
    invalid transaction fails one of the first three checks, or when its
    inputs intersect those of a distinct `past_txn` committed no later.
    """
    try:
        if not verify_inclusion(
            fp.invalid_proof, fp.invalid_txn.to_bytes(), chain
        ):
            return False
        if (fp.past_txn is None) != (fp.past_proof is None):
            return False
        if fp.past_txn is not None:
            if not verify_inclusion(
                fp.past_proof, fp.past_txn.to_bytes(), chain
            ):
                return False
        txn, height = fp.invalid_txn, fp.invalid_proof.height
        if not _check_signature(txn, scheme):
            return True
        if not _check_sums(txn):
            return True
        if not _check_input_proofs(txn, chain, height, tau):
            return True
        if fp.past_txn is None:
            return False
        past = fp.past_proof
        if past.height > height:
            return False
        if past.height == height and past.index == fp.invalid_proof.index:
            return False
        return bool(set(txn.inputs) & set(fp.past_txn.inputs))
    except (InsufficientChainError, AttributeError, TypeError, ValueError):
        return False


# ----- ordering -----


class PlacedTxn(NamedTuple):
    txn: Transaction
    proof: InclusionProof


@dataclass(frozen=True)
class SortingFraudProof:
    """Two transactions of one block in the wrong order."""

    first: PlacedTxn
    second: PlacedTxn

    def to_bytes(self):
        w = Writer()
        for placed in (self.first, self.second):
            w.blob(placed.txn.to_bytes()).raw(placed.proof.to_bytes())
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data):
        reader = Reader(data)
        placed = []
        for _ in range(2):
            txn = Transaction.from_bytes(reader.blob())
            placed.append(PlacedTxn(txn, InclusionProof.read(reader)))
        reader.expect_end()
        return cls(*placed)


@dataclass(frozen=True)
class SectionIndexFraudProof:
    """A transaction placed in a section range it does not belong to."""

    placed: PlacedTxn

    def to_bytes(self):
        return Writer().blob(self.placed.txn.to_bytes()).raw(
            self.placed.proof.to_bytes()
        ).getvalue()

    @classmethod
    def from_bytes(cls, data):
        reader = Reader(data)
        txn = Transaction.from_bytes(reader.blob())
        proof = InclusionProof.read(reader)
        reader.expect_end()
        return cls(PlacedTxn(txn, proof))


def check_sorted(placed: Sequence[PlacedTxn], k):
    """Find the first adjacent pair out of `(section, sender)` order.

    Parameters:

        placed (Sequence[PlacedTxn]):
            Transactions with their proofs, in block order.

        k (int):
            Number of sections.

    Returns:

        Optional[SortingFraudProof]:
            None when the sequence is sorted.
    """
    for a, b in zip(placed, placed[1:]):
        if sort_key(a.txn, k) > sort_key(b.txn, k):
            return SortingFraudProof(a, b)
    return None


def check_section_index(placed, layout):
    """First transaction outside the range its section is assigned."""
    for item in placed:
        section = layout.section_at(item.proof.index)
        if section != section_of(item.txn.sender, layout.k):
            return SectionIndexFraudProof(item)
    return None


def verify_sorting_fraud_proof(fp, chain):
    """Check a sorting fraud proof. Never raises."""
    try:
        a, b = fp.first, fp.second
        if a.proof.height != b.proof.height:
            return False
        if not a.proof.index < b.proof.index:
            return False
        for item in (a, b):
            if not verify_inclusion(item.proof, item.txn.to_bytes(), chain):
                return False
        k = chain.require(a.proof.height).layout.k
        return sort_key(a.txn, k) > sort_key(b.txn, k)
    except (InsufficientChainError, AttributeError, TypeError, ValueError):
        return False


def verify_section_index_fraud_proof(fp, chain):
    """Check a section-index fraud proof. Never raises."""
    try:
        txn, proof = fp.placed
        if not verify_inclusion(proof, txn.to_bytes(), chain):
            return False
        layout = chain.require(proof.height).layout
        return layout.section_at(proof.index) != section_of(
            txn.sender, layout.k
        )
    except (InsufficientChainError, AttributeError, TypeError, ValueError):
        return False
