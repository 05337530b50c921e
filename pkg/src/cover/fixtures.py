"""
    The three worked examples as executable fixtures.

    - `toy_code`: six symbols, three checks, loaded from its descriptor.
    - `coding_fraud_example`: an eight-transaction tree whose third layer
      is committed with one symbol tampered.
    - `double_spend_example`: blocks 5, 8, 9 and 10 of a chain in which
      block 10 spends an output already spent in block 9.

    Symbols of the tree examples are also numbered the way the examples
    number them: the root symbol is 1, the second layer 2 to 5, the third
    layer 6 to 13 and so on.
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Tuple

from cover import cmt, ledger
from cover.cmt import ROOT_ID, SymbolId
from cover.constants import (
    DEFAULT_D_L,
    DEFAULT_D_R,
    DEFAULT_TXN_SYMBOL_SIZE,
    ROOT_LAYER,
)
from cover.hashcommit import Writer
from cover.ldpc import load_code

TOY_CHECKS = ((0, 2, 4), (1, 3, 4), (0, 1, 5))


def code_descriptor(n, checks, d_L, d_R, seed=0):
    w = Writer().u32(n).u32(d_L).u32(d_R).u64(seed)
    edges = [(j, v) for j, members in enumerate(checks) for v in members]
    w.u32(len(edges))
    for check_id, symbol in edges:
        w.u32(check_id).u32(symbol)
    return w.getvalue()


@lru_cache(maxsize=None)
def toy_code():
    """Checks `X0+X2+X4`, `X1+X3+X4` and `X0+X1+X5`."""
    return load_code(code_descriptor(3, TOY_CHECKS, 2, 3))


def example_number(sid):
    """Number of a symbol in the worked examples' numbering."""
    if sid.layer == ROOT_LAYER:
        return 1
    return 2**sid.layer - 2 + sid.index


def example_id(number):
    """Inverse of `example_number`."""
    if number < 1:
        raise ValueError("symbols are numbered from 1")
    if number == 1:
        return ROOT_ID
    layer = 2
    while number >= 2 ** (layer + 1) - 2:
        layer += 1
    return SymbolId(layer, number - (2**layer - 2))


# ----- coding fraud -----

FRAUD_LAYER = 3
FRAUD_CHECKS = ((0, 2, 4), (1, 3, 5), (0, 1, 6), (2, 3, 7))


@dataclass(frozen=True)
class CodingFraudExample:
    """An honest tree, its tampered commitment, and what a node knows.

    Attributes:

        honest (CodedMerkleTree):
            The correctly encoded tree.

        tampered (CodedMerkleTree):
            The tree with symbol 6 replaced and recommitted.

        codes (Mapping[int, LdpcCode]):
            Per-layer codes of both trees.

        check_id (int):
            The parity over symbols 6, 8 and 10.

        known (Tuple[SymbolId, ...]):
            Symbols the decoding node holds before peeling: 1, 2, 3, 8 and
            10.
    """

    honest: cmt.CodedMerkleTree
    tampered: cmt.CodedMerkleTree
    codes: object
    layer: int
    check_id: int
    target: SymbolId
    known: Tuple[SymbolId, ...]

    @property
    def root(self):
        return self.tampered.root_commitment

    def lookup(self, sid):
        return self.tampered.symbol(sid)

    def proof(self):
        return cmt.make_coding_fraud_proof(
            self.layer,
            self.check_id,
            self.target.index,
            self.codes[self.layer],
            self.lookup,
        )

    def header(self, height=1):
        layout = ledger.BlockLayout(
            self.tampered.symbol_size,
            0,
            DEFAULT_D_L,
            DEFAULT_D_R,
            (0, self.tampered.L),
        )
        return ledger.Header(
            ledger.ZERO_DIGEST,
            self.root,
            self.tampered.L,
            height,
            layout.to_bytes(),
        )


@lru_cache(maxsize=None)
def coding_fraud_example():
    layer_code = load_code(code_descriptor(4, FRAUD_CHECKS, 2, 3))
    base = [
        cmt.frame_base_symbol(f"transaction {i}".encode(), 64)
        for i in range(8)
    ]
    honest = cmt.build_tree(base, codes={FRAUD_LAYER: layer_code})
    target = example_id(6)
    payload = bytearray(honest.symbol(target))
    payload[0] ^= 0xFF
    tampered = cmt.recommit(honest, target, bytes(payload))
    known = tuple(example_id(n) for n in (1, 2, 3, 8, 10))
    return CodingFraudExample(
        honest, tampered, honest.codes, FRAUD_LAYER, 0, target, known
    )


# ----- double spend -----


@dataclass
class DoubleSpendExample:
    """The chain of the double-spend example.

    Transactions are keyed `"height:label"`: `5:2` mints $18 to account
    10, `8:5` moves it to accounts 8 and 3, `9:3` spends account 8's
    output and `10:2` spends it again.

    Attributes:

        scheme (KeyedTestScheme):
            Signs every transaction.

        accounts (Dict[int, KeyPair]):
            Keys of accounts 1, 2, 3, 4, 8 and 10.

        blocks (List[Block]):
            Blocks 0 to 10, indexed by height.

        txns (Dict[str, Transaction]):
            The example's transactions.

        proofs (Dict[str, InclusionProof]):
            Their inclusion proofs.
    """

    scheme: ledger.KeyedTestScheme
    accounts: Dict[int, ledger.KeyPair]
    blocks: List[ledger.Block]
    txns: Dict[str, ledger.Transaction]
    proofs: Dict[str, ledger.InclusionProof]

    def chain(self, upto):
        return ledger.HeaderChain(b.header for b in self.blocks[: upto + 1])

    def spent_table(self, upto):
        """The table of a validator that accepted blocks up to `upto`."""
        table = ledger.SpentTxoTable()
        for label, txn in self.txns.items():
            height = int(label.split(":")[0])
            if height <= upto and txn.inputs:
                ledger.update_state(txn, table, self.proofs[label], height)
        return table

    def fraud_proof(self):
        return ledger.FraudProof(
            self.txns["10:2"],
            self.proofs["10:2"],
            self.txns["9:3"],
            self.proofs["9:3"],
        )


def double_spend_example(symbol_size=DEFAULT_TXN_SYMBOL_SIZE, k=1):
    scheme = ledger.KeyedTestScheme()
    accounts = {n: scheme.keypair(f"account {n}") for n in (1, 2, 3, 4, 8, 10)}
    acct = {n: kp.account for n, kp in accounts.items()}
    blocks = []
    txns = {}
    proofs = {}

    def seal(transactions, label=None):
        tip = blocks[-1].header if blocks else None
        block = ledger.assemble_block(
            transactions, tip, k=k, symbol_size=symbol_size
        )
        blocks.append(block)
        if label is not None:
            txn = transactions[0]
            txns[label] = txn
            proofs[label] = block.inclusion_proof(block.position_of(txn))
        return block

    def funding(label, output):
        return (txns[label], output, proofs[label])

    for _ in range(5):
        seal([])
    seal(
        [ledger.mint_transaction([(acct[1], 1), (acct[2], 2), (acct[10], 18)])],
        "5:2",
    )
    seal([])
    seal([])
    seal(
        [
            ledger.make_transaction(
                scheme,
                accounts[10],
                [(acct[8], 10), (acct[3], 8)],
                [funding("5:2", 2)],
            )
        ],
        "8:5",
    )
    seal(
        [
            ledger.make_transaction(
                scheme,
                accounts[8],
                [(acct[4], 5), (acct[8], 5)],
                [funding("8:5", 0)],
            )
        ],
        "9:3",
    )
    seal(
        [
            ledger.make_transaction(
                scheme, accounts[8], [(acct[3], 10)], [funding("8:5", 0)]
            )
        ],
        "10:2",
    )
    return DoubleSpendExample(scheme, accounts, blocks, txns, proofs)
