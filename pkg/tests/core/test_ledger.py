from dataclasses import replace

import pytest

from cover import ledger
from cover.constants import (
    CHECK_INPUT_PROOFS,
    CHECK_SIGNATURE,
    CHECK_SPENT,
    CHECK_SUMS,
)
from cover.errors import ConflictingStateError, InsufficientChainError
from cover.fixtures import double_spend_example
from cover.utility import make_rng


@pytest.fixture(scope="module")
def example():
    return double_spend_example()


def validate(example, label, upto_spent, tau=None):
    height = int(label.split(":")[0])
    return ledger.validate_transaction(
        example.txns[label],
        example.spent_table(upto_spent),
        example.chain(height),
        height,
        example.scheme,
        tau,
        proof=example.proofs[label],
    )


def test_chain_links(example):
    chain = example.chain(10)
    assert len(chain) == 11
    assert chain.tip.height == 10
    for height in range(1, 11):
        assert chain.get(height).prev_hash == chain.get(height - 1).hash


def test_header_chain_rejects_a_broken_link(example):
    chain = example.chain(9)
    header = example.blocks[10].header
    assert chain.extends(header)
    assert not chain.extends(replace(header, prev_hash=bytes(32)))
    with pytest.raises(ValueError):
        chain.append(replace(header, height=3))


def test_header_bytes_are_canonical(example):
    header = example.blocks[8].header
    assert ledger.Header.from_bytes(header.to_bytes()) == header
    txn = example.txns["9:3"]
    assert ledger.Transaction.from_bytes(txn.to_bytes()) == txn


def test_inclusion_proofs_verify(example):
    chain = example.chain(10)
    for label, txn in example.txns.items():
        assert ledger.verify_inclusion(
            example.proofs[label], txn.to_bytes(), chain
        )
    assert not ledger.verify_inclusion(
        example.proofs["9:3"], example.txns["10:2"].to_bytes(), chain
    )


def test_inclusion_needs_the_header(example):
    with pytest.raises(InsufficientChainError):
        ledger.verify_inclusion(
            example.proofs["10:2"],
            example.txns["10:2"].to_bytes(),
            example.chain(9),
        )


def test_valid_spends_pass(example):
    assert validate(example, "8:5", 7).ok
    assert validate(example, "9:3", 8).ok


def test_double_spend_fails_the_spent_check(example):
    check = validate(example, "10:2", 9)
    assert not check.ok
    assert check.failed == CHECK_SPENT
    assert check.fraud_proof.past_txn == example.txns["9:3"]


def test_expired_input_fails_the_proof_check(example):
    check = validate(example, "10:2", 7, tau=1)
    assert check.failed == CHECK_INPUT_PROOFS


def test_bad_signature_and_bad_sum(example):
    txn = example.txns["9:3"]
    signature = bytes([txn.signature[0] ^ 1]) + txn.signature[1:]
    forged = replace(txn, signature=signature)
    check = ledger.validate_transaction(
        forged, ledger.SpentTxoTable(), example.chain(9), 9, example.scheme
    )
    assert check.failed == CHECK_SIGNATURE
    inflated = replace(
        txn, outputs=(ledger.TxOutput(txn.outputs[0].recipient, 11),)
    ).signed(example.scheme, example.accounts[8])
    check = ledger.validate_transaction(
        inflated, ledger.SpentTxoTable(), example.chain(9), 9, example.scheme
    )
    assert check.failed == CHECK_SUMS


def test_double_spend_fraud_proof(example):
    chain = example.chain(10)
    fraud = example.fraud_proof()
    assert fraud.height == 10
    assert ledger.is_valid_fraud_proof(fraud, chain, example.scheme)
    swapped = ledger.FraudProof(
        example.txns["9:3"],
        example.proofs["9:3"],
        example.txns["10:2"],
        example.proofs["10:2"],
    )
    assert not ledger.is_valid_fraud_proof(swapped, chain, example.scheme)
    honest = ledger.FraudProof(example.txns["9:3"], example.proofs["9:3"])
    assert not ledger.is_valid_fraud_proof(honest, chain, example.scheme)
    assert ledger.FraudProof.from_bytes(fraud.to_bytes()) == fraud


def test_fraud_proof_without_the_chain_is_invalid(example):
    assert not ledger.is_valid_fraud_proof(
        example.fraud_proof(), example.chain(9), example.scheme
    )


def test_spent_table_conflicts_and_pruning(example):
    table = example.spent_table(9)
    assert len(table) == 2
    with pytest.raises(ConflictingStateError):
        ledger.update_state(
            example.txns["10:2"], table, example.proofs["10:2"], 10
        )
    assert ledger.prune_expired(table, 10, None) == 0
    assert ledger.prune_expired(table, 10, 1) == 1
    assert len(table) == 1
    with pytest.raises(ValueError):
        ledger.prune_expired(table, 10, 0)


def test_overlay_writes_stay_local(example):
    table = example.spent_table(8)
    scratch = table.overlay()
    ledger.update_state(example.txns["9:3"], scratch, example.proofs["9:3"], 9)
    assert len(scratch) == 2
    assert len(table) == 1


def test_sections_partition_the_account_space():
    assert ledger.section_of(bytes(32), 4) == 0
    assert ledger.section_of(b"\xff" * 32, 4) == 3
    assert ledger.section_of(b"\x80" + bytes(31), 2) == 1
    with pytest.raises(ValueError):
        ledger.section_of(bytes(32), 0)


def test_block_sorting_and_section_index():
    scheme = ledger.KeyedTestScheme()
    keys = [scheme.keypair(f"sender {i}") for i in range(6)]
    txns = [ledger.make_transaction(scheme, kp, [(kp.account, 1)]) for kp in keys]
    block = ledger.assemble_block(txns, None, k=3, symbol_size=256)
    placed = [
        ledger.PlacedTxn(txn, block.inclusion_proof(i))
        for i, txn in enumerate(block.transactions)
    ]
    layout = block.layout
    assert layout.k == 3
    assert layout.offsets[-1] == 6
    assert ledger.check_sorted(placed, 3) is None
    assert ledger.check_section_index(placed, layout) is None
    for section in range(3):
        for _, txn in block.section_transactions(section):
            assert ledger.section_of(txn.sender, 3) == section

    unsorted = ledger.assemble_block(
        list(reversed(block.transactions)),
        None,
        k=3,
        symbol_size=256,
        sort=False,
    )
    placed = [
        ledger.PlacedTxn(txn, unsorted.inclusion_proof(i))
        for i, txn in enumerate(unsorted.transactions)
    ]
    fraud = ledger.check_sorted(placed, 3)
    assert fraud is not None
    chain = ledger.HeaderChain([unsorted.header])
    assert ledger.verify_sorting_fraud_proof(fraud, chain)
    swapped = ledger.SortingFraudProof(fraud.second, fraud.first)
    assert not ledger.verify_sorting_fraud_proof(swapped, chain)


def test_ed25519_scheme():
    scheme = ledger.Ed25519Scheme()
    keypair = scheme.keypair("alice")
    assert keypair == scheme.keypair("alice")
    signature = scheme.sign(keypair, b"message")
    assert scheme.verify(keypair.account, b"message", signature)
    assert not scheme.verify(keypair.account, b"other", signature)
    assert not scheme.verify(bytes(31), b"message", signature)


def test_keyed_scheme_knows_only_its_own_accounts():
    scheme = ledger.KeyedTestScheme()
    keypair = scheme.keypair("bob")
    signature = scheme.sign(keypair, b"m")
    assert scheme.verify(keypair.account, b"m", signature)
    assert not ledger.KeyedTestScheme().verify(keypair.account, b"m", signature)


def test_update_state_writes_nothing_on_a_conflict(example):
    table = example.spent_table(9)
    funding = example.txns["8:5"].txid
    greedy = ledger.Transaction(
        example.accounts[8].account,
        (ledger.TxOutput(example.accounts[4].account, 10),),
        (ledger.TxInput(funding, 1), ledger.TxInput(funding, 0)),
    )
    with pytest.raises(ConflictingStateError):
        ledger.update_state(greedy, table, example.proofs["10:2"], 10)
    assert (funding, 1) not in table
    assert len(table) == 2


def test_overlay_removal_leaves_the_base_alone(example):
    table = example.spent_table(8)
    scratch = table.overlay()
    ledger.update_state(example.txns["9:3"], scratch, example.proofs["9:3"], 9)
    assert scratch.remove_where(lambda key, entry: True) == 1
    assert len(scratch) == 1
    assert len(table) == 1


@pytest.mark.parametrize(
    "labels",
    [("9:3", None), ("9:3", "8:5"), ("8:5", "5:2")],
)
def test_mutated_fraud_proofs_against_valid_blocks_fail(example, labels):
    invalid, past = labels
    chain = example.chain(9)
    proof = ledger.FraudProof(
        example.txns[invalid],
        example.proofs[invalid],
        example.txns[past] if past else None,
        example.proofs[past] if past else None,
    )
    assert not ledger.is_valid_fraud_proof(proof, chain, example.scheme)
    data = proof.to_bytes()
    rng = make_rng(2, "fraud-mutations", invalid)
    for _ in range(300):
        mutated = bytearray(data)
        for _ in range(1 + int(rng.integers(3))):
            position = int(rng.integers(len(data)))
            mutated[position] ^= 1 << int(rng.integers(8))
        try:
            candidate = ledger.FraudProof.from_bytes(bytes(mutated))
        except ValueError:
            continue
        assert not ledger.is_valid_fraud_proof(candidate, chain, example.scheme)
