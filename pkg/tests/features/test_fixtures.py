import pytest

from cover import cmt, ledger
from cover.fixtures import (
    code_descriptor,
    coding_fraud_example,
    double_spend_example,
    example_id,
    toy_code,
)


def test_example_numbering_rejects_zero():
    with pytest.raises(ValueError):
        example_id(0)


def test_descriptor_is_deterministic():
    assert code_descriptor(3, ((0, 2, 4),), 2, 3) == code_descriptor(
        3, ((0, 2, 4),), 2, 3
    )
    assert toy_code() is toy_code()


def test_coding_fraud_header_describes_the_tampered_tree():
    example = coding_fraud_example()
    header = example.header()
    assert header.root == example.root
    assert header.length == 8
    assert header.layout.symbol_size == example.tampered.symbol_size
    assert ledger.Header.from_bytes(header.to_bytes()) == header
    for sid in example.known:
        assert example.tampered.shares([sid])[0].verify(example.root)
    assert example.tampered.symbol(example.target) != example.honest.symbol(
        example.target
    )
    assert cmt.parent_of(example.target)[0] == cmt.SymbolId(2, 0)


def test_double_spend_example_layout():
    example = double_spend_example()
    assert len(example.blocks) == 11
    assert sorted(example.txns) == ["10:2", "5:2", "8:5", "9:3"]
    assert example.txns["5:2"].is_mint
    assert example.txns["10:2"].inputs == example.txns["9:3"].inputs
    for label, proof in example.proofs.items():
        assert proof.height == int(label.split(":")[0])
