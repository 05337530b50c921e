import pytest

from cover import hashcommit
from cover.constants import LEFT, RIGHT
from cover.hashcommit import MerkleProof, Reader, Writer


LEAVES = [f"leaf {i}".encode() for i in range(5)]


def test_digest_is_domain_separated():
    data = b"payload"
    assert hashcommit.leaf_hash(data) != hashcommit.symbol_digest(data)
    assert hashcommit.leaf_hash(data) != hashcommit.digest(data)
    assert len(hashcommit.digest(data)) == 32


def test_every_leaf_proves_membership():
    root, tree = hashcommit.build_merkle_tree(LEAVES)
    assert tree.leaf_count == 5
    for i, leaf in enumerate(LEAVES):
        proof = hashcommit.prove(tree, i)
        assert proof.root == root
        assert hashcommit.verify(proof, leaf)


def test_proof_rejects_other_leaf():
    _, tree = hashcommit.build_merkle_tree(LEAVES)
    proof = tree.prove(1)
    assert not hashcommit.verify(proof, LEAVES[2])


def test_proof_cannot_move_to_another_index():
    _, tree = hashcommit.build_merkle_tree(LEAVES)
    proof = tree.prove(2)
    moved = MerkleProof(3, proof.path, proof.root)
    assert not hashcommit.verify(moved, LEAVES[2])


def test_flipped_path_bit_fails():
    _, tree = hashcommit.build_merkle_tree(LEAVES)
    proof = tree.prove(0)
    sibling, side = proof.path[0]
    bent = bytes([sibling[0] ^ 1]) + sibling[1:]
    mutated = MerkleProof(0, ((bent, side),) + proof.path[1:], proof.root)
    assert not hashcommit.verify(mutated, LEAVES[0])


def test_side_flags_follow_index_bits():
    _, tree = hashcommit.build_merkle_tree(LEAVES[:4])
    sides = [side for _, side in tree.prove(2).path]
    assert sides == [RIGHT, LEFT]


def test_single_leaf_tree():
    root, tree = hashcommit.build_merkle_tree([b"only"])
    proof = tree.prove(0)
    assert proof.path == ()
    assert hashcommit.verify(proof, b"only")
    assert root == hashcommit.leaf_hash(b"only")


def test_empty_tree_and_bad_index_raise():
    with pytest.raises(ValueError):
        hashcommit.build_merkle_tree([])
    _, tree = hashcommit.build_merkle_tree(LEAVES)
    with pytest.raises(IndexError):
        tree.prove(5)


def test_verify_never_raises_on_garbage():
    assert not hashcommit.verify(None, b"x")
    assert not hashcommit.verify(MerkleProof(0, (), b"short"), b"x")


def test_proof_bytes_are_canonical():
    _, tree = hashcommit.build_merkle_tree(LEAVES)
    proof = tree.prove(3)
    assert MerkleProof.from_bytes(proof.to_bytes()) == proof


def test_reader_rejects_truncation_and_trailing_bytes():
    data = Writer().u32(7).blob(b"abc").getvalue()
    reader = Reader(data)
    assert reader.u32() == 7
    assert reader.blob() == b"abc"
    reader.expect_end()
    truncated = Reader(data[:-1])
    truncated.u32()
    with pytest.raises(ValueError):
        truncated.blob()
    padded = Reader(data + b"\x00")
    padded.u32()
    padded.blob()
    with pytest.raises(ValueError):
        padded.expect_end()
