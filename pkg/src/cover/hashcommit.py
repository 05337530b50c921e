"""
    Hashing, plain Merkle trees and Merkle membership proofs.

    One 256-bit hash (`constants.HASH_NAME`) is used everywhere, always
    behind a one-byte domain tag: 0x00 for Merkle leaves, 0x01 for internal
    Merkle nodes and 0x02 for coded-Merkle-tree symbols.

    ## Building and proving

    ```python
    root, tree = build_merkle_tree([b"a", b"b", b"c"])
    proof = prove(tree, 2)
    assert verify(proof, b"c")
    ```

    Odd layers are padded by duplicating their last digest, so a tree of
    three leaves has the same root as the four-leaf tree whose last leaf
    repeats the third.

    ## Canonical encoding

    `Writer` and `Reader` implement the little-endian codec shared by every
    wire format in the package: fixed-width unsigned integers and byte
    strings prefixed with an unsigned 32-bit length.
"""
import hashlib
import struct
from dataclasses import dataclass
from typing import List, Sequence, Tuple

from cover.constants import (
    DIGEST_SIZE,
    HASH_NAME,
    LEAF_TAG,
    LEFT,
    NODE_TAG,
    RIGHT,
    SYMBOL_TAG,
)

Digest = bytes


def digest(data, tag=b""):
    """Hash `tag || data` with the configured hash function.

    Parameters:

        data (bytes):
            The bytes to hash.

        tag (bytes):
            A domain separation prefix.

    Returns:

        bytes:
            A 32-byte digest.
    """
    return hashlib.new(HASH_NAME, bytes(tag) + bytes(data)).digest()


def leaf_hash(data):
    return digest(data, LEAF_TAG)


def node_hash(left, right):
    return digest(left + right, NODE_TAG)


def symbol_digest(data):
    """Digest of a coded-Merkle-tree symbol."""
    return digest(data, SYMBOL_TAG)


def is_digest(value):
    return isinstance(value, (bytes, bytearray)) and len(value) == DIGEST_SIZE


class Writer:
    """Accumulates a canonical little-endian encoding."""

    def __init__(self):
        self._parts = []

    def u8(self, value):
        self._parts.append(struct.pack("<B", value))
        return self

    def u16(self, value):
        self._parts.append(struct.pack("<H", value))
        return self

    def u32(self, value):
        self._parts.append(struct.pack("<I", value))
        return self

    def u64(self, value):
        self._parts.append(struct.pack("<Q", value))
        return self

    def raw(self, data):
        self._parts.append(bytes(data))
        return self

    def blob(self, data):
        """Write `data` prefixed with its u32 length."""
        self.u32(len(data))
        return self.raw(data)

    def getvalue(self):
        return b"".join(self._parts)


class Reader:
    """Reads a canonical encoding; every read past the end raises
    `ValueError`."""

    def __init__(self, data):
        self._data = bytes(data)
        self._pos = 0

    def _take(self, size):
        end = self._pos + size
        if size < 0 or end > len(self._data):
            raise ValueError("truncated encoding")
        chunk = self._data[self._pos : end]
        self._pos = end
        return chunk

    def u8(self):
        return struct.unpack("<B", self._take(1))[0]

    def u16(self):
        return struct.unpack("<H", self._take(2))[0]

    def u32(self):
        return struct.unpack("<I", self._take(4))[0]

    def u64(self):
        return struct.unpack("<Q", self._take(8))[0]

    def raw(self, size):
        return self._take(size)

    def blob(self):
        return self._take(self.u32())

    @property
    def remaining(self):
        return len(self._data) - self._pos

    def expect_end(self):
        if self.remaining:
            raise ValueError("trailing bytes after encoding")


@dataclass(frozen=True)
class MerkleProof:
    """Membership proof of one leaf.

    Attributes:

        leaf_index (int):
            Position of the leaf.

        path (Tuple[Tuple[bytes, int], ...]):
            Sibling digests from the leaf level upward, each with the side
            (`LEFT` or `RIGHT`) the sibling sits on.

        root (bytes):
            The root the proof claims membership in.
    """

    leaf_index: int
    path: Tuple[Tuple[bytes, int], ...]
    root: Digest

    def to_bytes(self):
        w = Writer().u64(self.leaf_index).u16(len(self.path))
        for sibling, side in self.path:
            w.u8(side).raw(sibling)
        return w.raw(self.root).getvalue()

    @classmethod
    def from_bytes(cls, data):
        proof, reader = cls.read(Reader(data))
        reader.expect_end()
        return proof

    @classmethod
    def read(cls, reader):
        index = reader.u64()
        count = reader.u16()
        path = []
        for _ in range(count):
            side = reader.u8()
            path.append((reader.raw(DIGEST_SIZE), side))
        root = reader.raw(DIGEST_SIZE)
        return cls(index, tuple(path), root), reader


class MerkleTree:
    """Immutable handle on a built Merkle tree.

    Attributes:

        layers (Tuple[Tuple[bytes, ...], ...]):
            Digest layers from the leaves (index 0) to the root, each
            already padded to even width where needed.
    """

    def __init__(self, layers):
        self.layers = tuple(tuple(layer) for layer in layers)
        self._leaf_count = len(layers[0])

    @property
    def root(self):
        return self.layers[-1][0]

    @property
    def leaf_count(self):
        return self._leaf_count

    @property
    def depth(self):
        return len(self.layers) - 1

    def prove(self, leaf_index):
        """Return the `MerkleProof` of a leaf.

        Parameters:

            leaf_index (int):
                The leaf position, `0 <= leaf_index < leaf_count`.

        Returns:

            MerkleProof:
                A proof that verifies against `root`.
        """
        if not 0 <= leaf_index < self._leaf_count:
            raise IndexError(
                f"leaf index {leaf_index} outside [0, {self._leaf_count})"
            )
        path = []
        index = leaf_index
        for layer in self.layers[:-1]:
            padded = _pad(layer)
            if index % 2:
                path.append((padded[index - 1], LEFT))
            else:
                path.append((padded[index + 1], RIGHT))
            index //= 2
        return MerkleProof(leaf_index, tuple(path), self.root)


def _pad(layer):
    if len(layer) % 2:
        return tuple(layer) + (layer[-1],)
    return tuple(layer)


def build_merkle_tree(leaves: Sequence[bytes]):
    """Build a Merkle tree over canonical leaf serializations.

    Parameters:

        leaves (Sequence[bytes]):
            The leaves, in order.

    Returns:

        Tuple[bytes, MerkleTree]:
            The root digest and the tree handle.
    """
    if not leaves:
        raise ValueError("empty tree")
    layers: List[Tuple[bytes, ...]] = [tuple(leaf_hash(x) for x in leaves)]
    while len(layers[-1]) > 1:
        padded = _pad(layers[-1])
        layers.append(
            tuple(
                node_hash(padded[i], padded[i + 1])
                for i in range(0, len(padded), 2)
            )
        )
    tree = MerkleTree(layers)
    return tree.root, tree


def prove(tree, leaf_index):
    return tree.prove(leaf_index)


def verify(proof, leaf):
    """Check a membership proof.

    The side flags must agree with the bits of `leaf_index`, so a proof
    cannot be replayed for another position.

    Parameters:

        proof (MerkleProof):
            The proof to check.

        leaf (bytes):
            The leaf bytes the proof claims.

    Returns:

        bool:
            True iff hashing along the path reproduces `proof.root`.
    """
    try:
        if proof.leaf_index < 0 or not is_digest(proof.root):
            return False
        current = leaf_hash(leaf)
        index = proof.leaf_index
        for sibling, side in proof.path:
            if not is_digest(sibling) or side not in (LEFT, RIGHT):
                return False
            if (side == LEFT) != bool(index % 2):
                return False
            if side == LEFT:
                current = node_hash(sibling, current)
            else:
                current = node_hash(current, sibling)
            index //= 2
        return index == 0 and current == proof.root
    except (AttributeError, TypeError, ValueError):
        return False
