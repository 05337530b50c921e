"""
    Coded Merkle tree: a layered availability commitment.

    Layer 1 is the *root symbol*, an uncoded 128-byte symbol holding the
    digests of the four layer-2 symbols. Every layer `m >= 2` holds `2**m`
    symbols: `w = 2**(m-1)` data symbols followed by `w` coded symbols of a
    rate-1/2 LDPC code. The bottom layer (`depth`) carries the `L` base
    symbols. The digests of a layer, grouped four at a time, form the data
    symbols of the layer above:

    ```
    parent data symbol j  =  h(2j) || h(2j+1) || h(w+2j) || h(w+2j+1)
    ```

    so a sampled symbol and its three siblings share one parent. The
    commitment published in a header is the Merkle root over the four
    layer-2 digests.

    ## Typical use

    ```python
    tree = build_tree(base_symbols, code_seed=7)
    proof = symbol_proof(tree, SymbolId(3, 5))
    assert verify_symbol(tree.root_commitment, SymbolId(3, 5),
                         tree.symbol(SymbolId(3, 5)), proof)
    ```
"""
import logging
from dataclasses import dataclass, field
from functools import lru_cache, partial
from types import MappingProxyType
from typing import Dict, FrozenSet, Mapping, NamedTuple, Optional, Tuple

import numpy as np

from cover import hashcommit
from cover.constants import (
    DEFAULT_D_L,
    DEFAULT_D_R,
    DEFAULT_SYMBOL_SIZE,
    DIGEST_SIZE,
    GROUP_SIZE,
    ROOT_LAYER,
    TOP_LAYER_WIDTH,
    UPPER_SYMBOL_SIZE,
)
from cover.hashcommit import MerkleProof, Reader, Writer, symbol_digest
from cover.ldpc import PeelingDecoder, construct_code, encode
from cover.utility import derive_seed, make_rng, next_power_of_two, xor_bytes

logger = logging.getLogger(__name__)

FRAME_HEADER = 4


class SymbolId(NamedTuple):
    """Position of a symbol: `layer` counts down from the root (1), `index`
    counts within the layer."""

    layer: int
    index: int


ROOT_ID = SymbolId(ROOT_LAYER, 0)


# ----- geometry -----


@dataclass(frozen=True)
class TreeShape:
    """Widths of a tree over `L` base symbols (`L` a power of two)."""

    L: int

    def __post_init__(self):
        if self.L < 2 or self.L & (self.L - 1):
            raise ValueError(f"L={self.L} is not a power of two >= 2")

    @classmethod
    def for_count(cls, count):
        return cls(next_power_of_two(count, minimum=2))

    @property
    def depth(self):
        return self.L.bit_length()

    @property
    def layers(self):
        return range(ROOT_LAYER, self.depth + 1)

    @property
    def coded_layers(self):
        return range(ROOT_LAYER + 1, self.depth + 1)

    def width(self, layer):
        return 1 if layer == ROOT_LAYER else 2**layer

    def data_width(self, layer):
        return 1 if layer == ROOT_LAYER else 2 ** (layer - 1)

    @property
    def bottom_width(self):
        return self.width(self.depth)

    @property
    def size(self):
        return sum(self.width(m) for m in self.layers)

    def contains(self, sid):
        return (
            ROOT_LAYER <= sid.layer <= self.depth
            and 0 <= sid.index < self.width(sid.layer)
        )

    def all_ids(self):
        for layer in self.layers:
            for index in range(self.width(layer)):
                yield SymbolId(layer, index)


def parent_of(sid):
    """Return `(parent id, slot)` of a symbol on layer 2 or below."""
    w = 2 ** (sid.layer - 1)
    slot = sid.index % 2 + 2 * (sid.index >= w)
    return SymbolId(sid.layer - 1, (sid.index % w) // 2), slot


def sibling_group(sid):
    """The four symbols whose digests share `sid`'s parent."""
    if sid.layer == ROOT_LAYER:
        return (sid,)
    w = 2 ** (sid.layer - 1)
    j = (sid.index % w) // 2
    return tuple(
        SymbolId(sid.layer, i) for i in (2 * j, 2 * j + 1, w + 2 * j, w + 2 * j + 1)
    )


def ancestors_of(sid):
    """Ancestor ids from the parent up to layer 2."""
    chain = []
    current = sid
    while current.layer > ROOT_LAYER + 1:
        current, _ = parent_of(current)
        chain.append(current)
    return chain


def digest_slot(parent_payload, slot):
    return parent_payload[slot * DIGEST_SIZE : (slot + 1) * DIGEST_SIZE]


def group_digests(symbols):
    """Parent data symbols for one layer's symbols."""
    w = len(symbols) // 2
    digests = [symbol_digest(s) for s in symbols]
    return [
        digests[2 * j]
        + digests[2 * j + 1]
        + digests[w + 2 * j]
        + digests[w + 2 * j + 1]
        for j in range(w // 2)
    ]


# ----- codes -----


@lru_cache(maxsize=64)
def _cached_codes(L, code_seed, d_L, d_R):
    shape = TreeShape(L)
    codes = {}
    for layer in shape.coded_layers:
        n = shape.data_width(layer)
        codes[layer] = construct_code(
            n, min(d_L, n), d_R, derive_seed(code_seed, "layer", layer)
        )
    return MappingProxyType(codes)


def make_codes(L, code_seed, d_L=DEFAULT_D_L, d_R=DEFAULT_D_R):
    """Per-layer codes of a tree over `L` base symbols.

    Layer `m` uses a code with `2**(m-1)` data symbols seeded from
    `(code_seed, "layer", m)`. The symbol degree is capped at the layer's
    data width so that the two-symbol top layer stays constructible.

    Returns:

        Mapping[int, LdpcCode]:
            Read-only mapping from layer number to code.
    """
    return _cached_codes(L, code_seed, d_L, d_R)


# ----- framing -----


def frame_base_symbol(data, size=DEFAULT_SYMBOL_SIZE):
    """Store `data` as a fixed-size base symbol: u32 length, data, zeros."""
    data = bytes(data)
    if len(data) + FRAME_HEADER > size:
        raise ValueError(
            f"{len(data)} bytes do not fit a {size}-byte base symbol"
        )
    framed = Writer().u32(len(data)).raw(data).getvalue()
    return framed + bytes(size - len(framed))


def unframe_base_symbol(symbol):
    """Inverse of `frame_base_symbol`; padding symbols yield `b""`."""
    reader = Reader(symbol)
    return reader.raw(reader.u32())


def padding_symbol(size=DEFAULT_SYMBOL_SIZE):
    return bytes(size)


# ----- the tree -----


@dataclass(frozen=True)
class CodedMerkleTree:
    """A built coded Merkle tree.

    Attributes:

        L (int):
            Base data-symbol count after padding.

        layers (Tuple[Tuple[bytes, ...], ...]):
            `layers[m - 1]` holds the symbols of layer `m`.

        codes (Mapping[int, LdpcCode]):
            The code of every coded layer.

        root_commitment (bytes):
            Merkle root over the four layer-2 digests.

        symbol_size (int):
            Bytes per base symbol.
    """

    L: int
    layers: Tuple[Tuple[bytes, ...], ...]
    codes: Mapping[int, object] = field(repr=False, compare=False)
    root_commitment: bytes
    symbol_size: int
    merkle: hashcommit.MerkleTree = field(repr=False, compare=False)

    @property
    def shape(self):
        return TreeShape(self.L)

    @property
    def depth(self):
        return len(self.layers)

    def layer(self, layer):
        return self.layers[layer - 1]

    def symbol(self, sid):
        return self.layers[sid.layer - 1][sid.index]

    def hashes(self, layer):
        """Digests of a layer, as committed by the layer above."""
        return tuple(symbol_digest(s) for s in self.layer(layer))

    @property
    def base_symbols(self):
        return self.layers[-1][: self.L]

    def shares(self, ids=None):
        """`SymbolShare`s for the given ids (every symbol by default)."""
        if ids is None:
            ids = self.shape.all_ids()
        return [
            SymbolShare(sid, self.symbol(sid), symbol_proof(self, sid))
            for sid in ids
        ]


def _assemble(L, layers, codes, symbol_size):
    top = layers[1]
    root, merkle = hashcommit.build_merkle_tree(
        [symbol_digest(s) for s in top]
    )
    return CodedMerkleTree(
        L,
        tuple(tuple(layer) for layer in layers),
        codes,
        root,
        symbol_size,
        merkle,
    )


def _rebuild_above(layers, layer, codes):
    """Recompute every layer above `layer` from its digests."""
    for upper in range(layer - 1, ROOT_LAYER, -1):
        data = group_digests(layers[upper])
        layers[upper - 1] = encode(codes[upper], data)
    layers[ROOT_LAYER - 1] = group_digests(layers[ROOT_LAYER])
    return layers


def build_tree(
    base_symbols,
    code_seed=0,
    d_L=DEFAULT_D_L,
    d_R=DEFAULT_D_R,
    codes=None,
):
    """Build the coded Merkle tree of a block.

    Parameters:

        base_symbols (Sequence[bytes]):
            The block's base symbols, all of one size, a positive multiple
            of 32 bytes. The list is padded with zero symbols to a power of
            two (at least 2).

        code_seed (int):
            Seed the per-layer codes derive from.

        d_L (int):
            Symbol degree of the per-layer codes.

        d_R (int):
            Check degree of the per-layer codes.

        codes (Mapping[int, LdpcCode]):
            Explicit per-layer codes; layers absent here use the derived
            code.

    Returns:

        CodedMerkleTree:
            The tree.
    """
    base = [bytes(s) for s in base_symbols]
    if not base:
        raise ValueError("a tree needs at least one base symbol")
    sizes = {len(s) for s in base}
    if len(sizes) != 1:
        raise ValueError("base symbols differ in size")
    size = sizes.pop()
    if size == 0 or size % DIGEST_SIZE:
        raise ValueError(
            f"symbol size {size} is not a positive multiple of {DIGEST_SIZE}"
        )
    shape = TreeShape.for_count(len(base))
    base += [padding_symbol(size)] * (shape.L - len(base))
    layer_codes = dict(make_codes(shape.L, code_seed, d_L, d_R))
    if codes:
        for layer, code in codes.items():
            if code.n != shape.data_width(layer):
                raise ValueError(
                    f"layer {layer} needs a code with "
                    f"n={shape.data_width(layer)}, got n={code.n}"
                )
            layer_codes[layer] = code
    layer_codes = MappingProxyType(layer_codes)

    layers = [None] * shape.depth
    layers[shape.depth - 1] = encode(layer_codes[shape.depth], base)
    _rebuild_above(layers, shape.depth, layer_codes)
    tree = _assemble(shape.L, layers, layer_codes, size)
    logger.debug(
        "built tree L=%d depth=%d root=%s",
        shape.L,
        shape.depth,
        tree.root_commitment.hex()[:16],
    )
    return tree


def recommit(tree, sid, payload):
    """Replace one symbol and recommit everything above it.

    Layers above `sid.layer` are re-encoded over the new digests, so the
    replaced symbol carries a valid proof while its own layer's parity no
    longer holds.
    """
    layers = [list(layer) for layer in tree.layers]
    if len(payload) != len(layers[sid.layer - 1][sid.index]):
        raise ValueError("replacement changes the symbol size")
    layers[sid.layer - 1][sid.index] = bytes(payload)
    if sid.layer > ROOT_LAYER:
        _rebuild_above(layers, sid.layer, tree.codes)
    return _assemble(tree.L, layers, tree.codes, tree.symbol_size)


# ----- symbol proofs -----


@dataclass(frozen=True)
class SymbolProof:
    """Path from a symbol to the commitment.

    Attributes:

        ancestors (Tuple[bytes, ...]):
            The ancestor symbols from layer `layer - 1` up to layer 2.

        merkle (Optional[MerkleProof]):
            Membership of the layer-2 ancestor's digest under the
            commitment; None for the root symbol.
    """

    ancestors: Tuple[bytes, ...] = ()
    merkle: Optional[MerkleProof] = None

    def to_bytes(self):
        w = Writer().u16(len(self.ancestors))
        for ancestor in self.ancestors:
            w.blob(ancestor)
        if self.merkle is None:
            return w.u8(0).getvalue()
        return w.u8(1).raw(self.merkle.to_bytes()).getvalue()

    @classmethod
    def read(cls, reader):
        ancestors = tuple(reader.blob() for _ in range(reader.u16()))
        merkle = None
        if reader.u8():
            merkle, _ = MerkleProof.read(reader)
        return cls(ancestors, merkle)

    @classmethod
    def from_bytes(cls, data):
        reader = Reader(data)
        proof = cls.read(reader)
        reader.expect_end()
        return proof

    @property
    def size(self):
        return len(self.to_bytes())


@dataclass(frozen=True)
class SymbolShare:
    """A symbol as published: id, payload and proof."""

    id: SymbolId
    payload: bytes
    proof: SymbolProof

    def to_bytes(self):
        w = Writer().u16(self.id.layer).u32(self.id.index)
        w.blob(self.payload)
        return w.raw(self.proof.to_bytes()).getvalue()

    @classmethod
    def read(cls, reader):
        sid = SymbolId(reader.u16(), reader.u32())
        payload = reader.blob()
        return cls(sid, payload, SymbolProof.read(reader))

    @classmethod
    def from_bytes(cls, data):
        reader = Reader(data)
        share = cls.read(reader)
        reader.expect_end()
        return share

    def verify(self, root_commitment):
        return verify_symbol(root_commitment, self.id, self.payload, self.proof)


def _top_merkle(root_symbol):
    chunks = [
        digest_slot(root_symbol, slot) for slot in range(TOP_LAYER_WIDTH)
    ]
    return hashcommit.build_merkle_tree(chunks)[1]


def symbol_proof(tree, sid):
    """Return the `SymbolProof` of a symbol of `tree`."""
    if not tree.shape.contains(sid):
        raise IndexError(f"{sid} outside the tree")
    if sid.layer == ROOT_LAYER:
        return SymbolProof()
    chain = ancestors_of(sid)
    top = chain[-1] if chain else sid
    return SymbolProof(
        tuple(tree.symbol(a) for a in chain), tree.merkle.prove(top.index)
    )


def proof_from_layers(lookup, sid):
    """Build a proof from known ancestor symbols.

    Parameters:

        lookup (Callable[[SymbolId], bytes]):
            Returns a known symbol; must cover every ancestor of `sid` and
            the root symbol.

        sid (SymbolId):
            The symbol to prove.

    Returns:

        SymbolProof:
            The proof.
    """
    if sid.layer == ROOT_LAYER:
        return SymbolProof()
    chain = ancestors_of(sid)
    top = chain[-1] if chain else sid
    merkle = _top_merkle(lookup(ROOT_ID)).prove(top.index)
    return SymbolProof(tuple(lookup(a) for a in chain), merkle)


def verify_digest(root_commitment, sid, digest, proof):
    """Check that `digest` is committed at position `sid` (layer >= 2).

    Walks up through the ancestor symbols, checking each child digest sits
    in its parent's slot, then checks the layer-2 Merkle proof. Never
    raises.
    """
    try:
        if sid.layer <= ROOT_LAYER or sid.index < 0:
            return False
        if sid.index >= 2**sid.layer:
            return False
        if len(proof.ancestors) != sid.layer - 2 or proof.merkle is None:
            return False
        current = sid
        for ancestor in proof.ancestors:
            parent, slot = parent_of(current)
            if len(ancestor) != UPPER_SYMBOL_SIZE:
                return False
            if digest_slot(ancestor, slot) != digest:
                return False
            digest = symbol_digest(ancestor)
            current = parent
        merkle = proof.merkle
        if merkle.leaf_index != current.index or len(merkle.path) != 2:
            return False
        return (
            merkle.root == root_commitment
            and hashcommit.verify(merkle, digest)
        )
    except (AttributeError, TypeError, ValueError, IndexError):
        return False


def verify_symbol(root_commitment, sid, payload, proof):
    """Check a symbol's payload against the commitment. Never raises."""
    try:
        if sid.layer == ROOT_LAYER:
            if sid.index != 0 or len(payload) != UPPER_SYMBOL_SIZE:
                return False
            return _top_merkle(payload).root == root_commitment
        if not payload:
            return False
        return verify_digest(
            root_commitment, sid, symbol_digest(payload), proof
        )
    except (AttributeError, TypeError, ValueError, IndexError):
        return False


# ----- sampling -----


@dataclass(frozen=True)
class SampledSubtree:
    """A node's availability sample.

    Attributes:

        c (int):
            Number of bottom-layer samples.

        bottom (Tuple[int, ...]):
            The sampled bottom indices, ascending.

        symbols_by_layer (Mapping[int, FrozenSet[int]]):
            The desired indices per layer: the samples, their paths to the
            root and every sibling of a path symbol.
    """

    c: int
    depth: int
    bottom: Tuple[int, ...]
    symbols_by_layer: Mapping[int, FrozenSet[int]] = field(compare=False)

    def desired(self, layer):
        return self.symbols_by_layer.get(layer, frozenset())

    def ids(self):
        for layer in sorted(self.symbols_by_layer):
            for index in sorted(self.symbols_by_layer[layer]):
                yield SymbolId(layer, index)

    def __contains__(self, sid):
        return sid.index in self.desired(sid.layer)

    @property
    def size(self):
        return sum(len(v) for v in self.symbols_by_layer.values())


def subtree_closure(shape, bottom):
    """Desired sets for the given bottom-layer indices."""
    layers: Dict[int, set] = {m: set() for m in shape.layers}
    layers[ROOT_LAYER].add(0)
    for index in bottom:
        current = SymbolId(shape.depth, int(index))
        while current.layer > ROOT_LAYER:
            layers[current.layer].update(
                s.index for s in sibling_group(current)
            )
            current, _ = parent_of(current)
    return {m: frozenset(v) for m, v in layers.items()}


def sample_subtree(shape, c, rng_seed):
    """Sample `c` distinct bottom symbols and close over paths and siblings.

    Parameters:

        shape (TreeShape):
            The tree dimensions.

        c (int):
            Bottom-layer sample count, `1 <= c <= shape.bottom_width`.

        rng_seed (int):
            The sampling seed.

    Returns:

        SampledSubtree:
            The sample.
    """
    if not 1 <= c <= shape.bottom_width:
        raise ValueError(
            f"c={c} outside [1, {shape.bottom_width}]"
        )
    rng = make_rng(rng_seed)
    bottom = np.sort(rng.choice(shape.bottom_width, size=c, replace=False))
    return SampledSubtree(
        c,
        shape.depth,
        tuple(int(i) for i in bottom),
        MappingProxyType(subtree_closure(shape, bottom)),
    )


# ----- coding fraud proofs -----


@dataclass(frozen=True)
class CodingFraudProof:
    """Evidence that a committed parity equation does not hold.

    Attributes:

        layer (int):
            The layer of the equation.

        check_id (int):
            The equation.

        decoded_index (int):
            Position of the symbol decoded from the equation.

        decoded_symbol (bytes):
            XOR of the other symbols of the equation.

        committed_hash (bytes):
            The digest committed at `decoded_index`.

        hash_proof (SymbolProof):
            Proof of `committed_hash`.

        known_symbols (Tuple[SymbolShare, ...]):
            The other symbols of the equation, each with its proof.
    """

    layer: int
    check_id: int
    decoded_index: int
    decoded_symbol: bytes
    committed_hash: bytes
    hash_proof: SymbolProof
    known_symbols: Tuple[SymbolShare, ...]

    def to_bytes(self):
        w = Writer().u16(self.layer).u32(self.check_id)
        w.u32(self.decoded_index).blob(self.decoded_symbol)
        w.raw(self.committed_hash).raw(self.hash_proof.to_bytes())
        w.u16(len(self.known_symbols))
        for share in self.known_symbols:
            w.raw(share.to_bytes())
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data):
        reader = Reader(data)
        layer, check_id, index = reader.u16(), reader.u32(), reader.u32()
        decoded = reader.blob()
        committed = reader.raw(DIGEST_SIZE)
        hash_proof = SymbolProof.read(reader)
        shares = tuple(SymbolShare.read(reader) for _ in range(reader.u16()))
        reader.expect_end()
        return cls(
            layer, check_id, index, decoded, committed, hash_proof, shares
        )


def make_coding_fraud_proof(layer, check_id, index, code, lookup, prove=None):
    """Assemble a proof for equation `check_id` of `layer`.

    `lookup` returns known symbols (the equation's other members and every
    ancestor up to the root symbol); the committed digest of `index` is
    read from its parent. `prove` returns the proof of another member and
    defaults to rebuilding it from `lookup`.
    """
    if prove is None:
        prove = partial(proof_from_layers, lookup)
    sid = SymbolId(layer, index)
    members = code.parity_graph[check_id]
    others = [SymbolId(layer, v) for v in members if v != index]
    decoded = xor_bytes(*(lookup(o) for o in others))
    parent, slot = parent_of(sid)
    committed = digest_slot(lookup(parent), slot)
    return CodingFraudProof(
        layer,
        check_id,
        index,
        decoded,
        committed,
        proof_from_layers(lookup, sid),
        tuple(
            SymbolShare(o, lookup(o), prove(o))
            for o in others
        ),
    )


def verify_coding_fraud_proof(root_commitment, proof, codes):
    """Check a coding fraud proof. Never raises.

    Holds iff the committed digest and every known symbol verify against
    `root_commitment`, the equation covers exactly these positions, the
    decoded symbol is the XOR of the known symbols, and its digest differs
    from the committed one.
    """
    try:
        code = codes[proof.layer]
        members = code.parity_graph[proof.check_id]
        if not hashcommit.is_digest(proof.committed_hash):
            return False
        target = SymbolId(proof.layer, proof.decoded_index)
        if not verify_digest(
            root_commitment, target, proof.committed_hash, proof.hash_proof
        ):
            return False
        positions = [proof.decoded_index]
        for share in proof.known_symbols:
            if share.id.layer != proof.layer:
                return False
            if not share.verify(root_commitment):
                return False
            positions.append(share.id.index)
        if len(set(positions)) != len(positions):
            return False
        if set(positions) != set(members):
            return False
        recomputed = xor_bytes(*(s.payload for s in proof.known_symbols))
        if recomputed != proof.decoded_symbol:
            return False
        return symbol_digest(proof.decoded_symbol) != proof.committed_hash
    except (AttributeError, TypeError, ValueError, IndexError, KeyError):
        return False


# ----- classical decoding -----


@dataclass(frozen=True)
class Decoded:
    tree: CodedMerkleTree


@dataclass(frozen=True)
class Unavailable:
    layer: int


@dataclass(frozen=True)
class Fraud:
    proof: CodingFraudProof


def _as_shares(revealed):
    if isinstance(revealed, Mapping):
        return [
            SymbolShare(sid, payload, proof)
            for sid, (payload, proof) in revealed.items()
        ]
    return list(revealed)


def decode_tree_classical(root_commitment, revealed, codes):
    """Decode a whole tree from revealed symbols, top layer first.

    Parameters:

        root_commitment (bytes):
            The commitment from the header.

        revealed (Union[Mapping[SymbolId, Tuple[bytes, SymbolProof]],
                  Iterable[SymbolShare]]):
            The published symbols. Shares with invalid proofs are dropped.

        codes (Mapping[int, LdpcCode]):
            The per-layer codes; their number fixes the depth.

    Returns:

        Union[Decoded, Unavailable, Fraud]:
            The decoded tree, the first layer peeling could not finish, or
            a coding fraud proof.
    """
    depth = max(codes)
    shape = TreeShape(2 ** (depth - 1))
    known: Dict[SymbolId, bytes] = {}
    for share in _as_shares(revealed):
        if not shape.contains(share.id):
            continue
        if share.verify(root_commitment):
            known[share.id] = bytes(share.payload)
        else:
            logger.warning("dropping %s: proof does not verify", share.id)

    if ROOT_ID not in known:
        return Unavailable(ROOT_LAYER)
    lookup = known.__getitem__

    for layer in shape.coded_layers:
        code = codes[layer]
        decoder = PeelingDecoder(
            code,
            {
                sid.index: payload
                for sid, payload in known.items()
                if sid.layer == layer
            },
        )
        for check_id, index, value in decoder:
            sid = SymbolId(layer, index)
            parent, slot = parent_of(sid)
            known[sid] = value
            if symbol_digest(value) != digest_slot(known[parent], slot):
                logger.info(
                    "layer %d check %d decodes %s against its hash",
                    layer,
                    check_id,
                    sid,
                )
                del known[sid]
                return Fraud(
                    make_coding_fraud_proof(
                        layer, check_id, index, code, lookup
                    )
                )
        if decoder.remaining:
            return Unavailable(layer)
        violated = decoder.violated_check()
        if violated is not None:
            index = code.parity_graph[violated][0]
            return Fraud(
                make_coding_fraud_proof(layer, violated, index, code, lookup)
            )

    layers = [
        [known[SymbolId(m, i)] for i in range(shape.width(m))]
        for m in shape.layers
    ]
    size = len(layers[-1][0])
    return Decoded(_assemble(shape.L, layers, codes, size))
