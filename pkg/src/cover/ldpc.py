"""
    Rate-1/2 LDPC erasure code over byte-string symbols.

    A code has `n` data symbols (indices `0..n-1`), `n` coded symbols
    (`n..2n-1`) and `n` parity checks. Every check constrains the bytewise
    XOR of its symbols to zero.

    ## Building and decoding

    ```python
    code = construct_code(8, d_L=3, d_R=6, seed=1)
    symbols = encode(code, data)           # 2n symbols, data first
    known = {i: s for i, s in enumerate(symbols) if i not in hidden}
    result = peel_decode(code, known)
    if result.status is PeelStatus.SUCCESS:
        assert list(result.symbols) == symbols
    ```

    ## Stopping sets

    A nonempty symbol set is a stopping set when every check touching it
    touches it at least twice; erasing a stopping set halts peeling.
    `stopping_sets_exhaustive` scans every subset of small codes, and
    `grow_stopping_set` produces a witness on codes of any size.
"""
import heapq
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Optional, Tuple

import numpy as np

from cover.constants import (
    DEFAULT_D_L,
    DEFAULT_D_R,
    EXHAUSTIVE_LIMIT,
    MAX_ENCODE_RETRIES,
)
from cover.errors import DegreeError, EncodingError, StoppingSetError
from cover.hashcommit import Reader, Writer
from cover.utility import xor_bytes

logger = logging.getLogger(__name__)

MEASURE_LIMIT = 16
_SCAN_CHUNK = 1 << 20


@dataclass(frozen=True)
class LdpcCode:
    """Bipartite parity-check structure of a rate-1/2 code.

    Attributes:

        n (int):
            Number of data symbols; the code has `2n` symbols and `n`
            checks.

        parity_graph (Tuple[Tuple[int, ...], ...]):
            For each check, the sorted symbol indices it constrains.

        d_L (int):
            Target symbol degree.

        d_R (int):
            Target check degree.

        seed (int):
            The seed the graph was sampled from.

        f_min (Optional[float]):
            Minimum stopping-set fraction when measured exhaustively,
            otherwise None.

        generator (numpy.ndarray):
            GF(2) matrix mapping data symbols to coded symbols.
    """

    n: int
    parity_graph: Tuple[Tuple[int, ...], ...]
    d_L: int
    d_R: int
    seed: int
    f_min: Optional[float] = None
    generator: np.ndarray = field(
        default=None, repr=False, compare=False, hash=False
    )
    symbol_checks: Tuple[Tuple[int, ...], ...] = field(
        default=(), init=False, repr=False, compare=False
    )

    def __post_init__(self):
        incidence = [[] for _ in range(2 * self.n)]
        for check_id, members in enumerate(self.parity_graph):
            for symbol in members:
                incidence[symbol].append(check_id)
        object.__setattr__(
            self, "symbol_checks", tuple(tuple(c) for c in incidence)
        )

    @property
    def length(self):
        return 2 * self.n

    @property
    def check_degrees(self):
        return tuple(len(members) for members in self.parity_graph)

    @property
    def symbol_degrees(self):
        return tuple(len(checks) for checks in self.symbol_checks)

    def is_data(self, index):
        return index < self.n

    def parity_matrix(self):
        """Return the `n x 2n` parity-check matrix as uint8."""
        matrix = np.zeros((self.n, 2 * self.n), dtype=np.uint8)
        for check_id, members in enumerate(self.parity_graph):
            matrix[check_id, list(members)] = 1
        return matrix


@dataclass(frozen=True)
class ErasurePattern:
    """A set of hidden symbol indices of one code."""

    hidden: FrozenSet[int]
    length: int

    def __post_init__(self):
        hidden = frozenset(self.hidden)
        for index in hidden:
            if not 0 <= index < self.length:
                raise ValueError(f"symbol {index} outside [0, {self.length})")
        object.__setattr__(self, "hidden", hidden)

    @classmethod
    def of(cls, code, hidden):
        return cls(frozenset(hidden), code.length)

    def known(self, symbols):
        return {
            i: s for i, s in enumerate(symbols) if i not in self.hidden
        }


class PeelStatus(Enum):
    """Outcome of a peeling run.

    Attributes:

        SUCCESS (1):
            Every symbol recovered and every check XORs to zero.

        STUCK (2):
            No check has exactly one unknown symbol left.

        PARITY_VIOLATED (3):
            A fully known check does not XOR to zero.
    """

    SUCCESS = 1
    STUCK = 2
    PARITY_VIOLATED = 3


@dataclass(frozen=True)
class PeelResult:
    status: PeelStatus
    symbols: Optional[Tuple[bytes, ...]]
    log: Tuple[Tuple[int, int], ...]
    remaining: FrozenSet[int]
    violated_check: Optional[int] = None

    @property
    def success(self):
        return self.status is PeelStatus.SUCCESS


# ----- GF(2) linear algebra -----


def _eliminate(matrix, rhs=None):
    """Reduce `matrix` (and `rhs` rows alongside) to reduced row echelon
    form over GF(2). Returns the reduced copies and the pivot columns."""
    m = (np.array(matrix, dtype=np.uint8) & 1).copy()
    r = None if rhs is None else np.array(rhs, dtype=np.uint8).copy()
    rows, cols = m.shape
    pivots = []
    row = 0
    for col in range(cols):
        if row >= rows:
            break
        candidates = np.nonzero(m[row:, col])[0]
        if candidates.size == 0:
            continue
        pivot = row + int(candidates[0])
        if pivot != row:
            m[[row, pivot]] = m[[pivot, row]]
            if r is not None:
                r[[row, pivot]] = r[[pivot, row]]
        others = np.nonzero(m[:, col])[0]
        others = others[others != row]
        if others.size:
            m[others] ^= m[row]
            if r is not None:
                r[others] ^= r[row]
        pivots.append(col)
        row += 1
    return m, r, pivots


def gf2_rank(matrix):
    return len(_eliminate(matrix)[2])


def gf2_inverse(matrix):
    """Invert a square GF(2) matrix.

    Raises:

        EncodingError:
            When the matrix is singular.
    """
    size = matrix.shape[0]
    reduced, inverse, pivots = _eliminate(
        matrix, np.eye(size, dtype=np.uint8)
    )
    if len(pivots) != size:
        raise EncodingError("code not systematically encodable")
    return inverse


def _generator_matrix(n, parity_graph):
    h = np.zeros((n, 2 * n), dtype=np.uint8)
    for check_id, members in enumerate(parity_graph):
        h[check_id, list(members)] = 1
    inverse = gf2_inverse(h[:, n:])
    return (inverse.astype(np.int64) @ h[:, :n].astype(np.int64)) % 2


# ----- construction -----


def _sample_graph(n, d_L, d_R, seed):
    rng = np.random.default_rng(seed)
    total = 2 * n
    cap = min(d_R, n + 1)
    budget = np.full(total, d_L, dtype=np.float64)
    checks = []
    for j in range(n):
        members = {n + j}
        budget[n + j] -= 1
        while len(members) < cap:
            weights = np.clip(budget, 0, None)
            weights[list(members)] = 0
            mass = weights.sum()
            if mass <= 0:
                break
            pick = int(rng.choice(total, p=weights / mass))
            members.add(pick)
            budget[pick] -= 1
        checks.append(members)

    # every check needs two members
    for members in checks:
        while len(members) < 2:
            options = [v for v in range(total) if v not in members]
            members.add(options[int(rng.integers(len(options)))])

    # every symbol needs a check
    degree = np.zeros(total, dtype=np.int64)
    for members in checks:
        degree[list(members)] += 1
    for symbol in np.nonzero(degree == 0)[0]:
        sizes = np.array([len(m) for m in checks])
        lightest = np.nonzero(sizes == sizes.min())[0]
        target = int(lightest[int(rng.integers(lightest.size))])
        checks[target].add(int(symbol))
    return tuple(tuple(sorted(m)) for m in checks)


def construct_code(n, d_L=DEFAULT_D_L, d_R=DEFAULT_D_R, seed=0):
    """Sample a near-(d_L, d_R)-regular systematically encodable code.

    Check `j` always contains coded symbol `n + j`; the remaining members
    are drawn in proportion to each symbol's unused degree budget. When the
    coded-symbol submatrix turns out singular, the next seed is tried, up
    to `MAX_ENCODE_RETRIES` seeds in total.

    Parameters:

        n (int):
            Number of data symbols, at least 2.

        d_L (int):
            Target symbol degree.

        d_R (int):
            Target check degree.

        seed (int):
            The first seed to try.

    Returns:

        LdpcCode:
            The code; its `seed` field holds the seed actually used.
    """
    if n < 2:
        raise ValueError("a code needs at least two data symbols")
    if d_L < 1 or d_R < 2 or d_L > n:
        raise DegreeError("degree sequence infeasible")
    for attempt in range(MAX_ENCODE_RETRIES):
        current = seed + attempt
        graph = _sample_graph(n, d_L, d_R, current)
        try:
            generator = _generator_matrix(n, graph)
        except EncodingError:
            logger.warning(
                "code (n=%d, seed=%d) not encodable, retrying", n, current
            )
            continue
        return _finish(n, graph, d_L, d_R, current, generator)
    raise EncodingError("code not systematically encodable")


def _finish(n, graph, d_L, d_R, seed, generator):
    code = LdpcCode(n, graph, d_L, d_R, seed, None, generator)
    if code.length <= MEASURE_LIMIT:
        f_min, _ = stopping_sets_exhaustive(code)
        code = LdpcCode(n, graph, d_L, d_R, seed, f_min, generator)
    return code


def dump_code(code):
    """Serialize a code descriptor: header then explicit edge list."""
    edges = [
        (check_id, symbol)
        for check_id, members in enumerate(code.parity_graph)
        for symbol in members
    ]
    w = Writer().u32(code.n).u32(code.d_L).u32(code.d_R).u64(code.seed)
    w.u32(len(edges))
    for check_id, symbol in edges:
        w.u32(check_id).u32(symbol)
    return w.getvalue()


def load_code(data):
    """Load a code descriptor written by `dump_code` or by hand.

    Raises:

        ValueError:
            On a malformed descriptor or an edge out of range.

        EncodingError:
            When the described code is not systematically encodable.
    """
    reader = Reader(data)
    n, d_L, d_R, seed = reader.u32(), reader.u32(), reader.u32(), reader.u64()
    count = reader.u32()
    members = [set() for _ in range(n)]
    for _ in range(count):
        check_id, symbol = reader.u32(), reader.u32()
        if check_id >= n or symbol >= 2 * n:
            raise ValueError(f"edge ({check_id}, {symbol}) out of range")
        members[check_id].add(symbol)
    reader.expect_end()
    if any(len(m) < 2 for m in members):
        raise ValueError("every check needs at least two symbols")
    graph = tuple(tuple(sorted(m)) for m in members)
    return _finish(n, graph, d_L, d_R, seed, _generator_matrix(n, graph))


# ----- encoding and decoding -----


def _symbol_size(symbols):
    sizes = {len(s) for s in symbols}
    if len(sizes) > 1:
        raise EncodingError("symbols differ in length")
    return sizes.pop() if sizes else 0


def encode(code, data):
    """Systematically encode `n` equal-length data symbols.

    Returns:

        List[bytes]:
            The `2n` symbols; the first `n` are `data` unchanged.
    """
    data = [bytes(s) for s in data]
    if len(data) != code.n:
        raise ValueError(f"expected {code.n} data symbols, got {len(data)}")
    size = _symbol_size(data)
    rows = np.frombuffer(b"".join(data), dtype=np.uint8).reshape(
        code.n, size
    )
    generator = code.generator.astype(bool)
    coded = []
    for i in range(code.n):
        selected = rows[generator[i]]
        if selected.shape[0]:
            coded.append(np.bitwise_xor.reduce(selected, axis=0).tobytes())
        else:
            coded.append(bytes(size))
    return data + coded


def check_holds(code, check_id, symbols):
    """True when the check's symbols, all known, XOR to zero."""
    combined = xor_bytes(*(symbols[i] for i in code.parity_graph[check_id]))
    return not any(combined)


class PeelingDecoder:
    """Step-by-step peeling decoder.

    Each step solves the lowest-numbered check that has exactly one unknown
    symbol, so identical inputs always peel in the same order.
    """

    def __init__(self, code, known):
        self.code = code
        self.values: Dict[int, bytes] = {i: bytes(s) for i, s in known.items()}
        self.size = _symbol_size(self.values.values())
        self.log = []
        self._unknown = [
            sum(1 for v in members if v not in self.values)
            for members in code.parity_graph
        ]
        self._ready = [c for c, u in enumerate(self._unknown) if u == 1]
        heapq.heapify(self._ready)

    @property
    def remaining(self):
        return frozenset(
            i for i in range(self.code.length) if i not in self.values
        )

    def learn(self, index, value):
        """Add a symbol obtained outside the decoder."""
        if index in self.values:
            return
        self.values[index] = bytes(value)
        for check_id in self.code.symbol_checks[index]:
            self._unknown[check_id] -= 1
            if self._unknown[check_id] == 1:
                heapq.heappush(self._ready, check_id)

    def step(self):
        """Peel one symbol.

        Returns:

            Optional[Tuple[int, int, bytes]]:
                `(check, index, value)`, or None when no check has exactly
                one unknown symbol.
        """
        while self._ready:
            check_id = heapq.heappop(self._ready)
            if self._unknown[check_id] != 1:
                continue
            members = self.code.parity_graph[check_id]
            index = next(v for v in members if v not in self.values)
            value = xor_bytes(
                *(self.values[v] for v in members if v != index)
            )
            self.learn(index, value)
            self.log.append((check_id, index))
            return check_id, index, value
        return None

    def __iter__(self):
        while True:
            peeled = self.step()
            if peeled is None:
                return
            yield peeled

    def violated_check(self):
        """Lowest fully known check that does not XOR to zero."""
        for check_id, members in enumerate(self.code.parity_graph):
            if self._unknown[check_id] == 0 and not check_holds(
                self.code, check_id, self.values
            ):
                return check_id
        return None


def peel_decode(code, known):
    """Run the peeling decoder to completion.

    Parameters:

        code (LdpcCode):
            The code.

        known (Dict[int, bytes]):
            Known symbols by index.

    Returns:

        PeelResult:
            `SUCCESS` with all `2n` symbols and the `(check, index)` log,
            `STUCK` with the unknown set, or `PARITY_VIOLATED` with the
            offending check.
    """
    decoder = PeelingDecoder(code, known)
    violated = decoder.violated_check()
    if violated is None:
        for _ in decoder:
            pass
        violated = decoder.violated_check()
    log = tuple(decoder.log)
    remaining = decoder.remaining
    if violated is not None:
        return PeelResult(
            PeelStatus.PARITY_VIOLATED, None, log, remaining, violated
        )
    if remaining:
        return PeelResult(PeelStatus.STUCK, None, log, remaining)
    symbols = tuple(decoder.values[i] for i in range(code.length))
    return PeelResult(PeelStatus.SUCCESS, symbols, log, remaining)


def solve_gf2(code, known):
    """Complete `known` by Gaussian elimination over GF(2).

    Returns:

        Optional[List[bytes]]:
            All `2n` symbols when the parity system has exactly one
            consistent completion, otherwise None.
    """
    size = _symbol_size(known.values())
    unknown = [i for i in range(code.length) if i not in known]
    if not unknown:
        return [bytes(known[i]) for i in range(code.length)]
    column = {symbol: c for c, symbol in enumerate(unknown)}
    matrix = np.zeros((code.n, len(unknown)), dtype=np.uint8)
    rhs = np.zeros((code.n, size), dtype=np.uint8)
    for check_id, members in enumerate(code.parity_graph):
        for symbol in members:
            if symbol in column:
                matrix[check_id, column[symbol]] = 1
            else:
                rhs[check_id] ^= np.frombuffer(known[symbol], np.uint8)
    reduced, values, pivots = _eliminate(matrix, rhs)
    if len(pivots) != len(unknown):
        return None
    if values[len(pivots) :].any():
        return None
    solved = dict(known)
    for row, col in enumerate(pivots):
        solved[unknown[col]] = values[row].tobytes()
    return [bytes(solved[i]) for i in range(code.length)]


# ----- stopping sets -----


def is_stopping_set(code, symbols):
    """Definitional test: nonempty, and no check touches it exactly once."""
    symbols = set(symbols)
    if not symbols:
        return False
    for members in code.parity_graph:
        if sum(1 for v in members if v in symbols) == 1:
            return False
    return True


def _popcount(values):
    as_bytes = values.astype("<u4").view(np.uint8).reshape(-1, 4)
    return np.unpackbits(as_bytes, axis=1).sum(axis=1)


def stopping_sets_exhaustive(code):
    """Scan every symbol subset for stopping sets.

    Returns:

        Tuple[float, List[FrozenSet[int]]]:
            `f_min`, the smallest stopping-set size over `2n`, and every
            stopping set of that size, in ascending bitmask order.
    """
    total = code.length
    if total > EXHAUSTIVE_LIMIT:
        raise StoppingSetError("use sampled estimate")
    masks = [
        sum(1 << v for v in members) for members in code.parity_graph
    ]
    best = total + 1
    winners = []
    for start in range(1, 1 << total, _SCAN_CHUNK):
        stop = min(start + _SCAN_CHUNK, 1 << total)
        subsets = np.arange(start, stop, dtype=np.uint32)
        touched_once = np.zeros(subsets.shape, dtype=bool)
        for mask in masks:
            hit = subsets & np.uint32(mask)
            touched_once |= (hit != 0) & ((hit & (hit - np.uint32(1))) == 0)
        stopping = subsets[~touched_once]
        if stopping.size == 0:
            continue
        sizes = _popcount(stopping)
        smallest = int(sizes.min())
        if smallest < best:
            best = smallest
            winners = []
        if smallest == best:
            winners.extend(int(m) for m in stopping[sizes == best])
    sets = [
        frozenset(v for v in range(total) if m >> v & 1) for m in winners
    ]
    return best / total, sets


def grow_stopping_set(code, start):
    """Grow a stopping set from one symbol.

    While some check touches the set exactly once, the lowest such check
    adds its lowest outside member. The result always satisfies
    `is_stopping_set`.
    """
    chosen = set()
    touches = [0] * code.n
    ready = []

    def add(symbol):
        chosen.add(symbol)
        for check_id in code.symbol_checks[symbol]:
            touches[check_id] += 1
            if touches[check_id] == 1:
                heapq.heappush(ready, check_id)

    add(start)
    while ready:
        check_id = heapq.heappop(ready)
        if touches[check_id] != 1:
            continue
        members = code.parity_graph[check_id]
        add(next(v for v in members if v not in chosen))
    return frozenset(chosen)


def estimate_stopping_fraction(code, starts=None):
    """Smallest grown witness over the given starts, as a fraction.

    This is an upper bound on `f_min` for codes too large to scan.

    Returns:

        Tuple[float, FrozenSet[int]]:
            The fraction and the witness achieving it.
    """
    if starts is None:
        starts = range(code.length)
    best = None
    for start in starts:
        witness = grow_stopping_set(code, start)
        if best is None or len(witness) < len(best):
            best = witness
    return len(best) / code.length, best
