import pytest

from cover import ldpc
from cover.errors import DegreeError, StoppingSetError
from cover.fixtures import code_descriptor, toy_code
from cover.ldpc import PeelStatus


def data_symbols(n, size=8):
    return [bytes([i + 1]) * size for i in range(n)]


def test_toy_code_structure():
    code = toy_code()
    assert code.n == 3
    assert code.length == 6
    assert code.parity_graph == ((0, 2, 4), (1, 3, 4), (0, 1, 5))
    assert code.symbol_checks[4] == (0, 1)


def test_encoding_is_systematic_and_satisfies_every_check():
    code = toy_code()
    data = data_symbols(3)
    symbols = ldpc.encode(code, data)
    assert symbols[:3] == data
    for check_id in range(code.n):
        assert ldpc.check_holds(code, check_id, symbols)


def test_peeling_recovers_erased_data():
    code = toy_code()
    symbols = ldpc.encode(code, data_symbols(3))
    known = {i: s for i, s in enumerate(symbols) if i not in (0, 1)}
    result = ldpc.peel_decode(code, known)
    assert result.success
    assert list(result.symbols) == symbols
    # lowest ready check first: check 0 yields symbol 0, then check 1
    assert result.log == ((0, 0), (1, 1))


def test_peeling_stops_on_a_stopping_set():
    code = toy_code()
    symbols = ldpc.encode(code, data_symbols(3))
    hidden = {0, 2, 5}
    assert ldpc.is_stopping_set(code, hidden)
    known = ldpc.ErasurePattern.of(code, hidden).known(symbols)
    result = ldpc.peel_decode(code, known)
    assert result.status is PeelStatus.STUCK
    assert result.remaining == frozenset(hidden)


def test_peeling_reports_a_violated_parity():
    code = toy_code()
    symbols = list(ldpc.encode(code, data_symbols(3)))
    symbols[2] = bytes(8)
    known = dict(enumerate(symbols))
    result = ldpc.peel_decode(code, known)
    assert result.status is PeelStatus.PARITY_VIOLATED
    assert result.violated_check == 0


def test_toy_stopping_sets():
    code = toy_code()
    f_min, sets = ldpc.stopping_sets_exhaustive(code)
    assert f_min == pytest.approx(0.5)
    assert code.f_min == pytest.approx(0.5)
    for chosen in ({0, 2, 5}, {1, 3, 5}, {2, 3, 4}, {0, 1, 4}):
        assert frozenset(chosen) in sets
    assert all(ldpc.is_stopping_set(code, s) for s in sets)
    assert not ldpc.is_stopping_set(code, set())
    assert not ldpc.is_stopping_set(code, {0, 2})


def test_grown_witness_is_a_stopping_set():
    code = ldpc.construct_code(32, seed=3)
    for start in (0, 17, 63):
        witness = ldpc.grow_stopping_set(code, start)
        assert start in witness
        assert ldpc.is_stopping_set(code, witness)
    fraction, witness = ldpc.estimate_stopping_fraction(code)
    assert fraction == len(witness) / code.length


def test_exhaustive_scan_refuses_large_codes():
    code = ldpc.construct_code(32, seed=3)
    with pytest.raises(StoppingSetError):
        ldpc.stopping_sets_exhaustive(code)


def test_construction_is_seeded_and_near_regular():
    a = ldpc.construct_code(16, d_L=3, d_R=6, seed=11)
    b = ldpc.construct_code(16, d_L=3, d_R=6, seed=11)
    assert a.parity_graph == b.parity_graph
    assert all(a.n + j in members for j, members in enumerate(a.parity_graph))
    assert min(a.symbol_degrees) >= 1
    assert min(a.check_degrees) >= 2


def test_infeasible_degrees_raise():
    with pytest.raises(DegreeError):
        ldpc.construct_code(4, d_L=5, d_R=6)
    with pytest.raises(ValueError):
        ldpc.construct_code(1)


def test_encode_decode_random_code():
    code = ldpc.construct_code(8, seed=5)
    symbols = ldpc.encode(code, data_symbols(8, size=32))
    known = {i: s for i, s in enumerate(symbols) if i != 3}
    result = ldpc.peel_decode(code, known)
    assert result.success
    assert list(result.symbols) == symbols


def test_gaussian_elimination_needs_a_unique_completion():
    code = toy_code()
    symbols = ldpc.encode(code, data_symbols(3))
    known = {i: s for i, s in enumerate(symbols) if i not in (0, 2, 5)}
    assert ldpc.solve_gf2(code, known) is None
    easy = {i: s for i, s in enumerate(symbols) if i != 4}
    assert ldpc.solve_gf2(code, easy) == list(symbols)


def test_descriptor_round_trip_and_validation():
    code = ldpc.construct_code(8, seed=2)
    loaded = ldpc.load_code(ldpc.dump_code(code))
    assert loaded.parity_graph == code.parity_graph
    with pytest.raises(ValueError):
        ldpc.load_code(code_descriptor(3, ((0, 9), (1, 3), (2, 5)), 2, 3))
    with pytest.raises(ValueError):
        ldpc.load_code(code_descriptor(3, ((0,), (1, 3), (2, 5)), 2, 3))


def stopping_sets(code):
    sets = []
    for mask in range(1, 1 << code.length):
        chosen = {v for v in range(code.length) if mask >> v & 1}
        if ldpc.is_stopping_set(code, chosen):
            sets.append(frozenset(chosen))
    return sets


@pytest.mark.parametrize("seed", range(20))
def test_peeling_matches_the_oracles(seed):
    code = ldpc.construct_code(4, seed=seed)
    symbols = ldpc.encode(code, data_symbols(4, size=4))
    oracle = stopping_sets(code)
    for mask in range((1 << code.length) - 1):
        erased = {v for v in range(code.length) if mask >> v & 1}
        known = {i: s for i, s in enumerate(symbols) if i not in erased}
        result = ldpc.peel_decode(code, known)
        blocked = any(s <= erased for s in oracle)
        assert result.success is not blocked
        if result.success:
            assert list(result.symbols) == symbols
            assert ldpc.solve_gf2(code, known) == list(symbols)
        else:
            assert result.remaining in oracle
