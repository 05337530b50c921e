import pytest

from cover import adversary, cmt, harness, ldpc, ledger, netsim
from cover.constants import (
    BAD_SIG,
    BAD_SUM,
    CHECK_SIGNATURE,
    CHECK_SUMS,
    CODING_FRAUD,
    FRAUD_PROOF,
)
from cover.errors import ConfigError, StoppingSetError
from cover.fixtures import coding_fraud_example, toy_code
from cover.utility import derive_seed, make_rng


@pytest.fixture(scope="module")
def workload():
    config = harness.ScenarioConfig.named("smoke")
    return harness.Workload(config, harness.make_scheme(config.scheme))


def context(workload, **options):
    config = workload.config
    return adversary.MinerContext(
        workload.scheme,
        workload.keys,
        (workload.genesis,),
        k=config.k,
        symbol_size=config.symbol_size,
        code_seed=derive_seed(config.code_seed, "block", 1),
        **options,
    )


def transfers(workload):
    return workload.transfers(0, make_rng(2, "transfers"))


def test_strategies_parse_from_scenario_entries():
    strategy = adversary.miner_strategy_from_dict(
        {"kind": "hide_stopping_set", "symbols": [0, 2, 5]}
    )
    assert strategy == adversary.HideStoppingSet(symbols=(0, 2, 5))
    assert strategy.as_dict()["symbols"] == [0, 2, 5]
    fraud = adversary.miner_strategy_from_dict(
        {"kind": "coding_fraud", "corruption": "ff00"}
    )
    assert fraud.corruption == b"\xff\x00"
    assert fraud.as_dict()["corruption"] == "ff00"
    assert adversary.miner_strategy_from_dict("honest") == adversary.Honest()
    spam = adversary.byzantine_strategy_from_dict(
        {"kind": "fake_symbol_spam", "rate": 3}
    )
    assert spam.as_dict() == {"kind": "fake_symbol_spam", "rate": 3}


@pytest.mark.parametrize(
    "entry",
    [
        {"kind": "bribe"},
        {"kind": "honest", "layer": 2},
        {"kind": "invalid_txn", "txn_class": "forged"},
        {"kind": "withhold_random", "fraction": 1.5},
    ],
)
def test_bad_miner_entries(entry):
    with pytest.raises(ConfigError):
        adversary.miner_strategy_from_dict(entry)


def test_bad_byzantine_entries():
    with pytest.raises(ConfigError):
        adversary.byzantine_strategy_from_dict({"kind": "loud"})
    with pytest.raises(ConfigError):
        adversary.byzantine_strategy_from_dict(
            {"kind": "fake_symbol_spam", "rate": -1}
        )


def test_stopping_set_choice():
    code = toy_code()
    assert adversary.choose_stopping_set(code, (0, 2, 5)) == {0, 2, 5}
    with pytest.raises(StoppingSetError):
        adversary.choose_stopping_set(code, (0, 2))
    chosen = adversary.choose_stopping_set(code)
    assert ldpc.is_stopping_set(code, chosen)
    assert len(chosen) == 3
    assert adversary.stopping_fraction(code) == pytest.approx(0.5)


def test_coding_fraud_target_prefers_the_rarest_member():
    code = toy_code()
    # symbol 2 sits in one parity, 0 and 4 in two
    assert adversary.coding_fraud_target(code, 0) == 2
    assert adversary.coding_fraud_target(code, 2) == 5


def test_honest_production_publishes_everything(workload):
    production = adversary.produce_block(
        adversary.Honest(), transfers(workload), context(workload)
    )
    assert production.header.height == 1
    assert production.header.prev_hash == workload.genesis.header.hash
    assert production.published_ids == frozenset(
        production.tree.shape.all_ids()
    )
    assert not production.hidden


def test_hidden_symbols_are_not_published(workload):
    production = adversary.produce_block(
        adversary.HideStoppingSet(), transfers(workload), context(workload)
    )
    layer = production.tree.depth
    indices = {sid.index for sid in production.hidden}
    assert all(sid.layer == layer for sid in production.hidden)
    assert ldpc.is_stopping_set(production.tree.codes[layer], indices)
    assert not production.hidden & production.published_ids


def test_coding_fraud_production(workload):
    production = adversary.produce_block(
        adversary.CodingFraud(), transfers(workload), context(workload)
    )
    target = production.corrupted
    tree = production.tree
    assert production.header.root == tree.root_commitment
    share = tree.shares([target])[0]
    assert share.verify(production.header.root)
    code = tree.codes[target.layer]
    assert not ldpc.check_holds(code, 0, tree.layer(target.layer))


def test_coding_fraud_rejects_a_foreign_member(workload):
    tree = adversary.produce_block(
        adversary.Honest(), transfers(workload), context(workload)
    ).tree
    code = tree.codes[tree.depth]
    outsider = next(
        v for v in range(code.length) if v not in code.parity_graph[0]
    )
    with pytest.raises(ValueError):
        adversary.produce_block(
            adversary.CodingFraud(index=outsider),
            transfers(workload),
            context(workload),
        )
    with pytest.raises(ValueError):
        adversary.produce_block(
            adversary.CodingFraud(corruption=b"\x00"),
            transfers(workload),
            context(workload),
        )


@pytest.mark.parametrize(
    "txn_class, failed", [(BAD_SIG, CHECK_SIGNATURE), (BAD_SUM, CHECK_SUMS)]
)
def test_invalid_transaction_production(workload, txn_class, failed):
    production = adversary.produce_block(
        adversary.InvalidTxn(txn_class), transfers(workload), context(workload)
    )
    bad = production.invalid_txn
    block = production.block
    position = block.transactions.index(bad)
    check = ledger.validate_transaction(
        bad,
        ledger.SpentTxoTable(),
        ledger.HeaderChain([workload.genesis.header, block.header]),
        1,
        workload.scheme,
        proof=block.inclusion_proof(position),
    )
    assert check.failed == failed


def test_double_spend_production(workload):
    production = adversary.produce_block(
        adversary.InvalidTxn("double_spend"),
        transfers(workload),
        context(workload),
    )
    bad = production.invalid_txn
    twins = [
        t for t in production.block.transactions if t.inputs == bad.inputs
    ]
    assert len(twins) == 2


def test_expired_spend_needs_old_funding(workload):
    with pytest.raises(ValueError):
        adversary.produce_block(
            adversary.InvalidTxn("expired"),
            transfers(workload),
            context(workload, tau=4),
        )


def test_unsorted_production_breaks_the_order(workload):
    production = adversary.produce_block(
        adversary.InvalidTxn("unsorted"), transfers(workload), context(workload)
    )
    block = production.block
    placed = [
        ledger.PlacedTxn(txn, block.inclusion_proof(i))
        for i, txn in enumerate(block.transactions)
    ]
    assert ledger.check_sorted(placed, 2) is not None


def test_withholding_is_seeded(workload):
    strategy = adversary.WithholdRandom(fraction=0.5)
    first = adversary.produce_block(
        strategy, transfers(workload), context(workload, seed=7)
    )
    second = adversary.produce_block(
        strategy, transfers(workload), context(workload, seed=7)
    )
    assert first.hidden == second.hidden
    assert first.hidden
    assert len(first.publications) + len(first.hidden) == first.tree.shape.size


def test_byzantine_behavior():
    example = coding_fraud_example()
    share = example.honest.shares([cmt.SymbolId(3, 1)])[0]
    message = netsim.SymbolMessage(share)
    header = netsim.HeaderMessage(example.header())
    rng = make_rng(0, "byzantine-test")

    assert adversary.byzantine_behavior(adversary.Silent(), message, rng) == []

    dropper = adversary.DropSelective(layer=3, fraction=1.0)
    assert adversary.byzantine_behavior(dropper, message, rng) == []
    assert adversary.byzantine_behavior(dropper, header, rng) == [header]

    spam = adversary.FakeSymbolSpam(rate=2)
    out = adversary.byzantine_behavior(spam, message, rng)
    assert out[0] is message
    assert len(out) == 3
    assert not any(m.share.verify(example.root) for m in out[1:])

    forger = adversary.FakeFraudProofSpam(rate=2)
    out = adversary.byzantine_behavior(
        forger, header, rng, header=example.header()
    )
    assert [type(m) for m in out] == [
        netsim.HeaderMessage,
        netsim.FraudProofMessage,
        netsim.CodingFraudMessage,
    ]
    assert not cmt.verify_coding_fraud_proof(
        example.root, out[2].proof, example.codes
    )


def test_byzantine_spam_does_not_flip_an_honest_verdict():
    config = harness.ScenarioConfig.named(
        "smoke",
        N_h=6,
        alpha=0.25,
        byzantine=[
            {"kind": "fake_symbol_spam", "rate": 1},
            {"kind": "fake_fraud_proof_spam", "rate": 2},
        ],
        trials=1,
    )
    workload = harness.Workload(config, harness.make_scheme(config.scheme))
    metrics = harness.run_trial(config, 0, workload)
    reasons = {row.reason for row in metrics.rows}
    assert not reasons & {FRAUD_PROOF, CODING_FRAUD}
