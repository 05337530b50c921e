"""
    Experiments: closed-form bounds, Monte Carlo estimates, full protocol
    rounds and their export.

    ## Bounds

    Pure functions of the parameters, natural logarithms throughout.
    Bounds that drop below zero are reported as zero.

    ## Estimates

    Every empirical probability carries a Wilson interval. A `BoundCheck`
    against a lower bound passes when the interval's lower edge reaches the
    bound. In lenient mode the upper edge is enough: the estimate is then
    only required not to sit significantly below the bound.

    ## Scenarios

    `ScenarioConfig` holds every parameter of a run; `run_scenario` plays
    `trials` independent trials of `rounds` blocks and summarizes them
    against the theorem case the miner strategy targets.

    ## Work

    `fit_work_constant` measures one node's structural download per block
    size; `fit_interest_bytes` measures interest-list traffic per neighbor
    over graphs of several densities.
"""
import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from cover import adversary, cmt, ledger, netsim, protocol
from cover.constants import (
    ACCEPT,
    CODING_FRAUD_MINER,
    CONNECTIVITY_TRIALS,
    DEFAULT_D_L,
    DEFAULT_D_R,
    DEFAULT_DELTA,
    DEFAULT_LAMBDA,
    DEFAULT_SYMBOL_SIZE,
    DEFAULT_TAU,
    DEFAULT_TXN_SYMBOL_SIZE,
    EXPIRED,
    HIDE_STOPPING_SET,
    HONEST,
    INVALID_TXN,
    REJECT,
    ROUND_TRIALS,
    SCALAR_TRIALS,
    WILSON_Z,
    WITHHOLD_RANDOM,
)
from cover.errors import ConfigError, RegimeError
from cover.scenarios.standard import STANDARD_SCENARIOS
from cover.scenarios.user import USER_SCENARIOS
from cover.utility import derive_seed, make_rng

logger = logging.getLogger(__name__)


# ----- bounds -----


def _floor_zero(value):
    return max(0.0, value)


def coverage_bound(k, lam=DEFAULT_LAMBDA):
    """Honest nodes needed so every section is covered with probability
    at least `1 - exp(-lam)`: `ceil(k (ln k + lam))`."""
    if k < 1:
        raise ValueError("k must be at least 1")
    return math.ceil(k * (math.log(k) + lam))


def coverage_lower_bound(k, N_h):
    """`1 - k exp(-N_h / k)`: probability all `k` sections are covered."""
    return _floor_zero(1.0 - k * math.exp(-N_h / k))


def tree_coverage_bound(L, c, lam=DEFAULT_LAMBDA):
    """Honest nodes needed so every tree symbol is sampled, `(L/c)(ln L +
    lam)`."""
    return (L / c) * (math.log(L) + lam)


def honest_node_requirement(k, L, lam=DEFAULT_LAMBDA):
    """The end-to-end precondition `k (ln L + lam)`."""
    return k * (math.log(L) + lam)


def detection_probability(f, c):
    """Chance that `c` samples hit a hidden fraction `f`:
    `1 - (1 - f)^c`."""
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"hidden fraction {f} outside [0, 1]")
    if c < 1:
        raise ValueError("c must be at least 1")
    return 1.0 - (1.0 - f) ** c


def connectivity_fraction(L, k):
    """The interest density `r = ((L/k) ln L) / (4L)`."""
    return (L / k) * math.log(L) / (4 * L)


@dataclass(frozen=True)
class ConnectivityRequirement:
    """Edge density that keeps every interest subgraph connected.

    Attributes:

        r (float):
            Interest density of a symbol.

        M (int):
            Number of symbols, `4L`.

        p (float):
            Required edge probability between honest nodes.

        p_total (float):
            `p` scaled by `1 / (1 - alpha)` for the whole graph.

        neighbors (float):
            Expected neighbors per node, `p_total * N`.
    """

    r: float
    M: int
    p: float
    p_total: float
    neighbors: float


def connectivity_requirement(N_h, k, L, lam=DEFAULT_LAMBDA, alpha=0.0):
    """Required neighbors per node.

    Raises:

        RegimeError:
            When `r N_h / 2 <= 1`.
    """
    r = connectivity_fraction(L, k)
    half = r * N_h / 2
    if half <= 1:
        raise RegimeError("regime below theorem's validity")
    p = min(1.0, 2 * lam * math.log(half) / (r * N_h))
    p_total = min(1.0, p / (1 - alpha))
    N = N_h / (1 - alpha)
    return ConnectivityRequirement(r, 4 * L, p, p_total, p_total * N)


def connectivity_probability(N_h, k, L, lam=DEFAULT_LAMBDA):
    """Lower bound on every interest subgraph being connected at the
    required density."""
    r = connectivity_fraction(L, k)
    half = r * N_h / 2
    if half <= 1:
        raise RegimeError("regime below theorem's validity")
    M = 4 * L
    return _floor_zero(
        1.0
        - M * half ** (1 - lam)
        - M * math.exp(-r * N_h / (8 * (1 - r)))
    )


def neighbors_required(N_h, k, L, lam=DEFAULT_LAMBDA, alpha=0.0):
    """Closed form `8 lam k / (1 - alpha) * ln(N_h ln L / 8k) / ln L`."""
    inner = N_h * math.log(L) / (8 * k)
    if inner <= 1:
        raise RegimeError("regime below theorem's validity")
    return 8 * lam * k / (1 - alpha) * math.log(inner) / math.log(L)


def theorem_valid_bound(N_h, k, L, lam=DEFAULT_LAMBDA):
    """Probability all honest nodes accept a valid available block."""
    return _floor_zero(
        1.0
        - math.exp(-lam)
        - 4 * L * (N_h / (8 * k)) ** (1 - lam)
        - 4 * L * math.exp(-N_h / (8 * (4 * k - 1)))
    )


theorem_invalid_bound = theorem_valid_bound


def theorem_unavailable_bound(N_h, f, L, k):
    """Probability all honest nodes reject when a fraction `f` of a layer
    is hidden: `1 - N_h (1 - f)^(L/k)`."""
    return _floor_zero(1.0 - N_h * (1.0 - f) ** (L / k))


# ----- intervals -----


def wilson_interval(successes, trials, z=WILSON_Z):
    """Wilson score interval of a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not 0 <= successes <= trials:
        raise ValueError("successes outside [0, trials]")
    phat = successes / trials
    z2 = z * z
    denom = 1 + z2 / trials
    centre = (phat + z2 / (2 * trials)) / denom
    spread = z * math.sqrt(phat * (1 - phat) / trials + z2 / (4 * trials**2))
    spread /= denom
    return max(0.0, centre - spread), min(1.0, centre + spread)


@dataclass(frozen=True)
class Estimate:
    successes: int
    trials: int

    @property
    def rate(self):
        return self.successes / self.trials

    @property
    def interval(self):
        return wilson_interval(self.successes, self.trials)


@dataclass(frozen=True)
class BoundCheck:
    """An empirical rate compared with a theoretical lower bound."""

    name: str
    bound: float
    successes: int
    trials: int
    interval: Tuple[float, float]
    passed: bool

    @classmethod
    def lower(cls, name, bound, estimate, lenient=False):
        interval = estimate.interval
        edge = interval[1] if lenient else interval[0]
        return cls(
            name,
            bound,
            estimate.successes,
            estimate.trials,
            interval,
            edge >= bound,
        )

    @property
    def rate(self):
        return self.successes / self.trials

    def as_dict(self):
        data = asdict(self)
        data["interval"] = list(self.interval)
        data["rate"] = self.rate
        return data


# ----- monte carlo -----


def mc_coverage(k, N_h, trials=SCALAR_TRIALS, seed=0):
    """Trials in which `N_h` uniform section choices cover all `k`."""
    if k < 1 or trials < 1:
        raise ValueError("k and trials must be at least 1")
    rng = make_rng(seed, "coverage")
    draws = rng.integers(k, size=(trials, N_h))
    covered = np.zeros((trials, k), dtype=bool)
    covered[np.arange(trials)[:, None], draws] = True
    return Estimate(int(covered.all(axis=1).sum()), trials)


def _group_hits(shape, hidden):
    """For each layer, whether the sibling group on each bottom index's
    path holds a hidden symbol."""
    hits = {}
    for layer in shape.coded_layers:
        row = np.zeros(shape.bottom_width, dtype=bool)
        for bottom in range(shape.bottom_width):
            sid = cmt.SymbolId(shape.depth, bottom)
            while sid.layer > layer:
                sid, _ = cmt.parent_of(sid)
            row[bottom] = any(s in hidden for s in cmt.sibling_group(sid))
        hits[layer] = row
    return hits


def mc_detection(shape, hidden, c, trials=SCALAR_TRIALS, seed=0):
    """Per-layer rate at which one node's sample includes a hidden symbol.

    Parameters:

        shape (TreeShape):
            The tree dimensions.

        hidden (Iterable[SymbolId]):
            Withheld symbols.

        c (int):
            Bottom-layer samples per node.

    Returns:

        Dict[int, Estimate]:
            Hits per coded layer.
    """
    if not 1 <= c <= shape.bottom_width:
        raise ValueError(f"c={c} outside [1, {shape.bottom_width}]")
    hidden = frozenset(hidden)
    hits = _group_hits(shape, hidden)
    rng = make_rng(seed, "detection")
    counts = {layer: 0 for layer in hits}
    done = 0
    chunk = max(1, min(trials, (1 << 22) // shape.bottom_width))
    while done < trials:
        size = min(chunk, trials - done)
        keys = rng.random((size, shape.bottom_width))
        samples = np.argpartition(keys, c - 1, axis=1)[:, :c]
        for layer, row in hits.items():
            counts[layer] += int(row[samples].any(axis=1).sum())
        done += size
    return {layer: Estimate(n, trials) for layer, n in counts.items()}


def interest_matrix(ids, interests):
    """Boolean `nodes x symbols` membership matrix."""
    column = {sid: j for j, sid in enumerate(ids)}
    matrix = np.zeros((len(interests), len(ids)), dtype=bool)
    for row, wanted in enumerate(interests):
        for sid in wanted:
            j = column.get(sid)
            if j is not None:
                matrix[row, j] = True
    return matrix


def subgraphs_connected(adjacency, members):
    """Per column of `members`, whether the member rows induce a
    connected subgraph of `adjacency`.

    Reachability grows from each column's first member by repeated
    multiplication with the adjacency matrix.
    """
    if members.size == 0:
        return np.ones(members.shape[1], dtype=bool)
    adjacency = adjacency.astype(np.float32)
    first = np.argmax(members, axis=0)
    reach = np.zeros(members.shape, dtype=bool)
    cols = np.arange(members.shape[1])
    reach[first, cols] = members[first, cols]
    while True:
        grown = ((adjacency @ reach.astype(np.float32)) > 0) & members
        grown |= reach
        if np.array_equal(grown, reach):
            break
        reach = grown
    return (reach == members).all(axis=0)


def honest_adjacency(graph):
    honest = graph.honest_nodes
    index = {node: i for i, node in enumerate(honest)}
    adjacency = np.zeros((len(honest), len(honest)), dtype=bool)
    for u, v in graph.edges:
        if u in index and v in index:
            adjacency[index[u], index[v]] = adjacency[index[v], index[u]] = True
    return honest, adjacency


def all_interests_connected(graph, interests, ids):
    """Whether every symbol's honest interest subgraph is connected."""
    honest, adjacency = honest_adjacency(graph)
    members = interest_matrix(ids, [interests.get(n, ()) for n in honest])
    return bool(subgraphs_connected(adjacency, members).all())


def total_nodes(N_h, alpha):
    """Smallest `N` whose honest part, `N - floor(alpha N)`, is `N_h`."""
    N = max(N_h, math.ceil(N_h / (1 - alpha)))
    while N - math.floor(alpha * N) < N_h:
        N += 1
    while N > N_h and N - 1 - math.floor(alpha * (N - 1)) >= N_h:
        N -= 1
    return N


def mc_connectivity(
    N_h,
    L,
    k,
    p,
    alpha=0.0,
    c=None,
    trials=CONNECTIVITY_TRIALS,
    seed=0,
):
    """Trials in which every symbol's honest interest subgraph is connected.

    Each honest node is interested in a random sampled subtree with `c`
    bottom samples (`L // k` by default).
    """
    shape = cmt.TreeShape.for_count(L)
    c = c or max(1, shape.L // k)
    ids = list(shape.all_ids())
    N = total_nodes(N_h, alpha)
    successes = 0
    for trial in range(trials):
        trial_seed = derive_seed(seed, "connectivity", trial)
        graph = netsim.generate_graph(N, p, trial_seed, alpha)
        interests = {
            node: frozenset(
                cmt.sample_subtree(
                    shape, c, derive_seed(trial_seed, "sample", node)
                ).ids()
            )
            for node in graph.honest_nodes
        }
        successes += all_interests_connected(graph, interests, ids)
    return Estimate(successes, trials)


# ----- work -----


@dataclass(frozen=True)
class WorkFit:
    """Structural per-node download at one block size."""

    L: int
    c: int
    download: int
    constant: float


def node_download(tree, interests):
    """Bytes of every share in `interests`, payload and proof."""
    return sum(len(share.to_bytes()) for share in tree.shares(sorted(interests)))


def fit_work_constant(
    Ls,
    k,
    symbol_size=DEFAULT_SYMBOL_SIZE,
    d_L=DEFAULT_D_L,
    d_R=DEFAULT_D_R,
    seed=0,
):
    """Download of one node sampling `L // k` symbols, and the constant
    `C = download / ((L/k) ln L)`, for each `L`.

    The download counts the sampled subtree, every symbol of the needed
    parities and their proofs.
    """
    fits = []
    for L in Ls:
        rng = make_rng(seed, "work", L)
        base = [rng.bytes(symbol_size) for _ in range(L)]
        tree = cmt.build_tree(base, derive_seed(seed, "codes", L), d_L, d_R)
        shape = tree.shape
        c = max(1, shape.L // k)
        subtree = cmt.sample_subtree(shape, c, derive_seed(seed, "sample", L))
        wanted = {cmt.ROOT_ID}
        for layer in shape.coded_layers:
            desired = subtree.desired(layer)
            _, needed = protocol.needed_sets(tree.codes[layer], desired)
            wanted.update(cmt.SymbolId(layer, v) for v in needed | desired)
        download = node_download(tree, wanted)
        constant = download / ((shape.L / k) * math.log(shape.L))
        fits.append(WorkFit(shape.L, c, download, constant))
        logger.info("L=%d: %d bytes, C=%.1f", shape.L, download, constant)
    return fits


def work_scaling_holds(fits, tolerance=0.25):
    """Every fitted constant lies within `tolerance` of the first, on
    either side."""
    first = fits[0].constant
    return all(abs(fit.constant - first) <= tolerance * first for fit in fits)


@dataclass(frozen=True)
class InterestFit:
    """Interest-list bytes one node sent at one edge density."""

    node: int
    p: float
    neighbors: int
    sent: int

    @property
    def per_neighbor(self):
        return self.sent / self.neighbors if self.neighbors else 0.0


def interest_exchange(graph, interests, delta=DEFAULT_DELTA, seed=0):
    """Let every node announce its interests; bytes each node sent."""
    network = netsim.Network(graph, delta, seed)
    for node in range(graph.N):
        relay = netsim.Relay(network, node)
        network.subscribe(node, netsim.Channel.INTEREST, relay.register)
        relay.announce(interests.get(node, ()))
    network.run()
    return {
        node: network.sent_bytes(node, netsim.Channel.INTEREST)
        for node in range(graph.N)
    }


def fit_interest_bytes(N, L, k, ps, seed=0):
    """Interest bytes per node over graphs of increasing density.

    Each node keeps the same sampled subtree at every density, so only
    its neighbor count changes.
    """
    shape = cmt.TreeShape.for_count(L)
    c = max(1, shape.L // k)
    interests = {
        node: frozenset(
            cmt.sample_subtree(shape, c, derive_seed(seed, "sample", node)).ids()
        )
        for node in range(N)
    }
    fits = []
    for p in ps:
        graph = netsim.generate_graph(N, p, derive_seed(seed, "graph", p))
        sent = interest_exchange(graph, interests, seed=seed)
        fits.extend(
            InterestFit(node, p, len(graph.neighbors(node)), sent[node])
            for node in range(N)
        )
    return fits


def interest_scaling_holds(fits):
    """Each node's interest bytes per neighbor is the same at every
    density."""
    per_node: Dict[int, set] = {}
    for fit in fits:
        if fit.neighbors:
            per_node.setdefault(fit.node, set()).add(fit.per_neighbor)
    return all(len(values) == 1 for values in per_node.values())


# ----- scenarios -----


@dataclass
class ScenarioConfig:
    """Every parameter of an experiment.

    Attributes:

        L (int):
            Transactions per block.

        k (int):
            Number of sections.

        c (Optional[int]):
            Bottom-layer samples per node; `L // k` when None.

        N_h (int):
            Honest nodes.

        alpha (float):
            Dishonest fraction of all nodes.

        p (Optional[float]):
            Edge probability; the connectivity requirement when None.

        delta (int):
            Maximum per-hop delay.

        tau (Optional[int]):
            Expiry window.

        lam (float):
            Security parameter of the bounds.

        rounds (int):
            Blocks per trial.

        seed (int):
            Master seed.

        miner (dict):
            Miner strategy entry.

        byzantine (List[dict]):
            Byzantine strategies, assigned to dishonest nodes in turn.

        trials (int):
            Independent trials.

        scheme (str):
            `'keyed'` or `'ed25519'` signatures.

        switch_epoch (Optional[int]):
            Blocks per epoch; validators re-draw their section at the
            start of every epoch. None keeps sections fixed.
    """

    name: str = "default"
    L: int = 64
    k: int = 4
    c: Optional[int] = None
    N_h: int = 40
    alpha: float = 0.0
    p: Optional[float] = None
    delta: int = DEFAULT_DELTA
    tau: Optional[int] = DEFAULT_TAU
    lam: float = DEFAULT_LAMBDA
    d_L: int = DEFAULT_D_L
    d_R: int = DEFAULT_D_R
    symbol_size: int = DEFAULT_TXN_SYMBOL_SIZE
    code_seed: int = 0
    rounds: int = 1
    seed: int = 0
    miner: dict = field(default_factory=lambda: {"kind": HONEST})
    byzantine: List[dict] = field(default_factory=list)
    trials: int = ROUND_TRIALS
    scheme: str = "keyed"
    switch_epoch: Optional[int] = None

    def problems(self):
        found = []

        def need(ok, message):
            if not ok:
                found.append(message)

        need(self.L >= 2, "L must be at least 2")
        need(1 <= self.k <= max(1, self.L), "k must lie in [1, L]")
        need(self.c is None or self.c >= 1, "c must be at least 1")
        need(self.N_h >= 1, "N_h must be at least 1")
        need(0.0 <= self.alpha < 1.0, "alpha must lie in [0, 1)")
        need(self.p is None or 0.0 <= self.p <= 1.0, "p must lie in [0, 1]")
        need(self.delta >= 1, "delta must be at least 1")
        need(self.tau is None or self.tau >= 1, "tau must be at least 1")
        need(self.lam > 0, "lam must be positive")
        need(self.d_L >= 1, "d_L must be at least 1")
        need(self.d_R >= 2, "d_R must be at least 2")
        need(
            self.symbol_size > 0 and self.symbol_size % 32 == 0,
            "symbol_size must be a positive multiple of 32",
        )
        need(self.rounds >= 1, "rounds must be at least 1")
        need(self.trials >= 1, "trials must be at least 1")
        need(self.scheme in ("keyed", "ed25519"), "scheme must be keyed or ed25519")
        if self.switch_epoch is not None:
            need(self.tau is not None, "section switching needs a finite tau")
            need(
                self.tau is None or self.switch_epoch >= self.tau,
                "switch_epoch must be at least tau",
            )
        try:
            strategy = adversary.miner_strategy_from_dict(self.miner)
            if getattr(strategy, "txn_class", None) == EXPIRED:
                need(self.tau is not None, "expired spends need a finite tau")
        except ConfigError as exc:
            found.extend(exc.problems)
        for entry in self.byzantine:
            try:
                adversary.byzantine_strategy_from_dict(entry)
            except ConfigError as exc:
                found.extend(exc.problems)
        need(
            not self.byzantine or self.alpha > 0,
            "byzantine strategies need alpha > 0",
        )
        return found

    def validate(self):
        found = self.problems()
        if found:
            raise ConfigError(found)
        return self

    @property
    def miner_strategy(self):
        return adversary.miner_strategy_from_dict(self.miner)

    @property
    def byzantine_strategies(self):
        return [adversary.byzantine_strategy_from_dict(b) for b in self.byzantine]

    @property
    def N(self):
        return total_nodes(self.N_h, self.alpha)

    @property
    def sample_count(self):
        return self.c or max(1, self.L // self.k)

    def edge_probability(self):
        if self.p is not None:
            return self.p
        try:
            return connectivity_requirement(
                self.N_h, self.k, self.L, self.lam, self.alpha
            ).p_total
        except RegimeError:
            logger.warning("connectivity regime not met; using a complete graph")
            return 1.0

    def protocol_params(self):
        return protocol.ProtocolParams(
            k=self.k,
            c=self.c,
            delta=self.delta,
            tau=self.tau,
            d_L=self.d_L,
            d_R=self.d_R,
        )

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        """Build and validate a config, listing every problem at once.

        Raises:

            ConfigError:
                On unknown keys or invalid values.
        """
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError([f"unknown field {name!r}" for name in unknown])
        return cls(**data).validate()

    @classmethod
    def named(cls, name, **overrides):
        """A standard or user scenario, with overrides applied."""
        table = {**STANDARD_SCENARIOS, **USER_SCENARIOS}
        if name not in table:
            raise ConfigError([f"unknown scenario {name!r}"])
        return cls.from_dict({"name": name, **table[name], **overrides})

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")


# ----- trials -----


@dataclass
class TrialMetrics:
    """What one trial produced.

    Attributes:

        covered (bool):
            Every section has an honest validator.

        connected (bool):
            Every symbol's honest interest subgraph is connected in the
            first round.

        rows (List[VerdictRow]):
            One row per honest node per round.

        unanimous (List[Optional[str]]):
            Per round, the shared honest decision, or None.

        ticks_to_unanimity (List[Optional[int]]):
            Per round, ticks from publication to the last honest decision.
    """

    trial: int
    seed: int
    covered: bool
    connected: bool
    rows: List[protocol.VerdictRow] = field(default_factory=list)
    unanimous: List[Optional[str]] = field(default_factory=list)
    ticks_to_unanimity: List[Optional[int]] = field(default_factory=list)

    def all_rounds(self, decision):
        return bool(self.unanimous) and all(d == decision for d in self.unanimous)

    def row_dicts(self):
        for row in self.rows:
            data = row.as_dict()
            data.update(
                trial=self.trial, covered=self.covered, connected=self.connected
            )
            yield data


def make_scheme(name):
    return ledger.Ed25519Scheme() if name == "ed25519" else ledger.KeyedTestScheme()


class Workload:
    """Accounts funded at genesis and the transfers they make.

    Account `r * L + i` makes the `i`-th transfer of round `r`, spending
    its genesis output to another account of the same round.
    """

    def __init__(self, config, scheme):
        self.config = config
        self.scheme = scheme
        count = config.L * config.rounds
        self.accounts = [scheme.keypair(f"account-{i}") for i in range(count)]
        self.keys = {kp.account: kp for kp in self.accounts}
        self.mints = {
            kp.account: ledger.mint_transaction([(kp.account, 100)])
            for kp in self.accounts
        }
        self.genesis = ledger.genesis_block(
            [(kp.account, 100) for kp in self.accounts],
            k=config.k,
            symbol_size=config.symbol_size,
            code_seed=config.code_seed,
            d_L=config.d_L,
            d_R=config.d_R,
        )
        self.positions = {
            txn.outputs[0].recipient: pos
            for pos, txn in enumerate(self.genesis.transactions)
        }

    def transfers(self, round_index, rng):
        L = self.config.L
        group = self.accounts[round_index * L : (round_index + 1) * L]
        txns = []
        for i, kp in enumerate(group):
            recipient = group[(i + 1 + int(rng.integers(L - 1))) % L]
            position = self.positions[kp.account]
            funding = self.genesis.transactions[position]
            proof = self.genesis.inclusion_proof(position)
            txns.append(
                ledger.make_transaction(
                    self.scheme,
                    kp,
                    [(recipient.account, 100)],
                    [(funding, 0, proof)],
                )
            )
        return txns


def _empty_blocks(config, tip, count):
    blocks = []
    for _ in range(count):
        block = ledger.assemble_block(
            [],
            tip,
            k=config.k,
            symbol_size=config.symbol_size,
            code_seed=config.code_seed,
            d_L=config.d_L,
            d_R=config.d_R,
        )
        blocks.append(block)
        tip = block.header
    return blocks


def run_trial(config, trial, workload):
    """Play one trial of `config.rounds` blocks."""
    seed = derive_seed(config.seed, "trial", trial)
    strategy = config.miner_strategy
    params = config.protocol_params()
    graph = netsim.generate_graph(
        config.N, config.edge_probability(), derive_seed(seed, "graph"), config.alpha
    )
    history = [workload.genesis]
    if getattr(strategy, "txn_class", None) == EXPIRED:
        history += _empty_blocks(config, workload.genesis.header, config.tau)
    chain = ledger.HeaderChain(block.header for block in history)

    validators = {
        node: protocol.ValidatorNode(node, params, workload.scheme, chain, seed=seed)
        for node in graph.honest_nodes
    }
    byzantine_strategies = config.byzantine_strategies or [adversary.Silent()]
    byzantine = {
        node: adversary.ByzantineNode(
            node, byzantine_strategies[i % len(byzantine_strategies)], seed
        )
        for i, node in enumerate(graph.dishonest_nodes)
    }
    covered = {v.section for v in validators.values()} == set(range(config.k))
    metrics = TrialMetrics(trial, seed, covered, False)
    rng = make_rng(seed, "workload")

    for r in range(config.rounds):
        height = len(history)
        epoch = config.switch_epoch
        if epoch and r > 0 and height % epoch == 0:
            for node in validators.values():
                node.switch_section(node.draw_section(height // epoch), height)
            logger.debug("epoch %d starts at height %d", height // epoch, height)
        context = adversary.MinerContext(
            workload.scheme,
            workload.keys,
            tuple(history),
            k=config.k,
            symbol_size=config.symbol_size,
            code_seed=derive_seed(config.code_seed, "block", height),
            d_L=config.d_L,
            d_R=config.d_R,
            tau=config.tau,
            seed=seed,
        )
        production = adversary.produce_block(
            strategy, workload.transfers(r, rng), context
        )
        network = netsim.Network(graph, config.delta, derive_seed(seed, "round", r))
        result = protocol.run_round(
            network,
            validators,
            production,
            params,
            seed=derive_seed(seed, "publish", r),
            byzantine=byzantine,
        )
        if r == 0:
            interests = {n: v.interests for n, v in validators.items()}
            ids = list(production.tree.shape.all_ids())
            metrics.connected = all_interests_connected(graph, interests, ids)
        metrics.rows.extend(result.rows)
        decisions = result.honest_decisions
        shared = decisions.pop() if len(decisions) == 1 else None
        metrics.unanimous.append(shared)
        metrics.ticks_to_unanimity.append(
            max((row.ticks for row in result.rows), default=0)
            if shared is not None
            else None
        )
        if shared == ACCEPT:
            history.append(production.block)
    return metrics


# ----- summaries -----


def expected_decision(strategy):
    """The unanimous decision a strategy should force, if any."""
    if strategy.kind == HONEST:
        return ACCEPT
    if strategy.kind in (HIDE_STOPPING_SET, CODING_FRAUD_MINER, INVALID_TXN):
        return REJECT
    return None


def _hidden_fraction(config):
    """Fraction of its layer a stopping-set miner hides."""
    strategy = config.miner_strategy
    shape = cmt.TreeShape.for_count(config.L)
    layer = strategy.layer or shape.depth
    codes = cmt.make_codes(
        shape.L, derive_seed(config.code_seed, "block", 1), config.d_L, config.d_R
    )
    code = codes[layer]
    if strategy.symbols:
        return len(strategy.symbols) / code.length
    return adversary.stopping_fraction(code)


def theorem_bound(config):
    """The closed-form lower bound for the case the miner targets."""
    kind = config.miner_strategy.kind
    if kind == HIDE_STOPPING_SET:
        return theorem_unavailable_bound(
            config.N_h, _hidden_fraction(config), config.L, config.k
        )
    if kind in (HONEST, CODING_FRAUD_MINER, INVALID_TXN):
        return theorem_valid_bound(config.N_h, config.k, config.L, config.lam)
    return 0.0


def requirements(config):
    """Both honest-node preconditions and the connectivity requirement,
    labelled with whether the config meets them."""
    sections = coverage_bound(config.k, config.lam)
    end_to_end = honest_node_requirement(config.k, config.L, config.lam)
    report = {
        "coverage_bound": sections,
        "meets_coverage_bound": config.N_h >= sections,
        "honest_node_requirement": end_to_end,
        "meets_honest_node_requirement": config.N_h >= end_to_end,
        "edge_probability": config.edge_probability(),
    }
    try:
        need = connectivity_requirement(
            config.N_h, config.k, config.L, config.lam, config.alpha
        )
        report["required_edge_probability"] = need.p_total
        report["meets_connectivity"] = report["edge_probability"] >= need.p_total
    except RegimeError as exc:
        report["required_edge_probability"] = None
        report["meets_connectivity"] = False
        report["regime"] = str(exc)
    return report


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    metrics: List[TrialMetrics]
    summary: dict

    @property
    def passed(self):
        return all(c["passed"] for c in self.summary["checks"])


def summarize(config, metrics, lenient=False):
    strategy = config.miner_strategy
    expected = expected_decision(strategy)
    checks = []
    if expected is not None:
        successes = sum(m.all_rounds(expected) for m in metrics)
        check = BoundCheck.lower(
            f"{strategy.kind}:{expected}",
            theorem_bound(config),
            Estimate(successes, len(metrics)),
            lenient,
        )
        checks.append(check.as_dict())
    reasons: Dict[str, int] = {}
    for m in metrics:
        for row in m.rows:
            key = f"{row.decision}:{row.reason}"
            reasons[key] = reasons.get(key, 0) + 1
    return {
        "scenario": config.name,
        "config": config.to_dict(),
        "miner": strategy.as_dict(),
        "expected": expected,
        "trials": len(metrics),
        "covered": sum(m.covered for m in metrics),
        "connected": sum(m.connected for m in metrics),
        "reasons": reasons,
        "requirements": requirements(config),
        "checks": checks,
    }


def run_scenario(config, lenient=False):
    """Play every trial of `config` and summarize it.

    Returns:

        ScenarioResult:
            Per-trial metrics, sorted by trial, and the summary.

    Raises:

        ConfigError:
            When the config is invalid.
    """
    config.validate()
    workload = Workload(config, make_scheme(config.scheme))
    metrics = []
    for trial in range(config.trials):
        metrics.append(run_trial(config, trial, workload))
        logger.debug("trial %d: %s", trial, metrics[-1].unanimous)
    metrics.sort(key=lambda m: m.trial)
    summary = summarize(config, metrics, lenient)
    logger.info(
        "scenario %s: %d trials, checks %s",
        config.name,
        len(metrics),
        [c["passed"] for c in summary["checks"]],
    )
    return ScenarioResult(config, metrics, summary)


def export(metrics, summary, directory):
    """Write `rows.ndjson` and `summary.json` under `directory`.

    Raises:

        ValueError:
            When there are no trials.

        OSError:
            When the directory cannot be written.
    """
    if not metrics:
        raise ValueError("no trials to export")
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    rows_path = out / "rows.ndjson"
    summary_path = out / "summary.json"
    ordered = sorted(metrics, key=lambda m: m.trial)
    with open(rows_path, "w", encoding="utf-8") as f:
        for m in ordered:
            for data in sorted(m.row_dicts(), key=lambda d: (d["height"], d["node"])):
                f.write(json.dumps(data, sort_keys=True) + "\n")
    with open(summary_path, "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
    return rows_path, summary_path
