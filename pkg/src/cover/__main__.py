"""
    Command line entry point: `python -m cover <command>` or `cover
    <command>`.

    Commands:

        coverage        Monte Carlo of section coverage
        detection       per-layer detection of a hidden stopping set
        connectivity    Monte Carlo of interest-subgraph connectivity
        run             full protocol rounds for a scenario
        bounds          every closed-form bound for a scenario
        work            download scaling in L, interest bytes in density

    The exit code is 0 iff every bound check passes.
"""
import argparse
import json
import logging
import math
import sys
import typing
from dataclasses import asdict, fields
from pathlib import Path

from cover import adversary, cmt, harness
from cover.constants import (
    CONNECTIVITY_TRIALS,
    DEFAULT_D_L,
    DEFAULT_D_R,
    DEFAULT_LAMBDA,
    SCALAR_TRIALS,
)
from cover.errors import ConfigError, CoverError, RegimeError
from cover.utility import derive_seed, make_rng

logger = logging.getLogger("cover")

LOG_FORMAT = "%(asctime)s %(name)s %(levelname)s %(message)s"


def _field_type(f):
    """The scalar type a config field parses with, or None for the
    structured fields."""
    tp = f.type
    if typing.get_origin(tp) is typing.Union:
        tp = next(a for a in typing.get_args(tp) if a is not type(None))
    if tp in (int, float, str):
        return tp
    return None


def _strategy_arg(text):
    text = text.strip()
    if text.startswith("{"):
        return json.loads(text)
    return {"kind": text}


def add_config_flags(parser):
    group = parser.add_argument_group("scenario")
    group.add_argument("--scenario", help="standard or user scenario name")
    group.add_argument(
        "--config", type=Path, help="JSON config; wins over flags"
    )
    for f in fields(harness.ScenarioConfig):
        tp = _field_type(f)
        flag = "--" + f.name.replace("_", "-")
        if tp is not None:
            group.add_argument(flag, dest=f.name, type=tp, default=None)
    group.add_argument(
        "--miner", type=_strategy_arg, default=None, help="kind or JSON entry"
    )
    group.add_argument(
        "--byzantine",
        type=_strategy_arg,
        action="append",
        default=None,
        help="kind or JSON entry; repeat for several",
    )


def config_from_args(args):
    """Defaults < named scenario < flags < config file."""
    data = {}
    if args.scenario:
        data.update(harness.ScenarioConfig.named(args.scenario).to_dict())
    for f in fields(harness.ScenarioConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            data[f.name] = value
    if args.config is not None:
        with open(args.config, encoding="utf-8") as fh:
            overrides = json.load(fh)
        clashing = sorted(
            k for k in overrides if k in data and data[k] != overrides[k]
        )
        if clashing:
            logger.warning("config file overrides %s", ", ".join(clashing))
        data.update(overrides)
    return harness.ScenarioConfig.from_dict(data)


def _emit(report):
    print(json.dumps(report, indent=2, sort_keys=True))


def cmd_coverage(args):
    N_h = args.N_h or harness.coverage_bound(args.k, args.lam)
    estimate = harness.mc_coverage(args.k, N_h, args.trials, args.seed)
    check = harness.BoundCheck.lower(
        "coverage",
        harness.coverage_lower_bound(args.k, N_h),
        estimate,
        args.lenient,
    )
    _emit(
        {
            "k": args.k,
            "N_h": N_h,
            "coverage_bound": harness.coverage_bound(args.k, args.lam),
            "target": 1 - math.exp(-args.lam),
            "checks": [check.as_dict()],
        }
    )
    return check.passed


def cmd_detection(args):
    rng = make_rng(args.seed, "detection-tree")
    base = [rng.bytes(args.symbol_size) for _ in range(args.L)]
    tree = cmt.build_tree(base, args.code_seed, args.d_L, args.d_R)
    layer = args.layer or tree.depth
    if layer not in tree.shape.coded_layers:
        raise ValueError(f"layer {layer} is not a coded layer")
    code = tree.codes[layer]
    hidden_indices = adversary.choose_stopping_set(code)
    hidden = {cmt.SymbolId(layer, v) for v in hidden_indices}
    f = len(hidden) / code.length
    checks = []
    for c in args.c or [4, 16]:
        estimates = harness.mc_detection(
            tree.shape, hidden, c, args.trials, args.seed
        )
        checks.append(
            harness.BoundCheck.lower(
                f"detection:c={c}",
                harness.detection_probability(f, c),
                estimates[layer],
                args.lenient,
            )
        )
    _emit(
        {
            "L": tree.L,
            "layer": layer,
            "hidden": sorted(hidden_indices),
            "f": f,
            "checks": [c.as_dict() for c in checks],
        }
    )
    return all(c.passed for c in checks)


def cmd_connectivity(args):
    need = harness.connectivity_requirement(
        args.N_h, args.k, args.L, args.lam, args.alpha
    )
    p = args.p if args.p is not None else need.p_total
    estimate = harness.mc_connectivity(
        args.N_h,
        args.L,
        args.k,
        p,
        args.alpha,
        trials=args.trials,
        seed=args.seed,
    )
    check = harness.BoundCheck.lower(
        "connectivity",
        harness.connectivity_probability(args.N_h, args.k, args.L, args.lam),
        estimate,
        args.lenient,
    )
    _emit(
        {
            "p": p,
            "required_p": need.p_total,
            "neighbors": need.neighbors,
            "neighbors_closed_form": harness.neighbors_required(
                args.N_h, args.k, args.L, args.lam, args.alpha
            ),
            "checks": [check.as_dict()],
        }
    )
    return check.passed


def cmd_run(args):
    config = config_from_args(args)
    result = harness.run_scenario(config, lenient=args.lenient)
    out = args.out or Path("results") / config.name
    rows, summary = harness.export(result.metrics, result.summary, out)
    logger.info("wrote %s and %s", rows, summary)
    _emit({"summary": str(summary), "checks": result.summary["checks"]})
    return result.passed


def cmd_bounds(args):
    config = config_from_args(args)
    shape = cmt.TreeShape.for_count(config.L)
    codes = cmt.make_codes(
        shape.L,
        derive_seed(config.code_seed, "block", 1),
        config.d_L,
        config.d_R,
    )
    f = adversary.stopping_fraction(codes[shape.depth])
    N_h, k, L, lam = config.N_h, config.k, config.L, config.lam
    report = {
        "requirements": harness.requirements(config),
        "coverage_lower_bound": harness.coverage_lower_bound(k, N_h),
        "tree_coverage_bound": harness.tree_coverage_bound(
            L, config.sample_count, lam
        ),
        "stopping_fraction": f,
        "detection_probability": harness.detection_probability(
            f, config.sample_count
        ),
        "theorem_valid_bound": harness.theorem_valid_bound(N_h, k, L, lam),
        "theorem_invalid_bound": harness.theorem_invalid_bound(
            N_h, k, L, lam
        ),
        "theorem_unavailable_bound": harness.theorem_unavailable_bound(
            N_h, f, L, k
        ),
    }
    try:
        report["connectivity_probability"] = harness.connectivity_probability(
            N_h, k, L, lam
        )
        report["neighbors_required"] = harness.neighbors_required(
            N_h, k, L, lam, config.alpha
        )
    except RegimeError as exc:
        report["connectivity_probability"] = None
        report["neighbors_required"] = None
        report["regime"] = str(exc)
    _emit(report)
    return True


def cmd_work(args):
    Ls = args.L or [64, 256, 1024]
    fits = harness.fit_work_constant(
        Ls, args.k, args.symbol_size, seed=args.seed
    )
    scaling = harness.work_scaling_holds(fits, args.tolerance)
    interest = harness.fit_interest_bytes(
        args.N, min(Ls), args.k, args.p or [0.1, 0.3, 0.6], args.seed
    )
    linear = harness.interest_scaling_holds(interest)
    _emit(
        {
            "fits": [asdict(fit) for fit in fits],
            "tolerance": args.tolerance,
            "interest": [asdict(fit) for fit in interest],
            "checks": [
                {"name": "work:scaling", "passed": scaling},
                {"name": "interest:linear", "passed": linear},
            ],
        }
    )
    return scaling and linear


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cover", description="Light-node block verification experiments"
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true")
    verbosity.add_argument("-q", "--quiet", action="store_true")
    parser.add_argument(
        "--lenient",
        action="store_true",
        help="compare bounds with the interval's upper edge",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coverage", help="section coverage Monte Carlo")
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--N-h", dest="N_h", type=int, default=None)
    p.add_argument("--lam", type=float, default=DEFAULT_LAMBDA)
    p.add_argument("--trials", type=int, default=SCALAR_TRIALS)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("detection", help="hidden stopping set detection")
    p.add_argument("--L", type=int, default=64)
    p.add_argument("--layer", type=int, default=None)
    p.add_argument("--c", type=int, action="append", default=None)
    p.add_argument("--symbol-size", dest="symbol_size", type=int, default=64)
    p.add_argument("--d-L", dest="d_L", type=int, default=DEFAULT_D_L)
    p.add_argument("--d-R", dest="d_R", type=int, default=DEFAULT_D_R)
    p.add_argument("--code-seed", dest="code_seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=SCALAR_TRIALS)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_detection)

    p = sub.add_parser("connectivity", help="interest subgraph Monte Carlo")
    p.add_argument("--N-h", dest="N_h", type=int, default=200)
    p.add_argument("--L", type=int, default=256)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--lam", type=float, default=DEFAULT_LAMBDA)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--trials", type=int, default=CONNECTIVITY_TRIALS)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_connectivity)

    p = sub.add_parser("run", help="full protocol rounds")
    add_config_flags(p)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bounds", help="print every bound for a scenario")
    add_config_flags(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("work", help="per-node work scaling")
    p.add_argument("--L", type=int, action="append", default=None)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--symbol-size", dest="symbol_size", type=int, default=64)
    p.add_argument("--tolerance", type=float, default=0.25)
    p.add_argument("--N", type=int, default=40)
    p.add_argument("--p", type=float, action="append", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_work)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT)
    try:
        passed = args.func(args)
    except ConfigError as exc:
        for problem in exc.problems:
            logger.error("config: %s", problem)
        return 2
    except (CoverError, ValueError, OSError) as exc:
        logger.error("%s", exc)
        return 2
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
