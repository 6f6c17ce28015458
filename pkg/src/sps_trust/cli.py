"""Command-line front end.

    sps-trust run --scenario 1 --methods all --seed 42 --out results/
    sps-trust --selfcheck

Precedence: flags > --config file > built-in defaults.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import METHODS, ScenarioConfig, config_from_dict, load_config
from .errors import ConfigurationError, ConvergenceError, EmptyEnvelopeError
from .report import write_run
from .selfcheck import FOUR_MEMBER_DEFAULT, format_table, run_checks
from .simulator import run_scenario

log = logging.getLogger("sps_trust")


def parse_methods(text: str) -> list[str]:
    if text.strip() == "all":
        return list(METHODS)
    methods = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise argparse.ArgumentTypeError(f"methods must be 'all' or a comma list of {', '.join(METHODS)}")
    return list(dict.fromkeys(methods))


def parse_link_weights(text: str) -> dict[str, float]:
    out = {}
    for item in text.split(","):
        key, _, val = item.partition("=")
        key = key.strip().upper()
        if key not in FOUR_MEMBER_DEFAULT or not val:
            raise argparse.ArgumentTypeError(f"expected KEY=VALUE with KEY in {', '.join(FOUR_MEMBER_DEFAULT)}")
        out[key] = float(val)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sps-trust",
        description="Fuzzy trust and PageRank reputation simulator for social participatory sensing.",
    )
    parser.add_argument("--selfcheck", action="store_true", help="run the built-in consistency checks and exit")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command")

    run = sub.add_parser("run", help="simulate a scenario and write CSV results")
    run.add_argument("--scenario", type=int, choices=(1, 2), default=None, help="1 = stable categories, 2 = temporary A->B transition (default 1)")
    run.add_argument("--methods", type=parse_methods, default=list(METHODS), help="'all' (default) or comma list of fuzzy,average,baseline")
    run.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
    run.add_argument("--out", type=Path, default=Path("results"), help="output directory (default ./results)")
    run.add_argument("--config", type=Path, default=None, help="YAML scenario configuration file")
    run.add_argument("--campaigns", type=int, default=None, help="number of campaigns (default 5000)")
    run.add_argument("--members", type=int, default=None, help="number of members (default 100)")
    run.add_argument("--category-a", type=int, default=None, help="number of category-A members (default 60)")
    run.add_argument("--revocation-threshold", type=float, default=None, help="ToC revocation threshold (default 0.5)")
    run.add_argument("--th1", type=float, default=None, help="trust reward threshold (default 0.7)")
    run.add_argument("--th2", type=float, default=None, help="trust penalty threshold (default 0.3)")

    check = sub.add_parser("selfcheck", help="run the built-in consistency checks")
    check.add_argument("--weights", type=parse_link_weights, default=None, help="override four-member link weights, e.g. T21=0.5,T14=0.9")
    return parser


def resolve_config(args) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    flags = {
        "scenario": args.scenario,
        "seed": args.seed,
        "n_campaigns": args.campaigns,
        "n_members": args.members,
        "category_a_size": args.category_a,
        "revocation_threshold": args.revocation_threshold,
    }
    values = {k: v for k, v in flags.items() if v is not None}
    policy = {}
    if args.th1 is not None:
        policy["reward_threshold"] = args.th1
    if args.th2 is not None:
        policy["penalty_threshold"] = args.th2
    if policy:
        values["policy"] = policy
    if args.members is not None and args.category_a is None and cfg.category_a_size > args.members:
        values["category_a_size"] = round(args.members * cfg.category_a_size / cfg.n_members)
    return config_from_dict(values, cfg)


def cmd_run(args) -> int:
    cfg = resolve_config(args)
    results = []
    for method in args.methods:
        log.info("scenario %d, method %s, seed %d", cfg.scenario, method, cfg.seed)
        results.append(run_scenario(cfg, method))
    write_run(args.out, results)
    print(f"scenario {cfg.scenario}, seed {cfg.seed}, {cfg.n_campaigns} campaigns -> {args.out}")
    print(f"{'method':<10} {'overall trust':>14} {'rep A':>8} {'rep B':>8} {'A - B':>8}")
    for res in results:
        s = res.summary()
        print(
            f"{res.method:<10} {s['mean_overall_trust']:>14.4f} {s['final_reputation_mean_a']:>8.4f} "
            f"{s['final_reputation_mean_b']:>8.4f} {s['reputation_separation']:>8.4f}"
        )
    return 0


def cmd_selfcheck(weights=None) -> int:
    checks = run_checks(weights)
    print(format_table(checks))
    return 0 if all(c.passed for c in checks) else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.selfcheck or args.command == "selfcheck":
            return cmd_selfcheck(getattr(args, "weights", None))
        if args.command == "run":
            return cmd_run(args)
    except (ConfigurationError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, EmptyEnvelopeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 4
    parser.print_help()
    return 2


if __name__ == "__main__":
    sys.exit(main())
