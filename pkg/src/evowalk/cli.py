"""Command-line front end.

Subcommands: ``experiment``, ``exact``, ``bounds``, ``simulate``, ``generate``.
Every long flag can also be set through an ``EVOWALK_<FLAG>`` environment
variable (``--exact-cap`` -> ``EVOWALK_EXACT_CAP``); explicit flags win.

Exit codes: 0 success, 2 configuration or flag error, 3 runtime error
(state cap or step limit exceeded, unsolvable chain).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import bounds as bnd
from .config import ConfigError, load_config
from .evolution import EvolutionRule
from .exact import DEFAULT_STATE_CAP, ChainTooLarge, SingularChainError, dump_chain, enumerate_chain, exact_cover_time
from .experiment import format_csv, format_pretty, metadata_lines, run_experiment
from .graph import (
    GraphError,
    format_edge_list,
    gen_clique,
    gen_lollipop,
    gen_path,
    gen_random_threshold,
    read_edge_list,
)
from .montecarlo import ExperimentConfig, estimate_cover_time, estimate_row, format_estimates_csv
from .walks import StepLimitExceeded, run_cover_walk

ENV_PREFIX = "EVOWALK_"
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _env_default(dest: str, default=None):
    return os.environ.get(ENV_PREFIX + dest.upper(), default)


def _add_common(p: argparse.ArgumentParser, *, seed=True, trials=False, strategy=False, out=True):
    if seed:
        p.add_argument("--seed", type=int, default=_env_default("seed"), help="master random seed")
    if trials:
        p.add_argument("--trials", type=int, default=_env_default("trials"), help="Monte-Carlo trials")
    if strategy:
        p.add_argument("--strategy", choices=["rwd", "rwa", "srw"], default=_env_default("strategy"))
    if out:
        p.add_argument("--out", default=_env_default("out"), help="output path (default stdout)")


def _add_graph_source(p: argparse.ArgumentParser):
    p.add_argument("--graph", default=_env_default("graph"), help="edge-list file")
    p.add_argument("--family", choices=["path", "clique", "lollipop", "random-threshold"])
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int, help="lollipop clique size")
    p.add_argument("--threshold", type=float, help="random-threshold edge probability")
    p.add_argument("--graph-seed", type=int, default=0)


def _add_rule(p: argparse.ArgumentParser):
    p.add_argument("--p", type=float, help="alive (or birth) probability")
    p.add_argument("--q", type=float, help="death probability; selects the Birth-Death rule")
    p.add_argument("--table", help="general rule as 'pattern:prob,...' over 2^k patterns")
    p.add_argument("--history", type=int, help="history length k of the --table rule")


def _graph_from_args(args):
    if args.graph:
        return read_edge_list(args.graph)
    if args.family is None or args.n is None:
        raise ConfigError("give --graph FILE or --family with --n")
    if args.family == "path":
        return gen_path(args.n)
    if args.family == "clique":
        return gen_clique(args.n)
    if args.family == "lollipop":
        if args.k is None:
            raise ConfigError("lollipop needs --k")
        return gen_lollipop(args.n, args.k)
    if args.threshold is None:
        raise ConfigError("random-threshold needs --threshold")
    return gen_random_threshold(args.n, args.threshold, np.random.default_rng(args.graph_seed))


def _rule_from_args(args) -> EvolutionRule:
    if args.table is not None:
        if args.history is None or args.p is not None or args.q is not None:
            raise ConfigError("--table needs --history and excludes --p/--q")
        try:
            mapping = {int(pat, 0): float(val) for pat, val in (item.split(":") for item in args.table.split(","))}
        except ValueError:
            raise ConfigError(f"malformed --table {args.table!r}") from None
        return EvolutionRule.general(args.history, mapping)
    if args.p is None:
        raise ConfigError("give --p (with optional --q) or --table with --history")
    if args.q is None:
        return EvolutionRule.bernoulli(args.p)
    return EvolutionRule.birth_death(args.p, args.q)


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _truthy(value) -> bool:
    return str(value).lower() in ("1", "true", "yes", "on")


def cmd_experiment(args) -> int:
    config = args.config or _env_default("config")
    if not config:
        raise ConfigError("--config is required")
    specs = load_config(config)
    seed = None if args.seed is None else int(args.seed)
    trials = None if args.trials is None else int(args.trials)
    strategy = args.strategy
    if strategy == "srw":
        raise ConfigError("experiment strategy must be rwa or rwd")
    rows = []
    effective = []
    for i, spec in enumerate(specs):
        spec_rows = run_experiment(spec, i, trials=trials, seed=seed, strategy=strategy)
        rows.extend(spec_rows)
        effective.append(spec.__class__(**{
            **spec.__dict__,
            "seed": spec.seed if seed is None else seed,
            "trials": spec.trials if trials is None else trials,
            "strategy": spec.strategy if strategy is None else strategy,
        }))
    meta = metadata_lines(effective)
    pretty = args.pretty or _truthy(_env_default("pretty", "0"))
    _emit(format_pretty(rows, meta) if pretty else format_csv(rows, meta), args.out)
    return 0


def cmd_exact(args) -> int:
    g = _graph_from_args(args)
    rule = _rule_from_args(args)
    cap = int(args.exact_cap) if args.exact_cap is not None else DEFAULT_STATE_CAP
    starts = None if args.start in (None, "all") else int(args.start)
    value = exact_cover_time(g, rule, starts, all_windows=args.all_windows, cap=cap)
    if args.dump_states or args.dump_triplets:
        if not (args.dump_states and args.dump_triplets):
            raise ConfigError("--dump-states and --dump-triplets go together")
        chain = enumerate_chain(g, rule, starts, all_windows=args.all_windows, cap=cap)
        dump_chain(chain, args.dump_states, args.dump_triplets)
    _emit(f"{value!r}\n", args.out)
    return 0


def cmd_bounds(args) -> int:
    kind = args.kind
    if kind is None:
        kind = "rwd-k1" if args.q is not None else "rwa-k0" if args.delta is not None else "rwd-k0"
    if kind == "rwd-k1":
        if args.q is None:
            raise ConfigError("rwd-k1 bounds need --q")
        report = bnd.rwd_k1_bounds(args.cg, args.p, args.q)
    elif kind == "rwa-k0":
        if args.delta is None or args.Delta is None:
            raise ConfigError("rwa-k0 bounds need --delta and --Delta")
        report = bnd.rwa_k0_bounds(args.cg, args.p, args.delta, args.Delta)
    else:
        report = bnd.rwd_k0_bounds(args.cg, args.p, args.m, args.n)
    line = f"{report.lower:.12g} {report.upper:.12g}"
    if report.cap is not None:
        line += f" {report.cap:.12g}"
    _emit(line + "\n", args.out)
    return 0


def cmd_simulate(args) -> int:
    g = _graph_from_args(args)
    rule = _rule_from_args(args)
    start = 0 if args.start is None else args.start if args.start == "all" else int(args.start)
    trials = 1000 if args.trials is None else int(args.trials)
    seed = 0 if args.seed is None else int(args.seed)
    cfg = ExperimentConfig(
        g, rule, args.strategy or "rwa", trials, start, not args.no_chaining, seed, workers=args.workers
    )
    if args.trace:
        from .evolution import initial_window
        from .montecarlo import trial_rng

        with open(args.trace, "w") as fh:
            s0 = cfg.start_nodes()[0]
            run_cover_walk(g, rule, cfg.strategy, s0, initial_window(g, rule), trial_rng(seed, s0, 0), trace=fh)
    est = estimate_cover_time(cfg)
    _emit(format_estimates_csv([estimate_row(cfg, est)]), args.out)
    return 0


def cmd_generate(args) -> int:
    if args.family is None:
        raise ConfigError("generate needs --family")
    g = _graph_from_args(args)
    _emit(format_edge_list(g), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="evowalk", description="Random-walk cover times on edge-uniform evolving graphs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("experiment", help="reproduce static/temporal cover-time tables from a config")
    p.add_argument("--config", help="experiment config file")
    p.add_argument("--pretty", action="store_true", help="aligned table with rounded values")
    _add_common(p, trials=True, strategy=True)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("exact", help="exact RWA cover time from the absorbing chain")
    _add_graph_source(p)
    _add_rule(p)
    p.add_argument("--start", help="start node or 'all' (default all)")
    p.add_argument("--all-windows", action="store_true", help="also maximise over initial windows")
    p.add_argument("--exact-cap", type=int, default=_env_default("exact_cap"))
    p.add_argument("--dump-states")
    p.add_argument("--dump-triplets")
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("bounds", help="evaluate closed-form cover-time bounds")
    p.add_argument("--cg", type=float, required=True, help="static cover time C_G")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--q", type=float)
    p.add_argument("--delta", type=int, help="min degree")
    p.add_argument("--Delta", type=int, help="max degree")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--kind", choices=["rwd-k0", "rwa-k0", "rwd-k1"])
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("simulate", help="Monte-Carlo cover-time estimate")
    _add_graph_source(p)
    _add_rule(p)
    p.add_argument("--start", help="start node or 'all' (default 0)")
    p.add_argument("--no-chaining", action="store_true", help="start every trial from the all-dead instance")
    p.add_argument("--workers", type=int, default=1, help="processes for non-chained trials")
    p.add_argument("--trace", help="write the first trial's step trace here")
    _add_common(p, trials=True, strategy=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("generate", help="write a generated graph as an edge list")
    _add_graph_source(p)
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, GraphError, ValueError) as exc:
        print(f"evowalk: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ChainTooLarge, StepLimitExceeded, SingularChainError) as exc:
        print(f"evowalk: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
