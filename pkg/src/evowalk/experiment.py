"""Table-style experiments: static vs temporal cover time with bounds per row."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace

import numpy as np

from .bounds import BoundReport, round_half_up, rwa_k0_bounds, rwd_k0_bounds, rwd_k1_bounds
from .config import ExperimentSpec
from .evolution import EvolutionRule
from .graph import StaticGraph, degree_stats, gen_clique, gen_lollipop, gen_path, gen_random_threshold, read_edge_list
from .montecarlo import ExperimentConfig, estimate_cover_time, estimate_static_cover_time

TABLE_COLUMNS = ["size", "delta", "Delta", "p", "q", "static", "temporal", "lower", "upper", "trials", "se"]


@dataclass(frozen=True)
class TableRow:
    size: int
    delta: int
    Delta: int
    p: float | None
    q: float | None
    static: float
    temporal: float
    lower: float | None
    upper: float | None
    trials: int
    se: float
    static_se: float = 0.0

    def csv_values(self) -> list[str]:
        def num(x):
            return "" if x is None else repr(float(x))

        return [
            str(self.size), str(self.delta), str(self.Delta), num(self.p), num(self.q),
            num(self.static), num(self.temporal), num(self.lower), num(self.upper),
            str(self.trials), num(self.se),
        ]

    def pretty_values(self) -> list[str]:
        def rnd(x):
            return "-" if x is None else str(round_half_up(x))

        return [
            str(self.size), str(self.delta), str(self.Delta), "-" if self.p is None else f"{self.p:g}",
            "-" if self.q is None else f"{self.q:g}",
            rnd(self.static), rnd(self.temporal), rnd(self.lower), rnd(self.upper),
            str(self.trials), f"{self.se:.2f}",
        ]


def _row_seeds(seed: int, section: int, row: int) -> tuple[int, int]:
    graph_seed, mc_seed = np.random.SeedSequence(seed, spawn_key=(section, row)).generate_state(2, dtype=np.uint64)
    return int(graph_seed), int(mc_seed)


def build_spec_graph(spec: ExperimentSpec, rng: np.random.Generator) -> StaticGraph:
    if spec.family == "random_threshold":
        return gen_random_threshold(spec.n, spec.threshold, rng)
    if spec.family == "lollipop":
        return gen_lollipop(spec.n, spec.k)
    if spec.family == "path":
        return gen_path(spec.n)
    if spec.family == "clique":
        return gen_clique(spec.n)
    return read_edge_list(spec.path)


def spec_rule(spec: ExperimentSpec, p: float | None) -> EvolutionRule:
    if spec.rule == "general":
        return EvolutionRule.general(spec.history, spec.table)
    if spec.rule == "birth_death":
        return EvolutionRule.birth_death(p, spec.q)
    return EvolutionRule.bernoulli(p)


def row_bounds(static: float, p: float | None, q: float | None, strategy: str, g: StaticGraph) -> BoundReport | None:
    """Bounds that apply to the row's walk and rule; ``None`` where none are known."""
    if p is None:
        return None
    ds = degree_stats(g)
    if q is None:
        if strategy == "rwa":
            return rwa_k0_bounds(static, p, ds.min_degree, ds.max_degree)
        return rwd_k0_bounds(static, p, g.m, g.n)
    if strategy == "rwd":
        return rwd_k1_bounds(static, p, q)
    return None


def run_experiment(spec: ExperimentSpec, section_index: int = 0, *, trials: int | None = None,
                   seed: int | None = None, strategy: str | None = None) -> list[TableRow]:
    """One row per ``p``: static (SRW) estimate, temporal estimate, bounds.

    A general rule has no ``p`` list and yields a single row without bounds.

    Graphs are regenerated per row when ``spec.regenerate`` is set. Static and
    temporal estimates of a row share one Monte-Carlo seed, so at ``p = 1`` they
    coincide trial for trial.
    """
    spec = replace(
        spec,
        trials=spec.trials if trials is None else trials,
        seed=spec.seed if seed is None else seed,
        strategy=spec.strategy if strategy is None else strategy,
    )
    rows = []
    g = None
    for r, p in enumerate(spec.ps):
        graph_seed, mc_seed = _row_seeds(spec.seed, section_index, r)
        if g is None or spec.regenerate:
            g = build_spec_graph(spec, np.random.default_rng(graph_seed))
        rule = spec_rule(spec, p)
        static = estimate_static_cover_time(g, spec.start, spec.trials, mc_seed, chaining=spec.chaining)
        temporal = estimate_cover_time(
            ExperimentConfig(g, rule, spec.strategy, spec.trials, spec.start, spec.chaining, mc_seed,
                             step_limit=spec.step_limit)
        )
        bounds = row_bounds(static.mean, p, spec.q, spec.strategy, g)
        ds = degree_stats(g)
        rows.append(
            TableRow(
                g.n, ds.min_degree, ds.max_degree, p, spec.q, static.mean, temporal.mean,
                None if bounds is None else bounds.lower, None if bounds is None else bounds.upper,
                spec.trials, temporal.std_error, static.std_error,
            )
        )
    return rows


def metadata_lines(specs: list[ExperimentSpec]) -> list[str]:
    out = []
    for spec in specs:
        out.append(
            f"# experiment={spec.name} family={spec.family} seed={spec.seed} start={spec.start} "
            f"trials={spec.trials} strategy={spec.strategy} rule={spec.rule} "
            f"chaining={str(spec.chaining).lower()}"
        )
    return out


def format_csv(rows: list[TableRow], meta: list[str] = ()) -> str:
    buf = io.StringIO()
    for line in meta:
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_COLUMNS)
    for row in rows:
        w.writerow(row.csv_values())
    return buf.getvalue()


def format_pretty(rows: list[TableRow], meta: list[str] = ()) -> str:
    cells = [TABLE_COLUMNS] + [row.pretty_values() for row in rows]
    widths = [max(len(c[i]) for c in cells) for i in range(len(TABLE_COLUMNS))]
    lines = list(meta)
    for j, c in enumerate(cells):
        lines.append("  ".join(v.rjust(w) for v, w in zip(c, widths)))
        if j == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
