"""Monte-Carlo cover-time estimation.

Trial ``t`` from start node ``s`` draws from its own generator, seeded by
``SeedSequence(seed, spawn_key=(s, t))``. With chaining on (the default), the
first trial starts from the configured initial window and each later trial
starts from the previous trial's final window, so trials run in order.
Without chaining every trial starts from the initial window and trials may
run in worker processes; the results are identical either way.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .bounds import round_half_up
from .evolution import EvolutionRule, GraphInstance, initial_window
from .graph import StaticGraph, degree_stats
from .walks import DEFAULT_STEP_LIMIT, Strategy, run_cover_walk

SWEEP = "all"


@dataclass(frozen=True)
class ExperimentConfig:
    graph: StaticGraph
    rule: EvolutionRule
    strategy: Strategy | str = Strategy.RWA
    trials: int = 1000
    start: int | str = 0  # node id, or "all" to sweep every start node
    chaining: bool = True
    seed: int = 0
    init_instance: GraphInstance | None = None
    step_limit: int = DEFAULT_STEP_LIMIT
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        if self.start != SWEEP and not (isinstance(self.start, int) and 0 <= self.start < self.graph.n):
            raise ValueError(f"start must be a node id in [0, {self.graph.n}) or {SWEEP!r}, got {self.start!r}")

    def start_nodes(self) -> list[int]:
        return list(range(self.graph.n)) if self.start == SWEEP else [self.start]


@dataclass(frozen=True)
class CoverTimeEstimate:
    mean: float
    std_error: float
    trials: int
    min: int
    max: int
    start: int
    samples: np.ndarray = field(repr=False, compare=False)
    per_start: dict | None = field(default=None, repr=False, compare=False)

    @property
    def rounded(self) -> int:
        return round_half_up(self.mean)

    @classmethod
    def from_samples(cls, samples: np.ndarray, start: int) -> CoverTimeEstimate:
        samples = np.asarray(samples, dtype=np.int64)
        t = samples.size
        mean = float(samples.mean())
        se = float(samples.std(ddof=1) / math.sqrt(t)) if t > 1 else 0.0
        return cls(mean, se, t, int(samples.min()), int(samples.max()), start, samples)


def trial_rng(seed: int, start: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(start, trial)))


def _run_trials(cfg: ExperimentConfig, start: int, trial_ids: Iterable[int], window) -> tuple[list[int], tuple]:
    steps = []
    for t in trial_ids:
        s, final = run_cover_walk(
            cfg.graph, cfg.rule, cfg.strategy, start, window, trial_rng(cfg.seed, start, t), step_limit=cfg.step_limit
        )
        steps.append(s)
        if cfg.chaining:
            window = final
    return steps, window


def _run_chunk(args):
    cfg, start, lo, hi = args
    return _run_trials(cfg, start, range(lo, hi), initial_window(cfg.graph, cfg.rule, cfg.init_instance))[0]


def _samples_for_start(cfg: ExperimentConfig, start: int) -> np.ndarray:
    window = initial_window(cfg.graph, cfg.rule, cfg.init_instance)
    if cfg.chaining or cfg.workers <= 1:
        steps, _ = _run_trials(cfg, start, range(cfg.trials), window)
        return np.asarray(steps)
    bounds = np.linspace(0, cfg.trials, cfg.workers + 1, dtype=int)
    jobs = [(cfg, start, int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        chunks = list(pool.map(_run_chunk, jobs))
    return np.concatenate([np.asarray(c) for c in chunks])


def estimate_cover_time(cfg: ExperimentConfig) -> CoverTimeEstimate:
    """Sample mean and standard error of the cover time over ``cfg.trials`` walks.

    In sweep mode the returned estimate is the start with the largest mean;
    ``per_start`` holds every start's estimate.

    Raises
    ------
    StepLimitExceeded
        If any trial runs past ``cfg.step_limit`` steps.
    """
    per_start = {}
    for s in cfg.start_nodes():
        per_start[s] = CoverTimeEstimate.from_samples(_samples_for_start(cfg, s), s)
    worst = max(per_start.values(), key=lambda e: e.mean)
    if cfg.start != SWEEP:
        return worst
    return CoverTimeEstimate(
        worst.mean, worst.std_error, worst.trials, worst.min, worst.max, worst.start, worst.samples, per_start
    )


def estimate_static_cover_time(
    g: StaticGraph,
    start: int | str = 0,
    trials: int = 1000,
    seed: int = 0,
    *,
    chaining: bool = True,
    workers: int = 1,
) -> CoverTimeEstimate:
    """Simple-random-walk cover time on the static graph."""
    cfg = ExperimentConfig(
        g, EvolutionRule.bernoulli(1.0), Strategy.SRW, trials, start, chaining, seed, workers=workers
    )
    return estimate_cover_time(cfg)


CSV_FIELDS = ["n", "m", "delta", "Delta", "rule", "p", "q", "strategy", "start", "trials", "mean", "se", "rounded"]


def estimate_row(cfg: ExperimentConfig, est: CoverTimeEstimate) -> dict:
    ds = degree_stats(cfg.graph)
    return {
        "n": cfg.graph.n,
        "m": cfg.graph.m,
        "delta": ds.min_degree,
        "Delta": ds.max_degree,
        "rule": cfg.rule.kind,
        "p": "" if cfg.rule.p is None else repr(cfg.rule.p),
        "q": "" if cfg.rule.q is None else repr(cfg.rule.q),
        "strategy": cfg.strategy.value,
        "start": est.start if cfg.start != SWEEP else f"{SWEEP}:{est.start}",
        "trials": est.trials,
        "mean": repr(est.mean),
        "se": repr(est.std_error),
        "rounded": est.rounded,
    }


def format_estimates_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()
