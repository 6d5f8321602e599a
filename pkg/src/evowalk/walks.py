"""Single-agent walks on an evolving graph.

Every time step has two stages: the graph instance is sampled from the rule,
then the agent moves. Three strategies are supported:

* ``rwa``: pick uniformly among currently alive incident edges, stay if none.
* ``rwd``: pick a static neighbour uniformly, wait until that edge is alive.
* ``srw``: simple random walk on the static graph (every edge always alive).

``run_cover_walk`` splits its generator into an edge stream and a walker
stream, so an ``rwa`` walk under ``Bernoulli(1)`` and an ``srw`` walk from the
same seed follow identical trajectories.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import TextIO

import numpy as np

from .evolution import (
    EvolutionRule,
    GraphInstance,
    check_window,
    evolve_arrays,
    evolve_instance,
    shift_window,
)
from .graph import StaticGraph

DEFAULT_STEP_LIMIT = 10**9


class Strategy(str, enum.Enum):
    RWA = "rwa"
    RWD = "rwd"
    SRW = "srw"


class StepLimitExceeded(RuntimeError):
    def __init__(self, limit: int, covered: int, n: int):
        super().__init__(f"walk exceeded {limit} steps with {covered}/{n} nodes covered")
        self.limit = limit


@dataclass(frozen=True)
class WalkerState:
    position: int
    covered: frozenset
    steps: int = 0
    pending_target: int | None = None

    @classmethod
    def start(cls, v: int) -> WalkerState:
        return cls(position=v, covered=frozenset((v,)))


def _pick(rng: np.random.Generator, k: int) -> int:
    j = int(rng.random() * k)
    return j if j < k else k - 1


def rwa_step_distribution(g: StaticGraph, inst: GraphInstance, v: int) -> dict[int, float]:
    alive = [u for u, e in zip(g.adjacency[v], g.incident_edges[v]) if inst.is_alive(e)]
    if not alive:
        return {v: 1.0}
    w = 1.0 / len(alive)
    return {u: w for u in alive}


def _rwa_move(nbrs: np.ndarray, inc: np.ndarray, alive: np.ndarray, v: int, rng) -> int:
    avail = nbrs[alive[inc]]
    if avail.size == 0:
        return v
    return int(avail[_pick(rng, avail.size)])


def _rwd_move(g: StaticGraph, alive: np.ndarray, v: int, pending: int | None, rng) -> tuple[int, int | None]:
    if pending is None:
        pending = g.adjacency[v][_pick(rng, g.degree(v))]
    if alive[g.edge_index(v, pending)]:
        return pending, None
    return v, pending


def _advance(state: WalkerState, new_pos: int, pending: int | None) -> WalkerState:
    covered = state.covered if new_pos in state.covered else state.covered | {new_pos}
    return replace(state, position=new_pos, covered=covered, steps=state.steps + 1, pending_target=pending)


def step_rwa(state: WalkerState, g: StaticGraph, inst: GraphInstance, rng: np.random.Generator) -> WalkerState:
    v = state.position
    nxt = _rwa_move(
        np.asarray(g.adjacency[v], dtype=np.int64),
        np.asarray(g.incident_edges[v], dtype=np.int64),
        inst.to_array(),
        v,
        rng,
    )
    return _advance(state, nxt, None)


def step_rwd(state: WalkerState, g: StaticGraph, inst: GraphInstance, rng: np.random.Generator) -> WalkerState:
    nxt, pending = _rwd_move(g, inst.to_array(), state.position, state.pending_target, rng)
    return _advance(state, nxt, pending)


def step_srw(state: WalkerState, g: StaticGraph, rng: np.random.Generator) -> WalkerState:
    return step_rwa(state, g, GraphInstance.all_alive(g.m), rng)


@dataclass
class _Compiled:
    nbrs: list
    inc: list


_compiled_cache: dict = {}


def _compile(g: StaticGraph) -> _Compiled:
    c = _compiled_cache.get(id(g))
    if c is None or c[0] is not g:
        c = (g, _Compiled(
            nbrs=[np.asarray(a, dtype=np.int64) for a in g.adjacency],
            inc=[np.asarray(i, dtype=np.int64) for i in g.incident_edges],
        ))
        if len(_compiled_cache) > 64:
            _compiled_cache.clear()
        _compiled_cache[id(g)] = c
    return c[1]


def run_cover_walk(
    g: StaticGraph,
    rule: EvolutionRule,
    strategy: Strategy | str,
    start: int,
    init_window,
    rng: np.random.Generator,
    *,
    step_limit: int = DEFAULT_STEP_LIMIT,
    trace: TextIO | None = None,
) -> tuple[int, tuple]:
    """Walk until every node is covered.

    Returns the elapsed step count and the final instance window (the input
    window for ``srw``, which never evolves the graph). ``trace`` receives one
    ``step digest position`` line per step.
    """
    strategy = Strategy(strategy)
    if not 0 <= start < g.n:
        raise ValueError(f"start node {start} outside [0, {g.n})")
    check_window(g, rule, init_window)
    edge_rng, walk_rng = rng.spawn(2)
    comp = _compile(g)
    n, m = g.n, g.m
    k = rule.history_length

    history = [inst.to_array() for inst in init_window]
    all_alive = np.ones(m, dtype=bool)
    v = start
    covered = 1 << start
    n_covered = 1
    pending = None
    steps = 0
    while n_covered < n:
        if steps >= step_limit:
            raise StepLimitExceeded(step_limit, n_covered, n)
        if strategy is Strategy.SRW:
            alive = all_alive
        else:
            alive = evolve_arrays(rule, history[:k], m, edge_rng)
            history = [alive] + history[:-1]
        if strategy is Strategy.RWD:
            v, pending = _rwd_move(g, alive, v, pending, walk_rng)
        else:
            v = _rwa_move(comp.nbrs[v], comp.inc[v], alive, v, walk_rng)
        steps += 1
        if not (covered >> v) & 1:
            covered |= 1 << v
            n_covered += 1
        if trace is not None:
            trace.write(f"{steps} {GraphInstance.from_array(alive).digest()} {v}\n")

    if strategy is Strategy.SRW:
        return steps, tuple(init_window)
    return steps, tuple(GraphInstance.from_array(h) for h in history)


def walk_trajectory(
    g: StaticGraph,
    rule: EvolutionRule,
    strategy: Strategy | str,
    start: int,
    init_window,
    rng: np.random.Generator,
    *,
    step_limit: int = DEFAULT_STEP_LIMIT,
) -> list[WalkerState]:
    """Slow reference walk built from the public ``step_*`` functions.

    Consumes random numbers exactly like :func:`run_cover_walk`, so both agree
    step for step under the same seed.
    """
    strategy = Strategy(strategy)
    check_window(g, rule, init_window)
    edge_rng, walk_rng = rng.spawn(2)

    window = tuple(init_window)
    state = WalkerState.start(start)
    states = [state]
    while len(state.covered) < g.n:
        if state.steps >= step_limit:
            raise StepLimitExceeded(step_limit, len(state.covered), g.n)
        if strategy is Strategy.SRW:
            state = step_srw(state, g, walk_rng)
        else:
            inst = evolve_instance(g, rule, window, edge_rng)
            window = shift_window(window, inst)
            step = step_rwd if strategy is Strategy.RWD else step_rwa
            state = step(state, g, inst, walk_rng)
        states.append(state)
    return states
