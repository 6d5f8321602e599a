import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evowalk.evolution import EvolutionRule, GraphInstance, initial_window
from evowalk.graph import gen_clique, gen_lollipop, gen_path, gen_random_threshold
from evowalk.walks import (
    StepLimitExceeded,
    WalkerState,
    run_cover_walk,
    rwa_step_distribution,
    step_rwa,
    step_rwd,
    walk_trajectory,
)


def _inst(g, alive_edges):
    bits = 0
    for u, v in alive_edges:
        bits |= 1 << g.edge_index(u, v)
    return GraphInstance(bits, g.m)


def test_rwa_distribution_cases():
    g = gen_clique(4)
    assert rwa_step_distribution(g, _inst(g, [(0, 1), (0, 3), (1, 2)]), 0) == {1: 0.5, 3: 0.5}
    assert rwa_step_distribution(g, _inst(g, [(1, 2)]), 0) == {0: 1.0}
    assert rwa_step_distribution(g, _inst(g, [(0, 2), (1, 3)]), 0) == {2: 1.0}


def test_rwa_all_alive_equals_srw():
    g = gen_lollipop(6, 4)
    full = GraphInstance.all_alive(g.m)
    for v in range(g.n):
        dist = rwa_step_distribution(g, full, v)
        assert set(dist) == set(g.adjacency[v])
        assert all(pr == pytest.approx(1 / g.degree(v)) for pr in dist.values())


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), bits=st.integers(0, 2**8 - 1), v=st.integers(0, 5))
def test_rwa_distribution_sums_to_one(seed, bits, v):
    g = gen_lollipop(6, 4)
    dist = rwa_step_distribution(g, GraphInstance(bits, g.m), v)
    assert abs(sum(dist.values()) - 1.0) < 1e-12
    closed = set(g.adjacency[v]) | {v}
    assert set(dist) <= closed


def test_step_rwa_stays_when_isolated(rng):
    g = gen_path(3)
    s = WalkerState.start(1)
    s2 = step_rwa(s, g, GraphInstance.all_dead(g.m), rng)
    assert (s2.position, s2.steps, s2.covered) == (1, 1, frozenset({1}))


def test_step_rwa_k3_all_alive_is_uniform():
    g = gen_clique(3)
    rng = np.random.default_rng(0)
    full = GraphInstance.all_alive(3)
    hits = np.bincount([step_rwa(WalkerState.start(0), g, full, rng).position for _ in range(20_000)], minlength=3)
    assert hits[0] == 0
    assert abs(hits[1] - 10_000) < 3 * np.sqrt(20_000 * 0.25)


def test_step_rwa_p2_covers(rng):
    g = gen_path(2)
    s = step_rwa(WalkerState.start(0), g, GraphInstance.all_alive(1), rng)
    assert s.position == 1 and s.covered == frozenset({0, 1})


def test_rwd_pending_edge_alive_moves(rng):
    g = gen_path(3)
    s = WalkerState(position=1, covered=frozenset({1}), steps=3, pending_target=2)
    s2 = step_rwd(s, g, _inst(g, [(1, 2)]), rng)
    assert (s2.position, s2.pending_target, s2.steps) == (2, None, 4)


def test_rwd_pending_edge_dead_waits(rng):
    g = gen_path(3)
    s = WalkerState(position=1, covered=frozenset({1}), steps=3, pending_target=2)
    s2 = step_rwd(s, g, _inst(g, [(0, 1)]), rng)
    assert (s2.position, s2.pending_target, s2.steps) == (1, 2, 4)


def test_rwd_leaf_targets_its_only_neighbour(rng):
    g = gen_path(3)
    s2 = step_rwd(WalkerState.start(0), g, GraphInstance.all_dead(g.m), rng)
    assert (s2.position, s2.pending_target) == (0, 1)


def test_rwd_never_drops_target_without_crossing():
    g = gen_lollipop(6, 4)
    rule = EvolutionRule.bernoulli(0.3)
    traj = walk_trajectory(g, rule, "rwd", 5, initial_window(g, rule), np.random.default_rng(2))
    for a, b in zip(traj, traj[1:]):
        assert b.steps == a.steps + 1
        assert a.covered <= b.covered
        if b.pending_target is not None:
            assert b.position == a.position
            assert b.pending_target in g.adjacency[b.position]
            if a.pending_target is not None:
                assert b.pending_target == a.pending_target
        elif a.pending_target is not None:
            assert b.position == a.pending_target


@pytest.mark.parametrize("strategy", ["rwa", "rwd", "srw"])
@pytest.mark.parametrize("rule", [EvolutionRule.bernoulli(0.4), EvolutionRule.birth_death(0.3, 0.6)])
def test_fast_loop_matches_reference_steps(strategy, rule):
    g = gen_random_threshold(8, 0.4, np.random.default_rng(4))
    for seed in range(10):
        w = initial_window(g, rule)
        steps, final = run_cover_walk(g, rule, strategy, 0, w, np.random.default_rng(seed))
        traj = walk_trajectory(g, rule, strategy, 0, w, np.random.default_rng(seed))
        assert steps == traj[-1].steps
        assert len(traj[-1].covered) == g.n
        assert len(final) == rule.window_length


def test_p_one_rwa_matches_srw_trajectory():
    g = gen_lollipop(7, 4)
    rule = EvolutionRule.bernoulli(1.0)
    for seed in range(20):
        a = walk_trajectory(g, rule, "rwa", 6, initial_window(g, rule), np.random.default_rng(seed))
        b = walk_trajectory(g, rule, "srw", 6, initial_window(g, rule), np.random.default_rng(seed))
        assert [s.position for s in a] == [s.position for s in b]


def test_run_cover_walk_deterministic():
    g = gen_clique(5)
    rule = EvolutionRule.birth_death(0.2, 0.4)
    w = initial_window(g, rule)
    a = run_cover_walk(g, rule, "rwa", 0, w, np.random.default_rng(99))
    b = run_cover_walk(g, rule, "rwa", 0, w, np.random.default_rng(99))
    assert a == b


def test_final_window_is_last_instance():
    g = gen_path(2)
    rule = EvolutionRule.bernoulli(1.0)
    steps, final = run_cover_walk(g, rule, "rwa", 0, initial_window(g, rule), np.random.default_rng(0))
    assert steps == 1
    assert final == (GraphInstance.all_alive(g.m),)
    rule = EvolutionRule.general(2, [1.0] * 4)
    _, final = run_cover_walk(g, rule, "rwa", 0, initial_window(g, rule), np.random.default_rng(0))
    assert final == (GraphInstance.all_alive(1), GraphInstance.all_dead(1))


def test_p2_rwa_mean_two():
    g = gen_path(2)
    rule = EvolutionRule.bernoulli(0.5)
    w = initial_window(g, rule)
    steps = np.array([run_cover_walk(g, rule, "rwa", 0, w, np.random.default_rng(s))[0] for s in range(10_000)])
    se = steps.std(ddof=1) / np.sqrt(steps.size)
    assert abs(steps.mean() - 2.0) <= 3 * se


def test_p3_srw_from_middle_mean_five():
    g = gen_path(3)
    rule = EvolutionRule.bernoulli(1.0)
    w = initial_window(g, rule)
    steps = np.array([run_cover_walk(g, rule, "srw", 1, w, np.random.default_rng(s))[0] for s in range(10_000)])
    se = steps.std(ddof=1) / np.sqrt(steps.size)
    assert abs(steps.mean() - 5.0) <= 3 * se


def test_step_limit_guard():
    g = gen_path(3)
    rule = EvolutionRule.bernoulli(0.0)
    with pytest.raises(StepLimitExceeded):
        run_cover_walk(g, rule, "rwa", 0, initial_window(g, rule), np.random.default_rng(0), step_limit=500)


def test_trace_lines():
    g = gen_path(3)
    rule = EvolutionRule.bernoulli(0.5)
    buf = io.StringIO()
    steps, _ = run_cover_walk(g, rule, "rwa", 0, initial_window(g, rule), np.random.default_rng(1), trace=buf)
    lines = buf.getvalue().splitlines()
    assert len(lines) == steps
    idx, digest, pos = lines[-1].split()
    assert int(idx) == steps and int(pos) in (0, 2)
    assert len(digest) == 1


def test_start_out_of_range():
    g = gen_path(3)
    rule = EvolutionRule.bernoulli(0.5)
    with pytest.raises(ValueError):
        run_cover_walk(g, rule, "rwa", 3, initial_window(g, rule), np.random.default_rng(0))
