from fractions import Fraction

import numpy as np
import pytest
import scipy.sparse as sp

from conftest import SUITE
from evowalk.evolution import EvolutionRule, GraphInstance
from evowalk.exact import (
    ABSORBED,
    ChainState,
    ChainTooLarge,
    SingularChainError,
    collapsed_rwa_chain_k0,
    collapsed_rwa_start_times,
    dump_chain,
    enumerate_chain,
    exact_cover_time,
    exact_start_times,
    hitting_times,
    instance_transition_prob,
    solve_absorption,
    static_cover_time,
    state_count_bound,
)
from evowalk.graph import gen_clique, gen_lollipop, gen_path
from oracles import cover_time_by_propagation

# Frozen from tests/oracles.py (forward propagation, no linear solve).
PROPAGATION_REFERENCE = [
    ("P3", EvolutionRule.bernoulli(0.5), {0: 20 / 3, 1: 8.0, 2: 20 / 3}),
    ("K4", EvolutionRule.bernoulli(0.5), {0: 44 / 7}),
    ("L5_3", EvolutionRule.bernoulli(0.5), {0: 24.476190476190, 2: 24.523809523810, 3: 21.190476190476, 4: 15.190476190476}),
    ("P3", EvolutionRule.birth_death(0.3, 0.2), {0: 9.337899543378, 1: 9.728713403169}),
    ("K3", EvolutionRule.birth_death(0.3, 0.2), {0: 5.292890696207}),
]


def test_instance_prob_bernoulli():
    assert instance_transition_prob(EvolutionRule.bernoulli(0.5), (), GraphInstance(0b01, 2)) == 0.25
    assert instance_transition_prob(EvolutionRule.bernoulli(1.0), (), GraphInstance.all_alive(3)) == 1.0
    assert instance_transition_prob(EvolutionRule.bernoulli(1.0), (), GraphInstance(0b011, 3)) == 0.0


def test_instance_prob_birth_death_counts():
    p, q = 0.3, 0.2
    rule = EvolutionRule.birth_death(p, q)
    assert instance_transition_prob(rule, (GraphInstance.all_dead(2),), GraphInstance.all_alive(2)) == pytest.approx(p * p)
    # c00=1, c01=1, c10=1, c11=1
    got = instance_transition_prob(rule, (GraphInstance(0b1100, 4),), GraphInstance(0b1010, 4))
    assert got == pytest.approx((1 - p) * p * q * (1 - q))


@pytest.mark.parametrize("rule", [EvolutionRule.birth_death(0.3, 0.6), EvolutionRule.general(2, [0.1, 0.5, 0.7, 0.95])])
def test_instance_probs_sum_to_one(rule):
    m = 3
    window = tuple(GraphInstance(b, m) for b in (0b101, 0b011))[: rule.history_length]
    total = sum(instance_transition_prob(rule, window, GraphInstance(h, m)) for h in range(1 << m))
    assert total == pytest.approx(1.0, abs=1e-12)


def test_birth_death_formula_matches_general_product():
    bd = EvolutionRule.birth_death(0.35, 0.15)
    gen = EvolutionRule.general(1, [0.35, 0.85])
    for cur in range(16):
        for nxt in range(16):
            w = (GraphInstance(cur, 4),)
            a = instance_transition_prob(bd, w, GraphInstance(nxt, 4))
            b = instance_transition_prob(gen, w, GraphInstance(nxt, 4))
            assert a == pytest.approx(b, abs=1e-15)


def test_instance_prob_dimension_mismatch():
    with pytest.raises(ValueError):
        instance_transition_prob(EvolutionRule.birth_death(0.3, 0.2), (GraphInstance(0, 3),), GraphInstance(0, 2))


def test_p2_chain_structure():
    g = gen_path(2)
    chain = enumerate_chain(g, EvolutionRule.bernoulli(0.4), collapse_absorbing=False)
    assert chain.size == 4
    h = hitting_times(chain)
    for i in chain.start_states:
        row = chain.transitions.getrow(i).toarray().ravel()
        absorbed = row[chain.absorbing].sum()
        assert absorbed == pytest.approx(0.4)
        assert h[i] == pytest.approx(1 / 0.4)


@pytest.mark.parametrize("collapse", [True, False])
def test_rows_stochastic_and_absorbing_identity(suite_graph, collapse):
    _, g = suite_graph
    for rule in (EvolutionRule.bernoulli(0.3), EvolutionRule.birth_death(0.4, 0.7)):
        chain = enumerate_chain(g, rule, collapse_absorbing=collapse)
        P = chain.transitions
        sums = np.asarray(P.sum(axis=1)).ravel()
        np.testing.assert_allclose(sums, 1.0, atol=1e-12)
        for i in np.flatnonzero(chain.absorbing):
            row = P.getrow(i)
            assert row.nnz == 1 and row.indices[0] == i
        if collapse:
            assert chain.absorbing.sum() == 1 and ABSORBED in chain.states


def test_history_shift_is_enforced():
    g = gen_path(3)
    chain = enumerate_chain(g, EvolutionRule.general(2, [0.2, 0.5, 0.6, 0.9]), collapse_absorbing=False)
    coo = chain.transitions.tocoo()
    for r, c in zip(coo.row, coo.col):
        a, b = chain.states[r], chain.states[c]
        if chain.absorbing[r]:
            continue
        assert b.window[1] == a.window[0]
        assert b.covered & a.covered == a.covered


@pytest.mark.parametrize(
    "g, p, expected",
    [(gen_path(2), 0.5, 2.0), (gen_path(2), 1.0, 1.0), (gen_path(3), 1.0, 5.0), (gen_clique(3), 1.0, 3.0)],
)
def test_exact_cover_time_hand_values(g, p, expected):
    assert exact_cover_time(g, EvolutionRule.bernoulli(p)) == pytest.approx(expected, abs=1e-12)


def test_hitting_times_zero_exactly_on_absorbing():
    chain = enumerate_chain(gen_lollipop(5, 3), EvolutionRule.bernoulli(0.5), collapse_absorbing=False)
    h = hitting_times(chain)
    assert np.all(h[chain.absorbing] == 0.0)
    assert np.all(h[~chain.absorbing] >= 1.0)


@pytest.mark.parametrize("name, rule, expected", PROPAGATION_REFERENCE)
def test_exact_matches_frozen_propagation_values(name, rule, expected):
    got = exact_start_times(SUITE[name](), rule)
    for start, value in expected.items():
        assert got[start] == pytest.approx(value, abs=1e-9)


def test_propagation_oracle_reproduces_frozen_values():
    g = gen_path(3)
    assert cover_time_by_propagation(3, list(g.edges), [0.5], 0, 1) == pytest.approx(8.0, abs=1e-9)
    got = cover_time_by_propagation(3, list(g.edges), [0.3, 0.8], 1, 1, init_window=((0, 0),))
    assert got == pytest.approx(9.728713403169, abs=1e-9)


def test_general_k2_matches_propagation():
    g = gen_path(3)
    table = [0.2, 0.5, 0.6, 0.9]
    exact = exact_start_times(g, EvolutionRule.general(2, table), 0)[0]
    ref = cover_time_by_propagation(3, list(g.edges), table, 2, 0)
    assert exact == pytest.approx(ref, abs=1e-9)


@pytest.mark.parametrize("p", [0.2, 0.5, 0.9])
def test_collapsed_equals_full_chain(suite_graph, p):
    _, g = suite_graph
    full = exact_cover_time(g, EvolutionRule.bernoulli(p))
    assert collapsed_rwa_chain_k0(g, p) == pytest.approx(full, abs=1e-9)


def test_collapsed_rational_values():
    assert collapsed_rwa_chain_k0(gen_path(2), 0.5, rational=True) == 2
    assert collapsed_rwa_chain_k0(gen_clique(3), 1, rational=True) == 3
    assert collapsed_rwa_chain_k0(gen_clique(4), 0.5, rational=True) == Fraction(44, 7)
    assert static_cover_time(gen_path(3), rational=True) == 5
    per = collapsed_rwa_start_times(gen_path(3), 0.5, rational=True)
    assert per == {0: Fraction(20, 3), 1: 8, 2: Fraction(20, 3)}


def test_collapsed_rejects_zero_p():
    with pytest.raises(ValueError):
        collapsed_rwa_chain_k0(gen_path(3), 0.0)


@pytest.mark.parametrize("p", [0.2, 0.5, 0.9])
def test_birth_death_history_collapse(suite_graph, p):
    _, g = suite_graph
    a = exact_cover_time(g, EvolutionRule.birth_death(p, 1 - p))
    b = exact_cover_time(g, EvolutionRule.bernoulli(p))
    assert a == pytest.approx(b, abs=1e-9)


def test_static_reduction(suite_graph):
    _, g = suite_graph
    assert exact_cover_time(g, EvolutionRule.bernoulli(1.0)) == pytest.approx(static_cover_time(g), abs=1e-9)


def test_state_count_bound(suite_graph):
    _, g = suite_graph
    for rule in (EvolutionRule.bernoulli(0.5), EvolutionRule.birth_death(0.3, 0.2)):
        chain = enumerate_chain(g, rule, collapse_absorbing=False)
        assert chain.size <= state_count_bound(g, rule)


def test_all_windows_maximises():
    g = gen_path(3)
    rule = EvolutionRule.birth_death(0.1, 0.05)
    dead = exact_cover_time(g, rule)
    worst = exact_cover_time(g, rule, all_windows=True)
    alive = exact_cover_time(g, rule, init_window=(GraphInstance.all_alive(2),))
    assert worst >= dead - 1e-12 and worst >= alive - 1e-12
    assert alive < dead  # edges that start alive tend to stay alive


def test_cap_errors():
    with pytest.raises(ChainTooLarge) as info:
        enumerate_chain(gen_clique(4), EvolutionRule.birth_death(0.3, 0.2), cap=100)
    assert "2048" in str(info.value)
    with pytest.raises(ChainTooLarge):
        enumerate_chain(gen_clique(4), EvolutionRule.bernoulli(0.3), cap=5)


def test_materialised_cap(monkeypatch):
    import evowalk.exact as ex

    # the a-priori bound always dominates, so stub it to reach the BFS guard
    monkeypatch.setattr(ex, "state_count_bound", lambda g, rule: 0)
    enumerate_chain(gen_lollipop(5, 3), EvolutionRule.bernoulli(0.3), cap=80)
    with pytest.raises(ChainTooLarge) as info:
        enumerate_chain(gen_lollipop(5, 3), EvolutionRule.bernoulli(0.3), cap=10)
    assert info.value.estimated is False


def test_zero_probability_rule_is_singular():
    with pytest.raises(SingularChainError) as info:
        exact_cover_time(gen_path(3), EvolutionRule.bernoulli(0.0))
    assert isinstance(info.value.state, ChainState)


def test_sparse_iterative_path_matches_dense(monkeypatch):
    import evowalk.exact as ex

    g = gen_lollipop(5, 3)
    rule = EvolutionRule.birth_death(0.3, 0.2)
    chain = enumerate_chain(g, rule)
    dense, res_d = solve_absorption(chain.transitions, chain.absorbing)
    monkeypatch.setattr(ex, "DENSE_SOLVE_LIMIT", 0)
    sparse, res_s = solve_absorption(chain.transitions, chain.absorbing)
    np.testing.assert_allclose(sparse, dense, atol=1e-7)
    assert res_d < 1e-9 and res_s < 1e-6


def test_solve_absorption_on_toy_chain():
    # geometric(0.25) absorption
    P = sp.csr_matrix(np.array([[0.75, 0.25], [0.0, 1.0]]))
    h, _ = solve_absorption(P, np.array([False, True]))
    assert h[0] == pytest.approx(4.0) and h[1] == 0.0


def test_dump_chain(tmp_path):
    chain = enumerate_chain(gen_path(3), EvolutionRule.birth_death(0.5, 0.5))
    s, t = tmp_path / "states.csv", tmp_path / "triplets.csv"
    dump_chain(chain, s, t)
    states = s.read_text().splitlines()
    trips = t.read_text().splitlines()
    assert states[0] == "index,window,position,covered,absorbing"
    assert len(states) == chain.size + 1
    assert len(trips) == chain.transitions.nnz + 1
    rows = {}
    for line in trips[1:]:
        r, c, pr = line.split(",")
        rows[int(r)] = rows.get(int(r), 0.0) + float(pr)
    assert all(abs(v - 1.0) < 1e-12 for v in rows.values())
