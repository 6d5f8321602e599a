"""Exact RWA cover times from an absorbing Markov chain.

A chain state is ``(window, position, covered)``: the last ``k`` graph
instances (empty for history-free rules), the walker's node, and the set of
visited nodes. One transition samples the next instance from the rule and then
moves the walker on that instance. States with every node covered are merged
into a single absorbing state unless ``collapse_absorbing=False``.

Instances and covered sets are integer bitsets throughout.
"""

from __future__ import annotations

import csv
import logging
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .evolution import EvolutionRule, GraphInstance, alive_probability
from .graph import StaticGraph

log = logging.getLogger(__name__)

DEFAULT_STATE_CAP = 5_000_000
DENSE_SOLVE_LIMIT = 5_000
ITERATIVE_RTOL = 1e-10
ITERATIVE_MAXITER = 100_000
# instances are enumerated exhaustively per state
MAX_EDGES = 20


class ChainTooLarge(RuntimeError):
    def __init__(self, count: int, cap: int, estimated: bool = True, detail: str = ""):
        what = "estimated" if estimated else "materialised"
        super().__init__(f"{what} state count {count} exceeds cap {cap}" if not detail else detail)
        self.count = count
        self.cap = cap
        self.estimated = estimated


class SingularChainError(RuntimeError):
    """Some transient state cannot reach full coverage."""

    def __init__(self, state):
        super().__init__(f"absorbing set unreachable from state {state}")
        self.state = state


@dataclass(frozen=True)
class ChainState:
    window: tuple[int, ...]
    position: int
    covered: int

    def covered_nodes(self) -> list[int]:
        c, out, i = self.covered, [], 0
        while c:
            if c & 1:
                out.append(i)
            c >>= 1
            i += 1
        return out


ABSORBED = ChainState((), -1, -1)


@dataclass(frozen=True, eq=False)
class Chain:
    graph: StaticGraph
    rule: EvolutionRule
    states: tuple[ChainState, ...]
    transitions: sp.csr_matrix
    absorbing: np.ndarray  # bool mask over states
    start_states: tuple[int, ...]
    collapsed: bool

    @property
    def size(self) -> int:
        return len(self.states)

    def index(self, state: ChainState) -> int:
        return self._index[state]

    @property
    def _index(self):
        idx = self.__dict__.get("_idx")
        if idx is None:
            idx = {s: i for i, s in enumerate(self.states)}
            object.__setattr__(self, "_idx", idx)
        return idx


def state_count_bound(g: StaticGraph, rule: EvolutionRule) -> int:
    """Upper bound ``2^(k*m + n - 1) * n`` on the number of chain states."""
    return 2 ** (rule.history_length * g.m + g.n - 1) * g.n


def instance_transition_prob(rule: EvolutionRule, from_window: Sequence[GraphInstance], to_instance: GraphInstance) -> float:
    """Probability that ``to_instance`` is the next instance after ``from_window``."""
    k = rule.history_length
    m = to_instance.m
    if len(from_window) < k:
        raise ValueError(f"window holds {len(from_window)} instances, rule needs {k}")
    for inst in from_window[:k]:
        if inst.m != m:
            raise ValueError(f"dimension mismatch: window m={inst.m}, target m={m}")

    if rule.kind == "bernoulli":
        alpha = to_instance.alive_count()
        return rule.p**alpha * (1.0 - rule.p) ** (m - alpha)

    if rule.kind == "birth_death":
        cur, nxt = from_window[0].bits, to_instance.bits
        full = (1 << m) - 1
        c11 = bin(cur & nxt).count("1")
        c10 = bin(cur & ~nxt & full).count("1")
        c01 = bin(~cur & nxt & full).count("1")
        c00 = m - c11 - c10 - c01
        p, q = rule.p, rule.q
        return (1.0 - p) ** c00 * p**c01 * q**c10 * (1.0 - q) ** c11

    prob = 1.0
    for e in range(m):
        pattern = [inst.is_alive(e) for inst in from_window[:k]]
        pa = alive_probability(rule, pattern)
        prob *= pa if to_instance.is_alive(e) else 1.0 - pa
    return prob


class _InstanceTables:
    """Per-graph lookup tables over all ``2^m`` instances."""

    def __init__(self, g: StaticGraph, rule: EvolutionRule):
        m = g.m
        self.m = m
        self.rule = rule
        codes = np.arange(1 << m, dtype=np.int64)
        self.bits = ((codes[:, None] >> np.arange(m)) & 1).astype(bool)
        self._cache: dict = {}
        # moves[v][h] -> list of (target, prob)
        self.moves = []
        for v in range(g.n):
            inc = np.asarray(g.incident_edges[v], dtype=np.int64)
            nbrs = g.adjacency[v]
            local = self.bits[:, inc] if inc.size else np.zeros((1 << m, 0), dtype=bool)
            per_inst = []
            for h in range(1 << m):
                alive = [u for u, a in zip(nbrs, local[h]) if a]
                per_inst.append([(v, 1.0)] if not alive else [(u, 1.0 / len(alive)) for u in alive])
            self.moves.append(per_inst)

    def next_probs(self, window: tuple[int, ...]) -> np.ndarray:
        """Probability of every next instance given the last ``k`` instances."""
        got = self._cache.get(window)
        if got is not None:
            return got
        k = self.rule.history_length
        if k == 0:
            pe = np.full(self.m, self.rule.table[0])
        else:
            pattern = np.zeros(self.m, dtype=np.int64)
            for i, h in enumerate(window):
                pattern |= ((h >> np.arange(self.m)) & 1) << i
            pe = np.asarray(self.rule.table)[pattern]
        probs = np.prod(np.where(self.bits, pe, 1.0 - pe), axis=1)
        self._cache[window] = probs
        return probs


def _start_windows(g: StaticGraph, rule: EvolutionRule, all_windows: bool, init: Sequence[GraphInstance] | None):
    k = rule.history_length
    if k == 0:
        return [()]
    if all_windows:
        return [tuple(w) for w in product(range(1 << g.m), repeat=k)]
    if init is None:
        return [(0,) * k]
    return [tuple(inst.bits for inst in init[:k])]


def enumerate_chain(
    g: StaticGraph,
    rule: EvolutionRule,
    starts: Iterable[int] | int | None = None,
    *,
    all_windows: bool = False,
    init_window: Sequence[GraphInstance] | None = None,
    collapse_absorbing: bool = True,
    cap: int = DEFAULT_STATE_CAP,
) -> Chain:
    """Breadth-first construction of the states reachable from the start states.

    ``starts`` defaults to every node. Start windows are all-dead unless
    ``init_window`` is given or ``all_windows`` requests every possible window.
    """
    bound = state_count_bound(g, rule)
    if bound > cap:
        raise ChainTooLarge(bound, cap)
    if g.m > MAX_EDGES:
        raise ChainTooLarge(
            bound, cap, detail=f"graph has {g.m} edges; per-state instance enumeration is limited to {MAX_EDGES}"
        )
    if starts is None:
        starts = range(g.n)
    elif isinstance(starts, int):
        starts = [starts]
    starts = list(starts)

    k = rule.history_length
    full = (1 << g.n) - 1
    tables = _InstanceTables(g, rule)

    states: list[ChainState] = []
    index: dict[ChainState, int] = {}
    absorbing: list[bool] = []

    def intern(s: ChainState, is_abs: bool) -> int:
        i = index.get(s)
        if i is None:
            i = len(states)
            if i >= cap:
                raise ChainTooLarge(i + 1, cap, estimated=False)
            index[s] = i
            states.append(s)
            absorbing.append(is_abs)
            if not is_abs:
                queue.append(i)
        return i

    queue: deque[int] = deque()
    start_ids = []
    for w in _start_windows(g, rule, all_windows, init_window):
        for v in starts:
            if not 0 <= v < g.n:
                raise ValueError(f"start node {v} outside [0, {g.n})")
            s = ChainState(w, v, 1 << v)
            start_ids.append(intern(s, (1 << v) == full))

    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    while queue:
        i = queue.popleft()
        s = states[i]
        probs = tables.next_probs(s.window)
        moves = tables.moves[s.position]
        acc: dict[int, float] = {}
        for h in np.flatnonzero(probs).tolist():
            ph = probs[h]
            win = (h,) + s.window[: k - 1] if k else ()
            for v2, pm in moves[h]:
                cov = s.covered | (1 << v2)
                if cov == full:
                    target = ABSORBED if collapse_absorbing else ChainState(win, v2, cov)
                    j = intern(target, True)
                else:
                    j = intern(ChainState(win, v2, cov), False)
                acc[j] = acc.get(j, 0.0) + ph * pm
        for j, pr in acc.items():
            rows.append(i)
            cols.append(j)
            vals.append(pr)

    for i, a in enumerate(absorbing):
        if a:
            rows.append(i)
            cols.append(i)
            vals.append(1.0)

    n_states = len(states)
    P = sp.csr_matrix((vals, (rows, cols)), shape=(n_states, n_states))
    log.debug("enumerated %d states (%d absorbing)", n_states, sum(absorbing))
    return Chain(
        graph=g,
        rule=rule,
        states=tuple(states),
        transitions=P,
        absorbing=np.asarray(absorbing, dtype=bool),
        start_states=tuple(start_ids),
        collapsed=collapse_absorbing,
    )


def _check_reachability(P: sp.csr_matrix, absorbing: np.ndarray, states) -> None:
    # reverse BFS from the absorbing set
    Pt = P.T.tocsr()
    reach = absorbing.copy()
    frontier = list(np.flatnonzero(absorbing))
    while frontier:
        j = frontier.pop()
        for i in Pt.indices[Pt.indptr[j] : Pt.indptr[j + 1]]:
            if not reach[i]:
                reach[i] = True
                frontier.append(i)
    bad = np.flatnonzero(~reach)
    if bad.size:
        raise SingularChainError(states[bad[0]])


def solve_absorption(P: sp.spmatrix, absorbing: np.ndarray, states=None) -> tuple[np.ndarray, float]:
    """Expected steps to absorption for every state, plus the max-norm residual."""
    P = sp.csr_matrix(P)
    absorbing = np.asarray(absorbing, dtype=bool)
    _check_reachability(P, absorbing, states if states is not None else range(P.shape[0]))
    trans = np.flatnonzero(~absorbing)
    h = np.zeros(P.shape[0])
    if trans.size == 0:
        return h, 0.0
    Q = P[trans][:, trans]
    A = sp.identity(trans.size, format="csr") - Q
    b = np.ones(trans.size)
    if trans.size < DENSE_SOLVE_LIMIT:
        x = np.linalg.solve(A.toarray(), b)
    else:
        x, info = spla.bicgstab(A, b, rtol=ITERATIVE_RTOL, atol=0.0, maxiter=ITERATIVE_MAXITER)
        if info != 0:
            log.warning("bicgstab did not converge (info=%d); falling back to sparse LU", info)
            x = spla.spsolve(A.tocsc(), b)
    residual = float(np.max(np.abs(A @ x - b)))
    h[trans] = x
    return h, residual


def hitting_times(chain: Chain) -> np.ndarray:
    """Expected steps to full coverage from every state (0 on the absorbing set)."""
    h, residual = solve_absorption(chain.transitions, chain.absorbing, chain.states)
    log.debug("hitting-time solve residual %.3e", residual)
    return h


def exact_start_times(
    g: StaticGraph,
    rule: EvolutionRule,
    starts: Iterable[int] | int | None = None,
    *,
    all_windows: bool = False,
    init_window: Sequence[GraphInstance] | None = None,
    cap: int = DEFAULT_STATE_CAP,
) -> dict[int, float]:
    """Cover time from each start node (maximised over start windows when ``all_windows``)."""
    chain = enumerate_chain(g, rule, starts, all_windows=all_windows, init_window=init_window, cap=cap)
    h = hitting_times(chain)
    out: dict[int, float] = {}
    for i in chain.start_states:
        v = chain.states[i].position
        out[v] = max(out.get(v, 0.0), float(h[i]))
    return out


def exact_cover_time(
    g: StaticGraph,
    rule: EvolutionRule,
    starts: Iterable[int] | int | None = None,
    *,
    all_windows: bool = False,
    init_window: Sequence[GraphInstance] | None = None,
    cap: int = DEFAULT_STATE_CAP,
) -> float:
    """Worst-case expected RWA cover time over the designated start states."""
    return max(exact_start_times(g, rule, starts, all_windows=all_windows, init_window=init_window, cap=cap).values())


def _as_fraction(x) -> Fraction:
    # decimal round-trip so 0.1 becomes 1/10 rather than its binary expansion
    return x if isinstance(x, Fraction) else Fraction(str(x))


def _solve_fraction(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    n = len(b)
    M = [row[:] + [rhs] for row, rhs in zip(A, b)]
    for col in range(n):
        piv = next(r for r in range(col, n) if M[r][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        inv = 1 / M[col][col]
        M[col] = [x * inv for x in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]


def collapsed_rwa_start_times(
    g: StaticGraph, p, starts: Iterable[int] | int | None = None, *, rational: bool = False
) -> dict:
    """History-free RWA cover times on the reduced ``(position, covered)`` chain.

    From ``v`` the walker reaches each neighbour with probability
    ``(1 - (1-p)^d) / d`` and stays put with probability ``(1-p)^d``. Covered
    sets only grow, so the hitting times are solved one covered set at a time,
    largest first, each a small linear system over the nodes of that set.

    With ``rational=True`` the arithmetic is done in :class:`fractions.Fraction`
    (``p`` is read through its decimal string) and the values are exact.
    """
    if not 0 < p <= 1:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    n = g.n
    full = (1 << n) - 1
    one = Fraction(1) if rational else 1.0
    pp = _as_fraction(p) if rational else float(p)
    stay = [(one - pp) ** g.degree(v) for v in range(n)]
    move = [(one - stay[v]) / g.degree(v) for v in range(n)]

    @lru_cache(maxsize=None)
    def times(covered: int) -> dict:
        if covered == full:
            return {}
        members = [v for v in range(n) if covered >> v & 1]
        pos = {v: i for i, v in enumerate(members)}
        size = len(members)
        A = [[one * (i == j) for j in range(size)] for i in range(size)]
        b = [one] * size
        for v in members:
            i = pos[v]
            A[i][i] -= stay[v]
            for u in g.adjacency[v]:
                if u in pos:
                    A[i][pos[u]] -= move[v]
                else:
                    grown = covered | (1 << u)
                    if grown != full:
                        b[i] += move[v] * times(grown)[u]
        if rational:
            x = _solve_fraction(A, b)
        else:
            x = np.linalg.solve(np.array(A), np.array(b)).tolist()
        return {v: x[pos[v]] for v in members}

    if starts is None:
        starts = range(n)
    elif isinstance(starts, int):
        starts = [starts]
    return {v: times(1 << v).get(v, one * 0) for v in starts}


def collapsed_rwa_chain_k0(g: StaticGraph, p, starts: Iterable[int] | int | None = None, *, rational: bool = False):
    return max(collapsed_rwa_start_times(g, p, starts, rational=rational).values())


def static_cover_time(g: StaticGraph, starts: Iterable[int] | int | None = None, *, rational: bool = False):
    """Exact simple-random-walk cover time (worst start by default)."""
    return collapsed_rwa_chain_k0(g, 1, starts, rational=rational)


def dump_chain(chain: Chain, states_path: str | Path, triplets_path: str | Path) -> None:
    """Write the state table and the sparse ``(row, col, prob)`` triplets as CSV."""
    k = chain.rule.history_length
    with open(states_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "window", "position", "covered", "absorbing"])
        for i, s in enumerate(chain.states):
            if s is ABSORBED or s == ABSORBED:
                w.writerow([i, "", "", "all", 1])
                continue
            win = " ".join(f"{h:0{chain.graph.m}b}"[::-1] for h in s.window) if k else ""
            nodes = " ".join(map(str, s.covered_nodes()))
            w.writerow([i, win, s.position, nodes, int(chain.absorbing[i])])
    coo = chain.transitions.tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(triplets_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["row", "col", "prob"])
        for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
            w.writerow([int(r), int(c), repr(float(v))])
