"""Closed-form cover-time bounds and the resistor-network view of RWD.

Every bound takes the static cover time ``C_G`` as an input, either the exact
value from :mod:`evowalk.exact` or a Monte-Carlo estimate. Arithmetic is
generic, so passing :class:`fractions.Fraction` inputs yields exact bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .graph import StaticGraph, degree_stats, gen_lollipop


@dataclass(frozen=True)
class BoundReport:
    lower: float
    upper: float
    formulas: tuple[str, ...]
    inputs: dict = field(default_factory=dict)
    cap: float | None = None

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")


def _require_positive(name: str, value) -> None:
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")


def rwd_k0_bounds(C_G, p, m: int | None = None, n: int | None = None) -> BoundReport:
    """RWD under Bernoulli(p): expected cover time ``C_G / p``.

    ``cap`` carries the graph-generic ``2m(n-1)/p`` when ``m`` and ``n`` are given.
    """
    _require_positive("p", p)
    _require_positive("C_G", C_G)
    expected = C_G / p
    cap = 2 * m * (n - 1) / p if m is not None and n is not None else None
    return BoundReport(
        expected, expected, ("C_G/p", "2m(n-1)/p"), {"C_G": C_G, "p": p, "m": m, "n": n}, cap
    )


def rwa_k0_bounds(C_G, p, min_degree: int, max_degree: int) -> BoundReport:
    """RWA under Bernoulli(p): ``C_G/(1-(1-p)^Delta) <= C <= C_G/(1-(1-p)^delta)``."""
    _require_positive("p", p)
    if not 1 <= min_degree <= max_degree:
        raise ValueError(f"need 1 <= delta <= Delta, got {min_degree}, {max_degree}")
    one = 1 if isinstance(p, (int, Fraction)) else 1.0
    lower = C_G / (one - (one - p) ** max_degree)
    upper = C_G / (one - (one - p) ** min_degree)
    return BoundReport(
        lower,
        upper,
        ("C_G/(1-(1-p)^Delta)", "C_G/(1-(1-p)^delta)"),
        {"C_G": C_G, "p": p, "delta": min_degree, "Delta": max_degree},
    )


def rwd_k1_bounds(C_G, p, q) -> BoundReport:
    """RWD under Birth-Death(p, q): ``C_G/xi_max <= C <= C_G/xi_min``."""
    xi_min = min(p, 1 - q)
    xi_max = max(p, 1 - q)
    if not xi_min > 0:
        raise ValueError(f"xi_min = min(p, 1-q) must be positive, got {xi_min}")
    return BoundReport(
        C_G / xi_max,
        C_G / xi_min,
        ("C_G/xi_max", "C_G/xi_min"),
        {"C_G": C_G, "p": p, "q": q, "xi_min": xi_min, "xi_max": xi_max},
    )


def lollipop_rwa_lower_bound(n: int, p, static_cover=None) -> tuple[StaticGraph, BoundReport]:
    """RWA lower bound on the lollipop with a clique of ``round(2n/3)`` nodes.

    ``static_cover`` defaults to the exact worst-start SRW cover time of the
    generated graph.
    """
    k = min(max(2, round(2 * n / 3)), n - 1)
    g = gen_lollipop(n, k)
    if static_cover is None:
        from .exact import static_cover_time

        static_cover = static_cover_time(g)
    ds = degree_stats(g)
    return g, rwa_k0_bounds(static_cover, p, ds.min_degree, ds.max_degree)


def round_half_up(x: float) -> int:
    """Round to the nearest natural number, halves upward."""
    return int(np.floor(float(x) + 0.5))


@dataclass(frozen=True)
class ElectricalNetwork:
    """The underlying graph with a ``1/p`` ohm resistor on every edge."""

    graph: StaticGraph
    p: float

    def __post_init__(self):
        if not 0 < self.p <= 1:
            raise ValueError(f"p must lie in (0, 1], got {self.p}")

    @property
    def resistance(self) -> float:
        return 1.0 / self.p

    def laplacian(self) -> np.ndarray:
        g = self.graph
        L = np.zeros((g.n, g.n))
        for u, v in g.edges:
            L[u, v] -= self.p
            L[v, u] -= self.p
            L[u, u] += self.p
            L[v, v] += self.p
        return L


def _grounded_potentials(net: ElectricalNetwork, injected: np.ndarray, ground: int) -> np.ndarray:
    L = net.laplacian()
    keep = np.arange(net.graph.n) != ground
    phi = np.zeros(net.graph.n)
    phi[keep] = np.linalg.solve(L[np.ix_(keep, keep)], injected[keep])
    return phi


def electric_hitting_time(net: ElectricalNetwork, u: int, v: int) -> float:
    """Potential difference ``phi(u) - phi(v)`` with ``d(w)`` amps into every node and ``2m`` out of ``v``."""
    if u == v:
        raise ValueError("u and v must differ")
    g = net.graph
    injected = np.array([g.degree(w) for w in range(g.n)], dtype=float)
    injected[v] -= 2 * g.m
    phi = _grounded_potentials(net, injected, v)
    return float(phi[u] - phi[v])


def first_step_hitting_time(net: ElectricalNetwork, u: int, v: int) -> float:
    """RWD hitting time from the first-step equations ``H_u = 1/p + mean_{w~u} H_w``."""
    if u == v:
        raise ValueError("u and v must differ")
    return float(first_step_hitting_times(net, v)[u])


def first_step_hitting_times(net: ElectricalNetwork, target: int) -> np.ndarray:
    g = net.graph
    A = np.eye(g.n)
    b = np.full(g.n, 1.0 / net.p)
    for w in range(g.n):
        if w == target:
            b[w] = 0.0
            continue
        d = g.degree(w)
        for x in g.adjacency[w]:
            A[w, x] -= 1.0 / d
    return np.linalg.solve(A, b)


def effective_resistance(net: ElectricalNetwork, u: int, v: int) -> float:
    """Voltage between ``u`` and ``v`` when one ampere flows from ``u`` to ``v``."""
    if u == v:
        raise ValueError("u and v must differ")
    injected = np.zeros(net.graph.n)
    injected[u] = 1.0
    injected[v] = -1.0
    phi = _grounded_potentials(net, injected, v)
    return float(phi[u] - phi[v])


def commute_time(net: ElectricalNetwork, u: int, v: int) -> float:
    """``2m * R(u, v)``."""
    return 2 * net.graph.m * effective_resistance(net, u, v)
