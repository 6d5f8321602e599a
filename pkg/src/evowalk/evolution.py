"""Edge-uniform evolution: one stochastic rule applied to every edge independently.

A :class:`GraphInstance` stores edge liveness as an integer bitset (bit ``i``
is edge ``i`` of the owning :class:`~evowalk.graph.StaticGraph`). The simulator
works on boolean numpy arrays internally and converts at the boundaries.

History patterns use a fixed bit order: bit ``i`` of a pattern is the edge's
state ``i + 1`` steps ago, so bit 0 is the current instance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .graph import StaticGraph


@dataclass(frozen=True)
class GraphInstance:
    bits: int
    m: int

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.m:
            raise ValueError(f"liveness bits {self.bits:#x} do not fit in m={self.m} edges")

    @classmethod
    def all_dead(cls, m: int) -> GraphInstance:
        return cls(0, m)

    @classmethod
    def all_alive(cls, m: int) -> GraphInstance:
        return cls((1 << m) - 1, m)

    @classmethod
    def from_array(cls, alive: np.ndarray) -> GraphInstance:
        alive = np.asarray(alive, dtype=bool)
        packed = np.packbits(alive, bitorder="little").tobytes()
        return cls(int.from_bytes(packed, "little"), alive.size)

    def to_array(self) -> np.ndarray:
        raw = np.frombuffer(self.bits.to_bytes((self.m + 7) // 8 or 1, "little"), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[: self.m].astype(bool)

    def is_alive(self, edge: int) -> bool:
        return bool((self.bits >> edge) & 1)

    def alive_count(self) -> int:
        return bin(self.bits).count("1")

    def digest(self) -> str:
        return f"{self.bits:0{max(1, (self.m + 3) // 4)}x}"


HistoryWindow = tuple  # tuple[GraphInstance, ...], most recent first


@dataclass(frozen=True)
class EvolutionRule:
    """Per-edge rule ``Pr(alive next | last k states)``.

    ``table[pattern]`` is the alive probability for a k-bit history pattern.
    Build rules with :meth:`bernoulli`, :meth:`birth_death` or :meth:`general`.
    """

    kind: str
    history_length: int
    table: tuple[float, ...]
    p: float | None = None
    q: float | None = None

    def __post_init__(self):
        if len(self.table) != 1 << self.history_length:
            raise ValueError(
                f"table must cover all {1 << self.history_length} patterns, got {len(self.table)}"
            )
        for prob in self.table:
            if not 0.0 <= prob <= 1.0:
                raise ValueError(f"probability {prob} outside [0, 1]")

    @classmethod
    def bernoulli(cls, p: float) -> EvolutionRule:
        _check_prob("p", p)
        return cls("bernoulli", 0, (float(p),), p=float(p))

    @classmethod
    def birth_death(cls, p: float, q: float) -> EvolutionRule:
        """Dead edge revives with probability ``p``; alive edge dies with probability ``q``."""
        _check_prob("p", p)
        _check_prob("q", q)
        return cls("birth_death", 1, (float(p), 1.0 - float(q)), p=float(p), q=float(q))

    @classmethod
    def general(cls, k: int, table: Mapping[int, float] | Sequence[float]) -> EvolutionRule:
        if k < 0:
            raise ValueError(f"history length must be >= 0, got {k}")
        if isinstance(table, Mapping):
            missing = [pat for pat in range(1 << k) if pat not in table]
            if missing or len(table) != 1 << k:
                raise ValueError(f"general table must map exactly the patterns 0..{(1 << k) - 1}")
            values = tuple(float(table[pat]) for pat in range(1 << k))
        else:
            values = tuple(float(x) for x in table)
        return cls("general", k, values)

    @property
    def window_length(self) -> int:
        return max(self.history_length, 1)


def _check_prob(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


def pattern_index(edge_history: Sequence[bool] | int, k: int) -> int:
    if isinstance(edge_history, (int, np.integer)) and not isinstance(edge_history, bool):
        if not 0 <= edge_history < 1 << k:
            raise ValueError(f"pattern {edge_history} does not fit in {k} bits")
        return int(edge_history)
    if len(edge_history) != k:
        raise ValueError(f"pattern has length {len(edge_history)}, rule expects {k}")
    return sum(1 << i for i, bit in enumerate(edge_history) if bit)


def alive_probability(rule: EvolutionRule, edge_history: Sequence[bool] | int) -> float:
    """Probability the edge is alive next step, given its last ``k`` states (most recent first)."""
    return rule.table[pattern_index(edge_history, rule.history_length)]


def initial_window(g: StaticGraph, rule: EvolutionRule, instance: GraphInstance | None = None):
    """Window filled with ``instance`` (default: no alive edges)."""
    inst = GraphInstance.all_dead(g.m) if instance is None else instance
    if inst.m != g.m:
        raise ValueError(f"instance has m={inst.m}, graph has m={g.m}")
    return (inst,) * rule.window_length


def check_window(g: StaticGraph, rule: EvolutionRule, window) -> None:
    if len(window) != rule.window_length:
        raise ValueError(f"window holds {len(window)} instances, rule needs {rule.window_length}")
    for inst in window:
        if inst.m != g.m:
            raise ValueError(f"window instance has m={inst.m}, graph has m={g.m}")


def alive_probabilities(rule: EvolutionRule, history: Sequence[np.ndarray], m: int) -> np.ndarray:
    """Vector of per-edge alive probabilities given boolean history arrays (most recent first)."""
    k = rule.history_length
    if k == 0:
        return np.full(m, rule.table[0])
    if rule.kind == "birth_death":
        return np.where(history[0], rule.table[1], rule.table[0])
    idx = np.zeros(m, dtype=np.int64)
    for i in range(k):
        idx |= history[i].astype(np.int64) << i
    return np.asarray(rule.table)[idx]


def evolve_arrays(rule: EvolutionRule, history: Sequence[np.ndarray], m: int, rng: np.random.Generator) -> np.ndarray:
    # one uniform per edge, canonical edge order
    return rng.random(m) < alive_probabilities(rule, history, m)


def evolve_instance(g: StaticGraph, rule: EvolutionRule, window, rng: np.random.Generator) -> GraphInstance:
    """Sample the next instance: each edge independently, from its own history bits."""
    check_window(g, rule, window)
    history = [inst.to_array() for inst in window[: rule.history_length]]
    return GraphInstance.from_array(evolve_arrays(rule, history, g.m, rng))


def shift_window(window, new: GraphInstance):
    return (new,) + tuple(window[:-1])
