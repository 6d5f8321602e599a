"""Random walks and cover times on edge-uniform stochastically evolving graphs."""

from .bounds import (
    BoundReport,
    ElectricalNetwork,
    commute_time,
    effective_resistance,
    electric_hitting_time,
    first_step_hitting_time,
    rwa_k0_bounds,
    rwd_k0_bounds,
    rwd_k1_bounds,
)
from .evolution import EvolutionRule, GraphInstance, alive_probability, evolve_instance, initial_window
from .exact import (
    Chain,
    ChainState,
    collapsed_rwa_chain_k0,
    enumerate_chain,
    exact_cover_time,
    hitting_times,
    instance_transition_prob,
    static_cover_time,
)
from .graph import (
    DegreeStats,
    StaticGraph,
    build_graph,
    degree_stats,
    gen_clique,
    gen_lollipop,
    gen_path,
    gen_random_threshold,
)
from .montecarlo import CoverTimeEstimate, ExperimentConfig, estimate_cover_time, estimate_static_cover_time
from .walks import Strategy, WalkerState, run_cover_walk, rwa_step_distribution, step_rwa, step_rwd

__version__ = "0.1.0"
