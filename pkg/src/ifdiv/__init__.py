"""Policy synthesis and evaluation for dual-interface transmitters over
bursty (Gilbert-Elliott) channels: exact chain analysis, value iteration on
full and reduced observability models, belief-averaged runtime control, and
a seeded Monte-Carlo episode engine."""

from .channel import DegenerateChainError, GEParams, InterfaceState, steady_state
from .config import ExperimentConfig
from .mdp import (
    Action,
    CostModel,
    SystemState,
    build_fpomdp,
    build_full_mdp,
    build_hmdp,
    interface_costs,
)
from .solver import greedy_policy, value_iteration

__all__ = [
    "Action",
    "CostModel",
    "DegenerateChainError",
    "ExperimentConfig",
    "GEParams",
    "InterfaceState",
    "SystemState",
    "build_fpomdp",
    "build_full_mdp",
    "build_hmdp",
    "greedy_policy",
    "interface_costs",
    "steady_state",
    "value_iteration",
]
