"""Exact analysis of a frozen policy as an absorbing Markov chain.

Expected visit counts over the non-absorbing states solve the fundamental
matrix system; lifetime, per-counter occupancy, expected undiscounted total
reward and per-interface utilization all derive from them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import GEParams, InterfaceState, steady_state
from .mdp import BenchmarkState, DecisionProcess, SystemState
from .solver import Policy

RESIDUAL_TOL = 1e-9


class NonAbsorbingPolicyError(RuntimeError):
    """The frozen policy cannot reach absorption from the initial states, so
    the expected lifetime is infinite."""


@dataclass(frozen=True)
class ChainAnalysis:
    expected_lifetime: float
    expected_total_reward: float
    occupancy: np.ndarray
    utilization: tuple[float, float]
    residual: float


def initial_distribution(
    params1: GEParams, params2: GEParams
) -> list[tuple[SystemState, float]]:
    """Start-of-episode distribution: both interfaces transmit once during
    initialization, so the joint stationary weights land on the three n = 0
    states with at least one Good interface and on (Bad, Bad, 1)."""
    g1, b1 = steady_state(params1)
    g2, b2 = steady_state(params2)
    G, B = InterfaceState.GOOD, InterfaceState.BAD
    return [
        (SystemState(G, G, 0), g1 * g2),
        (SystemState(G, B, 0), g1 * b2),
        (SystemState(B, G, 0), b1 * g2),
        (SystemState(B, B, 1), b1 * b2),
    ]


def initial_state_vector(process: DecisionProcess) -> np.ndarray:
    """Initial distribution mapped onto a process's state indexing.

    For the reduced processes the initial observation is full, so the weights
    land on the corresponding Known/Known states (label codes of Known Good
    and Known Bad equal the true-state codes in every construction).
    """
    init = initial_distribution(process.params1, process.params2)
    vec = np.zeros(process.n_states)
    full_states = isinstance(process.states[0], SystemState)
    for state, weight in init:
        if full_states:
            vec[process.index(state)] = weight
        else:
            mapped = BenchmarkState(int(state.s1), int(state.s2), state.n)
            vec[process.index(mapped)] = weight
    return vec


def _policy_edges(process: DecisionProcess, policy: Policy) -> np.ndarray:
    idx = np.arange(process.n_states)
    return process.T[idx, policy.action_index, :]


def _forward_reachable(t_pi: np.ndarray, support: np.ndarray) -> np.ndarray:
    reached = support.copy()
    frontier = list(np.flatnonzero(support))
    while frontier:
        i = frontier.pop()
        for j in np.flatnonzero(t_pi[i] > 0.0):
            if not reached[j]:
                reached[j] = True
                frontier.append(j)
    return reached


def analyze(
    process: DecisionProcess, policy: Policy, init: np.ndarray
) -> ChainAnalysis:
    """Solve the policy-induced absorbing chain started from `init`.

    Raises NonAbsorbingPolicyError when some state reachable from the initial
    support cannot reach absorption, which is reported instead of handing a
    singular system to the linear solver.
    """
    if init.shape != (process.n_states,):
        raise ValueError("init vector shape does not match the process")
    if abs(float(init.sum()) - 1.0) > 1e-9:
        raise ValueError("initial distribution must sum to 1")
    t_pi = _policy_edges(process, policy)
    absorbing = process.absorbing

    # Mass starting on absorbing states contributes zero visits (an episode
    # may begin already failed when n_max = 1).
    support = (init > 0.0) & ~absorbing
    reached = _forward_reachable(t_pi, support)
    live = np.flatnonzero(reached & ~absorbing)

    # Backward sweep from absorbing states over the reachable live set.
    can_absorb = np.zeros(process.n_states, dtype=bool)
    can_absorb[absorbing] = True
    changed = True
    while changed:
        changed = False
        for i in live:
            if not can_absorb[i] and np.any((t_pi[i] > 0.0) & can_absorb):
                can_absorb[i] = True
                changed = True
    if not np.all(can_absorb[live]):
        raise NonAbsorbingPolicyError(
            "absorption is unreachable from the initial states under this policy"
        )

    q_sub = t_pi[np.ix_(live, live)]
    mu = init[live]
    system = np.eye(live.size) - q_sub.T
    visits = np.linalg.solve(system, mu)
    residual = float(np.max(np.abs(system @ visits - mu))) if live.size else 0.0

    lifetime = float(visits.sum())
    r_sa = process.expected_rewards()
    step_reward = r_sa[live, policy.action_index[live]]
    total_reward = float(visits @ step_reward)

    occupancy = np.zeros(process.n_max)
    on_time = np.zeros(2)
    for k, i in enumerate(live):
        state = process.states[i]
        occupancy[state.n] += visits[k]
        action = process.actions[policy.action_index[i]]
        on_time[0] += visits[k] * action.a1
        on_time[1] += visits[k] * action.a2
    if lifetime > 0.0:
        occupancy /= lifetime
        utilization = (float(on_time[0] / lifetime), float(on_time[1] / lifetime))
    else:
        utilization = (0.0, 0.0)
    return ChainAnalysis(
        expected_lifetime=lifetime,
        expected_total_reward=total_reward,
        occupancy=occupancy,
        utilization=utilization,
        residual=residual,
    )


def analyze_full_fixed(
    process: DecisionProcess, policy: Policy
) -> ChainAnalysis:
    """Convenience wrapper: analyze a policy from the standard initial mix."""
    return analyze(process, policy, initial_state_vector(process))


def wifi_only_lifetime_oracle(
    params1: GEParams, params2: GEParams, n_max: int
) -> float:
    """Closed-form expected lifetime when only interface 2 ever transmits.

    Independent of the fundamental-matrix path: the run-length recursion
    h(B, k) = 1 + r*h(G, 0) + (1 - r)*h(B, k+1) telescopes to a scalar
    expression in h(G, 0), which the initial mix then averages.
    """
    p, r = params2.p, params2.r
    if p == 0.0 or r == 0.0:
        raise ValueError("oracle requires 0 < p and 0 < r for interface 2")
    q = 1.0 - r
    if q == 0.0 and n_max >= 2:
        raise NonAbsorbingPolicyError("r = 1 makes two consecutive misses impossible")

    def run_sum(k: int) -> float:
        # sum_{j=0}^{n_max-1-k} q^j = (1 - q^(n_max-k)) / (1 - q), via r = 1 - q
        return (1.0 - q ** (n_max - k)) / r

    beta = run_sum(1)
    denom = 1.0 - r * beta
    if denom <= 0.0:
        raise NonAbsorbingPolicyError("absorption unreachable in the oracle chain")
    g = (1.0 / p + beta) / denom
    a0 = (1.0 + r * g) * run_sum(0)
    a1 = (1.0 + r * g) * run_sum(1)

    g1, b1 = steady_state(params1)
    g2, b2 = steady_state(params2)
    return g2 * g + g1 * b2 * a0 + b1 * b2 * a1


__all__ = [
    "ChainAnalysis",
    "NonAbsorbingPolicyError",
    "analyze",
    "analyze_full_fixed",
    "initial_distribution",
    "initial_state_vector",
    "wifi_only_lifetime_oracle",
]
