"""Synchronous value iteration and greedy policy extraction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mdp import Action, DecisionProcess

DEFAULT_EPSILON = 1e-11
DEFAULT_K_MAX = 100_000


@dataclass(frozen=True)
class ValueIterationResult:
    """Q-values and state values from (possibly capped) value iteration.

    `converged` is False when the iteration cap was hit before successive
    sweeps came within `epsilon`; the final iterate is still returned and the
    caller decides whether to accept it.
    """

    process: DecisionProcess
    q: np.ndarray
    v: np.ndarray
    converged: bool
    iterations: int
    final_delta: float
    deltas: np.ndarray

    @property
    def actions(self) -> tuple[Action, ...]:
        return self.process.actions


@dataclass(frozen=True)
class Policy:
    """Greedy state-to-action map; entries for absorbing states are unused."""

    process: DecisionProcess
    action_index: np.ndarray

    def action_at(self, state_index: int) -> Action:
        if self.process.absorbing[state_index]:
            raise ValueError("absorbing states have no action")
        return self.process.actions[self.action_index[state_index]]

    def as_dict(self) -> dict:
        return {
            state: self.process.actions[self.action_index[i]]
            for i, state in enumerate(self.process.states)
            if not self.process.absorbing[i]
        }


def value_iteration(
    process: DecisionProcess,
    epsilon: float = DEFAULT_EPSILON,
    k_max: int = DEFAULT_K_MAX,
    gamma: float | None = None,
) -> ValueIterationResult:
    """Jacobi-style sweeps from V = 0 until the sup-norm change of successive
    iterates is at most `epsilon`, or `k_max` sweeps have run.

    Synchronous updates make the iterate sequence independent of state
    ordering, so iteration counts are reproducible. Absorbing states keep
    value zero through their all-zero transition rows.
    """
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    g = process.gamma if gamma is None else gamma
    n_states, n_actions, _ = process.T.shape
    r_sa = process.expected_rewards()
    t_flat = process.T.reshape(n_states * n_actions, n_states)

    v = np.zeros(n_states)
    deltas = []
    converged = False
    iterations = 0
    for iterations in range(1, int(k_max) + 1):
        q = r_sa + g * (t_flat @ v).reshape(n_states, n_actions)
        v_next = q.max(axis=1)
        v_next[process.absorbing] = 0.0
        delta = float(np.max(np.abs(v_next - v)))
        deltas.append(delta)
        v = v_next
        if delta <= epsilon:
            converged = True
            break
    q = r_sa + g * (t_flat @ v).reshape(n_states, n_actions)
    q[process.absorbing, :] = 0.0
    return ValueIterationResult(
        process=process,
        q=q,
        v=v,
        converged=converged,
        iterations=iterations,
        final_delta=deltas[-1],
        deltas=np.asarray(deltas),
    )


def greedy_policy(result: ValueIterationResult) -> Policy:
    """Argmax over actions; exact ties resolve to the earliest action in the
    canonical (cheapest-first) ordering of the process."""
    q = result.q
    n_states, n_actions = q.shape
    choice = np.zeros(n_states, dtype=np.int8)
    for i in range(n_states):
        best = 0
        for a in range(1, n_actions):
            if q[i, a] > q[i, best]:
                best = a
        choice[i] = best
    return Policy(process=result.process, action_index=choice)


def fixed_policy(process: DecisionProcess, action: Action) -> Policy:
    """Policy that plays the same action in every non-absorbing state."""
    ai = process.actions.index(action)
    return Policy(
        process=process,
        action_index=np.full(process.n_states, ai, dtype=np.int8),
    )


def restrict_to_policy(process: DecisionProcess, policy: Policy) -> DecisionProcess:
    """Process with every action column replaced by the frozen policy's one,
    so that value iteration on it performs plain policy evaluation."""
    idx = np.arange(process.n_states)
    t_pi = process.T[idx, policy.action_index, :]
    r_pi = process.R[idx, policy.action_index, :]
    n_actions = len(process.actions)
    T = np.repeat(t_pi[:, None, :], n_actions, axis=1)
    R = np.repeat(r_pi[:, None, :], n_actions, axis=1)
    return DecisionProcess(
        kind=f"{process.kind}-frozen",
        states=process.states,
        actions=process.actions,
        T=T,
        R=R,
        gamma=process.gamma,
        absorbing=process.absorbing,
        n_max=process.n_max,
        params1=process.params1,
        params2=process.params2,
        cost=process.cost,
    )
