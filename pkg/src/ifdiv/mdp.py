"""Decision-process construction for a dual-interface transmitter.

Three finite processes share one representation:

* the fully observable process on (s1, s2, n), where s_i is the true state of
  interface i over the last slot and n counts consecutive missed deadlines;
* a "hidden" reduction where an interface that did not transmit collapses to
  an Unknown label resolved through its stationary distribution;
* a "forgetful" reduction that keeps exactly one slot of propagated knowledge
  (StaleFrom*) before falling back to the stationary distribution.

States with n = n_max are absorbing: the link is declared dead, no action is
taken and their value is fixed at zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .channel import (
    BAD_CODE,
    GOOD_CODE,
    GEParams,
    InterfaceState,
    steady_state,
    transition_prob,
)


class Outcome(IntEnum):
    SUCCESS = 0
    MISS = 1


@dataclass(frozen=True)
class Action:
    """Per-interface transmit bits; turning both interfaces off is not allowed."""

    a1: int
    a2: int

    def __post_init__(self) -> None:
        if self.a1 not in (0, 1) or self.a2 not in (0, 1):
            raise ValueError("action bits must be 0 or 1")
        if self.a1 == 0 and self.a2 == 0:
            raise ValueError("at least one interface must transmit")

    @property
    def bits(self) -> tuple[int, int]:
        return (self.a1, self.a2)


#: Fixed fallback order used to break cost ties deterministically.
ACTIONS = (Action(0, 1), Action(1, 0), Action(1, 1))


@dataclass(frozen=True)
class CostModel:
    """Reward/cost bookkeeping: r(n) in {success_reward, miss_reward} minus
    per-interface transmission costs scaled by eta."""

    eta: float
    e1: float
    e2: float
    success_reward: float = 1.0
    miss_reward: float = -1.0

    def __post_init__(self) -> None:
        if self.eta < 0.0:
            raise ValueError("eta must be non-negative")


def interface_costs(cm: CostModel) -> tuple[float, float]:
    """Per-slot costs (c1, c2) = eta * E_i / (E1 + E2)."""
    total = cm.e1 + cm.e2
    if total <= 0.0:
        raise ValueError("total transmit power must be positive")
    return cm.eta * cm.e1 / total, cm.eta * cm.e2 / total


def action_cost(cm: CostModel, action: Action) -> float:
    c1, c2 = interface_costs(cm)
    return action.a1 * c1 + action.a2 * c2


def canonical_actions(cm: CostModel) -> tuple[Action, ...]:
    """All actions ordered by ascending cost; cost ties fall back to the
    fixed order (0,1), (1,0), (1,1). Argmax tie-breaks use this order."""
    ranked = sorted(
        ACTIONS, key=lambda a: (action_cost(cm, a), ACTIONS.index(a))
    )
    return tuple(ranked)


@dataclass(frozen=True)
class SystemState:
    s1: InterfaceState
    s2: InterfaceState
    n: int


@dataclass(frozen=True)
class BenchmarkState:
    """Joint knowledge state of the reduced processes: per-interface labels
    (integer codes of HmdpKnowledge or FpomdpKnowledge) plus the counter."""

    e1: int
    e2: int
    n: int


class HmdpKnowledge(IntEnum):
    KNOWN_GOOD = 0
    KNOWN_BAD = 1
    UNKNOWN = 2


class FpomdpKnowledge(IntEnum):
    KNOWN_GOOD = 0
    KNOWN_BAD = 1
    STALE_FROM_GOOD = 2
    STALE_FROM_BAD = 3
    STEADY = 4


def transmission_outcome(
    next_states: tuple[InterfaceState, InterfaceState], action: Action
) -> Outcome:
    """Success iff some transmitting interface lands in Good."""
    s1, s2 = next_states
    if (action.a1 and s1 == InterfaceState.GOOD) or (
        action.a2 and s2 == InterfaceState.GOOD
    ):
        return Outcome.SUCCESS
    return Outcome.MISS


def next_counter(n: int, outcome: Outcome, n_max: int) -> int:
    """Counter update: reset on success, increment on miss, cap at n_max."""
    if n >= n_max:
        raise ValueError(f"state with n={n} is absorbing, no transition allowed")
    if outcome == Outcome.SUCCESS:
        return 0
    return min(n + 1, n_max)


def transition(
    s: SystemState,
    action: Action,
    s_next: SystemState,
    params1: GEParams,
    params2: GEParams,
    n_max: int,
) -> float:
    """Joint transition probability; interfaces evolve independently of the
    action, the counter must be consistent with the transmission outcome."""
    outcome = transmission_outcome((s_next.s1, s_next.s2), action)
    if s_next.n != next_counter(s.n, outcome, n_max):
        return 0.0
    return transition_prob(params1, s.s1, s_next.s1) * transition_prob(
        params2, s.s2, s_next.s2
    )


def reward(s: SystemState, action: Action, s_next: SystemState, cm: CostModel) -> float:
    base = cm.success_reward if s_next.n == 0 else cm.miss_reward
    return base - action_cost(cm, action)


@dataclass(frozen=True)
class DecisionProcess:
    """A finite MDP ready for value iteration and chain analysis.

    T and R are dense (state, action, next_state) arrays; absorbing states
    have all-zero transition rows. `actions` is in canonical (cost-ascending)
    order and fixes the action indexing of every downstream table.
    """

    kind: str
    states: tuple
    actions: tuple[Action, ...]
    T: np.ndarray
    R: np.ndarray
    gamma: float
    absorbing: np.ndarray
    n_max: int
    params1: GEParams
    params2: GEParams
    cost: CostModel
    _index: dict = field(repr=False, default_factory=dict)

    def __post_init__(self) -> None:
        self._index.update({state: i for i, state in enumerate(self.states)})

    @property
    def n_states(self) -> int:
        return len(self.states)

    def index(self, state) -> int:
        return self._index[state]

    def expected_rewards(self) -> np.ndarray:
        """Per (state, action) expected one-step reward, zero when absorbing."""
        return np.einsum("sat,sat->sa", self.T, self.R)


def full_state_index(s1_code: int, s2_code: int, n: int) -> int:
    return 4 * n + 2 * s1_code + s2_code


def hmdp_state_index(e1: int, e2: int, n: int) -> int:
    return 9 * n + 3 * e1 + e2


def fpomdp_state_index(e1: int, e2: int, n: int) -> int:
    return 25 * n + 5 * e1 + e2


def _validate_build(n_max: int, gamma: float) -> None:
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    if not (0.0 < gamma < 1.0):
        raise ValueError("gamma must lie in (0, 1)")


def build_full_mdp(
    params1: GEParams,
    params2: GEParams,
    cm: CostModel,
    n_max: int,
    gamma: float,
) -> DecisionProcess:
    """Fully observable process over (s1, s2, n): 4 * (n_max + 1) states."""
    _validate_build(n_max, gamma)
    actions = canonical_actions(cm)
    states = tuple(
        SystemState(InterfaceState(c1), InterfaceState(c2), n)
        for n in range(n_max + 1)
        for c1 in (GOOD_CODE, BAD_CODE)
        for c2 in (GOOD_CODE, BAD_CODE)
    )
    n_states = len(states)
    T = np.zeros((n_states, 3, n_states))
    R = np.zeros((n_states, 3, n_states))
    absorbing = np.array([s.n == n_max for s in states])

    for i, s in enumerate(states):
        if s.n == n_max:
            continue
        for ai, action in enumerate(actions):
            for c1 in (GOOD_CODE, BAD_CODE):
                for c2 in (GOOD_CODE, BAD_CODE):
                    nxt_pair = (InterfaceState(c1), InterfaceState(c2))
                    outcome = transmission_outcome(nxt_pair, action)
                    n_next = next_counter(s.n, outcome, n_max)
                    j = full_state_index(c1, c2, n_next)
                    s_next = states[j]
                    T[i, ai, j] += transition(s, action, s_next, params1, params2, n_max)
                    R[i, ai, j] = reward(s, action, s_next, cm)
    return DecisionProcess(
        kind="full",
        states=states,
        actions=actions,
        T=T,
        R=R,
        gamma=gamma,
        absorbing=absorbing,
        n_max=n_max,
        params1=params1,
        params2=params2,
        cost=cm,
    )


def _hmdp_landing_probs(e: int, params: GEParams) -> tuple[float, float]:
    """Distribution of the observed landing state of a transmitting interface
    whose current knowledge label is `e` (hidden reduction)."""
    if e == HmdpKnowledge.KNOWN_GOOD:
        return 1.0 - params.p, params.p
    if e == HmdpKnowledge.KNOWN_BAD:
        return params.r, 1.0 - params.r
    return steady_state(params)


def implied_good_probability(e: int, params: GEParams) -> float:
    """Probability that the true last-slot state is Good given a forgetful
    knowledge label: Known is exact, StaleFrom* is one kernel step from the
    last observation, Steady is the stationary distribution."""
    if e == FpomdpKnowledge.KNOWN_GOOD:
        return 1.0
    if e == FpomdpKnowledge.KNOWN_BAD:
        return 0.0
    if e == FpomdpKnowledge.STALE_FROM_GOOD:
        return 1.0 - params.p
    if e == FpomdpKnowledge.STALE_FROM_BAD:
        return params.r
    return steady_state(params)[0]


def _fpomdp_landing_probs(e: int, params: GEParams) -> tuple[float, float]:
    """Transmitting from forgetful knowledge `e`: sample the true state from
    the implied distribution, then advance it one slot and observe."""
    good = implied_good_probability(e, params)
    land_good = good * (1.0 - params.p) + (1.0 - good) * params.r
    return land_good, 1.0 - land_good


def _fpomdp_off_advance(e: int) -> int:
    if e == FpomdpKnowledge.KNOWN_GOOD:
        return int(FpomdpKnowledge.STALE_FROM_GOOD)
    if e == FpomdpKnowledge.KNOWN_BAD:
        return int(FpomdpKnowledge.STALE_FROM_BAD)
    return int(FpomdpKnowledge.STEADY)


def _build_benchmark(
    kind: str,
    params1: GEParams,
    params2: GEParams,
    cm: CostModel,
    n_max: int,
    gamma: float,
) -> DecisionProcess:
    if kind == "hmdp":
        labels = tuple(int(e) for e in HmdpKnowledge)
        landing = _hmdp_landing_probs
        off_advance = lambda e: int(HmdpKnowledge.UNKNOWN)  # noqa: E731
        index = hmdp_state_index
    else:
        labels = tuple(int(e) for e in FpomdpKnowledge)
        landing = _fpomdp_landing_probs
        off_advance = _fpomdp_off_advance
        index = fpomdp_state_index
    # Both reductions need stationary distributions; fail fast if degenerate.
    steady_state(params1)
    steady_state(params2)

    actions = canonical_actions(cm)
    width = len(labels)
    states = tuple(
        BenchmarkState(e1, e2, n)
        for n in range(n_max + 1)
        for e1 in labels
        for e2 in labels
    )
    n_states = len(states)
    T = np.zeros((n_states, 3, n_states))
    R = np.zeros((n_states, 3, n_states))
    absorbing = np.array([s.n == n_max for s in states])
    params = (params1, params2)

    for i, s in enumerate(states):
        if s.n == n_max:
            continue
        for ai, action in enumerate(actions):
            bits = action.bits
            labels_now = (s.e1, s.e2)
            # Per-interface next-label distribution.
            dists = []
            for k in range(2):
                if bits[k]:
                    good, bad = landing(labels_now[k], params[k])
                    dists.append(((0, good), (1, bad)))
                else:
                    dists.append(((off_advance(labels_now[k]), 1.0),))
            for e1_next, p1 in dists[0]:
                for e2_next, p2 in dists[1]:
                    prob = p1 * p2
                    if prob == 0.0:
                        continue
                    success = (bits[0] and e1_next == 0) or (bits[1] and e2_next == 0)
                    n_next = 0 if success else min(s.n + 1, n_max)
                    j = index(e1_next, e2_next, n_next)
                    T[i, ai, j] += prob
                    base = cm.success_reward if n_next == 0 else cm.miss_reward
                    R[i, ai, j] = base - action_cost(cm, action)
    assert width ** 2 * (n_max + 1) == n_states
    return DecisionProcess(
        kind=kind,
        states=states,
        actions=actions,
        T=T,
        R=R,
        gamma=gamma,
        absorbing=absorbing,
        n_max=n_max,
        params1=params1,
        params2=params2,
        cost=cm,
    )


def build_hmdp(
    params1: GEParams,
    params2: GEParams,
    cm: CostModel,
    n_max: int,
    gamma: float,
) -> DecisionProcess:
    """Hidden reduction: an interface that stays off is Unknown and, once it
    transmits again, resolves through its stationary distribution."""
    _validate_build(n_max, gamma)
    return _build_benchmark("hmdp", params1, params2, cm, n_max, gamma)


def build_fpomdp(
    params1: GEParams,
    params2: GEParams,
    cm: CostModel,
    n_max: int,
    gamma: float,
) -> DecisionProcess:
    """Forgetful reduction: one slot of propagated knowledge (StaleFrom*),
    then the stationary distribution (Steady) until the interface transmits."""
    _validate_build(n_max, gamma)
    return _build_benchmark("fpomdp", params1, params2, cm, n_max, gamma)
