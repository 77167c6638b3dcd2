"""Runtime decision agents sharing one interface: observation in, action out.

An observation carries the landing state of every interface that transmitted
in the last slot (or of all interfaces when the side channel is on), plus the
exact miss counter. Agents keep whatever internal summary their decision rule
needs: the exact state, a per-interface Good-probability belief, or a
discrete knowledge label.
"""

from __future__ import annotations

from dataclasses import dataclass

from .channel import GEParams, InterfaceState
from .mdp import (
    Action,
    FpomdpKnowledge,
    HmdpKnowledge,
    full_state_index,
    fpomdp_state_index,
    hmdp_state_index,
)
from .solver import Policy, ValueIterationResult


@dataclass(frozen=True)
class Observation:
    """o1/o2 are None for interfaces that were off with no side channel."""

    o1: InterfaceState | None
    o2: InterfaceState | None
    n: int


@dataclass(frozen=True)
class Belief:
    """Per-interface probability of Good in the last slot, plus the exact
    miss counter. After a real observation the probability is 0 or 1."""

    b1: float
    b2: float
    n: int


def _propagate_good(b: float, params: GEParams) -> float:
    return (1.0 - params.p) * b + params.r * (1.0 - b)


def update_belief(
    belief: Belief, obs: Observation, params1: GEParams, params2: GEParams
) -> Belief:
    """Observed interfaces collapse to certainty; unobserved ones advance one
    slot through the transition kernel. The counter is copied verbatim."""
    if obs.o1 is not None:
        b1 = 1.0 if obs.o1 == InterfaceState.GOOD else 0.0
    else:
        b1 = _propagate_good(belief.b1, params1)
    if obs.o2 is not None:
        b2 = 1.0 if obs.o2 == InterfaceState.GOOD else 0.0
    else:
        b2 = _propagate_good(belief.b2, params2)
    return Belief(b1=b1, b2=b2, n=obs.n)


def joint_belief(belief: Belief) -> list[tuple[int, int, float]]:
    """Weights over the four (s1, s2) combinations at the belief's counter,
    as (s1_code, s2_code, weight) with Good = 0, Bad = 1."""
    b1, b2 = belief.b1, belief.b2
    return [
        (0, 0, b1 * b2),
        (0, 1, b1 * (1.0 - b2)),
        (1, 0, (1.0 - b1) * b2),
        (1, 1, (1.0 - b1) * (1.0 - b2)),
    ]


def qmdp_action(belief: Belief, result: ValueIterationResult) -> Action:
    """Greedy action on belief-averaged Q-values of the fully observable
    process; ties resolve to the earliest (cheapest) action."""
    process = result.process
    if belief.n >= process.n_max:
        raise ValueError("belief counter is at the absorbing value")
    scores = [0.0, 0.0, 0.0]
    for c1, c2, weight in joint_belief(belief):
        idx = full_state_index(c1, c2, belief.n)
        for a in range(3):
            scores[a] += weight * result.q[idx, a]
    best = 0
    for a in range(1, 3):
        if scores[a] > scores[best]:
            best = a
    return process.actions[best]


class AgentProtocolError(RuntimeError):
    """An agent received an observation its contract forbids."""


class FixedAgent:
    """Plays one action regardless of observations."""

    kind = "fixed"

    def __init__(self, action: Action):
        self.action = action

    def step(self, obs: Observation) -> Action:
        return self.action


class FullStateAgent:
    """Policy lookup on the true state; requires side-channel observability."""

    kind = "fullmdp"

    def __init__(self, policy: Policy):
        self.policy = policy

    def step(self, obs: Observation) -> Action:
        if obs.o1 is None or obs.o2 is None:
            raise AgentProtocolError(
                "full-state agent needs both interfaces observed"
            )
        idx = full_state_index(int(obs.o1), int(obs.o2), obs.n)
        return self.policy.action_at(idx)


class QmdpAgent:
    """Tracks the belief recursively and plays the belief-averaged greedy
    action. The rule never values information gain: it optimizes as if the
    state becomes fully observable after the next transmission."""

    kind = "qmdp"

    def __init__(
        self,
        result: ValueIterationResult,
        params1: GEParams,
        params2: GEParams,
        initial: Belief | None = None,
    ):
        self.result = result
        self.params1 = params1
        self.params2 = params2
        self.belief = initial

    def step(self, obs: Observation) -> Action:
        if self.belief is None:
            if obs.o1 is None or obs.o2 is None:
                raise AgentProtocolError("first observation must be complete")
            self.belief = Belief(
                b1=1.0 if obs.o1 == InterfaceState.GOOD else 0.0,
                b2=1.0 if obs.o2 == InterfaceState.GOOD else 0.0,
                n=obs.n,
            )
        else:
            self.belief = update_belief(self.belief, obs, self.params1, self.params2)
        return qmdp_action(self.belief, self.result)


class KnowledgeAgent:
    """Policy lookup on a discrete knowledge label per interface; covers both
    the hidden and the forgetful reductions."""

    def __init__(self, kind: str, policy: Policy):
        if kind not in ("hmdp", "fpomdp"):
            raise ValueError(f"unsupported knowledge agent kind: {kind}")
        self.kind = kind
        self.policy = policy
        self.e1: int | None = None
        self.e2: int | None = None

    def _advance(self, e: int) -> int:
        if self.kind == "hmdp":
            return int(HmdpKnowledge.UNKNOWN)
        if e == FpomdpKnowledge.KNOWN_GOOD:
            return int(FpomdpKnowledge.STALE_FROM_GOOD)
        if e == FpomdpKnowledge.KNOWN_BAD:
            return int(FpomdpKnowledge.STALE_FROM_BAD)
        return int(FpomdpKnowledge.STEADY)

    def step(self, obs: Observation) -> Action:
        if self.e1 is None:
            if obs.o1 is None or obs.o2 is None:
                raise AgentProtocolError("first observation must be complete")
        self.e1 = int(obs.o1) if obs.o1 is not None else self._advance(self.e1)
        self.e2 = int(obs.o2) if obs.o2 is not None else self._advance(self.e2)
        index = hmdp_state_index if self.kind == "hmdp" else fpomdp_state_index
        return self.policy.action_at(index(self.e1, self.e2, obs.n))


def agent_decide(agent, obs: Observation) -> Action:
    """Functional form of the shared agent interface."""
    return agent.step(obs)


__all__ = [
    "AgentProtocolError",
    "Belief",
    "FixedAgent",
    "FullStateAgent",
    "KnowledgeAgent",
    "Observation",
    "QmdpAgent",
    "agent_decide",
    "joint_belief",
    "qmdp_action",
    "update_belief",
]
