"""Seeded Monte-Carlo episode engine.

True channels evolve independently of the chosen actions; the agent observes
per the observability rule and acts until the miss counter reaches its cap.
Episode i of a batch uses seed `episode_seed(base_seed, i)`; given an
environment, an agent specification and a seed, results are bit-identical
across runs and across batch execution orders.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._rng import episode_seed, uniform_at
from .agents import (
    FixedAgent,
    FullStateAgent,
    KnowledgeAgent,
    Observation,
    QmdpAgent,
)
from .channel import GEParams, InterfaceState, step, steady_state
from .mdp import Action, CostModel, canonical_actions, interface_costs
from .solver import Policy, ValueIterationResult, greedy_policy

_KIND_CODES = {"fixed": 0, "fullmdp": 1, "hmdp": 2, "fpomdp": 3, "qmdp": 4}


@dataclass(frozen=True)
class EnvConfig:
    """True environment: per-interface channels, counter cap, reward model."""

    params1: GEParams
    params2: GEParams
    n_max: int
    cost: CostModel


@dataclass(frozen=True)
class AgentSpec:
    """Everything the episode kernel needs to drive one agent kind."""

    kind: str
    alpha: int
    act_bits: np.ndarray
    fixed_action_index: int = 0
    policy_table: np.ndarray = field(
        default_factory=lambda: np.zeros(1, dtype=np.int8)
    )
    q_table: np.ndarray = field(default_factory=lambda: np.zeros((4, 3)))
    model_params: np.ndarray = field(default_factory=lambda: np.zeros(4))
    actions: tuple[Action, ...] = ()

    @property
    def kind_code(self) -> int:
        return _KIND_CODES[self.kind]


def _act_bits(actions: tuple[Action, ...]) -> np.ndarray:
    return np.array([a.bits for a in actions], dtype=np.int8)


def fixed_agent_spec(action: Action, env: EnvConfig) -> AgentSpec:
    actions = canonical_actions(env.cost)
    return AgentSpec(
        kind="fixed",
        alpha=0,
        act_bits=_act_bits(actions),
        fixed_action_index=actions.index(action),
        actions=actions,
    )


def full_agent_spec(result: ValueIterationResult) -> AgentSpec:
    """Fully observable agent; always simulated with the side channel on."""
    policy = greedy_policy(result)
    return AgentSpec(
        kind="fullmdp",
        alpha=1,
        act_bits=_act_bits(result.process.actions),
        policy_table=policy.action_index,
        actions=result.process.actions,
    )


def knowledge_agent_spec(result: ValueIterationResult) -> AgentSpec:
    """Agent for a solved hidden or forgetful reduction."""
    kind = result.process.kind
    if kind not in ("hmdp", "fpomdp"):
        raise ValueError(f"expected a reduced process, got kind={kind}")
    policy = greedy_policy(result)
    return AgentSpec(
        kind=kind,
        alpha=0,
        act_bits=_act_bits(result.process.actions),
        policy_table=policy.action_index,
        actions=result.process.actions,
    )


def qmdp_agent_spec(
    result: ValueIterationResult,
    model1: GEParams | None = None,
    model2: GEParams | None = None,
    alpha: int = 0,
) -> AgentSpec:
    """Belief-averaging agent on a solved fully observable process. The
    belief propagates with the agent's model parameters, which may differ
    from the true environment in sensitivity runs."""
    if result.process.kind != "full":
        raise ValueError("belief averaging needs the fully observable process")
    m1 = model1 if model1 is not None else result.process.params1
    m2 = model2 if model2 is not None else result.process.params2
    return AgentSpec(
        kind="qmdp",
        alpha=alpha,
        act_bits=_act_bits(result.process.actions),
        q_table=np.ascontiguousarray(result.q),
        model_params=np.array([m1.p, m1.r, m2.p, m2.r]),
        actions=result.process.actions,
    )


@dataclass(frozen=True)
class EpisodeResult:
    lifetime: int
    total_reward: float
    n_counts: np.ndarray
    on_counts: tuple[int, int]
    seed: int


@dataclass(frozen=True)
class BatchSummary:
    episodes: int
    lifetime_mean: float
    lifetime_se: float
    reward_mean: float
    reward_se: float
    occupancy: np.ndarray
    utilization: tuple[float, float]
    lifetimes: np.ndarray
    rewards: np.ndarray
    n_counts: np.ndarray
    on_counts: np.ndarray
    seeds: np.ndarray


@dataclass(frozen=True)
class PairedSummary:
    """Common-random-numbers comparison; deltas are per-episode A minus B."""

    summary_a: BatchSummary
    summary_b: BatchSummary
    delta_lifetime_mean: float
    delta_lifetime_se: float
    delta_reward_mean: float
    delta_reward_se: float
    diverged_at: np.ndarray


def _env_vector(env: EnvConfig) -> np.ndarray:
    c1, c2 = interface_costs(env.cost)
    return np.array(
        [
            env.params1.p,
            env.params1.r,
            env.params2.p,
            env.params2.r,
            c1,
            c2,
            env.cost.success_reward,
            env.cost.miss_reward,
        ]
    )


def _init_cumulative(env: EnvConfig) -> np.ndarray:
    g1, _ = steady_state(env.params1)
    g2, _ = steady_state(env.params2)
    w_gg = g1 * g2
    w_gb = g1 * (1.0 - g2)
    w_bg = (1.0 - g1) * g2
    return np.array([w_gg, w_gg + w_gb, w_gg + w_gb + w_bg])


def _effective_alpha(spec: AgentSpec) -> int:
    return 1 if spec.kind == "fullmdp" else spec.alpha


def _se(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return float(values.std(ddof=1) / np.sqrt(values.size))


def _summarize(
    lifetimes: np.ndarray,
    rewards: np.ndarray,
    n_counts: np.ndarray,
    on_counts: np.ndarray,
    seeds: np.ndarray,
) -> BatchSummary:
    total_slots = float(lifetimes.sum())
    if total_slots > 0.0:
        occupancy = n_counts.sum(axis=0) / total_slots
        utilization = (
            float(on_counts[:, 0].sum() / total_slots),
            float(on_counts[:, 1].sum() / total_slots),
        )
    else:
        # Every episode began in the absorbing layer (possible at n_max = 1).
        occupancy = np.zeros(n_counts.shape[1])
        utilization = (0.0, 0.0)
    return BatchSummary(
        episodes=int(lifetimes.size),
        lifetime_mean=float(lifetimes.mean()),
        lifetime_se=_se(lifetimes.astype(np.float64)),
        reward_mean=float(rewards.mean()),
        reward_se=_se(rewards),
        occupancy=occupancy,
        utilization=utilization,
        lifetimes=lifetimes,
        rewards=rewards,
        n_counts=n_counts,
        on_counts=on_counts,
        seeds=seeds,
    )


def run_batch(
    env: EnvConfig, spec: AgentSpec, episodes: int, base_seed: int
) -> BatchSummary:
    if episodes < 1:
        raise ValueError("episodes must be at least 1")
    seeds = np.array(
        [episode_seed(base_seed, i) for i in range(episodes)], dtype=np.uint64
    )
    lifetimes = np.zeros(episodes, dtype=np.int64)
    rewards = np.zeros(episodes)
    n_counts = np.zeros((episodes, env.n_max), dtype=np.int64)
    on_counts = np.zeros((episodes, 2), dtype=np.int64)
    _kernels.run_batch_kernel(
        spec.kind_code,
        _effective_alpha(spec),
        _env_vector(env),
        _init_cumulative(env),
        env.n_max,
        spec.act_bits,
        spec.fixed_action_index,
        spec.policy_table,
        spec.q_table,
        spec.model_params,
        seeds,
        lifetimes,
        rewards,
        n_counts,
        on_counts,
    )
    return _summarize(lifetimes, rewards, n_counts, on_counts, seeds)


def run_episode(env: EnvConfig, spec: AgentSpec, seed: int) -> EpisodeResult:
    seeds = np.array([seed], dtype=np.uint64)
    lifetimes = np.zeros(1, dtype=np.int64)
    rewards = np.zeros(1)
    n_counts = np.zeros((1, env.n_max), dtype=np.int64)
    on_counts = np.zeros((1, 2), dtype=np.int64)
    _kernels.run_batch_kernel(
        spec.kind_code,
        _effective_alpha(spec),
        _env_vector(env),
        _init_cumulative(env),
        env.n_max,
        spec.act_bits,
        spec.fixed_action_index,
        spec.policy_table,
        spec.q_table,
        spec.model_params,
        seeds,
        lifetimes,
        rewards,
        n_counts,
        on_counts,
    )
    return EpisodeResult(
        lifetime=int(lifetimes[0]),
        total_reward=float(rewards[0]),
        n_counts=n_counts[0],
        on_counts=(int(on_counts[0, 0]), int(on_counts[0, 1])),
        seed=int(seeds[0]),
    )


def run_paired(
    env: EnvConfig,
    spec_a: AgentSpec,
    spec_b: AgentSpec,
    episodes: int,
    base_seed: int,
) -> PairedSummary:
    """Both agents face identical initial states and channel noise streams."""
    if episodes < 1:
        raise ValueError("episodes must be at least 1")
    seeds = np.array(
        [episode_seed(base_seed, i) for i in range(episodes)], dtype=np.uint64
    )
    shape = (episodes, env.n_max)
    la = np.zeros(episodes, dtype=np.int64)
    ra = np.zeros(episodes)
    ca = np.zeros(shape, dtype=np.int64)
    oa = np.zeros((episodes, 2), dtype=np.int64)
    lb = np.zeros(episodes, dtype=np.int64)
    rb = np.zeros(episodes)
    cb = np.zeros(shape, dtype=np.int64)
    ob = np.zeros((episodes, 2), dtype=np.int64)
    diverged = np.zeros(episodes, dtype=np.int64)
    _kernels.run_paired_kernel(
        spec_a.kind_code,
        _effective_alpha(spec_a),
        spec_a.act_bits,
        spec_a.fixed_action_index,
        spec_a.policy_table,
        spec_a.q_table,
        spec_a.model_params,
        spec_b.kind_code,
        _effective_alpha(spec_b),
        spec_b.act_bits,
        spec_b.fixed_action_index,
        spec_b.policy_table,
        spec_b.q_table,
        spec_b.model_params,
        _env_vector(env),
        _init_cumulative(env),
        env.n_max,
        seeds,
        la,
        ra,
        ca,
        oa,
        lb,
        rb,
        cb,
        ob,
        diverged,
    )
    delta_life = la.astype(np.float64) - lb.astype(np.float64)
    delta_rew = ra - rb
    return PairedSummary(
        summary_a=_summarize(la, ra, ca, oa, seeds),
        summary_b=_summarize(lb, rb, cb, ob, seeds),
        delta_lifetime_mean=float(delta_life.mean()),
        delta_lifetime_se=_se(delta_life),
        delta_reward_mean=float(delta_rew.mean()),
        delta_reward_se=_se(delta_rew),
        diverged_at=diverged,
    )


def build_python_agent(
    spec: AgentSpec,
    result: ValueIterationResult | None = None,
):
    """Reference (unjitted) agent used to cross-check the kernels in tests."""
    if spec.kind == "fixed":
        return FixedAgent(spec.actions[spec.fixed_action_index])
    if spec.kind == "fullmdp":
        return FullStateAgent(
            Policy(process=result.process, action_index=spec.policy_table)
        )
    if spec.kind in ("hmdp", "fpomdp"):
        return KnowledgeAgent(
            spec.kind,
            Policy(process=result.process, action_index=spec.policy_table),
        )
    m = spec.model_params
    return QmdpAgent(
        result,
        GEParams(p=float(m[0]), r=float(m[1])),
        GEParams(p=float(m[2]), r=float(m[3])),
    )


def run_episode_reference(
    env: EnvConfig, spec: AgentSpec, seed: int, agent
) -> EpisodeResult:
    """Pure-Python episode loop with the exact kernel semantics (same draw
    layout, same update order); used to validate the jitted path."""
    cum = _init_cumulative(env)
    u0 = uniform_at(seed, 0)
    if u0 < cum[0]:
        x1, x2, n = InterfaceState.GOOD, InterfaceState.GOOD, 0
    elif u0 < cum[1]:
        x1, x2, n = InterfaceState.GOOD, InterfaceState.BAD, 0
    elif u0 < cum[2]:
        x1, x2, n = InterfaceState.BAD, InterfaceState.GOOD, 0
    else:
        x1, x2, n = InterfaceState.BAD, InterfaceState.BAD, 1

    c1, c2 = interface_costs(env.cost)
    alpha = _effective_alpha(spec)
    obs = Observation(o1=x1, o2=x2, n=n)
    lifetime = 0
    total_reward = 0.0
    n_counts = np.zeros(env.n_max, dtype=np.int64)
    on1 = on2 = 0
    t = 0
    while n < env.n_max:
        action = agent.step(obs)
        u1 = uniform_at(seed, 1 + 2 * t)
        u2 = uniform_at(seed, 2 + 2 * t)
        x1 = step(env.params1, x1, u1)
        x2 = step(env.params2, x2, u2)
        n_counts[n] += 1
        lifetime += 1
        on1 += action.a1
        on2 += action.a2
        success = (action.a1 and x1 == InterfaceState.GOOD) or (
            action.a2 and x2 == InterfaceState.GOOD
        )
        n = 0 if success else n + 1
        base = env.cost.success_reward if n == 0 else env.cost.miss_reward
        total_reward += base - (action.a1 * c1 + action.a2 * c2)
        obs = Observation(
            o1=x1 if (action.a1 or alpha) else None,
            o2=x2 if (action.a2 or alpha) else None,
            n=n,
        )
        t += 1
    return EpisodeResult(
        lifetime=lifetime,
        total_reward=total_reward,
        n_counts=n_counts,
        on_counts=(on1, on2),
        seed=seed,
    )
