"""Experiment orchestration: model solving, eta sweeps, sensitivity sweeps.

Comparisons follow one convention throughout: the reference is the fully
observable optimal policy evaluated exactly on its chain, candidates are
simulated on the true environment, and the behavioral deviation weighs the
LTE-utilization gap by the LTE cost at the eta under comparison.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import metrics
from .chain import ChainAnalysis, NonAbsorbingPolicyError, analyze, initial_state_vector
from .channel import GEParams
from .config import AGENT_KINDS, ETA_SWEEP, ConfigError, ExperimentConfig
from .mdp import (
    Action,
    DecisionProcess,
    build_fpomdp,
    build_full_mdp,
    build_hmdp,
    interface_costs,
)
from .sim import (
    AgentSpec,
    BatchSummary,
    EnvConfig,
    fixed_agent_spec,
    full_agent_spec,
    knowledge_agent_spec,
    qmdp_agent_spec,
    run_batch,
    run_paired,
)
from .solver import Policy, ValueIterationResult, greedy_policy, value_iteration

_BUILDERS = {"full": build_full_mdp, "hmdp": build_hmdp, "fpomdp": build_fpomdp}
MODEL_KINDS = tuple(_BUILDERS)


@dataclass(frozen=True)
class SolvedModel:
    process: DecisionProcess
    result: ValueIterationResult
    policy: Policy


def build_process(
    config: ExperimentConfig,
    model_kind: str,
    eta: float | None = None,
    params: tuple[GEParams, GEParams] | None = None,
) -> DecisionProcess:
    if model_kind not in _BUILDERS:
        raise ConfigError(f"unknown model kind {model_kind!r}")
    p1, p2 = params if params is not None else config.params()
    cm = config.cost_model(eta)
    return _BUILDERS[model_kind](p1, p2, cm, config.n_max, config.gamma)


def solve_model(
    config: ExperimentConfig,
    model_kind: str,
    eta: float | None = None,
    params: tuple[GEParams, GEParams] | None = None,
) -> SolvedModel:
    process = build_process(config, model_kind, eta, params)
    result = value_iteration(process, epsilon=config.epsilon, k_max=config.k_max)
    return SolvedModel(process=process, result=result, policy=greedy_policy(result))


def parse_agent_kind(text: str) -> tuple[str, Action | None]:
    """Agent selector syntax: fullmdp | qmdp | fpomdp | hmdp | fixed:(a1,a2)."""
    if text in AGENT_KINDS:
        return text, None
    if text.startswith("fixed:"):
        bits = text[len("fixed:"):].strip().strip("()")
        parts = [b.strip() for b in bits.split(",")]
        if len(parts) != 2 or any(b not in ("0", "1") for b in parts):
            raise ConfigError(f"bad fixed action spec {text!r}")
        try:
            return "fixed", Action(int(parts[0]), int(parts[1]))
        except ValueError as exc:
            raise ConfigError(f"bad fixed action spec {text!r}: {exc}") from None
    raise ConfigError(f"unknown agent kind {text!r}")


def agent_spec_for(
    kind: str,
    config: ExperimentConfig,
    env: EnvConfig,
    eta: float | None = None,
    fixed_action: Action | None = None,
    params: tuple[GEParams, GEParams] | None = None,
) -> tuple[AgentSpec, SolvedModel | None]:
    """Build a runnable agent, solving whichever model it needs.

    `params` are the parameters the agent believes in; the environment keeps
    its own. They only differ in sensitivity runs.
    """
    if kind == "fixed":
        if fixed_action is None:
            raise ConfigError("fixed agent needs an action")
        return fixed_agent_spec(fixed_action, env), None
    if kind == "fullmdp":
        solved = solve_model(config, "full", eta, params)
        return full_agent_spec(solved.result), solved
    if kind == "qmdp":
        solved = solve_model(config, "full", eta, params)
        return qmdp_agent_spec(solved.result), solved
    if kind in ("hmdp", "fpomdp"):
        solved = solve_model(config, kind, eta, params)
        return knowledge_agent_spec(solved.result), solved
    raise ConfigError(f"unknown agent kind {kind!r}")


def perturbed_params(params: GEParams, delta: float) -> GEParams:
    """Scale both transition probabilities by (1 + delta); this is the unique
    proportional change keeping the stationary distribution fixed."""
    if delta <= -1.0:
        raise ConfigError("delta must be greater than -1")
    p = (1.0 + delta) * params.p
    r = (1.0 + delta) * params.r
    if p > 1.0 or r > 1.0:
        raise ConfigError(
            f"delta {delta} pushes transition probabilities outside [0, 1]"
        )
    return GEParams(p=p, r=r)


def reference_analysis(config: ExperimentConfig, eta: float) -> tuple[SolvedModel, ChainAnalysis]:
    """Fully observable optimum solved and evaluated exactly on its chain."""
    solved = solve_model(config, "full", eta)
    analysis = analyze(
        solved.process, solved.policy, initial_state_vector(solved.process)
    )
    return solved, analysis


def _agent_row(
    kind: str,
    summary: BatchSummary,
    reference: ChainAnalysis,
    c_lte: float,
) -> dict:
    report = metrics.compare(
        k_pi=summary.lifetime_mean,
        k_star=reference.expected_lifetime,
        r_pi=summary.reward_mean,
        r_star=reference.expected_total_reward,
        u_pi=summary.utilization[0],
        u_star=reference.utilization[0],
        c_lte=c_lte,
    )
    row = {
        "agent": kind,
        "episodes": summary.episodes,
        "lifetime_mean": summary.lifetime_mean,
        "lifetime_se": summary.lifetime_se,
        "reward_mean": summary.reward_mean,
        "reward_se": summary.reward_se,
        "u_lte": summary.utilization[0],
        "u_wifi": summary.utilization[1],
        "delta_k": report.delta_lifetime,
        "policy_deviation": report.policy_deviation,
        "reward_loss": report.reward_loss,
    }
    for n, frac in enumerate(summary.occupancy):
        row[f"occupancy_n{n}"] = float(frac)
    return row


@dataclass(frozen=True)
class EtaReport:
    eta: float
    reference_lifetime: float
    reference_reward: float
    reference_u_lte: float
    model_lifetimes: dict
    rows: list


def sweep_eta(
    config: ExperimentConfig,
    etas: tuple[float, ...] = ETA_SWEEP,
    episodes: int | None = None,
    base_seed: int | None = None,
) -> list[EtaReport]:
    """Solve, analyze and simulate every configured agent at each eta."""
    episodes = config.episodes if episodes is None else episodes
    base_seed = config.base_seed if base_seed is None else base_seed
    p1, p2 = config.params()
    reports = []
    for eta in etas:
        env = EnvConfig(p1, p2, config.n_max, config.cost_model(eta))
        c_lte = interface_costs(env.cost)[0]
        ref_solved, ref_analysis = reference_analysis(config, eta)

        model_lifetimes = {}
        for kind in ("hmdp", "fpomdp"):
            solved = solve_model(config, kind, eta)
            try:
                analysis = analyze(
                    solved.process,
                    solved.policy,
                    initial_state_vector(solved.process),
                )
                model_lifetimes[kind] = analysis.expected_lifetime
            except NonAbsorbingPolicyError:
                model_lifetimes[kind] = float("inf")

        rows = []
        for kind in config.agents:
            name, fixed_action = parse_agent_kind(kind)
            spec, _ = agent_spec_for(name, config, env, eta, fixed_action)
            summary = run_batch(env, spec, episodes, base_seed)
            rows.append(_agent_row(kind, summary, ref_analysis, c_lte))
        reports.append(
            EtaReport(
                eta=eta,
                reference_lifetime=ref_analysis.expected_lifetime,
                reference_reward=ref_analysis.expected_total_reward,
                reference_u_lte=ref_analysis.utilization[0],
                model_lifetimes=model_lifetimes,
                rows=rows,
            )
        )
    return reports


def sensitivity(
    config: ExperimentConfig,
    deltas: tuple[float, ...],
    eta: float | None = None,
    episodes: int | None = None,
    base_seed: int | None = None,
    agents: tuple[str, ...] | None = None,
) -> list[dict]:
    """Candidates plan with (1 + delta)-scaled transition probabilities while
    the environment keeps the true values; each candidate runs paired against
    the true-model fully observable optimum on common random numbers."""
    episodes = config.episodes if episodes is None else episodes
    base_seed = config.base_seed if base_seed is None else base_seed
    agents = config.agents if agents is None else agents
    eta_val = config.eta if eta is None else eta
    true1, true2 = config.params()
    env = EnvConfig(true1, true2, config.n_max, config.cost_model(eta_val))
    c_lte = interface_costs(env.cost)[0]

    baseline = solve_model(config, "full", eta_val)
    baseline_spec = full_agent_spec(baseline.result)

    rows = []
    for delta in deltas:
        believed = (perturbed_params(true1, delta), perturbed_params(true2, delta))
        for kind in agents:
            name, fixed_action = parse_agent_kind(kind)
            spec, _ = agent_spec_for(
                name, config, env, eta_val, fixed_action, params=believed
            )
            paired = run_paired(env, baseline_spec, spec, episodes, base_seed)
            ref, cand = paired.summary_a, paired.summary_b
            report = metrics.compare(
                k_pi=cand.lifetime_mean,
                k_star=ref.lifetime_mean,
                r_pi=cand.reward_mean,
                r_star=ref.reward_mean,
                u_pi=cand.utilization[0],
                u_star=ref.utilization[0],
                c_lte=c_lte,
            )
            rows.append(
                {
                    "delta": delta,
                    "agent": kind,
                    "episodes": episodes,
                    "lifetime_mean": cand.lifetime_mean,
                    "reward_mean": cand.reward_mean,
                    "u_lte": cand.utilization[0],
                    "delta_k": report.delta_lifetime,
                    "policy_deviation": report.policy_deviation,
                    "reward_loss": report.reward_loss,
                    "delta_reward_mean": paired.delta_reward_mean,
                    "delta_reward_se": paired.delta_reward_se,
                }
            )
    return rows
