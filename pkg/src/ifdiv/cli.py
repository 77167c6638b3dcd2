"""Command-line front end.

Subcommands: solve, analytic, simulate, paired, sweep-eta, sensitivity, fit.
Every command is deterministic given its configuration and seed and writes
byte-identical files on reruns. Numbers are serialized with 9 significant
digits; occupancies are fractions.

Exit codes: 0 success, 2 validation error, 3 solver non-convergence,
4 parse error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .chain import NonAbsorbingPolicyError, analyze, initial_state_vector
from .config import (
    ETA_SWEEP,
    ConfigError,
    ConfigSyntaxError,
    ExperimentConfig,
    load_config,
    with_overrides,
)
from .experiments import (
    agent_spec_for,
    build_process,
    parse_agent_kind,
    sensitivity,
    solve_model,
    sweep_eta,
)
from .mdp import SystemState
from .metrics import reward_loss
from .sim import EnvConfig, run_batch, run_paired
from .solver import fixed_policy
from .traces import TraceFormatError, binarize, fit_ge, latency_reliability, load_trace

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NOT_CONVERGED = 3
EXIT_PARSE = 4

_HMDP_LABELS = {0: "KG", 1: "KB", 2: "U"}
_FPOMDP_LABELS = {0: "KG", 1: "KB", 2: "SG", 3: "SB", 4: "ST"}


def _round9(value):
    """Clamp floats to 9 significant digits for stable serialized output;
    non-finite values become null (strict JSON has no Infinity)."""
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return None
        return float(f"{value:.9g}")
    if isinstance(value, dict):
        return {k: _round9(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round9(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.ndarray):
        return [_round9(v) for v in value.tolist()]
    return value


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_round9(payload), fh, indent=2)
        fh.write("\n")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [f"{v:.9g}" if isinstance(v, float) else v for v in row]
            )


def _eta_tag(eta: float) -> str:
    return f"{eta:g}".replace(".", "p").replace("-", "m")


def _state_labels(process, state) -> list:
    if isinstance(state, SystemState):
        code = {0: "G", 1: "B"}
        return [code[int(state.s1)], code[int(state.s2)], state.n]
    labels = _HMDP_LABELS if process.kind == "hmdp" else _FPOMDP_LABELS
    return [labels[state.e1], labels[state.e2], state.n]


def _load_base_config(args) -> ExperimentConfig:
    config = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["base_seed"] = args.seed
    if getattr(args, "episodes", None) is not None:
        overrides["episodes"] = args.episodes
    if getattr(args, "eta", None) is not None and not isinstance(args.eta, list):
        overrides["eta"] = args.eta
    return with_overrides(config, **overrides).validate()


def _parse_eta_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise ConfigError(f"bad eta list {text!r}") from None


def _env_for(config: ExperimentConfig, eta: float | None = None) -> EnvConfig:
    p1, p2 = config.params()
    return EnvConfig(p1, p2, config.n_max, config.cost_model(eta))


def cmd_solve(args) -> int:
    config = _load_base_config(args)
    solved = solve_model(config, args.model, config.eta)
    process, result = solved.process, solved.result
    policy = solved.policy
    payload = {
        "model": args.model,
        "eta": config.eta,
        "gamma": config.gamma,
        "epsilon": config.epsilon,
        "k_max": config.k_max,
        "n_max": config.n_max,
        "params": {
            "p1": config.p1,
            "r1": config.r1,
            "p2": config.p2,
            "r2": config.r2,
            "e1": config.e1,
            "e2": config.e2,
        },
        "converged": result.converged,
        "iterations": result.iterations,
        "final_delta": result.final_delta,
        "actions": [list(a.bits) for a in process.actions],
        "states": [
            {
                "labels": _state_labels(process, s),
                "absorbing": bool(process.absorbing[i]),
            }
            for i, s in enumerate(process.states)
        ],
        "v": result.v.tolist(),
        "q": result.q.tolist(),
        "policy": [
            None if process.absorbing[i] else list(policy.action_at(i).bits)
            for i in range(process.n_states)
        ],
    }
    out = Path(f"{args.out}.json")
    _write_json(out, payload)
    status = "converged" if result.converged else "not converged"
    print(
        f"solve {args.model} eta={config.eta:g}: {status} after "
        f"{result.iterations} sweeps (final delta {result.final_delta:.3e}) -> {out}"
    )
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def cmd_analytic(args) -> int:
    config = _load_base_config(args)
    kind, fixed_action = parse_agent_kind(args.agent)
    if kind == "qmdp":
        raise ConfigError(
            "belief-averaging control has no finite chain; use simulate"
        )
    if kind == "fixed":
        process = build_process(config, "full", config.eta)
        policy = fixed_policy(process, fixed_action)
        model = "full"
    else:
        model = "full" if kind == "fullmdp" else kind
        solved = solve_model(config, model, config.eta)
        process, policy = solved.process, solved.policy
    payload = {
        "agent": args.agent,
        "model": model,
        "eta": config.eta,
        "infinite_lifetime": False,
    }
    try:
        analysis = analyze(process, policy, initial_state_vector(process))
        payload.update(
            {
                "expected_lifetime": analysis.expected_lifetime,
                "expected_total_reward": analysis.expected_total_reward,
                "occupancy": analysis.occupancy.tolist(),
                "utilization_lte": analysis.utilization[0],
                "utilization_wifi": analysis.utilization[1],
                "residual": analysis.residual,
            }
        )
        print(
            f"analytic {args.agent}: lifetime {analysis.expected_lifetime:.6g}, "
            f"reward {analysis.expected_total_reward:.6g}"
        )
    except NonAbsorbingPolicyError:
        payload.update({"infinite_lifetime": True, "expected_lifetime": None})
        print(f"analytic {args.agent}: infinite lifetime (absorption unreachable)")
    out = Path(f"{args.out}.json")
    _write_json(out, payload)
    return EXIT_OK


def _episode_rows(summary, n_max: int) -> tuple[list[str], list[list]]:
    header = (
        ["episode", "seed", "lifetime", "total_reward"]
        + [f"n{k}" for k in range(n_max)]
        + ["lte_on", "wifi_on"]
    )
    rows = []
    for i in range(summary.episodes):
        rows.append(
            [i, int(summary.seeds[i]), int(summary.lifetimes[i]), float(summary.rewards[i])]
            + [int(v) for v in summary.n_counts[i]]
            + [int(summary.on_counts[i, 0]), int(summary.on_counts[i, 1])]
        )
    return header, rows


def _summary_payload(summary, n_max: int) -> dict:
    return {
        "episodes": summary.episodes,
        "lifetime_mean": summary.lifetime_mean,
        "lifetime_se": summary.lifetime_se,
        "reward_mean": summary.reward_mean,
        "reward_se": summary.reward_se,
        "occupancy": summary.occupancy.tolist(),
        "utilization_lte": summary.utilization[0],
        "utilization_wifi": summary.utilization[1],
    }


def cmd_simulate(args) -> int:
    config = _load_base_config(args)
    env = _env_for(config)
    kind, fixed_action = parse_agent_kind(args.agent)
    spec, _ = agent_spec_for(kind, config, env, config.eta, fixed_action)
    summary = run_batch(env, spec, config.episodes, config.base_seed)
    header, rows = _episode_rows(summary, config.n_max)
    _write_csv(Path(f"{args.out}_episodes.csv"), header, rows)
    payload = {
        "agent": args.agent,
        "eta": config.eta,
        "base_seed": config.base_seed,
        **_summary_payload(summary, config.n_max),
    }
    _write_json(Path(f"{args.out}.json"), payload)
    print(
        f"simulate {args.agent} eta={config.eta:g} episodes={config.episodes}: "
        f"lifetime {summary.lifetime_mean:.6g} +- {summary.lifetime_se:.3g}"
    )
    return EXIT_OK


def cmd_paired(args) -> int:
    config = _load_base_config(args)
    env = _env_for(config)
    kind_a, fixed_a = parse_agent_kind(args.agent_a)
    kind_b, fixed_b = parse_agent_kind(args.agent_b)
    spec_a, _ = agent_spec_for(kind_a, config, env, config.eta, fixed_a)
    spec_b, _ = agent_spec_for(kind_b, config, env, config.eta, fixed_b)
    paired = run_paired(env, spec_a, spec_b, config.episodes, config.base_seed)
    a, b = paired.summary_a, paired.summary_b

    header = [
        "episode",
        "seed",
        "lifetime_a",
        "reward_a",
        "lifetime_b",
        "reward_b",
        "delta_lifetime",
        "delta_reward",
        "diverged_at",
    ]
    rows = []
    for i in range(a.episodes):
        rows.append(
            [
                i,
                int(a.seeds[i]),
                int(a.lifetimes[i]),
                float(a.rewards[i]),
                int(b.lifetimes[i]),
                float(b.rewards[i]),
                int(a.lifetimes[i] - b.lifetimes[i]),
                float(a.rewards[i] - b.rewards[i]),
                int(paired.diverged_at[i]),
            ]
        )
    _write_csv(Path(f"{args.out}_episodes.csv"), header, rows)
    payload = {
        "agent_a": args.agent_a,
        "agent_b": args.agent_b,
        "eta": config.eta,
        "base_seed": config.base_seed,
        "a": _summary_payload(a, config.n_max),
        "b": _summary_payload(b, config.n_max),
        "delta_lifetime_mean": paired.delta_lifetime_mean,
        "delta_lifetime_se": paired.delta_lifetime_se,
        "delta_reward_mean": paired.delta_reward_mean,
        "delta_reward_se": paired.delta_reward_se,
        "reward_loss_b_vs_a": reward_loss(b.reward_mean, a.reward_mean)
        if a.reward_mean > 0
        else None,
    }
    _write_json(Path(f"{args.out}.json"), payload)
    print(
        f"paired {args.agent_a} vs {args.agent_b} eta={config.eta:g}: "
        f"delta reward {paired.delta_reward_mean:.6g} +- {paired.delta_reward_se:.3g}"
    )
    return EXIT_OK


def cmd_sweep_eta(args) -> int:
    config = _load_base_config(args)
    etas = tuple(args.eta) if isinstance(args.eta, list) else ETA_SWEEP
    reports = sweep_eta(config, etas=etas)
    summary = {"etas": list(etas), "episodes": config.episodes, "per_eta": []}
    for report in reports:
        header = [
            "agent",
            "episodes",
            "lifetime_mean",
            "lifetime_se",
            "reward_mean",
            "reward_se",
            "u_lte",
            "u_wifi",
            "delta_k",
            "policy_deviation",
            "reward_loss",
        ] + [f"occupancy_n{k}" for k in range(config.n_max)]
        rows = [[row[h] for h in header] for row in report.rows]
        _write_csv(Path(f"{args.out}_eta{_eta_tag(report.eta)}.csv"), header, rows)
        summary["per_eta"].append(
            {
                "eta": report.eta,
                "reference_lifetime": report.reference_lifetime,
                "reference_reward": report.reference_reward,
                "reference_u_lte": report.reference_u_lte,
                "model_lifetimes": report.model_lifetimes,
            }
        )
        print(
            f"eta={report.eta:g}: reference lifetime {report.reference_lifetime:.6g}, "
            f"{len(report.rows)} agents simulated"
        )
    _write_json(Path(f"{args.out}.json"), summary)
    return EXIT_OK


def cmd_sensitivity(args) -> int:
    config = _load_base_config(args)
    deltas = tuple(args.deltas)
    agents = tuple(args.agents.split(",")) if args.agents else None
    rows = sensitivity(config, deltas, agents=agents)
    header = [
        "delta",
        "agent",
        "episodes",
        "lifetime_mean",
        "reward_mean",
        "u_lte",
        "delta_k",
        "policy_deviation",
        "reward_loss",
        "delta_reward_mean",
        "delta_reward_se",
    ]
    table = [[row[h] for h in header] for row in rows]
    _write_csv(Path(f"{args.out}_table.csv"), header, table)
    _write_json(
        Path(f"{args.out}.json"),
        {"eta": config.eta, "deltas": list(deltas), "rows": rows},
    )
    print(f"sensitivity eta={config.eta:g}: {len(rows)} rows")
    return EXIT_OK


def cmd_fit(args) -> int:
    config = _load_base_config(args)
    theta = args.theta if args.theta is not None else config.theta
    trace = load_trace(args.trace)
    states = binarize(trace, theta)
    fit = fit_ge(states)
    reliability = latency_reliability(trace, theta)
    payload = {
        "trace": str(args.trace),
        "theta": theta,
        "samples": len(trace),
        "p_hat": fit.p_hat,
        "r_hat": fit.r_hat,
        "transitions": {
            "gg": fit.n_gg,
            "gb": fit.n_gb,
            "bg": fit.n_bg,
            "bb": fit.n_bb,
        },
        "dwell_good": fit.dwell_good,
        "dwell_bad": fit.dwell_bad,
        "latency_reliability": reliability,
        "error_probability": 1.0 - reliability,
        "diagnostics": list(fit.diagnostics),
    }
    _write_json(Path(f"{args.out}.json"), payload)
    p_txt = "undefined" if fit.p_hat is None else f"{fit.p_hat:.9g}"
    r_txt = "undefined" if fit.r_hat is None else f"{fit.r_hat:.9g}"
    print(
        f"fit {args.trace}: p_hat={p_txt} r_hat={r_txt} "
        f"F(theta)={reliability:.9g} P_e={1.0 - reliability:.9g}"
    )
    for note in fit.diagnostics:
        print(f"  note: {note}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ifdiv",
        description="Dual-interface transmission-policy toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, default_out):
        p.add_argument("--config", type=Path, default=None, help="flat key = value file")
        p.add_argument("--seed", type=int, default=None, help="base seed override")
        p.add_argument("--episodes", type=int, default=None)
        p.add_argument("--out", type=str, default=default_out, help="output path prefix")
        p.add_argument("--eta", type=float, default=None)

    p_solve = sub.add_parser("solve", help="value-iterate a model and write the policy")
    common(p_solve, "ifdiv_solve")
    p_solve.add_argument(
        "--model", choices=("full", "fpomdp", "hmdp"), default="full"
    )
    p_solve.set_defaults(func=cmd_solve)

    p_analytic = sub.add_parser("analytic", help="exact chain analysis of a policy")
    common(p_analytic, "ifdiv_analytic")
    p_analytic.add_argument("--agent", type=str, default="fixed:(1,1)")
    p_analytic.set_defaults(func=cmd_analytic)

    p_sim = sub.add_parser("simulate", help="Monte-Carlo batch for one agent")
    common(p_sim, "ifdiv_simulate")
    p_sim.add_argument("--agent", type=str, required=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_paired = sub.add_parser(
        "paired", help="two agents on common random numbers"
    )
    common(p_paired, "ifdiv_paired")
    p_paired.add_argument("--agent-a", type=str, required=True)
    p_paired.add_argument("--agent-b", type=str, required=True)
    p_paired.set_defaults(func=cmd_paired)

    p_sweep = sub.add_parser("sweep-eta", help="solve/analyze/simulate over etas")
    p_sweep.add_argument("--config", type=Path, default=None)
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--episodes", type=int, default=None)
    p_sweep.add_argument("--out", type=str, default="ifdiv_sweep")
    p_sweep.add_argument(
        "--eta", type=_parse_eta_list, default=None, help="comma-separated list"
    )
    p_sweep.set_defaults(func=cmd_sweep_eta)

    p_sens = sub.add_parser(
        "sensitivity", help="planning-model error sweep on common random numbers"
    )
    common(p_sens, "ifdiv_sensitivity")
    p_sens.add_argument(
        "--deltas",
        type=_parse_eta_list,
        default=[-0.02, -0.01, 0.0, 0.01, 0.02],
        help="comma-separated relative errors applied to both p and r",
    )
    p_sens.add_argument(
        "--agents", type=str, default=None, help="comma-separated agent kinds"
    )
    p_sens.set_defaults(func=cmd_sensitivity)

    p_fit = sub.add_parser("fit", help="estimate channel parameters from a trace")
    p_fit.add_argument("trace", type=Path)
    p_fit.add_argument("--config", type=Path, default=None)
    p_fit.add_argument("--theta", type=float, default=None)
    p_fit.add_argument("--out", type=str, default="ifdiv_fit")
    p_fit.set_defaults(func=cmd_fit)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigSyntaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except TraceFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
