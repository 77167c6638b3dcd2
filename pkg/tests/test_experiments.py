import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ifdiv.channel import GEParams, steady_state
from ifdiv.config import ConfigError, ExperimentConfig
from ifdiv.experiments import (
    agent_spec_for,
    build_process,
    parse_agent_kind,
    perturbed_params,
    reference_analysis,
    sensitivity,
    solve_model,
    sweep_eta,
)
from ifdiv.mdp import Action
from ifdiv.sim import EnvConfig

from .conftest import HARSH1, HARSH2, cost_model

#: Fast configuration for orchestration tests: short lifetimes, small budget.
FAST = ExperimentConfig(
    p1=HARSH1.p,
    r1=HARSH1.r,
    p2=HARSH2.p,
    r2=HARSH2.r,
    e1=150.0,
    e2=40.0,
    eta=0.1,
    n_max=3,
    gamma=0.95,
    epsilon=1e-9,
    k_max=5000,
    episodes=200,
    base_seed=91,
)


class TestAgentSelectors:
    def test_named_kinds(self):
        assert parse_agent_kind("qmdp") == ("qmdp", None)
        assert parse_agent_kind("fullmdp") == ("fullmdp", None)

    def test_fixed_with_and_without_parens(self):
        assert parse_agent_kind("fixed:(1,0)") == ("fixed", Action(1, 0))
        assert parse_agent_kind("fixed:0,1") == ("fixed", Action(0, 1))

    @pytest.mark.parametrize("bad", ["fixed:(0,0)", "fixed:(2,1)", "magic", "fixed:"])
    def test_rejects_bad_selectors(self, bad):
        with pytest.raises(ConfigError):
            parse_agent_kind(bad)


class TestSolveModel:
    def test_builds_each_kind(self):
        # n_max = 3: one absorbing layer out of four counter values.
        for kind, live_states in (("full", 12), ("hmdp", 27), ("fpomdp", 75)):
            solved = solve_model(FAST, kind)
            assert solved.process.kind == kind
            assert int((~solved.process.absorbing).sum()) == live_states
            assert solved.result.converged

    def test_unknown_kind_rejected(self):
        with pytest.raises(ConfigError):
            build_process(FAST, "pomdp")

    def test_eta_override_changes_costs(self):
        a = solve_model(FAST, "full", eta=0.0)
        b = solve_model(FAST, "full", eta=2.0)
        assert a.process.cost.eta == 0.0
        assert b.process.cost.eta == 2.0


class TestPerturbation:
    def test_worked_example(self):
        out = perturbed_params(GEParams(0.0178, 0.2577), 0.02)
        assert out.p == pytest.approx(0.018156, abs=1e-9)
        assert out.r == pytest.approx(0.262854, abs=1e-9)

    def test_identity_at_zero(self):
        out = perturbed_params(GEParams(0.3, 0.4), 0.0)
        assert (out.p, out.r) == (0.3, 0.4)

    @given(
        p=st.floats(1e-6, 0.5, allow_nan=False),
        r=st.floats(1e-6, 0.5, allow_nan=False),
        delta=st.floats(-0.9, 0.9, allow_nan=False),
    )
    @settings(max_examples=200)
    def test_preserves_stationary_distribution(self, p, r, delta):
        base = GEParams(p, r)
        out = perturbed_params(base, delta)
        assert abs(steady_state(out)[1] - steady_state(base)[1]) <= 1e-12

    def test_rejects_out_of_range(self):
        with pytest.raises(ConfigError):
            perturbed_params(GEParams(0.9, 0.2), 0.2)
        with pytest.raises(ConfigError):
            perturbed_params(GEParams(0.1, 0.1), -1.0)


class TestReferenceAnalysis:
    def test_reference_is_exact_chain_solution(self):
        solved, analysis = reference_analysis(FAST, FAST.eta)
        assert analysis.expected_lifetime > 0
        assert analysis.residual <= 1e-9
        assert solved.process.kind == "full"


class TestSweep:
    def test_rows_and_reference_fields(self):
        reports = sweep_eta(FAST, etas=(0.0, 0.3), episodes=40, base_seed=5)
        assert [r.eta for r in reports] == [0.0, 0.3]
        for report in reports:
            assert report.reference_lifetime > 0
            assert set(report.model_lifetimes) == {"hmdp", "fpomdp"}
            assert [row["agent"] for row in report.rows] == list(FAST.agents)
            for row in report.rows:
                assert row["episodes"] == 40
                assert 0.0 <= row["u_wifi"] <= 1.0
                occupancy = [row[f"occupancy_n{k}"] for k in range(FAST.n_max)]
                assert sum(occupancy) == pytest.approx(1.0, abs=1e-9)

    def test_full_agent_tracks_reference(self):
        reports = sweep_eta(FAST, etas=(0.1,), episodes=600, base_seed=17)
        row = next(r for r in reports[0].rows if r["agent"] == "fullmdp")
        # Simulated full-state agent must straddle its own exact analysis.
        assert abs(row["delta_k"]) <= 0.2
        assert row["reward_loss"] <= 0.25


class TestSensitivity:
    def test_zero_delta_full_candidate_is_exact_zero(self):
        rows = sensitivity(
            FAST, deltas=(0.0,), episodes=30, base_seed=3, agents=("fullmdp",)
        )
        assert len(rows) == 1
        row = rows[0]
        assert row["delta_k"] == 0.0
        assert row["policy_deviation"] == 0.0
        assert row["reward_loss"] == 0.0
        assert row["delta_reward_mean"] == 0.0

    def test_rows_cover_grid(self):
        rows = sensitivity(
            FAST,
            deltas=(-0.05, 0.0, 0.05),
            episodes=20,
            base_seed=3,
            agents=("qmdp", "hmdp"),
        )
        assert len(rows) == 6
        assert {row["delta"] for row in rows} == {-0.05, 0.0, 0.05}
        assert all(row["reward_loss"] >= 0.0 for row in rows)

    def test_candidates_plan_with_perturbed_models(self):
        env = EnvConfig(HARSH1, HARSH2, 3, cost_model(0.1))
        believed = (
            perturbed_params(HARSH1, 0.5),
            perturbed_params(HARSH2, 0.5),
        )
        spec, solved = agent_spec_for(
            "qmdp", FAST, env, eta=0.1, params=believed
        )
        assert solved.process.params1.p == pytest.approx(HARSH1.p * 1.5)
        assert np.allclose(
            spec.model_params,
            [believed[0].p, believed[0].r, believed[1].p, believed[1].r],
        )
