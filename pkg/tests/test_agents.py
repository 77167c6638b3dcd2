import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ifdiv.agents import (
    AgentProtocolError,
    Belief,
    FixedAgent,
    FullStateAgent,
    KnowledgeAgent,
    Observation,
    QmdpAgent,
    joint_belief,
    qmdp_action,
    update_belief,
)
from ifdiv.channel import GEParams, InterfaceState, steady_state
from ifdiv.mdp import Action, build_hmdp, full_state_index
from ifdiv.solver import greedy_policy, value_iteration

from .conftest import LTE, WIFI, cost_model

G, B = InterfaceState.GOOD, InterfaceState.BAD

unit = st.floats(0.0, 1.0, allow_nan=False)
bounded_prob = st.floats(0.03, 0.97, allow_nan=False)


class TestUpdateBelief:
    def test_observation_collapses(self):
        b = Belief(0.4, 0.6, 2)
        out = update_belief(b, Observation(None, G, 1), LTE, WIFI)
        assert out.b2 == 1.0
        assert out.n == 1

    def test_unobserved_propagates_one_step(self):
        b = Belief(0.5, 1.0, 0)
        out = update_belief(b, Observation(G, None, 0), LTE, WIFI)
        assert out.b2 == pytest.approx(1.0 - 0.0515)  # f applied to certainty
        assert out.b1 == 1.0

    def test_repeated_propagation_reaches_steady_state(self):
        b = 0.0
        belief = Belief(1.0, b, 0)
        for _ in range(400):
            belief = update_belief(belief, Observation(G, None, 0), LTE, WIFI)
        assert belief.b2 == pytest.approx(steady_state(WIFI)[0], abs=1e-9)

    @given(b1=unit, b2=unit, steps=st.integers(1, 50))
    @settings(max_examples=50, deadline=None)
    def test_belief_stays_in_unit_interval(self, b1, b2, steps):
        belief = Belief(b1, b2, 0)
        for _ in range(steps):
            belief = update_belief(belief, Observation(None, None, 0), LTE, WIFI)
            assert 0.0 <= belief.b1 <= 1.0
            assert 0.0 <= belief.b2 <= 1.0

    @given(p=bounded_prob, r=bounded_prob, b0=unit)
    @settings(max_examples=100, deadline=None)
    def test_fixed_point_is_stationary_probability(self, p, r, b0):
        params = GEParams(p, r)
        target = steady_state(params)[0]
        belief = Belief(b0, b0, 0)
        for k in range(500):
            belief = update_belief(belief, Observation(None, None, 0), params, params)
            if abs(belief.b1 - target) <= 1e-9:
                break
        assert abs(belief.b1 - target) <= 1e-9


class TestJointBelief:
    def test_point_mass(self):
        weights = {(c1, c2): w for c1, c2, w in joint_belief(Belief(1.0, 1.0, 0))}
        assert weights[(0, 0)] == 1.0
        assert sum(weights.values()) == 1.0

    def test_uniform(self):
        weights = [w for _, _, w in joint_belief(Belief(0.5, 0.5, 2))]
        assert weights == [0.25] * 4

    @given(b1=unit, b2=unit)
    def test_sums_to_one(self, b1, b2):
        total = sum(w for _, _, w in joint_belief(Belief(b1, b2, 1)))
        assert abs(total - 1.0) <= 1e-12


class TestQmdpAction:
    def test_point_mass_matches_greedy_policy(self, solved_eta007):
        process = solved_eta007.process
        policy = greedy_policy(solved_eta007)
        for i, s in enumerate(process.states):
            if process.absorbing[i]:
                continue
            belief = Belief(
                1.0 if s.s1 == G else 0.0, 1.0 if s.s2 == G else 0.0, s.n
            )
            assert qmdp_action(belief, solved_eta007) == policy.action_at(i)

    def test_uniform_belief_averages_q(self, solved_eta007):
        belief = Belief(0.5, 0.5, 2)
        base = full_state_index(0, 0, 2)
        mean_q = solved_eta007.q[base : base + 4].mean(axis=0)
        expected = solved_eta007.process.actions[int(np.argmax(mean_q))]
        assert qmdp_action(belief, solved_eta007) == expected

    @given(b1=unit, b2=unit, n=st.integers(0, 3))
    @settings(max_examples=60, deadline=None)
    def test_cost_free_table_always_duplicates(self, solved_eta0, b1, b2, n):
        assert qmdp_action(Belief(b1, b2, n), solved_eta0) == Action(1, 1)

    def test_absorbing_counter_rejected(self, solved_eta0):
        with pytest.raises(ValueError):
            qmdp_action(Belief(0.5, 0.5, 4), solved_eta0)


class TestAgents:
    def test_fixed_agent_ignores_observation(self):
        agent = FixedAgent(Action(0, 1))
        assert agent.step(Observation(G, G, 0)) == Action(0, 1)
        assert agent.step(Observation(None, None, 3)) == Action(0, 1)

    def test_full_state_agent_looks_up_policy(self, solved_eta0):
        agent = FullStateAgent(greedy_policy(solved_eta0))
        assert agent.step(Observation(B, B, 2)) == Action(1, 1)

    def test_full_state_agent_requires_complete_observation(self, solved_eta0):
        agent = FullStateAgent(greedy_policy(solved_eta0))
        with pytest.raises(AgentProtocolError):
            agent.step(Observation(None, G, 0))

    def test_qmdp_agent_requires_complete_first_observation(self, solved_eta0):
        agent = QmdpAgent(solved_eta0, LTE, WIFI)
        with pytest.raises(AgentProtocolError):
            agent.step(Observation(None, G, 0))

    def test_qmdp_agent_tracks_belief(self, solved_eta007):
        agent = QmdpAgent(solved_eta007, LTE, WIFI)
        agent.step(Observation(G, G, 0))
        assert agent.belief == Belief(1.0, 1.0, 0)
        agent.step(Observation(None, G, 0))
        assert agent.belief.b1 == pytest.approx(1.0 - LTE.p)
        assert agent.belief.b2 == 1.0

    def test_knowledge_agent_hidden_turns_off_observed_bad_lte(self):
        # With no transmission cost the hidden reduction still prefers to
        # blank out a Bad interface and re-enter through the stationary mix.
        process = build_hmdp(LTE, WIFI, cost_model(0.0), 4, 0.99999)
        result = value_iteration(process)
        agent = KnowledgeAgent("hmdp", greedy_policy(result))
        action = agent.step(Observation(B, G, 0))
        assert action.a1 == 0

    def test_knowledge_agent_advances_staleness(self, harsh_solved_fpomdp):
        agent = KnowledgeAgent("fpomdp", greedy_policy(harsh_solved_fpomdp))
        agent.step(Observation(G, B, 0))
        assert (agent.e1, agent.e2) == (0, 1)
        agent.step(Observation(None, None, 1))
        assert (agent.e1, agent.e2) == (2, 3)  # stale-from-good, stale-from-bad
        agent.step(Observation(None, None, 2))
        assert (agent.e1, agent.e2) == (4, 4)  # steady
        agent.step(Observation(G, None, 0))
        assert (agent.e1, agent.e2) == (0, 4)

    def test_knowledge_agent_rejects_unknown_kind(self, harsh_solved):
        with pytest.raises(ValueError):
            KnowledgeAgent("full", greedy_policy(harsh_solved))

    def test_decisions_are_pure(self, solved_eta007):
        # Same internal state + same observation => same action.
        a1 = QmdpAgent(solved_eta007, LTE, WIFI)
        a2 = QmdpAgent(solved_eta007, LTE, WIFI)
        trace = [
            Observation(G, G, 0),
            Observation(None, B, 1),
            Observation(None, G, 0),
            Observation(None, None, 0),
        ]
        for obs in trace:
            assert a1.step(obs) == a2.step(obs)
            assert a1.belief == a2.belief
