import pytest
from hypothesis import given, strategies as st

from ifdiv.metrics import compare, lifetime_delta, policy_deviation, reward_loss

positive = st.floats(1e-3, 1e7, allow_nan=False)
unit = st.floats(0.0, 1.0, allow_nan=False)


class TestLifetimeDelta:
    def test_zero_for_identical(self):
        assert lifetime_delta(5.0, 5.0) == 0.0

    def test_doubling(self):
        assert lifetime_delta(10.0, 5.0) == 1.0

    def test_reference_extremes(self):
        assert lifetime_delta(1.3633e5, 5.0738e6) == pytest.approx(-0.97313, abs=5e-6)

    def test_guard(self):
        with pytest.raises(ValueError):
            lifetime_delta(1.0, 0.0)


class TestPolicyDeviation:
    def test_zero_for_identical(self):
        assert policy_deviation(3.0, 3.0, 0.5, 0.5, 0.1) == 0.0

    def test_worked_example(self):
        value = policy_deviation(1.02, 1.0, 1.0, 0.5, 0.0648598)
        assert value == pytest.approx(0.02 + 0.0324299, abs=1e-7)

    def test_zero_cost_reduces_to_lifetime_term(self):
        assert policy_deviation(1.5, 1.0, 0.9, 0.1, 0.0) == pytest.approx(0.5)

    @given(k_pi=positive, k_star=positive, u_pi=unit, u_star=unit, c=unit)
    def test_dominates_lifetime_delta(self, k_pi, k_star, u_pi, u_star, c):
        dev = policy_deviation(k_pi, k_star, u_pi, u_star, c)
        assert dev >= abs(lifetime_delta(k_pi, k_star)) - 1e-15

    @given(k_pi=positive, k_star=positive, u_pi=unit, u_star=unit, c=unit)
    def test_utilization_term_scales_with_cost(self, k_pi, k_star, u_pi, u_star, c):
        base = policy_deviation(k_pi, k_star, u_pi, u_star, c)
        doubled = policy_deviation(k_pi, k_star, u_pi, u_star, 2.0 * c)
        gap = abs(u_pi - u_star)
        # The subtraction cancels the (possibly huge) lifetime term, so allow
        # absolute error at the scale of the cancelled magnitude.
        slack = 1e-12 * max(1.0, base)
        assert doubled - base == pytest.approx(gap * c, rel=1e-9, abs=slack)


class TestRewardLoss:
    def test_zero_for_identical(self):
        assert reward_loss(100.0, 100.0) == 0.0

    def test_permille(self):
        assert reward_loss(99.9, 100.0) == pytest.approx(0.001)

    def test_guards(self):
        with pytest.raises(ValueError):
            reward_loss(1.0, 0.0)
        with pytest.raises(ValueError):
            reward_loss(1.0, -5.0)


class TestCompare:
    def test_self_comparison_is_all_zero(self):
        report = compare(10.0, 10.0, 5.0, 5.0, 0.7, 0.7, 0.3)
        assert report.delta_lifetime == 0.0
        assert report.policy_deviation == 0.0
        assert report.reward_loss == 0.0
        assert report.utilization_gap == 0.0
