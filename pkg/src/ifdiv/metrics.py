"""Comparison metrics between a candidate policy and the fully observable
optimum: relative lifetime change, behavioral deviation, relative reward loss.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ComparisonReport:
    delta_lifetime: float
    policy_deviation: float
    reward_loss: float
    utilization_gap: float


def lifetime_delta(k_pi: float, k_star: float) -> float:
    """(K_pi - K_star) / K_star; positive means longer-lived than the optimum."""
    if k_star <= 0.0:
        raise ValueError("reference lifetime must be positive")
    return (k_pi - k_star) / k_star


def policy_deviation(
    k_pi: float, k_star: float, u_pi: float, u_star: float, c_lte: float
) -> float:
    """|relative lifetime change| plus the LTE-utilization gap weighted by the
    LTE cost at the eta under comparison."""
    return abs(lifetime_delta(k_pi, k_star)) + abs(u_pi - u_star) * c_lte


def reward_loss(r_pi: float, r_star: float) -> float:
    """|R_star - R_pi| / R_star; only meaningful for a positive reference."""
    if r_star == 0.0:
        raise ValueError("reference reward is zero, relative loss undefined")
    if r_star < 0.0:
        raise ValueError(
            "reference reward is negative, relative loss loses its meaning"
        )
    return abs(r_star - r_pi) / r_star


def compare(
    k_pi: float,
    k_star: float,
    r_pi: float,
    r_star: float,
    u_pi: float,
    u_star: float,
    c_lte: float,
) -> ComparisonReport:
    return ComparisonReport(
        delta_lifetime=lifetime_delta(k_pi, k_star),
        policy_deviation=policy_deviation(k_pi, k_star, u_pi, u_star, c_lte),
        reward_loss=reward_loss(r_pi, r_star),
        utilization_gap=abs(u_pi - u_star),
    )
