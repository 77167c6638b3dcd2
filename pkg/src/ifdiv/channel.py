"""Two-state Gilbert-Elliott channel: parameters, kernel, steady state, stepping.

One instance of the model describes one interface. A slot is Good when a
packet sent in it would arrive within the deadline, Bad otherwise; `p` is the
per-slot Good-to-Bad probability and `r` the Bad-to-Good recovery probability.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

GOOD_CODE = 0
BAD_CODE = 1


class InterfaceState(IntEnum):
    GOOD = GOOD_CODE
    BAD = BAD_CODE


class DegenerateChainError(ValueError):
    """Raised when p = r = 0, where no stationary distribution is defined."""


@dataclass(frozen=True)
class GEParams:
    """Per-slot transition probabilities of one interface.

    p: probability of leaving Good for Bad.
    r: probability of recovering from Bad to Good.
    """

    p: float
    r: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.p <= 1.0):
            raise ValueError(f"p must be in [0, 1], got {self.p}")
        if not (0.0 <= self.r <= 1.0):
            raise ValueError(f"r must be in [0, 1], got {self.r}")


def transition_prob(params: GEParams, frm: InterfaceState, to: InterfaceState) -> float:
    """One-slot transition probability between interface states."""
    if frm == InterfaceState.GOOD:
        return params.p if to == InterfaceState.BAD else 1.0 - params.p
    return params.r if to == InterfaceState.GOOD else 1.0 - params.r


def kernel(params: GEParams) -> np.ndarray:
    """2x2 transition matrix, rows/cols indexed (Good, Bad)."""
    return np.array(
        [[1.0 - params.p, params.p], [params.r, 1.0 - params.r]], dtype=np.float64
    )


def steady_state(params: GEParams) -> tuple[float, float]:
    """Stationary probabilities (pi_good, pi_bad); requires p + r > 0."""
    total = params.p + params.r
    if total == 0.0:
        raise DegenerateChainError("steady state undefined for p = r = 0")
    return params.r / total, params.p / total


def step(params: GEParams, current: InterfaceState, draw: float) -> InterfaceState:
    """Advance one slot using a uniform draw in [0, 1).

    The comparison is strict (`draw < p`, `draw < r`) so that identical draw
    sequences reproduce identical trajectories everywhere.
    """
    if not (0.0 <= draw < 1.0):
        raise ValueError(f"draw must be in [0, 1), got {draw}")
    if current == InterfaceState.GOOD:
        return InterfaceState.BAD if draw < params.p else InterfaceState.GOOD
    return InterfaceState.GOOD if draw < params.r else InterfaceState.BAD
