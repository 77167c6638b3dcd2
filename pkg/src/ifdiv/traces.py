"""Latency-trace ingestion: thresholding into Good/Bad sequences, transition
counting for channel parameter estimates, and latency-reliability figures.

Trace file format: CSV with header ``seq,latency_ms``. ``latency_ms`` is a
non-negative decimal or the literal ``lost`` (case-insensitive, meaning the
packet never arrived); ``seq`` must increase by exactly 1 per row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .channel import InterfaceState

#: Sentinel latency for packets that never arrived.
LOST = math.inf


class TraceFormatError(ValueError):
    """Malformed trace file; carries the 1-based offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class LatencyTrace:
    """Ordered latency samples in milliseconds; LOST marks missing packets."""

    samples: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.samples:
            raise ValueError("trace must contain at least one sample")

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class FitResult:
    """Transition-count estimates for a two-state channel.

    A rate is None when its source state never occurs as a transition source;
    `diagnostics` then explains which dwell is missing.
    """

    p_hat: float | None
    r_hat: float | None
    n_gg: int
    n_gb: int
    n_bg: int
    n_bb: int
    dwell_good: int
    dwell_bad: int
    diagnostics: tuple[str, ...] = field(default_factory=tuple)


def parse_trace_csv(text: str) -> LatencyTrace:
    lines = text.splitlines()
    if not lines:
        raise TraceFormatError("empty file", 1)
    header = lines[0].strip()
    if header != "seq,latency_ms":
        raise TraceFormatError("expected header 'seq,latency_ms'", 1)
    samples: list[float] = []
    expected_seq: int | None = None
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise TraceFormatError("expected exactly two fields", lineno)
        try:
            seq = int(parts[0])
        except ValueError:
            raise TraceFormatError(f"bad seq value {parts[0]!r}", lineno) from None
        if expected_seq is not None and seq != expected_seq:
            raise TraceFormatError(
                f"seq {seq} out of order, expected {expected_seq}", lineno
            )
        expected_seq = seq + 1
        value = parts[1].strip().lower()
        if value == "lost":
            samples.append(LOST)
            continue
        try:
            latency = float(value)
        except ValueError:
            raise TraceFormatError(f"bad latency value {parts[1]!r}", lineno) from None
        if latency < 0.0 or math.isnan(latency):
            raise TraceFormatError(f"negative latency {parts[1]!r}", lineno)
        samples.append(latency)
    if not samples:
        raise TraceFormatError("no data rows", max(2, len(lines)))
    return LatencyTrace(samples=tuple(samples))


def load_trace(path) -> LatencyTrace:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_trace_csv(fh.read())


def binarize(trace: LatencyTrace, theta: float) -> list[InterfaceState]:
    """Good iff the packet arrived within the deadline (ties count as Good)."""
    if theta <= 0.0:
        raise ValueError("theta must be positive")
    return [
        InterfaceState.GOOD if s <= theta else InterfaceState.BAD
        for s in trace.samples
    ]


def fit_ge(states: list[InterfaceState]) -> FitResult:
    """Maximum-likelihood transition counting on an observed state sequence."""
    if len(states) < 2:
        raise ValueError("need at least 2 samples to count transitions")
    n_gg = n_gb = n_bg = n_bb = 0
    for a, b in zip(states, states[1:]):
        if a == InterfaceState.GOOD:
            if b == InterfaceState.GOOD:
                n_gg += 1
            else:
                n_gb += 1
        else:
            if b == InterfaceState.GOOD:
                n_bg += 1
            else:
                n_bb += 1
    from_good = n_gg + n_gb
    from_bad = n_bg + n_bb
    diagnostics = []
    p_hat = n_gb / from_good if from_good else None
    if p_hat is None:
        diagnostics.append("no transitions out of Good: p undefined")
    r_hat = n_bg / from_bad if from_bad else None
    if r_hat is None:
        diagnostics.append("no transitions out of Bad: r undefined")
    dwell_good = sum(1 for s in states if s == InterfaceState.GOOD)
    return FitResult(
        p_hat=p_hat,
        r_hat=r_hat,
        n_gg=n_gg,
        n_gb=n_gb,
        n_bg=n_bg,
        n_bb=n_bb,
        dwell_good=dwell_good,
        dwell_bad=len(states) - dwell_good,
        diagnostics=tuple(diagnostics),
    )


def latency_reliability(trace: LatencyTrace, theta: float) -> float:
    """Empirical probability of delivery within the deadline; lost packets
    count as failures."""
    if theta <= 0.0:
        raise ValueError("theta must be positive")
    within = sum(1 for s in trace.samples if s <= theta)
    return within / len(trace.samples)


def e2e_error(reliabilities: list[float]) -> float:
    """End-to-end error of duplicated transmission over independent paths."""
    out = 1.0
    for f in reliabilities:
        if not (0.0 <= f <= 1.0):
            raise ValueError(f"reliability {f} outside [0, 1]")
        out *= 1.0 - f
    return out
