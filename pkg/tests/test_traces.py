import math
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from ifdiv._rng import uniform_at
from ifdiv.channel import InterfaceState, step
from ifdiv.traces import (
    LOST,
    LatencyTrace,
    TraceFormatError,
    binarize,
    e2e_error,
    fit_ge,
    latency_reliability,
    load_trace,
    parse_trace_csv,
)

from .conftest import LTE

G, B = InterfaceState.GOOD, InterfaceState.BAD
REPRO = Path(__file__).resolve().parent.parent / "repro"

FIVE_SAMPLES = "seq,latency_ms\n0,5\n1,5\n2,50\n3,50\n4,5\n"


class TestParsing:
    def test_parses_samples_in_order(self):
        trace = parse_trace_csv(FIVE_SAMPLES)
        assert trace.samples == (5.0, 5.0, 50.0, 50.0, 5.0)

    def test_lost_is_case_insensitive_and_infinite(self):
        trace = parse_trace_csv("seq,latency_ms\n0,LOST\n1,12\n2,Lost\n")
        assert trace.samples[0] == LOST
        assert trace.samples[2] == LOST
        assert math.isinf(trace.samples[0])

    def test_empty_file_rejected(self):
        with pytest.raises(TraceFormatError):
            parse_trace_csv("")

    def test_header_required(self):
        with pytest.raises(TraceFormatError) as err:
            parse_trace_csv("latency\n0,5\n")
        assert err.value.line == 1

    def test_header_only_rejected(self):
        with pytest.raises(TraceFormatError):
            parse_trace_csv("seq,latency_ms\n")

    def test_gap_in_seq_rejected(self):
        with pytest.raises(TraceFormatError) as err:
            parse_trace_csv("seq,latency_ms\n0,5\n2,5\n")
        assert err.value.line == 3

    def test_out_of_order_rejected(self):
        with pytest.raises(TraceFormatError):
            parse_trace_csv("seq,latency_ms\n1,5\n0,5\n")

    def test_bad_latency_rejected_with_line(self):
        with pytest.raises(TraceFormatError) as err:
            parse_trace_csv("seq,latency_ms\n0,5\n1,soon\n")
        assert err.value.line == 3

    def test_negative_latency_rejected(self):
        with pytest.raises(TraceFormatError):
            parse_trace_csv("seq,latency_ms\n0,-3\n")

    def test_shipped_sample_file(self):
        trace = load_trace(REPRO / "sample_trace.csv")
        assert len(trace) == 5


class TestBinarize:
    def test_default_deadline(self):
        trace = parse_trace_csv(FIVE_SAMPLES)
        assert binarize(trace, 38.25) == [G, G, B, B, G]

    def test_lost_is_bad(self):
        assert binarize(LatencyTrace((LOST,)), 10.0) == [B]

    def test_deadline_tie_is_good(self):
        assert binarize(LatencyTrace((38.25,)), 38.25) == [G]

    def test_all_within_deadline(self):
        assert binarize(LatencyTrace((1.0, 2.0)), 10.0) == [G, G]

    def test_requires_positive_deadline(self):
        with pytest.raises(ValueError):
            binarize(LatencyTrace((1.0,)), 0.0)


class TestFit:
    def test_hand_counted_example(self):
        fit = fit_ge([G, G, B, B, G])
        assert fit.p_hat == 0.5
        assert fit.r_hat == 0.5
        assert (fit.n_gg, fit.n_gb, fit.n_bg, fit.n_bb) == (1, 1, 1, 1)
        assert (fit.dwell_good, fit.dwell_bad) == (3, 2)

    def test_all_good_leaves_recovery_undefined(self):
        fit = fit_ge([G, G, G])
        assert fit.p_hat == 0.0
        assert fit.r_hat is None
        assert any("r undefined" in d for d in fit.diagnostics)

    def test_short_sequence_rejected(self):
        with pytest.raises(ValueError):
            fit_ge([G])

    def test_roundtrip_recovers_generator(self):
        # 10^6 slots from the default LTE-like channel; the counted estimates
        # must sit within 3 binomial standard errors of the generator.
        n = 1_000_000
        seed = 0xFEED
        states = [G]
        current = G
        for k in range(n - 1):
            current = step(LTE, current, uniform_at(seed, k))
            states.append(current)
        fit = fit_ge(states)
        from_good = fit.n_gg + fit.n_gb
        from_bad = fit.n_bg + fit.n_bb
        se_p = math.sqrt(LTE.p * (1 - LTE.p) / from_good)
        se_r = math.sqrt(LTE.r * (1 - LTE.r) / from_bad)
        assert abs(fit.p_hat - LTE.p) <= 3 * se_p
        assert abs(fit.r_hat - LTE.r) <= 3 * se_r


class TestLatencyReliability:
    def test_three_of_five(self):
        assert latency_reliability(parse_trace_csv(FIVE_SAMPLES), 38.25) == 0.6

    def test_all_lost_is_zero(self):
        assert latency_reliability(LatencyTrace((LOST, LOST)), 1e9) == 0.0

    def test_huge_deadline_with_no_losses_is_one(self):
        assert latency_reliability(LatencyTrace((1.0, 900.0)), 1e12) == 1.0

    @given(st.lists(st.floats(0.0, 100.0), min_size=1, max_size=30))
    def test_monotone_in_deadline(self, samples):
        trace = LatencyTrace(tuple(samples))
        values = [latency_reliability(trace, theta) for theta in (1.0, 10.0, 50.0, 200.0)]
        assert all(a <= b for a, b in zip(values, values[1:]))


class TestEndToEndError:
    def test_product_rule(self):
        assert e2e_error([0.9, 0.9]) == pytest.approx(0.01)

    def test_perfect_path_wins(self):
        assert e2e_error([1.0, 0.3]) == 0.0

    def test_stationary_success_proxies(self):
        assert e2e_error([0.93539, 0.94841]) == pytest.approx(3.333e-3, rel=1e-3)

    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=5))
    def test_never_exceeds_weakest_link(self, rels):
        value = e2e_error(rels)
        assert value <= min(1.0 - f for f in rels) + 1e-12

    @given(
        rels=st.lists(st.floats(0.0, 1.0), min_size=2, max_size=5),
        index=st.integers(0, 4),
        bump=st.floats(0.0, 1.0),
    )
    def test_monotone_in_each_reliability(self, rels, index, bump):
        index = index % len(rels)
        improved = list(rels)
        improved[index] = min(1.0, improved[index] + bump * (1 - improved[index]))
        assert e2e_error(improved) <= e2e_error(rels) + 1e-12

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            e2e_error([0.5, 1.2])
