import io

import numpy as np
import pytest

from tedastream import DetectorConfig, generate, run_stream
from tedastream.exceptions import ConfigError, StreamShapeError
from tedastream.ingest import FaultInjection, FaultSegment, SynthSpec
from tedastream.pipeline import (
    LATENCY,
    PipelineState,
    TimingModel,
    initial_delay,
    sample_period,
    simulate,
    throughput,
    tick,
    write_trace,
)


def schedule(inputs, config=None):
    """Cycle stamps of emitted verdicts when ticking ``inputs`` then flushing."""
    state = PipelineState()
    out = []
    for x in list(inputs) + [None] * (LATENCY + 2):
        cycle = state.cycle
        state, v = tick(state, x, config)
        if v is not None:
            out.append((cycle, v.k))
    return out, state


class TestTick:
    def test_single_sample_latency(self):
        out, state = schedule([[1.0]])
        assert out == [(3, 1)]
        assert state.is_empty()

    def test_ten_back_to_back(self):
        out, _ = schedule([[float(i)] for i in range(10)])
        assert out == [(c, c - 2) for c in range(3, 13)]

    def test_all_bubbles(self):
        out, state = schedule([None] * 20)
        assert out == [] and state.ingested == 0

    def test_registers_fill_in_order(self):
        state = PipelineState()
        seen = []
        for x in [[1.0], [2.0], None, None, None]:
            state, _ = tick(state, x)
            seen.append(state.occupancy)
        assert seen == [
            (True, False, False, False),
            (True, True, False, False),
            (False, True, True, False),
            (False, False, True, True),
            (False, False, False, True),
        ]

    def test_state_is_not_mutated(self):
        s0 = PipelineState()
        s1, _ = tick(s0, [1.0])
        assert s0.cycle == 0 and s0.mean_stage is None
        assert s1.cycle == 1 and s1.mean_stage.k == 1

    def test_dimension_mismatch(self):
        state, _ = tick(PipelineState(), [1.0, 2.0])
        with pytest.raises(StreamShapeError):
            tick(state, [1.0])


class TestSimulate:
    def test_single_sample(self):
        trace = list(simulate([[5.0]]))
        assert len(trace) == 1
        cycle, v = trace[0]
        assert cycle == 3 and v.k == 1 and v.degenerate

    def test_last_cycle(self, rng):
        X = rng.standard_normal((57, 2))
        trace = list(simulate(X))
        assert trace[-1][0] == 57 + 2
        cycles = [c for c, _ in trace]
        assert cycles == sorted(set(cycles))

    def test_empty(self):
        assert list(simulate([])) == []

    @pytest.mark.parametrize("mode", ["paper", "exact"])
    @pytest.mark.parametrize("dim", [1, 3, 8])
    def test_sequential_equivalence(self, rng, mode, dim):
        X = rng.normal(5.0, 2.0, (2000, dim))
        X[1000:1050] += 8.0
        cfg = DetectorConfig(variance_mode=mode)
        assert [v for _, v in simulate(X, cfg)] == list(run_stream(X, cfg))

    def test_equivalence_float32_and_constant_prefix(self, rng):
        X = np.vstack([np.ones((20, 2)), rng.standard_normal((200, 2))])
        for cfg in (DetectorConfig(dtype="float32"), DetectorConfig(zero_variance_policy="not-outlier")):
            assert [v for _, v in simulate(X, cfg)] == list(run_stream(X, cfg))

    def test_bubble_transparency(self, rng):
        X = rng.standard_normal((300, 2))
        inputs, ingest_cycles = [], []
        for x in X:
            inputs.extend([None] * int(rng.integers(0, 4)))
            ingest_cycles.append(len(inputs))
            inputs.append(x)
        trace = list(simulate(inputs))
        assert [v for _, v in trace] == [v for _, v in simulate(X)]
        assert [c for c, _ in trace] == [c + 3 for c in ingest_cycles]

    def test_deterministic_trace_bytes(self):
        X = generate(SynthSpec(length=500, seed=9)).samples

        def dump():
            buf = io.StringIO()
            write_trace(simulate(X), buf)
            return buf.getvalue()

        assert dump() == dump()


class TestTiming:
    def test_table_values(self):
        model = TimingModel(138.0)
        assert initial_delay(model) == 414.0
        assert sample_period(model) == 138.0
        assert throughput(model) == pytest.approx(7_246_376.8, abs=0.1)

    @pytest.mark.parametrize("tc, d", [(1.0, 3.0), (200.0, 600.0)])
    def test_delay_linear(self, tc, d):
        assert initial_delay(TimingModel(tc)) == d
        assert sample_period(TimingModel(tc)) == initial_delay(TimingModel(tc)) / 3

    def test_throughput_units(self):
        assert throughput(TimingModel(1e9)) == 1.0
        assert throughput(TimingModel(100.0)) == 1e7

    @pytest.mark.parametrize("tc", [0, -5.0, float("nan")])
    def test_invalid(self, tc):
        with pytest.raises(ConfigError):
            TimingModel(tc)

    def test_summary(self):
        s = TimingModel(138).summary()
        assert s["initial_delay_ns"] == 414 and 7.2e6 <= s["throughput_sps"] <= 7.25e6


def test_trace_csv_columns():
    buf = io.StringIO()
    n = write_trace(simulate([[0.0], [2.0]]), buf)
    assert n == 2
    assert buf.getvalue().splitlines() == [
        "cycle,k,xi,zeta,threshold,outlier",
        "3,1,,,,false",
        "4,2,1.5,0.75,2.5,false",
    ]


def test_fault_stream_equivalence():
    spec = SynthSpec(
        length=10_000,
        dims=2,
        faults=[FaultInjection(FaultSegment(6000, 6200), "ramp", -12.0)],
        seed=4,
    )
    X = generate(spec).samples
    assert [v for _, v in simulate(X)] == list(run_stream(X))
