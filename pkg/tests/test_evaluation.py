import json
import random

import numpy as np
import pytest

from tedastream import DetectorConfig, SampleVerdict, bench, bench_parallel, generate, run_stream, score
from tedastream.ingest import FaultInjection, FaultSegment, SynthSpec


def verdicts_from_flags(flags):
    return [SampleVerdict(i + 1, None, None, None, None, bool(f), False) for i, f in enumerate(flags)]


class TestScore:
    def test_no_outliers(self):
        m = score(verdicts_from_flags([False] * 20), [FaultSegment(5, 9)])
        assert m.detected == 0 and m.undetected == 1
        assert m.false_alarms == 0 and m.false_alarm_rate == 0.0
        assert m.segments[0].latency is None

    def test_latency_zero_at_start(self):
        flags = [False] * 20
        flags[5] = True
        r = score(verdicts_from_flags(flags), [FaultSegment(5, 9)]).segments[0]
        assert r.detected and r.latency == 0 and r.first_detection == 5

    def test_latency_and_false_alarms(self):
        flags = [False] * 1000
        flags[3] = flags[700] = True
        flags[512] = flags[520] = True
        m = score(verdicts_from_flags(flags), [FaultSegment(500, 599)])
        assert m.segments[0].latency == 12 and m.segments[0].outliers == 2
        assert m.false_alarms == 2 and m.normal_samples == 900
        assert m.false_alarm_rate == pytest.approx(2000 / 900)
        assert m.total_outliers == 4 and m.total_samples == 1000

    def test_segment_beyond_range(self):
        with pytest.raises(ValueError):
            score(verdicts_from_flags([False] * 10), [FaultSegment(5, 10)])

    def test_permutation_independent(self):
        rng = random.Random(0)
        flags = [rng.random() < 0.05 for _ in range(2000)]
        segs = [FaultSegment(s, s + 49) for s in range(100, 2000, 200)]
        ref = score(verdicts_from_flags(flags), segs)
        for _ in range(5):
            rng.shuffle(segs)
            assert score(verdicts_from_flags(flags), segs) == ref
        assert ref.detected + ref.undetected == len(segs)

    def test_end_to_end_level_shift(self):
        spec = SynthSpec(
            length=1000,
            faults=[FaultInjection(FaultSegment(500, 600), "level-shift", 10.0)],
            seed=1,
        )
        s = generate(spec)
        m = score(run_stream(s.samples, DetectorConfig(m=3)), s.segments)
        assert m.segments[0].detected

    def test_json_single_line(self):
        m = score(verdicts_from_flags([True, False, False]), [FaultSegment(1, 2)])
        line = m.to_json()
        assert "\n" not in line and json.loads(line)["false_alarms"] == 1


class TestBench:
    def test_report(self, rng):
        X = rng.standard_normal((20_000, 2))
        r = bench(X, repetitions=5, t_c_ns=138)
        assert r.samples == 20_000 and r.repetitions == 5 and len(r.timings_s) == 5
        assert r.elapsed_s == float(np.median(r.timings_s))
        assert r.throughput_sps == r.samples / r.elapsed_s > 0
        assert 7.2e6 <= r.model_throughput_sps <= 7.25e6
        d = json.loads(r.to_json())
        assert d["throughput_sps"] == r.throughput_sps
        assert d["config"]["m"] == 3.0

    def test_checksum_matches_detector(self, rng):
        X = rng.standard_normal((2000, 2))
        X[1500] += 20
        r = bench(X, repetitions=1)
        verdicts = list(run_stream(X))
        assert r.outliers == sum(v.outlier for v in verdicts)

    def test_errors(self):
        with pytest.raises(ValueError):
            bench([], repetitions=1)
        with pytest.raises(ValueError):
            bench([[1.0]], repetitions=0)

    def test_linear_scaling(self, rng):
        small = bench(rng.standard_normal((20_000, 2)), repetitions=3)
        large = bench(rng.standard_normal((40_000, 2)), repetitions=3)
        assert large.per_sample_s < 2 * small.per_sample_s

    def test_parallel(self, rng):
        streams = [rng.standard_normal((2000, 2)) for _ in range(2)]
        r = bench_parallel(streams, repetitions=1, max_workers=2)
        assert r.streams == 2 and r.samples == 4000 and r.throughput_sps > 0
