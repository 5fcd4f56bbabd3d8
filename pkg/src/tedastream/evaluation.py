"""Detection scoring against labeled segments and software throughput benchmarks."""

from __future__ import annotations

import json
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import DetectorConfig, SampleVerdict, run_stream
from .ingest import FaultSegment
from .pipeline import TimingModel, throughput as model_throughput

__all__ = [
    "SegmentResult",
    "DetectionMetrics",
    "score",
    "BenchReport",
    "bench",
    "bench_parallel",
]


@dataclass(frozen=True)
class SegmentResult:
    segment: FaultSegment
    detected: bool
    first_detection: int | None
    latency: int | None
    outliers: int


@dataclass(frozen=True)
class DetectionMetrics:
    segments: tuple[SegmentResult, ...]
    total_samples: int
    total_outliers: int
    false_alarms: int
    normal_samples: int

    @property
    def false_alarm_rate(self) -> float:
        """False alarms per 1000 samples lying outside every segment."""
        if self.normal_samples == 0:
            return 0.0
        return 1000.0 * self.false_alarms / self.normal_samples

    @property
    def detected(self) -> int:
        return sum(r.detected for r in self.segments)

    @property
    def undetected(self) -> int:
        return len(self.segments) - self.detected

    def to_dict(self) -> dict:
        return {
            "total_samples": self.total_samples,
            "total_outliers": self.total_outliers,
            "false_alarms": self.false_alarms,
            "normal_samples": self.normal_samples,
            "false_alarm_rate_per_1000": self.false_alarm_rate,
            "segments_detected": self.detected,
            "segments_undetected": self.undetected,
            "segments": [
                {
                    "start_k": r.segment.start_k,
                    "end_k": r.segment.end_k,
                    "label": r.segment.label,
                    "detected": r.detected,
                    "first_detection": r.first_detection,
                    "latency": r.latency,
                    "outliers": r.outliers,
                }
                for r in self.segments
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))


def score(
    verdicts: Iterable[SampleVerdict], segments: Sequence[FaultSegment]
) -> DetectionMetrics:
    """Compare outlier flags against ground-truth segments in one pass.

    A segment counts as detected if any verdict inside it is an outlier;
    latency is the first flagged position minus the segment start. Outliers
    outside every segment are false alarms. Verdict ``k`` maps to sample
    position ``k - 1``.
    """
    ordered = sorted(segments)
    for a, b in zip(ordered, ordered[1:]):
        if b.start_k <= a.end_k:
            raise ValueError(f"segments {a} and {b} overlap")
    first = [None] * len(ordered)
    counts = [0] * len(ordered)
    total = outliers = false_alarms = inside = 0
    j = 0
    for v in verdicts:
        pos = v.k - 1
        total += 1
        while j < len(ordered) and ordered[j].end_k < pos:
            j += 1
        in_seg = j < len(ordered) and ordered[j].start_k <= pos
        inside += in_seg
        if not v.outlier:
            continue
        outliers += 1
        if in_seg:
            counts[j] += 1
            if first[j] is None:
                first[j] = pos
        else:
            false_alarms += 1
    if ordered and ordered[-1].end_k >= total:
        raise ValueError(
            f"segment {ordered[-1]} extends beyond the {total} scored verdicts"
        )
    results = tuple(
        SegmentResult(
            segment=s,
            detected=f is not None,
            first_detection=f,
            latency=None if f is None else f - s.start_k,
            outliers=c,
        )
        for s, f, c in zip(ordered, first, counts)
    )
    return DetectionMetrics(
        segments=results,
        total_samples=total,
        total_outliers=outliers,
        false_alarms=false_alarms,
        normal_samples=total - inside,
    )


@dataclass(frozen=True)
class BenchReport:
    samples: int
    elapsed_s: float
    repetitions: int
    timings_s: tuple[float, ...]
    config: dict
    outliers: int
    zeta_sum: float
    streams: int = 1
    model_throughput_sps: float | None = None

    @property
    def throughput_sps(self) -> float:
        return self.samples / self.elapsed_s

    @property
    def per_sample_s(self) -> float:
        return self.elapsed_s / self.samples

    def to_dict(self) -> dict:
        d = asdict(self)
        d["timings_s"] = list(self.timings_s)
        d["throughput_sps"] = self.throughput_sps
        d["per_sample_s"] = self.per_sample_s
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))


def _consume(samples: np.ndarray, config: DetectorConfig) -> tuple[int, float]:
    outliers = 0
    zeta_sum = 0.0
    for v in run_stream(samples, config):
        if v.outlier:
            outliers += 1
        if v.zeta is not None:
            zeta_sum += v.zeta
    return outliers, zeta_sum


def _materialize(stream) -> np.ndarray:
    X = np.asarray(stream if isinstance(stream, np.ndarray) else list(stream), dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] == 0:
        raise ValueError("cannot benchmark an empty stream")
    return X


def bench(
    stream,
    config: DetectorConfig | None = None,
    repetitions: int = 5,
    t_c_ns: float | None = None,
) -> BenchReport:
    """Time the detector over a pre-materialized stream.

    The reported elapsed time is the median over ``repetitions`` runs;
    parsing is excluded. Verdicts are reduced to a checksum (outlier count
    and sum of normalized eccentricities) and discarded.
    """
    if repetitions < 1:
        raise ValueError(f"repetitions must be >= 1, got {repetitions}")
    config = config or DetectorConfig()
    X = _materialize(stream)
    timings = []
    checksum = None
    for _ in range(repetitions):
        t0 = time.perf_counter()
        result = _consume(X, config)
        timings.append(time.perf_counter() - t0)
        if checksum is None:
            checksum = result
        elif result != checksum:
            raise RuntimeError("detector output changed between repetitions")
    return BenchReport(
        samples=X.shape[0],
        elapsed_s=statistics.median(timings),
        repetitions=repetitions,
        timings_s=tuple(timings),
        config=config.as_dict(),
        outliers=checksum[0],
        zeta_sum=checksum[1],
        model_throughput_sps=None if t_c_ns is None else model_throughput(TimingModel(t_c_ns)),
    )


def bench_parallel(
    streams: Sequence,
    config: DetectorConfig | None = None,
    repetitions: int = 3,
    max_workers: int | None = None,
) -> BenchReport:
    """Run independent detectors over several streams in worker processes.

    Reports aggregate samples per second of wall time across all streams.
    """
    if repetitions < 1:
        raise ValueError(f"repetitions must be >= 1, got {repetitions}")
    config = config or DetectorConfig()
    arrays = [_materialize(s) for s in streams]
    if not arrays:
        raise ValueError("no streams to benchmark")
    timings = []
    results = None
    with ProcessPoolExecutor(max_workers=max_workers) as pool:
        for _ in range(repetitions):
            t0 = time.perf_counter()
            results = list(pool.map(_consume, arrays, [config] * len(arrays)))
            timings.append(time.perf_counter() - t0)
    return BenchReport(
        samples=sum(a.shape[0] for a in arrays),
        elapsed_s=statistics.median(timings),
        repetitions=repetitions,
        timings_s=tuple(timings),
        config=config.as_dict(),
        outliers=sum(r[0] for r in results),
        zeta_sum=sum(r[1] for r in results),
        streams=len(arrays),
    )
