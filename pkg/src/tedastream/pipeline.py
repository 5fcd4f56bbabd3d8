"""Cycle-level model of the four-stage MEAN/VARIANCE/ECCENTRICITY/OUTLIER pipeline.

Every call to :func:`tick` is one clock edge. All stages read the register
contents latched on the previous edge and write new contents, so a sample
entering at cycle ``t`` leaves the OUTLIER stage at cycle ``t + 3``::

    cycle t     MEAN          mu_k            -> MREG,   x and k delayed
    cycle t+1   VARIANCE      sigma2_k, ||x-mu||**2, 1/k -> VREG1, EREG3, EREG4
    cycle t+2   ECCENTRICITY  xi_k
    cycle t+3   OUTLIER       zeta_k vs (m**2+1)/(2k)    -> verdict

The arithmetic is the same code the sequential detector runs, so verdicts
are bit-identical to :func:`tedastream.core.run_stream`.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import IO, Iterable, Iterator, Optional

import numpy as np

from .core import (
    DetectorConfig,
    SampleVerdict,
    _decision_stage,
    _eccentricity_stage,
    _first_verdict,
)
from .exceptions import ConfigError, PipelineInvariantError
from .ingest import format_value
from .stats import _mean_step, _variance_step, as_sample, clamp_variance, squared_distance

__all__ = [
    "LATENCY",
    "MeanRegisters",
    "VarianceRegisters",
    "EccentricityRegisters",
    "PipelineState",
    "tick",
    "simulate",
    "TimingModel",
    "initial_delay",
    "sample_period",
    "throughput",
    "TRACE_COLUMNS",
    "write_trace",
]

LATENCY = 3


@dataclass(frozen=True)
class MeanRegisters:
    """MREGn plus the k and x values travelling with the sample."""

    k: int
    x: np.ndarray
    mu: np.ndarray


@dataclass(frozen=True)
class VarianceRegisters:
    """VREG1 (variance), VREG2 (delayed k), EREG3 (squared distance), EREG4 (1/k)."""

    k: int
    sigma2: float
    dist2: float
    inv_k: float


@dataclass(frozen=True)
class EccentricityRegisters:
    """Eccentricity output plus OREG1 (k delayed towards the OUTLIER stage)."""

    k: int
    xi: Optional[float]
    degenerate: bool


@dataclass(frozen=True)
class PipelineState:
    """Register file of the whole pipeline.

    ``mu`` and ``sigma2`` are the persistent accumulators (the feedback
    paths of MREGn and VREG1); the ``*_stage`` fields are the inter-stage
    registers, ``None`` when the stage holds a bubble.
    """

    cycle: int = 0
    ingested: int = 0
    emitted: int = 0
    dim: Optional[int] = None
    mu: Optional[np.ndarray] = None
    sigma2: float = 0.0
    clamped: int = 0
    mean_stage: Optional[MeanRegisters] = None
    variance_stage: Optional[VarianceRegisters] = None
    ecc_stage: Optional[EccentricityRegisters] = None
    outlier_stage: Optional[SampleVerdict] = None

    @property
    def occupancy(self) -> tuple[bool, bool, bool, bool]:
        return (
            self.mean_stage is not None,
            self.variance_stage is not None,
            self.ecc_stage is not None,
            self.outlier_stage is not None,
        )

    @property
    def in_flight(self) -> int:
        return self.ingested - self.emitted

    def is_empty(self) -> bool:
        return self.in_flight == 0


def tick(
    pipeline: PipelineState, x=None, config: DetectorConfig | None = None
) -> tuple[PipelineState, Optional[SampleVerdict]]:
    """Advance every stage by one clock cycle.

    ``x`` is the sample presented at this cycle, or ``None`` for a bubble.
    Returns the new state and the verdict leaving the OUTLIER stage, if any.
    """
    config = config or DetectorConfig()

    # OUTLIER: consumes the eccentricity latched last cycle.
    verdict = None
    ecc = pipeline.ecc_stage
    if ecc is not None:
        if ecc.k == 1:
            verdict = _first_verdict()
        else:
            verdict = _decision_stage(ecc.k, ecc.xi, ecc.degenerate, config.m)

    # ECCENTRICITY: uses EREG3/EREG4 and the variance from VREG1.
    new_ecc = None
    var = pipeline.variance_stage
    if var is not None:
        if var.k == 1:
            new_ecc = EccentricityRegisters(1, None, True)
        else:
            xi, degenerate = _eccentricity_stage(
                var.k, var.dist2, var.sigma2, config.zero_variance_policy
            )
            new_ecc = EccentricityRegisters(var.k, xi, degenerate)

    # VARIANCE: mean and delayed x from MREG, previous variance from VREG1.
    new_var = None
    sigma2, clamped = pipeline.sigma2, pipeline.clamped
    mean = pipeline.mean_stage
    if mean is not None:
        dist2 = squared_distance(mean.x, mean.mu)
        sigma2, did_clamp = clamp_variance(
            _variance_step(mean.k, pipeline.sigma2, dist2, config.variance_mode)
        )
        clamped += did_clamp
        new_var = VarianceRegisters(mean.k, sigma2, dist2, 1 / mean.k)

    # MEAN: k counter increments only on a valid input.
    new_mean = None
    mu, ingested, dim = pipeline.mu, pipeline.ingested, pipeline.dim
    if x is not None:
        sample = as_sample(x, dim, config.np_dtype, index=ingested)
        if mu is not None and mu.dtype != sample.dtype:
            raise ConfigError("config dtype changed while samples are in flight")
        ingested += 1
        dim = sample.shape[0]
        mu = _mean_step(ingested, mu, sample)
        new_mean = MeanRegisters(ingested, sample, mu)

    emitted = pipeline.emitted
    if verdict is not None:
        if verdict.k != emitted + 1:
            raise PipelineInvariantError(
                f"cycle {pipeline.cycle}: emitted k={verdict.k}, expected {emitted + 1}"
            )
        emitted += 1

    new_state = replace(
        pipeline,
        cycle=pipeline.cycle + 1,
        ingested=ingested,
        emitted=emitted,
        dim=dim,
        mu=mu,
        sigma2=sigma2,
        clamped=clamped,
        mean_stage=new_mean,
        variance_stage=new_var,
        ecc_stage=new_ecc,
        outlier_stage=verdict,
    )
    if new_state.in_flight > LATENCY:
        raise PipelineInvariantError(
            f"{new_state.in_flight} samples in flight, pipeline holds {LATENCY}"
        )
    return new_state, verdict


def simulate(
    samples: Iterable, config: DetectorConfig | None = None
) -> Iterator[tuple[int, SampleVerdict]]:
    """Drive :func:`tick` with one input per cycle and yield ``(cycle, verdict)``.

    ``None`` entries in ``samples`` are bubbles. After the input runs out the
    pipeline is flushed with bubbles until every sample has been classified.
    """
    config = config or DetectorConfig()
    state = PipelineState()
    for x in samples:
        cycle = state.cycle
        state, verdict = tick(state, x, config)
        if verdict is not None:
            yield cycle, verdict
    while not state.is_empty():
        cycle = state.cycle
        state, verdict = tick(state, None, config)
        if verdict is not None:
            yield cycle, verdict


@dataclass(frozen=True)
class TimingModel:
    """Critical-path time ``t_c`` in nanoseconds."""

    t_c: float

    def __post_init__(self) -> None:
        if not (isinstance(self.t_c, (int, float)) and self.t_c > 0):
            raise ConfigError(f"critical-path time must be positive, got {self.t_c!r}")

    def summary(self) -> dict:
        return {
            "t_c_ns": self.t_c,
            "initial_delay_ns": initial_delay(self),
            "sample_period_ns": sample_period(self),
            "throughput_sps": throughput(self),
        }


def initial_delay(model: TimingModel) -> float:
    """Pipeline fill time in ns: three register stages of ``t_c`` each."""
    return LATENCY * model.t_c


def sample_period(model: TimingModel) -> float:
    """Time between consecutive classifications once the pipeline is full (ns)."""
    return model.t_c


def throughput(model: TimingModel) -> float:
    """Classified samples per second."""
    return 1e9 / sample_period(model)


TRACE_COLUMNS = ("cycle", "k", "xi", "zeta", "threshold", "outlier")


def write_trace(trace: Iterable[tuple[int, SampleVerdict]], fh: IO[str]) -> int:
    """Write ``cycle,k,xi,zeta,threshold,outlier`` rows; return the row count."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    n = 0
    for cycle, v in trace:
        writer.writerow(
            [
                cycle,
                v.k,
                format_value(v.xi),
                format_value(v.zeta),
                format_value(v.threshold),
                format_value(v.outlier),
            ]
        )
        n += 1
    return n
