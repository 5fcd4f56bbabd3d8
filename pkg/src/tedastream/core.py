"""Eccentricity, typicality and the per-sample outlier decision.

The detector is a fold of :func:`step` over a stream. Each call consumes a
sample and returns the next :class:`DetectorState` together with a
:class:`SampleVerdict`; states are never mutated in place, so a state can be
kept, compared or handed to another thread freely.

Example
-------
>>> from tedastream import DetectorConfig, run_stream
>>> [v.zeta for v in run_stream([[0.0], [2.0]], DetectorConfig(m=3))]
[None, 0.75]
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .exceptions import (
    ConfigError,
    DegenerateVarianceError,
    StateError,
)
from .stats import (
    DetectorState,
    VarianceMode,
    _as_matrix,
    _mean_step,
    _variance_step,
    as_sample,
    clamp_variance,
    squared_distance,
)

__all__ = [
    "ZeroVariancePolicy",
    "DetectorConfig",
    "SampleVerdict",
    "eccentricity",
    "typicality",
    "normalized_eccentricity",
    "outlier_threshold",
    "step",
    "run_stream",
    "TedaDetector",
    "batch_eccentricities",
]


class ZeroVariancePolicy(str, enum.Enum):
    """What to emit when the running variance is zero at ``k >= 2``.

    ``ONE_OVER_K`` sets the eccentricity to ``1/k`` (its minimum) when the
    sample coincides with the mean. ``NOT_OUTLIER`` leaves the scores
    undefined. Both flag the verdict as degenerate and never as an outlier.
    """

    ONE_OVER_K = "one-over-k"
    NOT_OUTLIER = "not-outlier"

    @classmethod
    def parse(cls, value: "ZeroVariancePolicy | str") -> "ZeroVariancePolicy":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(
                f"unknown zero-variance policy {value!r}; "
                "expected 'one-over-k' or 'not-outlier'"
            ) from None


_DTYPES = {"float64": np.dtype(np.float64), "float32": np.dtype(np.float32)}


@dataclass(frozen=True)
class DetectorConfig:
    """Detector parameters.

    ``m`` is the threshold multiplier (3 gives the ``5/k`` curve).
    ``dtype`` selects the arithmetic width of the running state; 32-bit is
    meant for comparisons against single-precision hardware.
    """

    m: float = 3.0
    variance_mode: VarianceMode = VarianceMode.PAPER
    zero_variance_policy: ZeroVariancePolicy = ZeroVariancePolicy.ONE_OVER_K
    dtype: str = "float64"

    def __post_init__(self) -> None:
        try:
            m = float(self.m)
        except (TypeError, ValueError):
            raise ConfigError(f"m must be a real number, got {self.m!r}") from None
        if not math.isfinite(m) or m <= 0:
            raise ConfigError(f"m must be positive and finite, got {self.m!r}")
        object.__setattr__(self, "m", m)
        try:
            object.__setattr__(
                self, "variance_mode", VarianceMode.parse(self.variance_mode)
            )
            object.__setattr__(
                self,
                "zero_variance_policy",
                ZeroVariancePolicy.parse(self.zero_variance_policy),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if str(self.dtype) not in _DTYPES:
            raise ConfigError(f"dtype must be 'float64' or 'float32', got {self.dtype!r}")
        object.__setattr__(self, "dtype", str(self.dtype))

    @property
    def np_dtype(self) -> np.dtype:
        return _DTYPES[self.dtype]

    def as_dict(self) -> dict:
        return {
            "m": self.m,
            "variance_mode": self.variance_mode.value,
            "zero_variance_policy": self.zero_variance_policy.value,
            "dtype": self.dtype,
        }


@dataclass(frozen=True)
class SampleVerdict:
    """Classification of the ``k``-th sample (1-based).

    Score fields are ``None`` when undefined: always for ``k == 1``, and for
    zero-variance prefixes depending on the policy.
    """

    k: int
    xi: float | None
    zeta: float | None
    tau: float | None
    threshold: float | None
    outlier: bool
    degenerate: bool


def eccentricity(mu, x, sigma2: float, k: int) -> float:
    """``1/k + ||mu - x||**2 / (k * sigma2)``; requires ``k >= 2`` and ``sigma2 > 0``."""
    if k < 2:
        raise StateError(f"eccentricity needs k >= 2, got k={k}")
    if not sigma2 > 0:
        raise DegenerateVarianceError(f"eccentricity needs sigma2 > 0, got {sigma2!r}")
    x = as_sample(x)
    mu = as_sample(mu, x.shape[0])
    return float(_eccentricity(squared_distance(x, mu), sigma2, k))


def _eccentricity(dist2, sigma2, k: int):
    return 1 / k + dist2 / (k * sigma2)


def typicality(xi: float) -> float:
    return 1.0 - xi


def normalized_eccentricity(xi: float) -> float:
    return xi / 2


def outlier_threshold(m: float, k: int) -> float:
    """Chebyshev-style bound ``(m**2 + 1) / (2k)`` on the normalized eccentricity."""
    if not m > 0:
        raise ConfigError(f"m must be positive, got {m!r}")
    if k < 2:
        raise StateError(f"threshold is defined for k >= 2, got k={k}")
    return (m * m + 1) / (2 * k)


def _first_verdict() -> SampleVerdict:
    return SampleVerdict(1, None, None, None, None, False, True)


def _eccentricity_stage(
    k: int, dist2, sigma2, policy: ZeroVariancePolicy
) -> tuple[float | None, bool]:
    """Eccentricity and degenerate flag for ``k >= 2``."""
    if sigma2 > 0:
        return float(_eccentricity(dist2, sigma2, k)), False
    if policy is ZeroVariancePolicy.ONE_OVER_K and dist2 == 0:
        return 1 / k, True
    return None, True


def _decision_stage(
    k: int, xi: float | None, degenerate: bool, m: float
) -> SampleVerdict:
    threshold = outlier_threshold(m, k)
    if xi is None:
        return SampleVerdict(k, None, None, None, threshold, False, True)
    zeta = normalized_eccentricity(xi)
    return SampleVerdict(
        k=k,
        xi=xi,
        zeta=zeta,
        tau=typicality(xi),
        threshold=threshold,
        outlier=bool(zeta > threshold),
        degenerate=degenerate,
    )


def _step_validated(
    state: DetectorState, x: np.ndarray, config: DetectorConfig
) -> tuple[DetectorState, SampleVerdict]:
    k = state.k + 1
    if k == 1:
        return (
            DetectorState(1, x.copy(), x.dtype.type(0.0), state.clamped),
            _first_verdict(),
        )
    mu = _mean_step(k, state.mu, x)
    dist2 = squared_distance(x, mu)
    sigma2, clamped = clamp_variance(
        _variance_step(k, state.sigma2, dist2, config.variance_mode)
    )
    xi, degenerate = _eccentricity_stage(
        k, dist2, sigma2, config.zero_variance_policy
    )
    new_state = DetectorState(k, mu, sigma2, state.clamped + clamped)
    return new_state, _decision_stage(k, xi, degenerate, config.m)


def step(
    state: DetectorState, x, config: DetectorConfig | None = None
) -> tuple[DetectorState, SampleVerdict]:
    """Absorb one sample and classify it."""
    config = config or DetectorConfig()
    x = as_sample(x, state.dim, _state_dtype(state, config))
    return _step_validated(state, x, config)


def _state_dtype(state: DetectorState, config: DetectorConfig) -> np.dtype:
    if state.mu is not None and state.mu.dtype != config.np_dtype:
        raise StateError(
            f"state holds {state.mu.dtype} values but config asks for {config.dtype}"
        )
    return config.np_dtype


def run_stream(
    samples: Iterable, config: DetectorConfig | None = None
) -> Iterator[SampleVerdict]:
    """Yield one verdict per sample, in order, in a single pass.

    Only the O(N) detector state is retained, so arbitrarily long iterables
    can be consumed. A malformed sample raises with its 0-based position.
    """
    config = config or DetectorConfig()
    dtype = config.np_dtype
    state = DetectorState()
    for i, raw in enumerate(samples):
        x = as_sample(raw, state.dim, dtype, index=i)
        state, verdict = _step_validated(state, x, config)
        yield verdict


class TedaDetector:
    """Stateful convenience wrapper around :func:`step`.

    >>> det = TedaDetector(m=3)
    >>> det.update([0.0]).degenerate, det.update([2.0]).outlier
    (True, False)
    """

    def __init__(self, config: DetectorConfig | None = None, **kwargs) -> None:
        if config is not None and kwargs:
            raise TypeError("pass either a DetectorConfig or keyword options, not both")
        self.config = config or DetectorConfig(**kwargs)
        self.state = DetectorState()

    def update(self, x) -> SampleVerdict:
        self.state, verdict = step(self.state, x, self.config)
        return verdict

    def process(self, samples: Iterable) -> list[SampleVerdict]:
        verdicts = []
        for i, raw in enumerate(samples):
            x = as_sample(raw, self.state.dim, self.config.np_dtype, index=i)
            self.state, verdict = _step_validated(self.state, x, self.config)
            verdicts.append(verdict)
        return verdicts

    def reset(self) -> None:
        self.state = DetectorState()

    @property
    def k(self) -> int:
        return self.state.k


def batch_eccentricities(samples: Sequence | np.ndarray) -> np.ndarray:
    """Eccentricity of every sample w.r.t. the whole set (batch oracle).

    Uses the batch mean and the population variance, so for ``k >= 2``
    samples with positive variance the result sums to 2.
    """
    X = _as_matrix(samples)
    k = X.shape[0]
    if k < 2:
        raise StateError("batch eccentricity needs at least two samples")
    mu = X.sum(axis=0) / k
    d2 = ((X - mu) ** 2).sum(axis=1)
    sigma2 = d2.sum() / k
    if not sigma2 > 0:
        raise DegenerateVarianceError("all samples are identical")
    return 1 / k + d2 / (k * sigma2)
