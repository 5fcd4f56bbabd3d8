"""Recursive mean/variance updates and the batch oracles that check them.

Two variance recursions are available through :class:`VarianceMode`:

``PAPER``
    ``s_k = (k-1)/k * s_{k-1} + 1/k * ||x_k - mu_k||**2``. This is the
    recursion the hardware implements. It does *not* converge to the
    population variance (for the stream ``0, 2`` it gives 0.5, not 1).

``EXACT``
    ``s_k = (k-1)/k * s_{k-1} + 1/(k-1) * ||x_k - mu_k||**2`` for ``k >= 2``,
    which is the Welford update written in terms of the new mean and yields
    the population variance exactly (up to rounding).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .exceptions import InputError, StateError, StreamShapeError

__all__ = [
    "VarianceMode",
    "DetectorState",
    "as_sample",
    "squared_distance",
    "update_mean",
    "update_variance",
    "clamp_variance",
    "batch_mean",
    "batch_variance",
    "unrolled_oracle",
]


class VarianceMode(str, enum.Enum):
    PAPER = "paper"
    EXACT = "exact"

    @classmethod
    def parse(cls, value: "VarianceMode | str") -> "VarianceMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(
                f"unknown variance mode {value!r}; expected 'paper' or 'exact'"
            ) from None


@dataclass(frozen=True)
class DetectorState:
    """Recursive state carried between samples.

    ``k`` counts the samples already absorbed. ``mu`` is ``None`` until the
    first sample arrives. ``clamped`` counts how many times a negative
    variance produced by rounding was reset to zero.
    """

    k: int = 0
    mu: np.ndarray | None = None
    sigma2: float = 0.0
    clamped: int = 0

    def __post_init__(self) -> None:
        if self.k < 0:
            raise StateError(f"k must be >= 0, got {self.k}")
        if self.k == 0 and self.mu is not None:
            raise StateError("state with k=0 cannot carry a mean")
        if self.k >= 1 and self.mu is None:
            raise StateError(f"state with k={self.k} has no mean")
        if self.sigma2 < 0:
            raise StateError(f"negative variance {self.sigma2!r} in state")

    @property
    def dim(self) -> int | None:
        return None if self.mu is None else int(self.mu.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DetectorState):
            return NotImplemented
        if self.k != other.k or self.clamped != other.clamped:
            return False
        if self.sigma2 != other.sigma2:
            return False
        if self.mu is None or other.mu is None:
            return self.mu is other.mu
        return self.mu.dtype == other.mu.dtype and np.array_equal(self.mu, other.mu)

    __hash__ = None  # type: ignore[assignment]


def as_sample(
    x: Iterable[float] | float,
    dim: int | None = None,
    dtype: np.dtype | type = np.float64,
    index: int | None = None,
) -> np.ndarray:
    """Validate ``x`` and return it as a 1-D array of ``dtype``.

    Raises :class:`InputError` for non-numeric or non-finite entries and
    :class:`StreamShapeError` when the length differs from ``dim``.
    """
    try:
        arr = np.array(x, dtype=dtype)
    except (TypeError, ValueError) as exc:
        raise InputError(f"non-numeric sample: {exc}", index) from None
    if arr.ndim == 0:
        arr = arr.reshape(1)
    elif arr.ndim != 1:
        raise StreamShapeError(f"sample must be 1-D, got shape {arr.shape}", index)
    if arr.size == 0:
        raise StreamShapeError("sample must have at least one element", index)
    if dim is not None and arr.shape[0] != dim:
        raise StreamShapeError(
            f"expected {dim} values, got {arr.shape[0]}", index
        )
    if not np.all(np.isfinite(arr)):
        raise InputError("sample contains NaN or infinity", index)
    return arr


def squared_distance(x: np.ndarray, mu: np.ndarray):
    d = x - mu
    return d @ d


def update_mean(state: DetectorState, x: np.ndarray) -> np.ndarray:
    """Return the running mean after absorbing ``x`` as sample ``state.k + 1``."""
    x = as_sample(x, state.dim, _dtype_of(state, x))
    return _mean_step(state.k + 1, state.mu, x)


def _mean_step(k: int, mu_prev: np.ndarray | None, x: np.ndarray) -> np.ndarray:
    if k == 1:
        return x.copy()
    return ((k - 1) / k) * mu_prev + (1 / k) * x


def update_variance(
    state: DetectorState,
    x: np.ndarray,
    mu_new: np.ndarray,
    mode: VarianceMode | str = VarianceMode.PAPER,
):
    """Return the running variance after absorbing ``x``.

    ``state`` is the state *before* ``x`` and ``mu_new`` the mean already
    updated with ``x``. The first sample always yields 0.
    """
    mode = VarianceMode.parse(mode)
    dtype = _dtype_of(state, x)
    x = as_sample(x, state.dim, dtype)
    mu_new = np.asarray(mu_new, dtype=dtype)
    if mu_new.shape != x.shape:
        raise StreamShapeError(
            f"mean has shape {mu_new.shape}, sample has shape {x.shape}"
        )
    k = state.k + 1
    if k == 1:
        return dtype.type(0.0)
    return _variance_step(k, dtype.type(state.sigma2), squared_distance(x, mu_new), mode)


def _variance_step(k: int, sigma2_prev, dist2, mode: VarianceMode):
    # Shared with the pipeline simulator so both paths round identically.
    if k == 1:
        return type(dist2)(0.0)
    if mode is VarianceMode.PAPER:
        return ((k - 1) / k) * sigma2_prev + (1 / k) * dist2
    return ((k - 1) / k) * sigma2_prev + (1 / (k - 1)) * dist2


def clamp_variance(value) -> tuple[float, bool]:
    """Reset a negative variance to zero; report whether a clamp happened."""
    if value < 0:
        return type(value)(0.0), True
    return value, False


def _dtype_of(state: DetectorState, x) -> np.dtype:
    if state.mu is not None:
        return state.mu.dtype
    if isinstance(x, np.ndarray) and x.dtype in (np.float32, np.float64):
        return x.dtype
    return np.dtype(np.float64)


def _as_matrix(samples: Sequence[Iterable[float]] | np.ndarray) -> np.ndarray:
    if isinstance(samples, np.ndarray) and samples.ndim == 2 and samples.shape[1] > 0:
        X = np.asarray(samples, dtype=np.float64)
        if X.shape[0] == 0:
            raise ValueError("at least one sample is required")
        if not np.all(np.isfinite(X)):
            bad = int(np.flatnonzero(~np.isfinite(X).all(axis=1))[0])
            raise InputError("sample contains NaN or infinity", bad)
        return X
    rows = [as_sample(s, index=i) for i, s in enumerate(samples)]
    if not rows:
        raise ValueError("at least one sample is required")
    dim = rows[0].shape[0]
    for i, r in enumerate(rows):
        if r.shape[0] != dim:
            raise StreamShapeError(f"expected {dim} values, got {r.shape[0]}", i)
    return np.vstack(rows)


def batch_mean(samples: Sequence[Iterable[float]] | np.ndarray) -> np.ndarray:
    """Componentwise arithmetic mean of all samples."""
    X = _as_matrix(samples)
    return X.sum(axis=0) / X.shape[0]


def batch_variance(
    samples: Sequence[Iterable[float]] | np.ndarray, mu: Iterable[float]
) -> float:
    """Population scalar variance ``1/k * sum ||x_i - mu||**2``."""
    X = _as_matrix(samples)
    mu = as_sample(mu, X.shape[1])
    return float(((X - mu) ** 2).sum() / X.shape[0])


def unrolled_oracle(
    samples: Sequence[Iterable[float]] | np.ndarray,
    mode: VarianceMode | str = VarianceMode.PAPER,
) -> list[tuple[np.ndarray, float]]:
    """Evaluate the recursions in closed form, one entry per prefix.

    Means come from prefix sums rather than the recursion. Variances are the
    unrolled sums

    * paper:  ``s_k = 1/k * sum_{i<=k} ||x_i - mu_i||**2``
    * exact:  ``s_k = 1/k * sum_{2<=i<=k} i/(i-1) * ||x_i - mu_i||**2``

    where ``mu_i`` is the mean of the first ``i`` samples.
    """
    mode = VarianceMode.parse(mode)
    X = _as_matrix(samples)
    counts = np.arange(1, X.shape[0] + 1, dtype=np.float64)
    mus = np.cumsum(X, axis=0) / counts[:, None]
    d2 = ((X - mus) ** 2).sum(axis=1)
    if mode is VarianceMode.PAPER:
        weights = np.ones_like(counts)
    else:
        weights = np.zeros_like(counts)
        weights[1:] = counts[1:] / (counts[1:] - 1)
    sigma2 = np.cumsum(weights * d2) / counts
    return [(mus[i], float(sigma2[i])) for i in range(X.shape[0])]
