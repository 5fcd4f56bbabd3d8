"""CSV sample streams, labeled fault segments and a synthetic fault generator.

Sample positions are 0-based throughout: the sample at position ``i`` is
classified by the verdict with ``k == i + 1``, and a :class:`FaultSegment`
``(start_k, end_k)`` covers positions ``start_k..end_k`` inclusive.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import os
from dataclasses import dataclass, field
from typing import IO, TYPE_CHECKING, Iterable, Iterator, Sequence, Union

import numpy as np

from .exceptions import ConfigError, ParseError

if TYPE_CHECKING:
    from .core import SampleVerdict

__all__ = [
    "format_value",
    "parse_csv_stream",
    "read_samples",
    "write_samples",
    "VERDICT_COLUMNS",
    "write_verdicts",
    "read_verdicts",
    "FaultSegment",
    "FaultShape",
    "FaultInjection",
    "SynthSpec",
    "LabeledStream",
    "generate",
    "DAMADICS_ACTUATOR1",
    "damadics_segments",
    "write_segments",
    "read_segments",
]

Source = Union[str, "os.PathLike[str]", bytes, IO[bytes], IO[str]]


def format_value(value) -> str:
    """Render a field for CSV output.

    Floats use the shortest repr that round-trips to the same 64-bit value,
    ``None`` becomes an empty cell and booleans are ``true``/``false``.
    """
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _open_text(source: Source) -> tuple[IO[str], bool]:
    if isinstance(source, (str, os.PathLike)):
        return open(source, newline="", encoding="utf-8"), True
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode("utf-8"), newline=""), True
    if isinstance(source, io.TextIOBase):
        return source, False
    return io.TextIOWrapper(source, encoding="utf-8", newline=""), False


def _parse_cell(cell: str) -> float | None:
    try:
        return float(cell)
    except ValueError:
        return None


def parse_csv_stream(source: Source) -> Iterator[np.ndarray]:
    """Lazily read one sample per CSV row.

    A first row in which no cell is numeric is treated as a header. Blank
    lines are skipped. Ragged rows, non-numeric cells and non-finite values
    raise :class:`ParseError` carrying the 1-based line number.
    """
    fh, owned = _open_text(source)
    try:
        reader = csv.reader(fh)
        width = None
        first = True
        for cells in reader:
            row = reader.line_num
            if not cells or all(not c.strip() for c in cells):
                continue
            values = [_parse_cell(c.strip()) for c in cells]
            if first:
                first = False
                if all(v is None for v in values):
                    width = len(cells)
                    continue
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise ParseError(f"expected {width} columns, got {len(cells)}", row)
            for col, (cell, v) in enumerate(zip(cells, values), start=1):
                if v is None:
                    raise ParseError(f"column {col}: non-numeric value {cell!r}", row)
                if not math.isfinite(v):
                    raise ParseError(f"column {col}: non-finite value {cell!r}", row)
            yield np.array(values, dtype=np.float64)
    finally:
        if owned:
            fh.close()


def read_samples(source: Source) -> np.ndarray:
    """Materialize a CSV stream as a ``(k, N)`` array (``(0, 0)`` if empty)."""
    rows = list(parse_csv_stream(source))
    if not rows:
        return np.empty((0, 0))
    return np.vstack(rows)


def write_samples(samples: Iterable, fh: IO[str], header: bool = True) -> int:
    """Write samples as CSV with an ``x1..xN`` header; return the row count."""
    writer = csv.writer(fh, lineterminator="\n")
    n = 0
    for row in samples:
        row = np.atleast_1d(np.asarray(row, dtype=np.float64))
        if n == 0 and header:
            writer.writerow([f"x{i + 1}" for i in range(row.shape[0])])
        writer.writerow([format_value(v) for v in row])
        n += 1
    return n


VERDICT_COLUMNS = ("k", "xi", "zeta", "tau", "threshold", "outlier", "degenerate")


def write_verdicts(verdicts: Iterable["SampleVerdict"], fh: IO[str]) -> int:
    """Write one ``k,xi,zeta,tau,threshold,outlier,degenerate`` row per verdict."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(VERDICT_COLUMNS)
    n = 0
    for v in verdicts:
        writer.writerow(
            [
                v.k,
                format_value(v.xi),
                format_value(v.zeta),
                format_value(v.tau),
                format_value(v.threshold),
                format_value(v.outlier),
                format_value(v.degenerate),
            ]
        )
        n += 1
    return n


@dataclass(frozen=True, order=True)
class FaultSegment:
    start_k: int
    end_k: int
    label: str = "fault"

    def __post_init__(self) -> None:
        if self.start_k < 0 or self.end_k < self.start_k:
            raise ConfigError(
                f"invalid segment [{self.start_k}, {self.end_k}]: need 0 <= start <= end"
            )

    def __contains__(self, index: int) -> bool:
        return self.start_k <= index <= self.end_k

    def __len__(self) -> int:
        return self.end_k - self.start_k + 1


def _check_segments(segments: Sequence[FaultSegment]) -> list[FaultSegment]:
    ordered = sorted(segments)
    for a, b in zip(ordered, ordered[1:]):
        if b.start_k <= a.end_k:
            raise ConfigError(f"segments {a} and {b} overlap")
    return ordered


class FaultShape(str, enum.Enum):
    LEVEL_SHIFT = "level-shift"
    RAMP = "ramp"
    SPIKE = "spike"


@dataclass(frozen=True)
class FaultInjection:
    """A fault applied over ``segment``.

    ``magnitude`` (scalar or per-dimension) is an absolute offset. A level
    shift adds it to every sample of the segment, a ramp grows linearly to
    it by the last sample, and a spike adds it to the first sample only.
    Use a negative magnitude for pressure drops.
    """

    segment: FaultSegment
    shape: FaultShape = FaultShape.LEVEL_SHIFT
    magnitude: float | Sequence[float] = 10.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "shape", FaultShape(self.shape))


@dataclass(frozen=True)
class SynthSpec:
    """Baseline-plus-noise stream with injected faults.

    ``noise`` is the per-dimension standard deviation; uniform noise is
    drawn on ``[-sqrt(3) * noise, sqrt(3) * noise]`` so both kinds share it.
    """

    length: int
    dims: int = 2
    level: float | Sequence[float] = 0.0
    noise: float | Sequence[float] = 1.0
    noise_kind: str = "gaussian"
    faults: Sequence[FaultInjection] = ()
    seed: int = 0

    def __post_init__(self) -> None:
        if self.length < 2:
            raise ConfigError(f"length must be >= 2, got {self.length}")
        if self.dims < 1:
            raise ConfigError(f"dims must be >= 1, got {self.dims}")
        if self.noise_kind not in ("gaussian", "uniform"):
            raise ConfigError(f"noise_kind must be 'gaussian' or 'uniform', got {self.noise_kind!r}")
        if np.any(self._per_dim(self.noise) < 0):
            raise ConfigError("noise amplitude must be >= 0")
        object.__setattr__(self, "faults", tuple(self.faults))
        segments = _check_segments([f.segment for f in self.faults])
        if segments and segments[-1].end_k >= self.length:
            raise ConfigError(
                f"segment {segments[-1]} exceeds stream length {self.length}"
            )

    def _per_dim(self, value) -> np.ndarray:
        arr = np.broadcast_to(np.asarray(value, dtype=np.float64), (self.dims,))
        return arr.copy()


@dataclass(frozen=True)
class LabeledStream:
    samples: np.ndarray
    segments: list[FaultSegment]
    seed: int
    faulty: np.ndarray = field(repr=False, default=None)

    def labels(self) -> np.ndarray:
        """Boolean mask of positions covered by a declared segment."""
        mask = np.zeros(len(self.samples), dtype=bool)
        for s in self.segments:
            mask[s.start_k : s.end_k + 1] = True
        return mask

    def __len__(self) -> int:
        return len(self.samples)


def generate(spec: SynthSpec) -> LabeledStream:
    """Draw a deterministic labeled stream from ``spec``."""
    rng = np.random.default_rng(spec.seed)
    level = spec._per_dim(spec.level)
    noise = spec._per_dim(spec.noise)
    shape = (spec.length, spec.dims)
    if spec.noise_kind == "gaussian":
        unit = rng.standard_normal(shape)
    else:
        unit = rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), shape)
    X = level + noise * unit
    faulty = np.zeros(spec.length, dtype=bool)
    for f in spec.faults:
        seg = f.segment
        magnitude = spec._per_dim(f.magnitude)
        if f.shape is FaultShape.LEVEL_SHIFT:
            X[seg.start_k : seg.end_k + 1] += magnitude
            faulty[seg.start_k : seg.end_k + 1] = True
        elif f.shape is FaultShape.RAMP:
            frac = np.arange(1, len(seg) + 1) / len(seg)
            X[seg.start_k : seg.end_k + 1] += frac[:, None] * magnitude
            faulty[seg.start_k : seg.end_k + 1] = True
        else:
            X[seg.start_k] += magnitude
            faulty[seg.start_k] = True
    return LabeledStream(
        samples=X,
        segments=_check_segments([f.segment for f in spec.faults]),
        seed=spec.seed,
        faulty=faulty,
    )


# Actuator-1 faults of the DAMADICS benchmark: item -> (start, end, fault, description).
DAMADICS_ACTUATOR1 = {
    1: (58800, 59800, "f18", "Partly opened bypass valve"),
    2: (57275, 57550, "f16", "Positioner supply pressure drop"),
    3: (58830, 58930, "f18", "Partly opened bypass valve"),
    4: (58520, 58625, "f18", "Partly opened bypass valve"),
    5: (54600, 54700, "f18", "Partly opened bypass valve"),
    6: (56670, 56770, "f16", "Positioner supply pressure drop"),
    7: (37780, 38400, "f17", "Unexpected pressure drop across the valve"),
}


def damadics_segments(item: int) -> FaultSegment:
    """Sample range and fault label of a DAMADICS actuator-1 fault item (1..7)."""
    try:
        start, end, label, _ = DAMADICS_ACTUATOR1[item]
    except (KeyError, TypeError):
        raise KeyError(
            f"unknown DAMADICS item {item!r}; expected one of {sorted(DAMADICS_ACTUATOR1)}"
        ) from None
    return FaultSegment(start, end, label)


SEGMENT_COLUMNS = ("start_k", "end_k", "label")


def write_segments(segments: Iterable[FaultSegment], fh: IO[str]) -> int:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(SEGMENT_COLUMNS)
    n = 0
    for s in segments:
        writer.writerow([s.start_k, s.end_k, s.label])
        n += 1
    return n


def read_segments(source: Source) -> list[FaultSegment]:
    """Read a ``start_k,end_k,label`` sidecar file."""
    fh, owned = _open_text(source)
    try:
        reader = csv.reader(fh)
        segments = []
        for cells in reader:
            row = reader.line_num
            if not cells:
                continue
            if row == 1 and [c.strip() for c in cells[:2]] == ["start_k", "end_k"]:
                continue
            if len(cells) not in (2, 3):
                raise ParseError(f"expected start_k,end_k,label, got {len(cells)} cells", row)
            try:
                start, end = int(cells[0]), int(cells[1])
            except ValueError:
                raise ParseError(f"non-integer segment bounds {cells[:2]!r}", row) from None
            label = cells[2].strip() if len(cells) == 3 else "fault"
            try:
                segments.append(FaultSegment(start, end, label))
            except ConfigError as exc:
                raise ParseError(str(exc), row) from None
        return _check_segments(segments)
    finally:
        if owned:
            fh.close()


def _parse_optional(cell: str, row: int, name: str) -> float | None:
    cell = cell.strip()
    if not cell:
        return None
    try:
        return float(cell)
    except ValueError:
        raise ParseError(f"{name}: non-numeric value {cell!r}", row) from None


def _parse_bool(cell: str, row: int, name: str) -> bool:
    cell = cell.strip().lower()
    if cell in ("true", "1"):
        return True
    if cell in ("false", "0"):
        return False
    raise ParseError(f"{name}: expected true/false, got {cell!r}", row)


def read_verdicts(source: Source) -> Iterator["SampleVerdict"]:
    """Lazily read a file written by :func:`write_verdicts`."""
    from .core import SampleVerdict

    fh, owned = _open_text(source)
    try:
        reader = csv.DictReader(fh)
        missing = set(VERDICT_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ParseError(f"missing columns {sorted(missing)}", 1)
        for rec in reader:
            row = reader.line_num
            try:
                k = int(rec["k"])
            except ValueError:
                raise ParseError(f"k: non-integer value {rec['k']!r}", row) from None
            yield SampleVerdict(
                k=k,
                xi=_parse_optional(rec["xi"], row, "xi"),
                zeta=_parse_optional(rec["zeta"], row, "zeta"),
                tau=_parse_optional(rec["tau"], row, "tau"),
                threshold=_parse_optional(rec["threshold"], row, "threshold"),
                outlier=_parse_bool(rec["outlier"], row, "outlier"),
                degenerate=_parse_bool(rec["degenerate"], row, "degenerate"),
            )
    finally:
        if owned:
            fh.close()
