"""Streaming outlier detection with recursive eccentricity and typicality.

Core entry points are :func:`run_stream` (sequential detector),
:func:`simulate` (cycle-level pipeline model) and :func:`generate`
(labeled synthetic streams).
"""

from .core import (
    DetectorConfig,
    SampleVerdict,
    TedaDetector,
    ZeroVariancePolicy,
    batch_eccentricities,
    eccentricity,
    normalized_eccentricity,
    outlier_threshold,
    run_stream,
    step,
    typicality,
)
from .evaluation import BenchReport, DetectionMetrics, bench, bench_parallel, score
from .exceptions import (
    ConfigError,
    DegenerateVarianceError,
    InputError,
    ParseError,
    PipelineInvariantError,
    StateError,
    StreamShapeError,
    TedaError,
)
from .ingest import (
    FaultInjection,
    FaultSegment,
    FaultShape,
    LabeledStream,
    SynthSpec,
    damadics_segments,
    generate,
    parse_csv_stream,
)
from .pipeline import (
    PipelineState,
    TimingModel,
    initial_delay,
    sample_period,
    simulate,
    throughput,
    tick,
)
from .stats import (
    DetectorState,
    VarianceMode,
    batch_mean,
    batch_variance,
    unrolled_oracle,
    update_mean,
    update_variance,
)

__version__ = "0.1.0"
