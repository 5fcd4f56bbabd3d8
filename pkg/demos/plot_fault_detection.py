"""
Detecting an injected fault segment
===================================

A two-dimensional stream is generated with the same segment layout as
DAMADICS actuator-1 fault item 1 (samples 58800-59800, a partly opened
bypass valve). The detector runs with ``m = 3`` and the normalized
eccentricity is compared against the ``5/k`` threshold curve.
"""

# %%
# Build the stream. The fault is a level shift of ten noise standard
# deviations on both inputs.
import numpy as np

from tedastream import DetectorConfig, run_stream, score
from tedastream.ingest import FaultInjection, SynthSpec, damadics_segments, generate

segment = damadics_segments(1)
spec = SynthSpec(
    length=segment.end_k + 2000,
    dims=2,
    level=[0.5, 0.3],
    noise=0.01,
    faults=[FaultInjection(segment, "level-shift", 0.1)],
    seed=1,
)
stream = generate(spec)
print(f"{len(stream)} samples, fault {segment.label} at {segment.start_k}..{segment.end_k}")

# %%
# Run the detector and score it against the labeled segment.
verdicts = list(run_stream(stream.samples, DetectorConfig(m=3)))
metrics = score(verdicts, stream.segments)
first = metrics.segments[0]
print(f"detected: {first.detected}, latency: {first.latency} samples")
print(f"false alarms per 1000 normal samples: {metrics.false_alarm_rate:.3f}")

# %%
# Plot the inputs and the normalized eccentricity against 5/k.
k = np.array([v.k for v in verdicts[1:]])
zeta = np.array([v.zeta for v in verdicts[1:]])
threshold = np.array([v.threshold for v in verdicts[1:]])

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("matplotlib not installed; skipping the figure")
else:
    window = slice(segment.start_k - 1500, segment.end_k + 1500)
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(8, 6))
    ax1.plot(np.arange(len(stream))[window], stream.samples[window])
    ax1.set_ylabel("inputs")
    ax2.semilogy(k[window], zeta[window], "k", lw=0.8, label="normalized eccentricity")
    ax2.semilogy(k[window], threshold[window], "r", label="5/k (m=3)")
    ax2.axvspan(segment.start_k, segment.end_k, color="0.9")
    ax2.set_xlabel("k")
    ax2.legend()
    fig.savefig("fault_detection.png", dpi=120)
    print("wrote fault_detection.png")
