"""
Walking through the pipeline
============================

Each call to ``tick`` is one clock edge. A sample presented at cycle ``t``
is classified at cycle ``t + 3``; with back-to-back input one verdict
leaves the pipeline every cycle.
"""

import numpy as np

from tedastream import DetectorConfig, PipelineState, TimingModel, run_stream, simulate, tick
from tedastream.pipeline import initial_delay, sample_period, throughput

rng = np.random.default_rng(3)
samples = list(rng.normal(size=(5, 2)))
inputs = samples[:2] + [None] + samples[2:]  # one bubble after the second sample

# %%
# Register occupancy per cycle (MEAN, VARIANCE, ECCENTRICITY, OUTLIER).
state = PipelineState()
config = DetectorConfig()
for x in inputs + [None] * 3:
    cycle = state.cycle
    state, verdict = tick(state, x, config)
    stages = "".join("#" if busy else "." for busy in state.occupancy)
    out = f"verdict k={verdict.k}" if verdict else ""
    print(f"cycle {cycle:2d}  in={'x' if x is not None else '-'}  {stages}  {out}")

# %%
# The pipelined verdicts match the sequential detector exactly.
trace = list(simulate(inputs, config))
assert [v for _, v in trace] == list(run_stream(samples, config))

# %%
# Timing model for a 138 ns critical path.
model = TimingModel(138.0)
print(f"initial delay {initial_delay(model):.0f} ns, "
      f"one sample every {sample_period(model):.0f} ns, "
      f"{throughput(model) / 1e6:.2f} MSPS")
