"""
Software throughput
===================

Times the sequential detector on a pre-generated stream and prints the
report next to the hardware timing model's prediction.
"""

from tedastream import DetectorConfig, bench
from tedastream.ingest import SynthSpec, generate

samples = generate(SynthSpec(length=200_000, dims=2, seed=0)).samples
report = bench(samples, DetectorConfig(m=3), repetitions=3, t_c_ns=138.0)

print(f"software: {report.throughput_sps:,.0f} samples/s "
      f"({report.per_sample_s * 1e6:.2f} us per sample, median of {report.repetitions})")
print(f"pipeline model at 138 ns: {report.model_throughput_sps:,.0f} samples/s")
print(report.to_json())
