"""Command-line entry point: ``tedastream <command> [options]``.

Commands
--------
detect        classify every row of a CSV sample file
simulate      run the cycle-level pipeline model and print its timing summary
synth         write a synthetic fault-injected stream plus its segment sidecar
bench         time the detector and print a JSON report
score         score verdicts against a segment sidecar, JSON report
oracle-check  run the randomized property suite
"""

from __future__ import annotations

import argparse
import contextlib
import json
import sys
from pathlib import Path
from typing import IO, Iterator, Sequence

from .core import DetectorConfig, run_stream
from .evaluation import bench, bench_parallel, score
from .exceptions import TedaError
from .ingest import (
    DAMADICS_ACTUATOR1,
    FaultInjection,
    FaultSegment,
    SynthSpec,
    damadics_segments,
    generate,
    parse_csv_stream,
    read_samples,
    read_segments,
    read_verdicts,
    write_samples,
    write_segments,
    write_verdicts,
)
from .pipeline import TimingModel, simulate, write_trace
from .properties import check_all


@contextlib.contextmanager
def _output(path: str | None) -> Iterator[IO[str]]:
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def _config(args: argparse.Namespace) -> DetectorConfig:
    return DetectorConfig(
        m=args.m,
        variance_mode=args.variance_mode,
        zero_variance_policy=args.zero_variance,
        dtype=args.dtype,
    )


def _emit_json(payload: dict, path: str | None = None) -> None:
    line = json.dumps(payload, separators=(",", ":"))
    print(line)
    if path is not None:
        Path(path).write_text(line + "\n", encoding="utf-8")


def cmd_detect(args: argparse.Namespace) -> int:
    config = _config(args)
    with _output(args.output) as fh:
        write_verdicts(run_stream(parse_csv_stream(args.input), config), fh)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _config(args)
    model = TimingModel(args.tc_ns)
    with _output(args.output) as fh:
        n = write_trace(simulate(parse_csv_stream(args.input), config), fh)
    summary = model.summary()
    summary["samples"] = n
    summary["cycles"] = n + 3 if n else 0
    print(
        f"d = {summary['initial_delay_ns']:g} ns, "
        f"t_TEDA = {summary['sample_period_ns']:g} ns, "
        f"throughput = {summary['throughput_sps'] / 1e6:.2f} MSPS",
        file=sys.stderr,
    )
    _emit_json(summary, args.summary)
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    if args.damadics_item is not None:
        segment = damadics_segments(args.damadics_item)
    else:
        start = args.fault_start if args.fault_start is not None else args.length // 2
        end = args.fault_end if args.fault_end is not None else start + 99
        segment = FaultSegment(start, end, args.label)
    length = max(args.length, segment.end_k + 1)
    magnitude = args.magnitude if args.magnitude is not None else 10.0 * args.noise
    faults = [] if args.no_fault else [FaultInjection(segment, args.shape, magnitude)]
    spec = SynthSpec(
        length=length,
        dims=args.dims,
        noise=args.noise,
        noise_kind=args.noise_kind,
        faults=faults,
        seed=args.seed,
    )
    stream = generate(spec)
    seg_path = args.segments or _sidecar_path(args.output)
    with open(args.output, "w", newline="", encoding="utf-8") as fh:
        write_samples(stream.samples, fh)
    with open(seg_path, "w", newline="", encoding="utf-8") as fh:
        write_segments(stream.segments, fh)
    print(f"wrote {len(stream)} samples to {args.output}, segments to {seg_path}", file=sys.stderr)
    return 0


def _sidecar_path(samples_path: str) -> str:
    p = Path(samples_path)
    return str(p.with_name(p.stem + ".segments.csv"))


def cmd_bench(args: argparse.Namespace) -> int:
    config = _config(args)
    if args.input is not None:
        samples = read_samples(args.input)
    else:
        samples = generate(SynthSpec(length=args.length, dims=args.dims, seed=args.seed)).samples
    if args.streams > 1:
        report = bench_parallel([samples] * args.streams, config, args.reps)
    else:
        report = bench(samples, config, args.reps, t_c_ns=args.tc_ns)
    _emit_json(report.to_dict(), args.output)
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    segments = read_segments(args.segments)
    if args.verdicts is not None:
        verdicts = read_verdicts(args.verdicts)
    elif args.input is not None:
        verdicts = run_stream(parse_csv_stream(args.input), _config(args))
    else:
        raise SystemExit("score: pass --verdicts or --input")
    metrics = score(verdicts, segments)
    _emit_json(metrics.to_dict(), args.output)
    return 0


def cmd_oracle_check(args: argparse.Namespace) -> int:
    results = check_all(args.seed, args.variance_mode, args.streams)
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.ok]
    print(f"{len(results) - len(failed)}/{len(results)} properties passed or skipped")
    return 1 if failed else 0


def _detector_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--m", type=float, default=3.0, help="threshold multiplier (default 3)")
    p.add_argument("--variance-mode", choices=("paper", "exact"), default="paper")
    p.add_argument(
        "--zero-variance", choices=("one-over-k", "not-outlier"), default="one-over-k"
    )
    p.add_argument("--dtype", choices=("float64", "float32"), default="float64")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tedastream", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="classify a CSV stream")
    p.add_argument("--input", required=True)
    p.add_argument("--output", default="-")
    _detector_options(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("simulate", help="cycle-level pipeline run plus timing model")
    p.add_argument("--input", required=True)
    p.add_argument("--output", default="-", help="trace CSV")
    p.add_argument("--summary", help="also write the timing summary JSON here")
    p.add_argument("--tc-ns", type=float, default=138.0, help="critical-path time in ns")
    _detector_options(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("synth", help="generate a labeled synthetic stream")
    p.add_argument("--output", required=True, help="sample CSV")
    p.add_argument("--segments", help="segment sidecar (default <output>.segments.csv)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--length", type=int, default=10_000)
    p.add_argument("--dims", type=int, default=2)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--noise-kind", choices=("gaussian", "uniform"), default="gaussian")
    p.add_argument("--shape", choices=("level-shift", "ramp", "spike"), default="level-shift")
    p.add_argument("--magnitude", type=float, help="fault offset (default 10 x noise)")
    p.add_argument("--fault-start", type=int)
    p.add_argument("--fault-end", type=int)
    p.add_argument("--label", default="f18")
    p.add_argument(
        "--damadics-item", type=int, choices=sorted(DAMADICS_ACTUATOR1),
        help="place the fault at a DAMADICS actuator-1 segment",
    )
    p.add_argument("--no-fault", action="store_true")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="measure software throughput")
    p.add_argument("--input", help="sample CSV (default: synthetic stream)")
    p.add_argument("--output", help="also write the JSON report here")
    p.add_argument("--length", type=int, default=100_000)
    p.add_argument("--dims", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--streams", type=int, default=1, help="independent streams in parallel")
    p.add_argument("--tc-ns", type=float, default=138.0)
    _detector_options(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("score", help="detection metrics against labeled segments")
    p.add_argument("--segments", required=True)
    p.add_argument("--verdicts", help="verdict CSV written by detect")
    p.add_argument("--input", help="sample CSV to detect on the fly")
    p.add_argument("--output", help="also write the JSON report here")
    _detector_options(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("oracle-check", help="randomized property suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--variance-mode", choices=("paper", "exact"), default="paper")
    p.add_argument("--streams", type=int, default=10, help="random streams per property")
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (TedaError, OSError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"tedastream {args.command}: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
