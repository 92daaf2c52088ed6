"""Command-line front end for the row-prefetch lab.

Subcommands: simulate (emit latency + trip CSVs), analyze (peak report
from a trace), sweep (elapsed vs prefetch size as TSV), fit (recover the
cost constants from measurements), recommend (tuned prefetch size under
a memory budget).

Exit codes: 0 success, 2 usage error, 3 malformed input (config, trace,
or samples file), 4 model error (unfittable or untunable data).  The
ROWFETCH_SEED environment variable overrides the config seed; a --seed
flag overrides both.  Same inputs and seed always produce byte-identical
outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import fetch_sim, model_fit, trace_analysis, tuner
from .config import ConfigError, RunConfig, load_config
from .core_model import FetchPlan, quantized_cost, reciprocal_cost, round_trips

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_MODEL = 4

SEED_ENV = "ROWFETCH_SEED"


def _effective_seed(cfg: RunConfig, flag_value: int | None) -> int:
    if flag_value is not None:
        return flag_value
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(SEED_ENV, f"expected an integer, got {env!r}") from None
    return cfg.seed


def _simulate_from(cfg: RunConfig, seed: int, jitter: float) -> fetch_sim.LatencyTrace:
    return fetch_sim.simulate_fetch(cfg.workload, cfg.network, cfg.server,
                                    cfg.driver, seed=seed, jitter=jitter)


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    seed = _effective_seed(cfg, args.seed)
    jitter = cfg.jitter if args.jitter is None else args.jitter
    trace = _simulate_from(cfg, seed, jitter)
    trace_path = Path(args.out_trace)
    trips_path = (Path(args.out_trips) if args.out_trips
                  else trace_path.with_name(trace_path.stem + "_trips.csv"))
    fetch_sim.write_trace_csv(trace, trace_path, trips_path)
    execution, retrieval = fetch_sim.stage_breakdown(trace)
    print(f"effective_prefetch: {trace.effective_prefetch}")
    print(f"trips: {len(trace.trip_log)}")
    print(f"total_elapsed_ms: {trace.total_elapsed_ms!r}")
    print(f"execution_ms: {execution!r}")
    print(f"retrieval_ms: {retrieval!r}")
    print(f"trace: {trace_path}")
    print(f"trip_log: {trips_path}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    samples = trace_analysis.read_trace_samples(args.trace)
    if samples:
        report = trace_analysis.analyze_trace(samples, median_ratio=args.median_ratio,
                                              sigma_k=args.sigma_k)
    else:
        report = trace_analysis.PeakReport((), None, (), None, 0.0)
    print(json.dumps({
        "peak_rows": list(report.peak_rows),
        "inferred_prefetch": report.inferred_prefetch,
        "inter_peak_gaps": list(report.inter_peak_gaps),
        "avg_trip_time": report.avg_trip_time,
        "confidence": report.confidence,
    }))
    return EXIT_OK


def _parse_f_range(spec: str) -> tuple[int, int]:
    try:
        lo_text, hi_text = spec.split(":", 1)
        lo, hi = int(lo_text), int(hi_text)
    except ValueError:
        raise ConfigError("--f-range", f"expected LO:HI, got {spec!r}") from None
    if lo < 1 or hi < lo:
        raise ConfigError("--f-range", f"need 1 <= LO <= HI, got {spec!r}")
    return lo, hi


def _sweep_elapsed(cfg: RunConfig, f: int, mode: str, seed: int, jitter: float,
                   fixed_k) -> tuple[float, int]:
    n = cfg.workload.total_records
    if mode == "sim":
        driver = fetch_sim.DriverSpec(
            recommended_prefetch=cfg.driver.recommended_prefetch,
            enforced_prefetch=f,
            default_prefetch=cfg.driver.default_prefetch,
            per_field_conversion=cfg.driver.per_field_conversion,
            request_overhead=cfg.driver.request_overhead,
        )
        trace = fetch_sim.simulate_fetch(cfg.workload, cfg.network, cfg.server,
                                         driver, seed=seed, jitter=jitter)
        return trace.total_elapsed_ms, len(trace.trip_log)
    trips = round_trips(n, f) if n else 0
    if mode == "quantized":
        return quantized_cost(FetchPlan(f, n), fixed_k), trips
    return reciprocal_cost(n, f, fixed_k.k1), trips


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    seed = _effective_seed(cfg, args.seed)
    jitter = cfg.jitter if args.jitter is None else args.jitter
    lo, hi = _parse_f_range(args.f_range)
    fixed_k = None
    if args.mode in ("quantized", "reciprocal"):
        # Theoretical curves are drawn with constants calibrated once at
        # the driver's size in force, then swept across f.
        fixed_k = fetch_sim.cost_constants(cfg.workload, cfg.network, cfg.server,
                                           cfg.driver,
                                           fetch_sim.effective_prefetch(cfg.driver))
    rows = []
    for f in range(lo, hi + 2):  # one past hi for the last forward difference
        rows.append((f,) + _sweep_elapsed(cfg, f, args.mode, seed, jitter, fixed_k))
    with open(args.out, "w") as fh:
        fh.write("# f\telapsed_ms\ttrips\tslope_ms\n")
        for (f, elapsed, trips), (_, nxt, _) in zip(rows, rows[1:]):
            fh.write(f"{f}\t{elapsed!r}\t{trips}\t{elapsed - nxt!r}\n")
    print(f"sweep: {args.out} ({hi - lo + 1} sizes, mode {args.mode})")
    return EXIT_OK


def cmd_fit(args) -> int:
    samples = model_fit.read_fit_samples(args.samples)
    result = model_fit.fit_cost_model(samples)
    print(model_fit.result_json(result))
    return EXIT_OK


def cmd_recommend(args) -> int:
    cfg = load_config(args.config)
    n = cfg.workload.total_records
    budget = tuner.MemoryBudget(args.budget_bytes, cfg.workload.record_bytes)
    rec = tuner.recommend(
        n, budget,
        lambda f: fetch_sim.cost_constants(cfg.workload, cfg.network, cfg.server,
                                           cfg.driver, f),
        zero_run=args.zero_run)
    print(json.dumps(tuner.recommendation_json_dict(rec)))
    print()
    print(tuner.render_recommendation(n, rec, budget))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rowfetch",
        description="Row-prefetch performance lab: simulate, analyze, sweep, fit, recommend.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate one fetch and write trace CSVs")
    p.add_argument("config", help="config file path or bundled preset name")
    p.add_argument("--out-trace", required=True, help="per-row samples CSV path")
    p.add_argument("--out-trips", help="trip component CSV path "
                                       "(default: <out-trace>_trips.csv)")
    p.add_argument("--seed", type=int, help="override config / env seed")
    p.add_argument("--jitter", type=float, help="override config jitter")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("analyze", help="peak report for a latency trace CSV")
    p.add_argument("trace", help="row_index,elapsed_ms CSV path")
    p.add_argument("--median-ratio", type=float, default=10.0,
                   help="peak threshold as a multiple of the trace median")
    p.add_argument("--sigma-k", type=float, default=3.0,
                   help="peak threshold in standard deviations above the mean")
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("sweep", help="elapsed vs prefetch size over a range")
    p.add_argument("config", help="config file path or bundled preset name")
    p.add_argument("--f-range", required=True, help="inclusive range LO:HI")
    p.add_argument("--out", required=True, help="output TSV path")
    p.add_argument("--mode", choices=("sim", "quantized", "reciprocal"),
                   default="sim", help="simulate per size, or draw a model curve")
    p.add_argument("--seed", type=int, help="override config / env seed")
    p.add_argument("--jitter", type=float, help="override config jitter")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("fit", help="fit the cost constants to f,elapsed_ms samples")
    p.add_argument("samples", help="samples CSV with a `# N=<count>` comment")
    p.set_defaults(fn=cmd_fit)

    p = sub.add_parser("recommend", help="tuned prefetch size under a memory budget")
    p.add_argument("config", help="config file path or bundled preset name")
    p.add_argument("--budget-bytes", type=int, required=True,
                   help="client prefetch cache ceiling in bytes")
    p.add_argument("--zero-run", type=int, default=tuner.DEFAULT_ZERO_RUN,
                   help="sizes of sustained zero trip decrease marking the threshold")
    p.set_defaults(fn=cmd_recommend)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, trace_analysis.TraceFormatError, model_fit.SampleFormatError,
            FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (model_fit.FitError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
