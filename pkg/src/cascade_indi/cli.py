"""Command-line experiment runner.

Exit status: 0 success, 2 configuration or input error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import csv
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import builtin_names, load_config
from .errors import ConfigError, ContractViolation, NumericDivergence, SchemaError
from .inner import AttitudeGains, closed_loop_poles
from .metrics import aggregate, metrics_from_trace
from .trace import Trace

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _write_rows(path, rows, fieldnames=None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fieldnames = fieldnames or list(rows[0])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=fieldnames)
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{v:.17g}" if isinstance(v, float) else v) for k, v in r.items()})
    return path


def format_pole(p):
    if abs(p.imag) < 1e-12:
        return f"{p.real:.6g}"
    return f"{p.real:.6g} {'+' if p.imag >= 0 else '-'} {abs(p.imag):.6g}i"


def _out_dir(args, cfg):
    return Path(args.out) if args.out else Path(cfg.scenario.output) / cfg.scenario.name


def _run_one(cfg):
    from .sim.scenario import run_scenario
    trace = run_scenario(cfg)
    return trace, metrics_from_trace(trace).as_row()


def _sweep_job(cfg):
    # worker entry point: traces stay in the worker, only metrics come back
    return _run_one(cfg)[1]


def cmd_run(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.replace(scenario={"seed": args.seed})
    out = _out_dir(args, cfg)
    trace, row = _run_one(cfg)
    trace.to_csv(out / "trace.csv")
    _write_rows(out / "metrics.csv", [row])
    print(f"{cfg.scenario.name}: {len(trace)} ticks, peak error n/e/d = "
          f"{row['peak_n']:.4f}/{row['peak_e']:.4f}/{row['peak_d']:.4f} m -> {out}")
    return EXIT_OK


def sweep_configs(cfg, repetitions, seed_base):
    return [cfg.replace(scenario={"seed": seed_base + i}) for i in range(repetitions)]


def run_sweep(cfg, repetitions, seed_base=0, jobs=1):
    """Metric rows for ``repetitions`` consecutive seeds, in seed order."""
    cfgs = sweep_configs(cfg, repetitions, seed_base)
    if jobs > 1 and repetitions > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_job, cfgs))
    return [_sweep_job(c) for c in cfgs]


def cmd_sweep(args):
    if args.repetitions < 1:
        raise ConfigError("--repetitions must be at least 1")
    cfg = load_config(args.config)
    out = _out_dir(args, cfg)
    rows = run_sweep(cfg, args.repetitions, args.seed_base, args.jobs)
    runs = [{"seed": args.seed_base + i, **r} for i, r in enumerate(rows)]
    _write_rows(out / "sweep_runs.csv", runs)
    agg = aggregate(rows)
    summary = {}
    for k, (mean, std) in agg.items():
        summary[f"{k}_mean"] = mean
        summary[f"{k}_std"] = std
    _write_rows(out / "sweep_summary.csv", [summary])
    for k in ("peak_n", "peak_e", "peak_horizontal"):
        mean, std = agg[k]
        print(f"{k}: {mean:.4f} +- {std:.4f} m over {args.repetitions} runs")
    return EXIT_OK


def cmd_poles(args):
    gains = AttitudeGains(args.k_eta, args.k_omega)
    for p in closed_loop_poles(gains, args.alpha, args.ts):
        print(format_pole(p))
    return EXIT_OK


def cmd_step_response(args):
    from .sim.scenario import attitude_step_experiment
    cfg = load_config(args.config)
    exp = attitude_step_experiment(cfg)
    out = _out_dir(args, cfg)
    rows = [{"tick": i + 1, "time_s": float(t), "measured": float(m), "designed": float(d),
             "deviation": float((m - d) / exp.magnitude)}
            for i, (t, m, d) in enumerate(zip(exp.time, exp.measured, exp.expected))]
    _write_rows(out / "step_response.csv", rows)
    print(f"max deviation {100 * exp.max_deviation:.3f}% of the step -> {out}")
    return EXIT_OK


def compare_rows(row_a, row_b):
    keys = [k for k in row_a if k in row_b]
    return [{"metric": k, "a": row_a[k], "b": row_b[k], "difference": row_a[k] - row_b[k]}
            for k in keys]


def cmd_compare(args):
    try:
        traces = [Trace.from_csv(p) for p in (args.trace_a, args.trace_b)]
    except OSError as exc:
        raise ConfigError(f"cannot read trace: {exc}") from None
    row_a, row_b = (metrics_from_trace(tr).as_row() for tr in traces)
    rows = compare_rows(row_a, row_b)
    out = Path(args.out or ".") / "compare.csv"
    _write_rows(out, rows, ["metric", "a", "b", "difference"])
    for r in rows:
        if r["metric"] in ("peak_n", "peak_e", "peak_d", "peak_horizontal"):
            print(f"{r['metric']}: {r['a']:.4f} vs {r['b']:.4f} (difference {r['difference']:+.4f})")
    return EXIT_OK


def cmd_scenarios(args):
    for name in builtin_names():
        print(name)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="cascade-indi", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one scenario, write trace.csv and metrics.csv")
    r.add_argument("config", help="config file or bundled scenario name")
    r.add_argument("--seed", type=int)
    r.add_argument("--out", help="output directory (default <output>/<name>)")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="repeat a scenario over consecutive seeds")
    s.add_argument("config")
    s.add_argument("--repetitions", type=int, default=7)
    s.add_argument("--seed-base", type=int, default=0)
    s.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    o = sub.add_parser("poles", help="closed-loop poles of the designed attitude loop")
    o.add_argument("--k-omega", type=float, default=28.0)
    o.add_argument("--k-eta", type=float, default=10.7)
    o.add_argument("--alpha", type=float, default=0.1)
    o.add_argument("--ts", type=float, default=1.0 / 512)
    o.set_defaults(func=cmd_poles)

    t = sub.add_parser("step-response", help="simulated vs designed attitude step")
    t.add_argument("config")
    t.add_argument("--out")
    t.set_defaults(func=cmd_step_response)

    c = sub.add_parser("compare", help="paired-difference metrics of two traces")
    c.add_argument("trace_a")
    c.add_argument("trace_b")
    c.add_argument("--out")
    c.set_defaults(func=cmd_compare)

    sub.add_parser("scenarios", help="list bundled scenarios").set_defaults(func=cmd_scenarios)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SchemaError, ContractViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericDivergence as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
