"""Command line entry point: gen, sample, analyze, explore, experiment, verify."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from dcmlab.degseq import FamilySpec, build_family, format_counts, format_degree_sequence, read_degree_sequence
from dcmlab.explore import explore_out_component
from dcmlab.harness.experiment import ConfigError, ExperimentConfig, n_sweep, run_experiment
from dcmlab.sampler import format_edge_list, read_edge_list, sample_configuration, sample_preheart
from dcmlab.scc import analyze

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ORACLE = 3
EXIT_IO = 4


def _emit(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_gen(args) -> int:
    spec = FamilySpec(args.kind, args.n, args.q, args.r_target)
    seq = build_family(spec, args.seed)
    _emit(format_counts(seq) if args.counts else format_degree_sequence(seq), args.output)
    return EXIT_OK


def cmd_sample(args) -> int:
    seq = read_degree_sequence(args.degrees)
    rng = np.random.default_rng(args.seed)
    if args.model == "preheart":
        g = sample_preheart(seq, rng)
    else:
        g = sample_configuration(seq, rng).graph()
    _emit(format_edge_list(g), args.output)
    return EXIT_OK


def cmd_analyze(args) -> int:
    g = read_edge_list(args.edges)
    cen = analyze(g, method=args.method, cycle_floor=args.cycle_floor)
    windows = None
    if args.window:
        lo, hi = args.window
        windows = {"window": (lo, hi)}
    _emit(cen.to_json(windows, top=args.top) + "\n", args.output)
    return EXIT_OK


def cmd_explore(args) -> int:
    seq = read_degree_sequence(args.degrees)
    rng = np.random.default_rng(args.seed)
    tr = explore_out_component(seq, args.start, rng, args.cap, args.drift_floor, args.order)
    _emit(tr.to_csv(), args.output)
    print(f"# stopped: {tr.reason} at t={tr.tau}, explored {len(tr.explored)} vertices", file=sys.stderr)
    return EXIT_OK


def cmd_experiment(args) -> int:
    with open(args.config) as fh:
        config = ExperimentConfig.from_json(fh.read())
    overrides = {}
    if args.parallelism is not None:
        overrides["parallelism"] = args.parallelism
    if args.trials_csv:
        overrides["trials_csv"] = args.trials_csv
    if args.summary_json:
        overrides["summary_json"] = args.summary_json
    if overrides:
        config = ExperimentConfig.from_dict({**config.to_dict(), **overrides})
    res = run_experiment(config)
    out = {"summary": res.summary}
    if args.sweep:
        out["sweep"] = n_sweep(config, args.sweep)
    if not config.summary_json or args.sweep:
        print(json.dumps(out if args.sweep else res.summary, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_verify(args) -> int:
    from dcmlab.catalog import run_verify

    results = run_verify(args.suite)
    for r in results:
        print(r.line())
        for v in r.violations[:5]:
            print(f"    {v}")
    return EXIT_OK if all(r.ok for r in results) else EXIT_ORACLE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dcmlab", description="Directed configuration model simulation lab")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="emit a degree sequence file")
    g.add_argument("--kind", choices=["mix", "poissonized"], default="mix")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--q", type=float, required=True, help="target Q in (-1, 0]")
    g.add_argument("--r-target", type=float, default=4 / 9)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--counts", action="store_true", help="write the compact @counts format")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("sample", help="sample a graph and emit its edge list")
    s.add_argument("degrees")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--model", choices=["configuration", "preheart"], default="configuration")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_sample)

    a = sub.add_parser("analyze", help="SCC census of an edge-list file")
    a.add_argument("edges")
    a.add_argument("--method", choices=["auto", "tarjan", "scipy"], default="auto")
    a.add_argument("--cycle-floor", type=int, default=1)
    a.add_argument("--window", type=int, nargs=2, metavar=("LO", "HI"))
    a.add_argument("--top", type=int, default=10)
    a.add_argument("-o", "--output")
    a.set_defaults(func=cmd_analyze)

    e = sub.add_parser("explore", help="out-component exploration trace as CSV")
    e.add_argument("degrees")
    e.add_argument("--start", type=int, default=0)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--cap", type=int, default=10**6)
    e.add_argument("--drift-floor", type=float)
    e.add_argument("--order", choices=["fifo", "lifo"], default="fifo")
    e.add_argument("-o", "--output")
    e.set_defaults(func=cmd_explore)

    x = sub.add_parser("experiment", help="run a Monte Carlo experiment from a JSON config")
    x.add_argument("config")
    x.add_argument("--parallelism", type=int)
    x.add_argument("--trials-csv")
    x.add_argument("--summary-json")
    x.add_argument("--sweep", type=int, nargs="+", metavar="N", help="also run an n sweep")
    x.set_defaults(func=cmd_experiment)

    v = sub.add_parser("verify", help="run the exact oracle suite")
    v.add_argument("--suite", action="append",
                   choices=["motif", "counting", "preheart", "coupling", "bridge"])
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
