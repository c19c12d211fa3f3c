"""Command-line front end.

Single-shot commands: ``generate`` (sample a graph to an edge-list file),
``percolate``, ``construct``, and ``solve`` operate on one graph and print
JSON.  Batch commands (``sweep``, ``threshold``, ``compare``,
``generations``, ``partial``) run the Monte-Carlo harness and write CSV or
JSON records.

Exit codes: 0 on success, 2 when a batch run raises a statistical flag
(growth violation, missed pass rate, threshold bracket failure), 1 on
usage or I/O errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

from .construct import StageParams, construct_contagious
from .exact import DEFAULT_NODE_BUDGET, min_contagious_exact
from .experiments import (
    MODES,
    ExperimentConfig,
    render_output,
    run_experiment,
)
from .graph import GnpParams, GraphFormatError, load_edge_list, sample_gnp, save_edge_list
from .percolation import percolate

_CONFIG_DEFAULTS = {
    f.name: f.default
    for f in dataclasses.fields(ExperimentConfig)
    if f.default is not dataclasses.MISSING
}


class _Parser(argparse.ArgumentParser):
    # usage errors exit 1; argparse's default of 2 is reserved for flags
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(",") if part)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _seed_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated vertex ids, got {text!r}")


def _load_or_sample_graph(args):
    if getattr(args, "graph", None):
        return load_edge_list(args.graph)
    if args.n is None:
        raise ValueError("provide --graph or --n with --p/--d")
    if getattr(args, "p", None) is not None:
        p = args.p
    elif getattr(args, "d", None) is not None:
        p = args.d / args.n
    else:
        raise ValueError("provide --p or --d alongside --n")
    return sample_gnp(GnpParams(args.n, p, args.seed))


def _emit_json(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_generate(args) -> int:
    if args.p is not None:
        p = args.p
    elif args.d is not None:
        p = args.d / args.n
    else:
        raise ValueError("provide --p or --d")
    graph = sample_gnp(GnpParams(args.n, p, args.seed))
    save_edge_list(graph, args.out)
    print(
        f"sampled G(n={args.n}, p={p:g}) with {graph.edge_count} edges -> {args.out}",
        file=sys.stderr,
    )
    return 0


def _cmd_percolate(args) -> int:
    graph = load_edge_list(args.graph)
    result = percolate(graph, args.seeds, args.r)
    _emit_json(result.to_json_dict(), args.out)
    return 0


def _cmd_construct(args) -> int:
    graph = _load_or_sample_graph(args)
    params = StageParams(
        r=args.r,
        d0_min=args.d0_min if args.d0_min is not None else StageParams.d0_min,
        c_seed=args.c_seed,
    )
    seeds, trace = construct_contagious(graph, params)
    payload = {
        "size": len(seeds),
        "seeds": sorted(seeds),
        "fallback_used": trace.fallback_used,
        "ell": trace.ell,
        "d": trace.d,
    }
    if args.trace:
        payload["trace"] = trace.to_json_dict()
    _emit_json(payload, args.out)
    return 0


def _cmd_solve(args) -> int:
    graph = _load_or_sample_graph(args)
    result = min_contagious_exact(graph, args.r, args.budget)
    _emit_json(result.to_json_dict(), args.out)
    return 0


def _batch_config(args) -> ExperimentConfig:
    file_cfg = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            file_cfg = json.load(fh)
        unknown = set(file_cfg) - {f.name for f in dataclasses.fields(ExperimentConfig)}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")

    def pick(name, cli_value, conv=None):
        if cli_value is not None:
            return cli_value
        if name in file_cfg:
            value = file_cfg[name]
            return conv(value) if conv and value is not None else value
        return _CONFIG_DEFAULTS.get(name)

    n_list = pick("n_list", args.n, tuple)
    if not n_list:
        raise ValueError("provide --n or an n_list in --config")
    return ExperimentConfig(
        mode=args.mode,
        n_list=tuple(n_list),
        d_list=pick("d_list", args.d, tuple),
        p_list=pick("p_list", args.p, tuple),
        r=pick("r", args.r),
        trials=pick("trials", args.trials),
        master_seed=pick("master_seed", args.seed),
        out=pick("out", args.out),
        fmt=pick("fmt", args.format),
        jobs=pick("jobs", args.jobs),
        c1=pick("c1", args.c1),
        k_target=pick("k_target", args.k_target),
        probe_trials=pick("probe_trials", args.probe_trials),
        rel_tol=pick("rel_tol", args.rel_tol),
        p_max_factor=pick("p_max_factor", args.p_max_factor),
        threshold_mult=pick("threshold_mult", args.threshold_mult),
        partial_slack=pick("partial_slack", args.slack),
        partial_d0=pick("partial_d0", args.partial_d0),
    )


def _cmd_batch(args) -> int:
    config = _batch_config(args)
    started = time.perf_counter()
    outcome = run_experiment(config)
    elapsed = time.perf_counter() - started
    text = render_output(config, outcome)
    if config.out:
        with open(config.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(
        f"{config.mode}: {len(outcome.records)} records in {elapsed:.1f}s"
        + (" [FLAGGED]" if outcome.flagged else ""),
        file=sys.stderr,
    )
    for key, value in sorted(outcome.summary.items()):
        print(f"  {key}: {value}", file=sys.stderr)
    return 2 if outcome.flagged else 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="contagion", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="sample G(n, p) to an edge-list file")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--p", type=float)
    gen.add_argument("--d", type=float, help="mean degree; p = d / n")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=_cmd_generate)

    perc = sub.add_parser("percolate", help="run the activation process on a graph file")
    perc.add_argument("--graph", required=True)
    perc.add_argument("--seeds", type=_seed_list, required=True)
    perc.add_argument("--r", type=int, default=2)
    perc.add_argument("--out")
    perc.set_defaults(func=_cmd_percolate)

    cons = sub.add_parser("construct", help="build a verified contagious set")
    cons.add_argument("--graph")
    cons.add_argument("--n", type=int)
    cons.add_argument("--p", type=float)
    cons.add_argument("--d", type=float)
    cons.add_argument("--seed", type=int, default=0)
    cons.add_argument("--r", type=int, default=2)
    cons.add_argument("--d0-min", dest="d0_min", type=float)
    cons.add_argument("--c-seed", dest="c_seed", type=float)
    cons.add_argument("--trace", action="store_true", help="include the full trace")
    cons.add_argument("--out")
    cons.set_defaults(func=_cmd_construct)

    solve = sub.add_parser("solve", help="exact minimum contagious set (small graphs)")
    solve.add_argument("--graph")
    solve.add_argument("--n", type=int)
    solve.add_argument("--p", type=float)
    solve.add_argument("--d", type=float)
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--r", type=int, default=2)
    solve.add_argument("--budget", type=int, default=DEFAULT_NODE_BUDGET)
    solve.add_argument("--out")
    solve.set_defaults(func=_cmd_solve)

    for mode in MODES:
        batch = sub.add_parser(mode, help=f"batch mode: {mode}")
        batch.add_argument("--n", type=_int_list, help="comma-separated n values")
        batch.add_argument("--d", type=_float_list, help="comma-separated mean degrees")
        batch.add_argument("--p", type=_float_list, help="comma-separated probabilities")
        batch.add_argument("--r", type=int)
        batch.add_argument("--trials", type=int)
        batch.add_argument("--seed", type=int, help="master seed")
        batch.add_argument("--out")
        batch.add_argument("--format", choices=("csv", "json"))
        batch.add_argument("--jobs", type=int)
        batch.add_argument("--config", help="JSON file with ExperimentConfig fields")
        batch.add_argument("--c1", type=float)
        batch.add_argument("--k-target", dest="k_target", type=int)
        batch.add_argument("--probe-trials", dest="probe_trials", type=int)
        batch.add_argument("--rel-tol", dest="rel_tol", type=float)
        batch.add_argument("--p-max-factor", dest="p_max_factor", type=float)
        batch.add_argument("--threshold-mult", dest="threshold_mult", type=float)
        batch.add_argument("--slack", type=float, help="partial mode slack multiplier")
        batch.add_argument("--partial-d0", dest="partial_d0", type=float)
        batch.set_defaults(func=_cmd_batch, mode=mode)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (OSError, GraphFormatError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
