"""Command-line interface.

Subcommands:
    identify    run one identification experiment from a JSON config
    montecarlo  repeat an experiment with fresh randomness, aggregate errors
    preset      show or run a built-in experiment configuration
    graph       generate random graphs / inspect edge-list files
    dmd         eigenvalues from a raw snapshot CSV (no simulation)

Exit codes: 0 success, 2 usage error, 3 pipeline/stage failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import graphs, observation
from .dmd import DmdError, OutlierPolicy, dmd, filter_outliers
from .pipeline import (
    ExperimentConfig,
    PipelineError,
    monte_carlo,
    preset,
    preset_names,
    run_identification,
)

_EXIT_PIPELINE = 3


def _cmd_identify(args) -> int:
    config = ExperimentConfig.from_json(args.config)
    if args.seed is not None:
        from dataclasses import replace

        config = replace(config, seed=args.seed)
    try:
        report = run_identification(config)
    except PipelineError as exc:
        print(f"identification failed: {exc}", file=sys.stderr)
        return _EXIT_PIPELINE
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
        print(f"wrote {args.output}")
    if args.eigenvalue_csv:
        report.eigenvalues_to_csv(args.eigenvalue_csv)
        print(f"wrote {args.eigenvalue_csv}")
    if args.json:
        print(report.to_json())
    else:
        print(report.to_text())
    return 0


def _cmd_montecarlo(args) -> int:
    config = ExperimentConfig.from_json(args.config)
    try:
        result = monte_carlo(config, n_runs=args.runs, workers=args.workers)
    except PipelineError as exc:
        print(f"monte carlo failed: {exc}", file=sys.stderr)
        return _EXIT_PIPELINE
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(result.to_json())
        print(f"wrote {args.output}")
    print(result.to_json() if args.json else result.to_text())
    if result.failures:
        for index, stage, message in result.failures:
            print(f"run {index} failed at [{stage}]: {message}", file=sys.stderr)
    return 0


def _cmd_preset(args) -> int:
    if args.name is None:
        for name in preset_names():
            print(name)
        return 0
    config = preset(args.name, seed=args.seed)
    if args.emit_config:
        print(config.to_json())
        return 0
    try:
        report = run_identification(config)
    except PipelineError as exc:
        print(f"preset {args.name!r} failed: {exc}", file=sys.stderr)
        return _EXIT_PIPELINE
    print(report.to_json() if args.json else report.to_text())
    return 0


def _cmd_graph(args) -> int:
    if args.graph_action == "gen":
        if args.kind == "erdos_renyi":
            g = graphs.gen_erdos_renyi(
                n=args.n,
                p_edge=args.p_edge,
                weight_dist=args.weight_dist,
                directed=args.directed,
                seed=args.seed,
            )
        else:
            g = graphs.gen_degree_sequence(
                n=args.n,
                degree_dist=args.degree_dist,
                weight_dist=args.weight_dist,
                seed=args.seed,
            )
        graphs.write_edge_list(g, args.output)
        print(f"wrote {args.output} ({g.n} vertices, {len(g.edges)} edges)")
        return 0

    # info
    g = graphs.load_edge_list(args.path, directed=args.directed)
    stats = graphs.degree_stats(g)
    moments = graphs.exact_spectral_moments(g, 2)
    components = graphs.connected_components(g)
    eigs = np.sort(np.linalg.eigvals(graphs.laplacian(g)).real)
    print(f"vertices: {g.n}")
    print(f"edges: {len(g.edges)} ({'directed' if g.directed else 'undirected'})")
    print(f"components: {len(components)}")
    print(f"degrees: min {stats.d_min:g} max {stats.d_max:g} mean {stats.mean_degree:g}")
    print(f"laplacian moments: M1 {moments[1]:.6g}  M2 {moments[2]:.6g}")
    print(f"lambda_2: {eigs[1]:.6g}   lambda_n: {eigs[-1]:.6g}" if g.n > 1 else "")
    return 0


def _cmd_dmd(args) -> int:
    snaps = observation.SnapshotSet.from_csv(args.snapshots)
    data = observation.build_data_matrix(snaps, c=args.c, delta=args.delta)
    try:
        result = dmd(data, rank_tol=args.rank_tol)
    except DmdError as exc:
        print(f"decomposition failed: {exc}", file=sys.stderr)
        return _EXIT_PIPELINE
    eigs = result.continuous_eigs
    if not args.no_filter:
        eigs = filter_outliers(eigs, OutlierPolicy(), dt=snaps.dt)
    if args.output:
        result.to_csv(args.output)
        print(f"wrote {args.output}")
    print(f"rank used: {result.rank_used}")
    for mu in eigs:
        print(f"{mu.real: .8f} {mu.imag:+.8f}j")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netspectra",
        description="Infer Laplacian spectral properties of an unknown "
        "interaction network from sparse time-series measurements.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_id = sub.add_parser("identify", help="run one experiment from a JSON config")
    p_id.add_argument("config", help="path to an experiment config (JSON)")
    p_id.add_argument("-o", "--output", help="write the full report as JSON")
    p_id.add_argument(
        "--eigenvalue-csv", help="write the filtered eigenvalue scatter as CSV"
    )
    p_id.add_argument("--seed", type=int, default=None, help="override config seed")
    p_id.add_argument("--json", action="store_true", help="print JSON, not text")
    p_id.set_defaults(fn=_cmd_identify)

    p_mc = sub.add_parser(
        "montecarlo", help="repeat an experiment and aggregate error statistics"
    )
    p_mc.add_argument("config", help="path to an experiment config (JSON)")
    p_mc.add_argument("--runs", type=int, default=20)
    p_mc.add_argument("--workers", type=int, default=1)
    p_mc.add_argument("-o", "--output", help="write aggregate statistics as JSON")
    p_mc.add_argument("--json", action="store_true")
    p_mc.set_defaults(fn=_cmd_montecarlo)

    p_pre = sub.add_parser("preset", help="list, show, or run built-in experiments")
    p_pre.add_argument("name", nargs="?", help="preset name (omit to list)")
    p_pre.add_argument(
        "--emit-config", action="store_true", help="print the config JSON and exit"
    )
    p_pre.add_argument("--seed", type=int, default=0)
    p_pre.add_argument("--json", action="store_true")
    p_pre.set_defaults(fn=_cmd_preset)

    p_graph = sub.add_parser("graph", help="generate or inspect graphs")
    graph_sub = p_graph.add_subparsers(dest="graph_action", required=True)
    p_gen = graph_sub.add_parser("gen", help="generate a random graph edge list")
    p_gen.add_argument(
        "kind", choices=["erdos_renyi", "degree_sequence"], help="generator"
    )
    p_gen.add_argument("output", help="edge-list file to write")
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--p-edge", type=float, default=0.3, help="erdos_renyi only")
    p_gen.add_argument(
        "--degree-dist", default="normal(10, 3)", help="degree_sequence only"
    )
    p_gen.add_argument("--weight-dist", default=None, help="e.g. 'uniform(0, 0.1)'")
    p_gen.add_argument("--directed", action="store_true")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.set_defaults(fn=_cmd_graph)
    p_info = graph_sub.add_parser("info", help="summarize an edge-list file")
    p_info.add_argument("path")
    p_info.add_argument("--directed", action="store_true")
    p_info.set_defaults(fn=_cmd_graph)

    p_dmd = sub.add_parser("dmd", help="eigenvalues from a snapshot CSV")
    p_dmd.add_argument("snapshots", help="snapshot CSV (see SnapshotSet.to_csv)")
    p_dmd.add_argument("--c", type=int, default=2, help="shift-stacking copies")
    p_dmd.add_argument("--delta", type=int, default=5, help="shift increment")
    p_dmd.add_argument("--rank-tol", type=float, default=1e-10)
    p_dmd.add_argument(
        "--no-filter", action="store_true", help="keep outlier eigenvalues"
    )
    p_dmd.add_argument("-o", "--output", help="write all eigenvalues as CSV")
    p_dmd.set_defaults(fn=_cmd_dmd)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
