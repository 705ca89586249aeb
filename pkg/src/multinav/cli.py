"""Command-line pipeline: trim, predict, integrate, navigability, scenario.

Every command writes its artifacts plus a manifest.json into --out. The
manifest echoes the configuration, hashes inputs and artifacts, and records
a run_hash over everything except wall-clock timings and the output
location, so identical runs are verifiable by hash comparison. Files are
written atomically (temp file + rename).

Exit codes: 0 success (including a t90 of "not reached"), 1 usage error,
2 input/parse error, 3 numerical degradation.
"""

from __future__ import annotations

import argparse
import contextlib
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .multiplex import (
    ConstructionError,
    EdgeList,
    FlowEdge,
    ParseError,
    PLACEMENT_ALL,
    PLACEMENT_SUBSET,
    SchemaError,
    TRIM_GLOBAL,
    TRIM_PER_LAYER,
    build_multiplex,
    export_edges,
    integrate_links,
    parse_edge_list,
    trim_edges,
    write_edge_csv,
)
from .navigability import (
    DegradedDecompositionError,
    NOT_REACHED,
    compare_stages,
    navigability_report,
    write_curve_csv,
    write_report_json,
)
from .prediction import (
    ADAMIC_ADAR,
    JACCARD,
    dedupe_links,
    read_links_csv,
    run_stage,
    write_links_csv,
)
from .walks import STRATEGIES

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    """Bad parameter values; maps to exit code 1."""


class CliParser(argparse.ArgumentParser):
    """argparse variant whose usage failures exit 1 instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def phase_seed(root_seed: int, phase: str) -> int:
    """Stable per-phase seed derived from the root seed."""
    digest = hashlib.sha256(f"{root_seed}:{phase}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@contextlib.contextmanager
def _atomic(path: Path):
    """Yield a temp path in the target's directory, renamed over it on success."""
    tmp = path.with_name(path.name + ".tmp")
    try:
        yield tmp
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()


def _sha256_path(path: Path | str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as stream:
        for block in iter(lambda: stream.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


def _write_manifest(
    out_dir: Path,
    command: str,
    config: dict,
    inputs: list[str],
    artifacts: list[str],
    timings: dict[str, float],
) -> str:
    manifest = {
        "tool": "multinav",
        "version": __version__,
        "command": command,
        "config": config,
        "inputs": {p: _sha256_path(p) for p in inputs},
        "artifacts": {name: _sha256_path(out_dir / name) for name in sorted(artifacts)},
        "timings": timings,
    }
    hashed = {
        "command": command,
        "config": {k: v for k, v in config.items() if k != "out"},
        "inputs": manifest["inputs"],
        "artifacts": manifest["artifacts"],
    }
    payload = json.dumps(hashed, sort_keys=True, separators=(",", ":"))
    manifest["run_hash"] = hashlib.sha256(payload.encode()).hexdigest()
    with _atomic(out_dir / "manifest.json") as tmp:
        tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest["run_hash"]


def _load_edges(paths: list[str]) -> EdgeList:
    """Read one combined CSV, or several per-layer CSVs merged in order.

    With multiple inputs, file k becomes layer k; each file must carry a
    single layer value of its own.
    """
    if len(paths) == 1:
        return parse_edge_list(paths[0])
    labels: list[str] = []
    index: dict[str, int] = {}
    merged: list[FlowEdge] = []
    for position, path in enumerate(paths):
        part = parse_edge_list(path)
        distinct = {e.layer for e in part.edges}
        if len(distinct) > 1:
            raise ParseError(
                f"{path}: per-layer input holds {len(distinct)} layer values; "
                "pass a single combined CSV instead"
            )
        for e in part.edges:
            for lab in (part.labels[e.source], part.labels[e.target]):
                if lab not in index:
                    index[lab] = len(labels)
                    labels.append(lab)
            merged.append(
                FlowEdge(
                    index[part.labels[e.source]],
                    index[part.labels[e.target]],
                    position,
                    e.flow,
                )
            )
    return EdgeList(tuple(merged), tuple(labels))


def _check_range(name: str, value: float, low: float, high: float, low_open: bool, high_open: bool) -> None:
    ok_low = value > low if low_open else value >= low
    ok_high = value < high if high_open else value <= high
    if not (ok_low and ok_high):
        lo = "(" if low_open else "["
        hi = ")" if high_open else "]"
        raise UsageError(f"{name} must lie in {lo}{low}, {high}{hi}, got {value}")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_edges_atomic(path: Path, edges, labels) -> None:
    with _atomic(path) as tmp:
        write_edge_csv(tmp, edges, labels)


def _build_from_args(edges: EdgeList, args, trimmed=None) -> "MultiplexNetwork":
    frame = trimmed if trimmed is not None else list(edges.edges)
    return build_multiplex(
        frame,
        n_layers=edges.n_layers,
        directed=args.directed,
        coupling=args.coupling,
        labels=edges.labels,
    )


def cmd_trim(args) -> int:
    _check_range("--trim-ratio", args.trim_ratio, 0.0, 1.0, True, False)
    out = _out_dir(args)
    start = time.perf_counter()
    edges = _load_edges(args.input)
    kept = trim_edges(edges.edges, ratio=args.trim_ratio, scope=args.trim_scope)
    _write_edges_atomic(out / "trimmed.csv", kept, edges.labels)
    elapsed = time.perf_counter() - start
    print(f"kept {len(kept)} / removed {len(edges.edges) - len(kept)}")
    config = {
        "inputs": list(args.input),
        "trim_ratio": args.trim_ratio,
        "trim_scope": args.trim_scope,
        "out": str(out),
    }
    _write_manifest(out, "trim", config, args.input, ["trimmed.csv"], {"trim": elapsed})
    return EXIT_OK


def _predict_stages(net, stages, threshold):
    """Stage -> (jaccard links, adamic-adar links, deduped union), skipping
    stages wider than the layer count."""
    results = {}
    for k in stages:
        if k > net.n_layers:
            print(f"stage {k} skipped: network has only {net.n_layers} layers", file=sys.stderr)
            continue
        links_j = run_stage(net, k, JACCARD, threshold)
        links_aa = run_stage(net, k, ADAMIC_ADAR, threshold)
        union = dedupe_links(links_j + links_aa)
        results[k] = (links_j, links_aa, union)
        print(
            f"stage {k}: {ADAMIC_ADAR} {len(links_aa)}, {JACCARD} {len(links_j)}, "
            f"union {len(union)}"
        )
    return results


def cmd_predict(args) -> int:
    _check_range("--threshold", args.threshold, 0.0, 1.0, False, True)
    if args.trim_ratio is not None:
        _check_range("--trim-ratio", args.trim_ratio, 0.0, 1.0, True, False)
    out = _out_dir(args)
    start = time.perf_counter()
    edges = _load_edges(args.input)
    frame = list(edges.edges)
    if args.trim_ratio is not None:
        frame = trim_edges(frame, ratio=args.trim_ratio, scope=args.trim_scope)
    artifacts = []
    if not frame:
        print("warning: empty network; writing empty outputs", file=sys.stderr)
        for k in args.stages:
            name = f"links_stage{k}.csv"
            with _atomic(out / name) as tmp:
                write_links_csv(tmp, [], edges.labels)
            artifacts.append(name)
        with _atomic(out / "links_merged.csv") as tmp:
            write_links_csv(tmp, [], edges.labels)
        artifacts.append("links_merged.csv")
    else:
        net = _build_from_args(edges, args, frame)
        results = _predict_stages(net, args.stages, args.threshold)
        everything = []
        for k, (_, _, union) in sorted(results.items()):
            name = f"links_stage{k}.csv"
            with _atomic(out / name) as tmp:
                write_links_csv(tmp, union, net.labels)
            artifacts.append(name)
            everything.extend(union)
        merged = dedupe_links(everything)
        with _atomic(out / "links_merged.csv") as tmp:
            write_links_csv(tmp, merged, net.labels)
        artifacts.append("links_merged.csv")
        print(f"merged unique links: {len(merged)}")
    elapsed = time.perf_counter() - start
    config = {
        "inputs": list(args.input),
        "directed": args.directed,
        "trim_ratio": args.trim_ratio,
        "trim_scope": args.trim_scope,
        "threshold": args.threshold,
        "stages": list(args.stages),
        "coupling": args.coupling,
        "out": str(out),
    }
    _write_manifest(out, "predict", config, args.input, artifacts, {"predict": elapsed})
    return EXIT_OK


def cmd_integrate(args) -> int:
    out = _out_dir(args)
    start = time.perf_counter()
    edges = _load_edges(args.input)
    net = _build_from_args(edges, args)
    links = read_links_csv(args.links, net.label_index())
    integrated = integrate_links(net, links, placement=args.placement)
    _write_edges_atomic(out / "integrated.csv", export_edges(integrated), net.labels)
    elapsed = time.perf_counter() - start
    print(f"integrated {len(links)} links into {edges.n_layers} layers")
    config = {
        "inputs": list(args.input),
        "links": args.links,
        "placement": args.placement,
        "directed": args.directed,
        "coupling": args.coupling,
        "out": str(out),
    }
    _write_manifest(
        out,
        "integrate",
        config,
        args.input + [args.links],
        ["integrated.csv"],
        {"integrate": elapsed},
    )
    return EXIT_OK


def _emit_report(out: Path, report, strategy: str, label: str, artifacts: list[str]) -> None:
    curve_name = f"curve_{strategy}_{label}.csv"
    report_name = f"report_{strategy}_{label}.json"
    with _atomic(out / curve_name) as tmp:
        write_curve_csv(tmp, report.curve)
    with _atomic(out / report_name) as tmp:
        write_report_json(tmp, report, curve_name)
    artifacts.extend([curve_name, report_name])
    shown = NOT_REACHED if report.t90 is None else f"{report.t90:.6g}"
    print(f"{strategy} {label}: spectral gap {report.spectral_gap:.6g}, t90 {shown}")


def cmd_navigability(args) -> int:
    if args.trim_ratio is not None:
        _check_range("--trim-ratio", args.trim_ratio, 0.0, 1.0, True, False)
    out = _out_dir(args)
    start = time.perf_counter()
    edges = _load_edges(args.input)
    frame = list(edges.edges)
    if args.trim_ratio is not None:
        frame = trim_edges(frame, ratio=args.trim_ratio, scope=args.trim_scope)
    net = _build_from_args(edges, args, frame)
    artifacts = []
    for strategy in args.strategy:
        report = navigability_report(net, strategy)
        _emit_report(out, report, strategy, "original", artifacts)
    elapsed = time.perf_counter() - start
    config = {
        "inputs": list(args.input),
        "directed": args.directed,
        "trim_ratio": args.trim_ratio,
        "trim_scope": args.trim_scope,
        "strategies": list(args.strategy),
        "coupling": args.coupling,
        "out": str(out),
    }
    _write_manifest(
        out, "navigability", config, args.input, artifacts, {"navigability": elapsed}
    )
    return EXIT_OK


def cmd_pipeline(args) -> int:
    _check_range("--trim-ratio", args.trim_ratio, 0.0, 1.0, True, False)
    _check_range("--threshold", args.threshold, 0.0, 1.0, False, True)
    out = _out_dir(args)
    timings: dict[str, float] = {}
    artifacts: list[str] = []

    start = time.perf_counter()
    edges = _load_edges(args.input)
    timings["ingest"] = time.perf_counter() - start

    start = time.perf_counter()
    trimmed = trim_edges(edges.edges, ratio=args.trim_ratio, scope=args.trim_scope)
    _write_edges_atomic(out / "trimmed.csv", trimmed, edges.labels)
    artifacts.append("trimmed.csv")
    print(f"trim: kept {len(trimmed)} / removed {len(edges.edges) - len(trimmed)}")
    timings["trim"] = time.perf_counter() - start

    start = time.perf_counter()
    net = _build_from_args(edges, args, trimmed)
    timings["build"] = time.perf_counter() - start

    start = time.perf_counter()
    results = _predict_stages(net, args.stages, args.threshold)
    everything = []
    for k, (_, _, union) in sorted(results.items()):
        name = f"links_stage{k}.csv"
        with _atomic(out / name) as tmp:
            write_links_csv(tmp, union, net.labels)
        artifacts.append(name)
        everything.extend(union)
    merged = dedupe_links(everything)
    with _atomic(out / "links_merged.csv") as tmp:
        write_links_csv(tmp, merged, net.labels)
    artifacts.append("links_merged.csv")
    print(f"merged unique links: {len(merged)}")
    timings["predict"] = time.perf_counter() - start

    start = time.perf_counter()
    variants = [("original", net)]
    for k, (_, _, union) in sorted(results.items()):
        variants.append((f"stage{k}", integrate_links(net, union, placement=PLACEMENT_SUBSET)))
    timings["integrate"] = time.perf_counter() - start

    start = time.perf_counter()
    for strategy in args.strategy:
        reports = []
        for label, variant in variants:
            report = navigability_report(variant, strategy, stage_label=label)
            _emit_report(out, report, strategy, label, artifacts)
            reports.append(report)
        comparison = compare_stages(reports)
        name = f"comparison_{strategy}.json"
        with _atomic(out / name) as tmp:
            tmp.write_text(json.dumps(comparison, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        artifacts.append(name)
    timings["navigability"] = time.perf_counter() - start

    config = {
        "inputs": list(args.input),
        "directed": args.directed,
        "trim_ratio": args.trim_ratio,
        "trim_scope": args.trim_scope,
        "threshold": args.threshold,
        "strategies": list(args.strategy),
        "stages": list(args.stages),
        "coupling": args.coupling,
        "seed": args.seed,
        "out": str(out),
    }
    run_hash = _write_manifest(out, "pipeline", config, args.input, artifacts, timings)
    print(f"run hash: {run_hash}")
    return EXIT_OK


def cmd_scenario(args) -> int:
    _check_range("--fraction", args.fraction, 0.0, 1.0, False, True)
    if args.layers < 1:
        raise UsageError(f"--layers must be >= 1, got {args.layers}")
    out = _out_dir(args)
    start = time.perf_counter()
    base = _load_edges(args.input)
    if len({e.layer for e in base.edges}) > 1:
        raise ParseError("scenario base must be a single-layer edge list")
    n = base.n_nodes
    replicated: list[FlowEdge] = []
    for k in range(args.layers):
        rng = np.random.default_rng(phase_seed(args.seed, f"scenario.layer{k}"))
        count = round(args.fraction * n)
        victims = set(rng.choice(n, size=count, replace=False).tolist()) if count else set()
        survivors = [
            FlowEdge(e.source, e.target, k, e.flow)
            for e in base.edges
            if e.source not in victims and e.target not in victims
        ]
        replicated.extend(survivors)
        print(f"layer {k}: knocked out {len(victims)} nodes, kept {len(survivors)} edges")
    _write_edges_atomic(out / "scenario.csv", replicated, base.labels)
    elapsed = time.perf_counter() - start
    config = {
        "inputs": list(args.input),
        "layers": args.layers,
        "fraction": args.fraction,
        "seed": args.seed,
        "out": str(out),
    }
    _write_manifest(out, "scenario", config, args.input, ["scenario.csv"], {"scenario": elapsed})
    return EXIT_OK


def _add_common(sub: argparse.ArgumentParser, *, trim_default=None) -> None:
    sub.add_argument("--input", nargs="+", required=True, metavar="CSV",
                     help="combined edge CSV, or one CSV per layer in order")
    sub.add_argument("--out", default="out", help="output directory (default: out)")
    sub.add_argument("--directed", dest="directed", action="store_true",
                     help="treat edges as directed")
    sub.add_argument("--undirected", dest="directed", action="store_false",
                     help="treat edges as undirected (default)")
    sub.set_defaults(directed=False)
    sub.add_argument("--trim-ratio", type=float, default=trim_default,
                     help="keep edges with flow >= ratio * max flow"
                          + (" (default: no trimming)" if trim_default is None else f" (default: {trim_default})"))
    sub.add_argument("--trim-scope", choices=[TRIM_PER_LAYER, TRIM_GLOBAL],
                     default=TRIM_PER_LAYER, help="trim threshold scope (default: per-layer)")
    sub.add_argument("--coupling", type=float, default=1.0,
                     help="uniform inter-layer coupling weight (default: 1.0)")
    sub.add_argument("--seed", type=int, default=0, help="root random seed (default: 0)")


def build_parser() -> CliParser:
    parser = CliParser(prog="multinav", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"multinav {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    trim = commands.add_parser("trim", help="keep only the strongest flows")
    _add_common(trim, trim_default=0.9)
    trim.set_defaults(func=cmd_trim)

    predict = commands.add_parser("predict", help="predict links per layer-subset stage")
    _add_common(predict)
    predict.add_argument("--threshold", type=float, default=0.5,
                         help="normalized-score cut, strict (default: 0.5)")
    predict.add_argument("--stages", nargs="+", type=int, choices=[1, 2, 3],
                         default=[1, 2, 3], help="subset sizes to run (default: 1 2 3)")
    predict.set_defaults(func=cmd_predict)

    integrate = commands.add_parser("integrate", help="add predicted links to a network")
    _add_common(integrate)
    integrate.add_argument("--links", required=True, help="predicted-links CSV")
    integrate.add_argument("--placement", choices=[PLACEMENT_SUBSET, PLACEMENT_ALL],
                           default=PLACEMENT_SUBSET,
                           help="layers receiving each link (default: its own subset)")
    integrate.set_defaults(func=cmd_integrate)

    nav = commands.add_parser("navigability", help="spectral gap, coverage curve and t90")
    _add_common(nav)
    nav.add_argument("--strategy", action="append", choices=list(STRATEGIES),
                     help="walk strategy, repeatable (default: rwc)")
    nav.set_defaults(func=cmd_navigability)

    pipeline = commands.add_parser("pipeline", help="trim, predict, integrate and report")
    _add_common(pipeline, trim_default=0.9)
    pipeline.add_argument("--threshold", type=float, default=0.5,
                          help="normalized-score cut, strict (default: 0.5)")
    pipeline.add_argument("--stages", nargs="+", type=int, choices=[1, 2, 3],
                          default=[1, 2, 3], help="subset sizes to run (default: 1 2 3)")
    pipeline.add_argument("--strategy", action="append", choices=list(STRATEGIES),
                          help="walk strategy, repeatable (default: rwc)")
    pipeline.set_defaults(func=cmd_pipeline)

    scenario = commands.add_parser("scenario", help="replicate a layer under random knockouts")
    _add_common(scenario)
    scenario.add_argument("--layers", type=int, default=3,
                          help="number of scenario layers (default: 3)")
    scenario.add_argument("--fraction", type=float, default=0.1,
                          help="fraction of nodes knocked out per layer (default: 0.1)")
    scenario.set_defaults(func=cmd_scenario)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "strategy") and not args.strategy:
        args.strategy = ["rwc"]
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, SchemaError, ConstructionError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DegradedDecompositionError as exc:
        print(f"numerical degradation: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
