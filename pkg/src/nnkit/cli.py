"""Command-line entry point.

Subcommands: build | query | classify | localize | detect | bench | gen.
Every run is reproducible: all randomness flows from --seed, outputs are
written with repr floats and LF endings, and reruns with the same config
produce byte-identical files (including --jobs > 1).

Exit codes: 0 success, 2 usage/precondition error, 3 data error,
4 oracle or benchmark assertion mismatch.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import bench, classifier, kdtree, linear_scan, proximity, synth_data
from ._backend import available_backends
from .data import Dataset
from .metrics import EUCLIDEAN, parse_metric
from .synth_data import CsvError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_MISMATCH = 4


class OracleMismatch(Exception):
    """A tree result disagreed with the linear-scan oracle."""


def _resolve_out(path: str | None):
    """Apply the NNKIT_OUT_DIR override to relative output paths."""
    if path is None:
        return None
    out_dir = os.environ.get("NNKIT_OUT_DIR")
    p = Path(path)
    if out_dir and not p.is_absolute():
        return Path(out_dir) / p
    return p


def _write_rows(rows, fmt: str, out):
    """Emit rows (list of dicts with a shared key order) as csv or json-lines."""

    def fmt_val(v):
        if isinstance(v, float):
            return repr(v)
        if v is None:
            return ""
        return str(v)

    lines = []
    if fmt == "csv":
        if rows:
            lines.append(",".join(rows[0].keys()))
            for row in rows:
                lines.append(",".join(fmt_val(v) for v in row.values()))
    else:  # json-lines
        for row in rows:
            lines.append(json.dumps(row))
    text = "\n".join(lines) + ("\n" if lines else "")
    if out is None:
        sys.stdout.write(text)
    else:
        out = _resolve_out(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _parse_point(text: str):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ValueError(f"cannot parse point {text!r}; expected e.g. '9,2'") from None


def _parse_int_list(text: str):
    return [int(v) for v in text.split(",")]


def _load_config(path: str) -> dict:
    cfg = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, ln in enumerate(fh, 1):
            ln = ln.strip()
            if not ln or ln.startswith("#"):
                continue
            if "=" not in ln:
                raise CsvError(f"{path}:{lineno}: expected key=value, got {ln!r}")
            key, _, val = ln.partition("=")
            cfg[key.strip().replace("-", "_")] = val.strip()
    return cfg


def _apply_config(parser_actions, args: argparse.Namespace, defaults: dict):
    """Fill settings from a config file for flags the user left at default."""
    cfg = _load_config(args.config)
    for action in parser_actions:
        dest = action.dest
        if dest in cfg and getattr(args, dest, None) == action.default:
            raw = cfg[dest]
            setattr(args, dest, action.type(raw) if action.type else raw)


# -- subcommand implementations ---------------------------------------------


def cmd_gen(args) -> int:
    out = _resolve_out(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.kind == "fingerprints":
        params = synth_data.PathLossParams(args.p0, args.n_exp, args.sigma, args.d0)
        aps = _default_aps(args.width, args.height)
        fmap = synth_data.gen_fingerprints(
            params, aps, (args.width, args.height, args.spacing), args.seed)
        synth_data.write_fingerprints(fmap, out)
    elif args.kind == "los-nlos":
        ds = synth_data.gen_los_nlos(args.seed, args.n_per_class, args.n_per_class)
        synth_data.write_csv(ds, out)
    elif args.kind == "sleeping-cell":
        ds = synth_data.gen_sleeping_cell(args.seed, args.n, args.n_anomalous)
        synth_data.write_csv(ds, out)
    elif args.kind == "mixture":
        ds, r_star = synth_data.gen_gaussian_mixture(
            args.mu_sep, args.classes, args.n, args.seed, dim=args.dim)
        synth_data.write_csv(ds, out)
        if r_star is not None:
            print(f"bayes_risk={r_star!r}")
    else:  # uniform
        ds = synth_data.gen_uniform(args.n, args.dim, args.seed)
        synth_data.write_csv(ds, out)
    print(f"wrote {out}")
    return EXIT_OK


def _default_aps(width: float, height: float):
    return ((0.0, 0.0), (width, 0.0), (0.0, height), (width, height))


def _load_points(args) -> Dataset:
    metric = parse_metric(args.metric)
    label = getattr(args, "label_column", None)
    ds = synth_data.load_csv(args.input, label_column=label, metric=metric)
    return ds


def cmd_build(args) -> int:
    ds = _load_points(args)
    tree = kdtree.build(ds, backend=args.backend)
    st = tree.stats()
    out = _resolve_out(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(tree.to_text())
    print(f"nodes={st.node_count} depth={st.depth} comparisons={st.build_comparisons}")
    print(f"wrote {out}")
    return EXIT_OK


def _check_oracle(ds: Dataset, result, oracle_result):
    if result.indices != oracle_result.indices:
        raise OracleMismatch(
            f"indices {result.indices} != oracle {oracle_result.indices}")
    for (_, d1), (_, d2) in zip(result, oracle_result):
        if abs(d1 - d2) > 1e-12 * max(abs(d1), abs(d2), 1.0):
            raise OracleMismatch(f"distance {d1!r} != oracle {d2!r}")


def cmd_query(args) -> int:
    if args.tree:
        tree = kdtree.KdTree.from_text(
            Path(args.tree).read_text(encoding="utf-8"), backend=args.backend)
        ds = tree.dataset
    else:
        if not args.input:
            raise ValueError("query needs --input or --tree")
        ds = _load_points(args)
        tree = kdtree.build(ds, backend=args.backend)

    mode = args.mode
    if mode in ("nn", "knn", "radius", "ann"):
        if args.q is None:
            raise ValueError(f"--mode {mode} requires --q")
        q = _parse_point(args.q)
        if mode == "nn":
            res = tree.query_nn(q)
            oracle = linear_scan.scan_nn(ds, q) if args.oracle_check else None
        elif mode == "knn":
            res = tree.query_knn(q, args.k)
            oracle = linear_scan.scan_knn(ds, q, args.k) if args.oracle_check else None
        elif mode == "radius":
            res = tree.query_radius(q, args.rho)
            oracle = linear_scan.scan_radius(ds, q, args.rho) if args.oracle_check else None
        else:
            res = tree.query_ann(q, args.epsilon)
            oracle = None  # approximate result has no exact oracle counterpart
            if args.oracle_check:
                exact = linear_scan.scan_nn(ds, q)
                if res.distances[0] > (1.0 + args.epsilon) * exact.distances[0]:
                    raise OracleMismatch(
                        f"ann distance {res.distances[0]!r} exceeds "
                        f"(1+eps) * {exact.distances[0]!r}")
        if oracle is not None:
            _check_oracle(ds, res, oracle)
        pts = ds.tuples()
        rows = [
            {"rank": r, "index": i, "distance": d,
             **{f"c{j}": c for j, c in enumerate(pts[i])}}
            for r, (i, d) in enumerate(res)
        ]
    elif mode == "mst":
        edges = proximity.mst(ds)
        rows = [{"i": i, "j": j, "weight": w} for i, j, w in edges]
    else:  # diameter
        i, j, d = proximity.diameter(ds)
        rows = [{"i": i, "j": j, "distance": d}]
    _write_rows(rows, args.format, args.out)
    return EXIT_OK


def cmd_classify(args) -> int:
    ds = _load_points(args)
    ts = classifier.TrainingSet.from_dataset(ds)
    train, test = classifier.split(ts, args.alpha, args.seed)
    ks = _parse_int_list(args.k_sweep) if args.k_sweep else [args.k]
    metric = parse_metric(args.metric)
    rows = []
    model = None
    for k in ks:
        model = classifier.fit(train, k, metric, backend=args.backend)
        report = classifier.evaluate(model, test)
        rows.append({
            "k": k,
            "n_train": len(train),
            "n_test": report.n_test,
            "error_rate": report.error_rate,
            "accuracy": report.accuracy,
            "confusion": ";".join(str(v) for v in report.confusion.ravel()),
        })
    _write_rows(rows, args.format, args.out)
    if args.export_model and model is not None:
        path = _resolve_out(args.export_model)
        classifier.save_model(model, path)
        print(f"model written to {path}")
    if args.query:
        q = _parse_point(args.query)
        print(f"predicted={classifier.predict(model, q)}")
    return EXIT_OK


def cmd_localize(args) -> int:
    params = synth_data.PathLossParams(args.p0, args.n_exp, args.sigma, args.d0)
    aps = _default_aps(args.width, args.height)
    grid = (args.width, args.height, args.spacing)
    rows = []
    per_query_rows = []
    for k in _parse_int_list(args.k):
        per_query, summary = synth_data.run_localization(
            params, aps, grid, k, args.n_queries, args.seed, jobs=args.jobs,
            samples=args.samples)
        rows.append({
            "k": k,
            "n_queries": summary["n_queries"],
            "sigma": args.sigma,
            "samples": args.samples,
            "spacing": args.spacing,
            "median_error": summary["median_error"],
            "p90_error": summary["p90_error"],
            "mean_error": summary["mean_error"],
        })
        if args.per_query:
            for qidx, (g, est, err) in enumerate(per_query):
                per_query_rows.append({
                    "k": k, "query": qidx, "grid_index": g,
                    "est_x": est[0], "est_y": est[1], "error": err,
                })
    _write_rows(rows, args.format, args.out)
    if args.per_query:
        _write_rows(per_query_rows, args.format, args.per_query)
    return EXIT_OK


def cmd_detect(args) -> int:
    if args.input:
        ds = synth_data.load_csv(args.input, label_column=args.label_column)
    else:
        ds = synth_data.gen_sleeping_cell(args.seed, args.n, args.n_anomalous)
    ts = classifier.TrainingSet.from_dataset(ds)
    train, test = classifier.split(ts, args.alpha, args.seed)
    model = classifier.fit(train, args.k, EUCLIDEAN, backend=args.backend)
    report = classifier.evaluate(model, test)
    c = report.confusion
    rows = [{
        "k": args.k,
        "n_train": len(train),
        "n_test": report.n_test,
        "accuracy": report.accuracy,
        "error_rate": report.error_rate,
        "true_normal_pred_normal": int(c[0, 0]),
        "true_normal_pred_anomalous": int(c[0, 1]),
        "true_anomalous_pred_normal": int(c[1, 0]),
        "true_anomalous_pred_anomalous": int(c[1, 1]),
    }]
    _write_rows(rows, args.format, args.out)
    return EXIT_OK


_BENCH_DETERMINISTIC = ("n", "dim", "depth", "node_count", "build_comparisons",
                        "mean_visited_tree", "visited_scan",
                        "visited_growth_ratio")


def cmd_bench(args) -> int:
    sizes = _parse_int_list(args.sizes)
    rows = bench.scaling_run(sizes, args.dim, args.queries, args.seed,
                             backend=args.backend)
    failed = []
    for row in rows:
        # wall-clock numbers are informational only; the output file keeps
        # the deterministic counters so reruns are byte-identical
        print(f"# timing n={row['n']} build={row['build_seconds']:.4f}s "
              f"query={row['mean_query_seconds'] * 1e6:.1f}us")
        if row["n"] >= 1000 and args.dim <= 3:
            if not row["mean_visited_tree"] < row["visited_scan"]:
                failed.append(row["n"])
    _write_rows([{k: row[k] for k in _BENCH_DETERMINISTIC} for row in rows],
                args.format, args.out)
    if args.compare_backends:
        for row in bench.backend_comparison(
                args.compare_n, args.dim, args.queries, args.seed):
            print(f"# backend {row['backend']}: "
                  f"{row['queries_per_second']:.0f} knn queries/s "
                  f"(n={row['n']}, k={row['k']})")
    if failed:
        print(f"bench assertion failed: tree visited >= scan at n={failed}",
              file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


# -- parser ----------------------------------------------------------------


def _add_common(sp, metric=True, out_required=False):
    sp.add_argument("--seed", type=int, default=0, help="master RNG seed")
    sp.add_argument("--format", choices=("csv", "jsonl"), default="csv",
                    help="output row format")
    sp.add_argument("--out", type=str, default=None, required=out_required,
                    help="output file" + ("" if out_required else " (default: stdout)"))
    sp.add_argument("--backend", choices=available_backends(), default=None,
                    help="query kernel backend (default: best available)")
    sp.add_argument("--config", type=str, default=None,
                    help="key=value config file; explicit flags win")
    if metric:
        sp.add_argument("--metric", type=str, default="euclidean",
                        help="euclidean | manhattan | chebyshev | minkowski:<p>")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="nnkit",
        description="Nearest-neighbor search, K-d tree indexing, k-NN "
                    "classification and desk-scale 5G harnesses.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate synthetic datasets")
    g.add_argument("--kind", required=True,
                   choices=("fingerprints", "los-nlos", "sleeping-cell",
                            "mixture", "uniform"))
    g.add_argument("--n", type=int, default=800)
    g.add_argument("--dim", type=int, default=2)
    g.add_argument("--n-anomalous", type=int, default=200)
    g.add_argument("--n-per-class", type=int, default=400)
    g.add_argument("--mu-sep", type=float, default=2.0)
    g.add_argument("--classes", type=int, default=2)
    g.add_argument("--width", type=float, default=20.0)
    g.add_argument("--height", type=float, default=20.0)
    g.add_argument("--spacing", type=float, default=1.0)
    g.add_argument("--p0", type=float, default=-40.0)
    g.add_argument("--n-exp", type=float, default=2.5)
    g.add_argument("--sigma", type=float, default=2.0)
    g.add_argument("--d0", type=float, default=1.0)
    _add_common(g, metric=False, out_required=True)
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("build", help="build and serialize a K-d tree")
    b.add_argument("--input", required=True, help="points CSV")
    b.add_argument("--label-column", default=None)
    _add_common(b, out_required=True)
    b.set_defaults(func=cmd_build)

    q = sub.add_parser("query", help="run proximity queries")
    q.add_argument("--input", default=None, help="points CSV (auto-build)")
    q.add_argument("--tree", default=None, help="serialized tree file")
    q.add_argument("--label-column", default=None)
    q.add_argument("--mode", required=True,
                   choices=("nn", "knn", "radius", "ann", "mst", "diameter"))
    q.add_argument("--q", default=None, help="query point, e.g. '9,2'")
    q.add_argument("--k", type=int, default=1)
    q.add_argument("--rho", type=float, default=0.0)
    q.add_argument("--epsilon", type=float, default=0.0)
    q.add_argument("--oracle-check", action="store_true",
                   help="cross-check against linear scan; exit 4 on mismatch")
    _add_common(q)
    q.set_defaults(func=cmd_query)

    c = sub.add_parser("classify", help="k-NN classification experiment")
    c.add_argument("--input", required=True, help="labeled CSV")
    c.add_argument("--label-column", default="label")
    c.add_argument("--alpha", type=float, default=0.8)
    c.add_argument("--k", type=int, default=5)
    c.add_argument("--k-sweep", default=None, help="e.g. '1,3,5,7'")
    c.add_argument("--query", default=None, help="predict one point after fitting")
    c.add_argument("--export-model", default=None)
    _add_common(c)
    c.set_defaults(func=cmd_classify)

    l = sub.add_parser("localize", help="RSS-fingerprint localization harness")
    l.add_argument("--k", type=str, default="1", help="k or comma list, e.g. '1,3,5'")
    l.add_argument("--n-queries", type=int, default=500)
    l.add_argument("--width", type=float, default=20.0)
    l.add_argument("--height", type=float, default=20.0)
    l.add_argument("--spacing", type=float, default=1.0)
    l.add_argument("--p0", type=float, default=-40.0)
    l.add_argument("--n-exp", type=float, default=2.5)
    l.add_argument("--sigma", type=float, default=2.0)
    l.add_argument("--d0", type=float, default=1.0)
    l.add_argument("--samples", type=int, default=3,
                   help="RSS scans averaged per query reading")
    l.add_argument("--jobs", type=int, default=1)
    l.add_argument("--per-query", default=None, help="also write per-query rows here")
    _add_common(l, metric=False)
    l.set_defaults(func=cmd_localize)

    d = sub.add_parser("detect", help="sleeping-cell anomaly detection harness")
    d.add_argument("--input", default=None, help="labeled KPI CSV (default: generate)")
    d.add_argument("--label-column", default="label")
    d.add_argument("--n", type=int, default=800)
    d.add_argument("--n-anomalous", type=int, default=200)
    d.add_argument("--k", type=int, default=5)
    d.add_argument("--alpha", type=float, default=0.8)
    _add_common(d, metric=False)
    d.set_defaults(func=cmd_detect)

    be = sub.add_parser("bench", help="index scaling and backend benchmarks")
    be.add_argument("--sizes", default="1000,10000,100000")
    be.add_argument("--dim", type=int, default=2)
    be.add_argument("--queries", type=int, default=200)
    be.add_argument("--compare-backends", action="store_true",
                    help="also benchmark every available kernel backend")
    be.add_argument("--compare-n", type=int, default=20000)
    _add_common(be, metric=False)
    be.set_defaults(func=cmd_bench)

    return ap


def main(argv=None) -> int:
    ap = _parser()
    args = ap.parse_args(argv)
    try:
        if args.config:
            actions = next(
                a for a in ap._subparsers._group_actions
            ).choices[args.command]._actions
            _apply_config(actions, args, {})
        return args.func(args)
    except OracleMismatch as exc:
        print(f"oracle mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (CsvError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
