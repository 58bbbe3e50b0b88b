"""``hpquad`` command line tool.

Exit codes: 0 success, 2 bad input or arguments, 3 corrupt index file.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time

import numpy as np

from .builder import HPIndex, build_index, decode
from .hpindex import Rect, membership, membership_batch, range_report, space_stats
from .io import (
    IndexFormatError,
    PointsFileError,
    format_points,
    load_index,
    parse_points,
    read_points,
    save_index,
    write_points,
)
from .k2 import k2_build, k2_decode, k2_membership_batch, k2_range, k2_space_stats
from .morton import GridSpec
from .oracle import gen_clustered, gen_uniform, make_cluster_spec, sample_queries

log = logging.getLogger("hpquad")

EXIT_USAGE = 2
EXIT_CORRUPT = 3


class UsageError(Exception):
    pass


def _ints(text: str, count: int, what: str) -> list[int]:
    parts = text.replace(",", " ").split()
    try:
        vals = [int(p) for p in parts]
    except ValueError:
        raise UsageError(f"malformed {what} {text!r}") from None
    if len(vals) != count:
        raise UsageError(f"{what} needs {count} integers, got {text!r}")
    return vals


def _grid(lg_u: int) -> GridSpec:
    try:
        return GridSpec.checked(lg_u)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load(path):
    try:
        return load_index(path)
    except FileNotFoundError:
        raise UsageError(f"no such index file: {path}") from None


def cmd_build(args) -> int:
    grid = _grid(args.lg_u)
    try:
        ps = read_points(args.input, grid)
    except FileNotFoundError:
        raise UsageError(f"no such points file: {args.input}") from None
    idx = build_index(ps) if args.structure == "hp" else k2_build(ps)
    save_index(idx, args.out)
    log.info("built %s index: n=%d lg_u=%d -> %s", args.structure, ps.n, grid.lg_u, args.out)
    return 0


def _query_points(args, grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    if args.point is not None:
        x, y = _ints(args.point, 2, "point")
        if not (0 <= x < grid.u and 0 <= y < grid.u):
            raise UsageError(f"point ({x}, {y}) outside {grid.u}x{grid.u} grid")
        return np.array([x]), np.array([y])
    try:
        with open(args.batch, encoding="utf-8") as fh:
            xs, ys, _ = parse_points(fh, grid)
    except FileNotFoundError:
        raise UsageError(f"no such query file: {args.batch}") from None
    return xs, ys


def cmd_query(args) -> int:
    idx = _load(args.index)
    xs, ys = _query_points(args, idx.grid)
    out = sys.stdout
    if isinstance(idx, HPIndex):
        if args.trace:
            for x, y in zip(xs.tolist(), ys.tolist()):
                hit, trace = membership(idx, (x, y))
                out.write(f"{int(hit)} {trace}\n")
            return 0
        member, _ = membership_batch(idx, xs, ys)
    else:
        if args.trace:
            log.warning("--trace applies to hp indexes only")
        member, _ = k2_membership_batch(idx, xs, ys)
    out.write("".join("1\n" if m else "0\n" for m in member.tolist()))
    return 0


def cmd_range(args) -> int:
    idx = _load(args.index)
    x0, y0, x1, y1 = _ints(args.rect, 4, "rect")
    try:
        rect = Rect(x0, y0, x1, y1).check(idx.grid)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    pts = range_report(idx, rect) if isinstance(idx, HPIndex) else k2_range(idx, rect)
    sys.stdout.write(format_points(pts))
    return 0


def _stats(idx):
    return space_stats(idx) if isinstance(idx, HPIndex) else k2_space_stats(idx)


def cmd_stats(args) -> int:
    st = _stats(_load(args.index))
    doc = {
        "structure": st.structure,
        "n": st.n,
        "lg_u": st.lg_u,
        "nodes": st.nodes,
        "bits_total": st.bits_total,
        "bpp": st.bpp,
        "bits_H": st.bits_H,
        "bits_L": st.bits_L,
        "bits_aux": st.bits_aux,
    }
    json.dump(doc, sys.stdout)
    sys.stdout.write("\n")
    return 0


def cmd_gen(args) -> int:
    grid = _grid(args.lg_u)
    if args.n < 0 or args.n > grid.u * grid.u:
        raise UsageError(f"cannot place {args.n} points on a {grid.u}x{grid.u} grid")
    if args.mode == "uniform":
        ps = gen_uniform(args.n, grid, args.seed)
    else:
        if args.clusters is None or args.diameter is None:
            raise UsageError("clusters mode needs --clusters and --diameter")
        try:
            spec = make_cluster_spec(args.clusters, args.n, args.diameter, grid, args.seed)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        ps = gen_clustered(spec, grid, args.seed)
    write_points(args.out, ps)
    log.info("wrote %d points to %s", ps.n, args.out)
    return 0


def cmd_sample(args) -> int:
    grid = _grid(args.lg_u)
    try:
        ps = read_points(args.points, grid)
    except FileNotFoundError:
        raise UsageError(f"no such points file: {args.points}") from None
    write_points(args.out, sample_queries(ps, args.query_class, args.count, args.seed))
    return 0


BENCH_COLUMNS = ["class", "structure", "n", "lg_u", "bpp", "ns_per_query", "mean_segments"]


def cmd_bench(args) -> int:
    if args.repeat < 3:
        raise UsageError("--repeat must be at least 3")
    idx = _load(args.index)
    try:
        with open(args.queries, encoding="utf-8") as fh:
            xs, ys, _ = parse_points(fh, idx.grid)
    except FileNotFoundError:
        raise UsageError(f"no such query file: {args.queries}") from None
    hp = isinstance(idx, HPIndex)
    run = (lambda: membership_batch(idx, xs, ys)) if hp else (lambda: k2_membership_batch(idx, xs, ys))
    _, extra = run()  # warm-up
    start = time.perf_counter_ns()
    for _ in range(args.repeat):
        run()
    elapsed = time.perf_counter_ns() - start
    queries = max(xs.size, 1) * args.repeat
    st = _stats(idx)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(BENCH_COLUMNS)
    writer.writerow([
        args.query_class, st.structure, st.n, st.lg_u,
        "" if st.bpp is None else f"{st.bpp:.4f}",
        f"{max(elapsed, 1) / queries:.1f}",
        (f"{extra.mean():.4f}" if extra.size else "0") if hp else "",
    ])
    return 0


def cmd_decode(args) -> int:
    idx = _load(args.index)
    ps = decode(idx) if isinstance(idx, HPIndex) else k2_decode(idx)
    write_points(args.out, ps)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hpquad", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("build", help="build an index from a points file")
    s.add_argument("--input", required=True)
    s.add_argument("--lg-u", type=int, required=True)
    s.add_argument("--structure", choices=["hp", "k2"], default="hp")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_build)

    s = sub.add_parser("query", help="membership queries")
    s.add_argument("index")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--point", help="x,y")
    g.add_argument("--batch", help="points file of queries")
    s.add_argument("--trace", action="store_true", help="print segments and LCPs")
    s.set_defaults(func=cmd_query)

    s = sub.add_parser("range", help="report points in a rectangle")
    s.add_argument("index")
    s.add_argument("--rect", required=True, help="x0,y0,x1,y1 (half-open)")
    s.set_defaults(func=cmd_range)

    s = sub.add_parser("stats", help="space usage as JSON")
    s.add_argument("index")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("gen", help="generate a synthetic points file")
    s.add_argument("--mode", choices=["uniform", "clusters"], required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--lg-u", type=int, required=True)
    s.add_argument("--clusters", type=int)
    s.add_argument("--diameter", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("sample", help="draw a query workload from a points file")
    s.add_argument("points")
    s.add_argument("--lg-u", type=int, required=True)
    s.add_argument("--class", dest="query_class", choices=["empty", "filled", "isolated"],
                   required=True)
    s.add_argument("--count", type=int, default=10000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("bench", help="time membership queries, CSV to stdout")
    s.add_argument("index")
    s.add_argument("--queries", required=True)
    s.add_argument("--class", dest="query_class", required=True,
                   help="label for the workload, e.g. empty, filled, isolated")
    s.add_argument("--repeat", type=int, default=5)
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("decode", help="write the indexed points back out")
    s.add_argument("index")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_decode)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (UsageError, PointsFileError) as exc:
        print(f"hpquad: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IndexFormatError as exc:
        print(f"hpquad: corrupt index: {exc}", file=sys.stderr)
        return EXIT_CORRUPT


if __name__ == "__main__":
    sys.exit(main())
