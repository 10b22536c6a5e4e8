"""Command line: generate, solve, verify, bench, rotate."""

from __future__ import annotations

import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import click

from .errors import GeometryError, InstanceFormatError
from .generate import KINDS, generate
from .instancefile import InstanceFile, format_q
from .solver import (
    ProblemInstance,
    brute_force_oracle,
    choose_shear,
    count_within_triangles,
    default_g,
    shear_instance,
    thread_cap,
)

BENCH_FIELDS = ("n", "g", "phase", "arity", "count", "wall_time")
PREPROCESS_STAGES = ("cuttings", "cells", "order_types")


def _delta(ctx, param, value):
    if value is None:
        return None
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise click.BadParameter(f"not a rational: {value!r}")


def solver_options(f):
    opts = [
        click.option("--g", type=int, default=None, help="Bottom cutting parameter (default round(n^(2/31)), at least 2)."),
        click.option("--r0", type=click.Choice(["2", "4"]), default=None, help="Branching factor of the cutting hierarchy."),
        click.option("--delta", callback=_delta, default=None, help="Oracle slack, a rational such as 1/20."),
        click.option("--n0", type=int, default=None, help="Base-case size of the batched location recursion."),
        click.option("--oracle", type=click.Choice(["exhaustive", "kd"]), default=None),
        click.option("--seed", type=int, default=None),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def build_instance(doc: InstanceFile, **flags) -> ProblemInstance:
    """Flags override the file's params block, which overrides the defaults."""
    params = dict(doc.params)
    for k, v in flags.items():
        if v is not None:
            params[k] = int(v) if k == "r0" else v
    return ProblemInstance(doc.A, doc.B, doc.C, **params)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _load(path: str) -> InstanceFile:
    try:
        return InstanceFile.read(path)
    except InstanceFormatError as e:
        raise click.ClickException(f"{path}: {e}")


@click.group()
def main():
    """Count red-blue segment crossings inside query triangles."""


# ---------------------------------------------------------------------------


@main.command("generate")
@click.option("--n", type=click.IntRange(min=1), required=True)
@click.option("--kind", type=click.Choice(KINDS), default="disjoint-random")
@click.option("--seed", type=int, default=0)
@click.option("--triangles", type=int, default=None, help="Number of triangles (default n).")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def cmd_generate(n, kind, seed, triangles, out):
    """Write a seeded random instance.  Planted instances get an answers sidecar."""
    gen = generate(kind, n, seed=seed, triangles=triangles)
    doc = InstanceFile(gen.A, gen.B, gen.C, {"seed": seed})
    _emit(doc.dumps(), out)
    if kind == "planted-concurrency":
        side = json.dumps({"planted": [{"a": a, "b": b, "c": c} for a, b, c in gen.planted]}, indent=1) + "\n"
        if out:
            _emit(side, sidecar_path(out))
        else:
            click.echo(side, err=True, nl=False)


def sidecar_path(path: str) -> str:
    return (path[:-5] if path.endswith(".json") else path) + ".answers.json"


# ---------------------------------------------------------------------------


def report_dict(rep) -> dict:
    return {
        "counts": rep.counts,
        "shear": format_q(rep.shear),
        "fallback_cells": rep.fallback_cells,
        "meter": {f"{ph}/{ar}": c for (ph, ar), c in sorted(rep.meter.snapshot().items())},
        "timings": {k: round(v, 6) for k, v in rep.timings.items()},
        "recursion": [
            {"tau": tau, "tag": tag, "M": r.M, "N": r.N, "size": r.total_size, "depth": r.depth}
            for tau, tag, r in rep.recursion
        ],
    }


@main.command("solve")
@click.argument("instance", type=click.Path(exists=True, dir_okay=False))
@solver_options
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="json")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def cmd_solve(instance, fmt, out, **flags):
    """Count the crossings inside every triangle of INSTANCE."""
    inst = build_instance(_load(instance), **flags)
    try:
        rep = count_within_triangles(inst)
    except GeometryError as e:
        raise click.ClickException(f"{type(e).__name__}: {e}")
    if fmt == "json":
        _emit(json.dumps(report_dict(rep), indent=1) + "\n", out)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["triangle", "count"])
        w.writerows(enumerate(rep.counts))
        _emit(buf.getvalue(), out)


# ---------------------------------------------------------------------------


def _verify_one(inst: ProblemInstance) -> list:
    got = count_within_triangles(inst).counts
    want = brute_force_oracle(inst)
    return [(k, g, w) for k, (g, w) in enumerate(zip(got, want)) if g != w]


@main.command("verify")
@click.argument("instances", nargs=-1, type=click.Path(exists=True, dir_okay=False))
@solver_options
@click.option("--n", "sizes", type=int, multiple=True, help="Generate instances of this size (repeatable).")
@click.option("--kind", type=click.Choice(KINDS), default="disjoint-random")
@click.option("--count", type=int, default=1, help="Generated instances per size.")
def cmd_verify(instances, sizes, kind, count, seed, **flags):
    """Compare the solver with the brute-force oracle; exit 1 on any mismatch.

    Checks the given files, or seeded generated instances when --n is used.
    """
    jobs = []
    for path in instances:
        jobs.append((path, build_instance(_load(path), seed=seed, **flags)))
    base = seed or 0
    for n in sizes:
        for k in range(count):
            gen = generate(kind, n, seed=base + k)
            jobs.append((f"{kind}:n={n}:seed={base + k}", ProblemInstance(gen.A, gen.B, gen.C, seed=base + k)))
            for key, v in flags.items():
                if v is not None:
                    setattr(jobs[-1][1], key, int(v) if key == "r0" else v)
    if not jobs:
        raise click.UsageError("give instance files or --n")
    bad = 0
    for name, inst in jobs:
        try:
            diffs = _verify_one(inst)
        except GeometryError as e:
            raise click.ClickException(f"{name}: {type(e).__name__}: {e}")
        if diffs:
            bad += 1
            for k, g, w in diffs[:10]:
                click.echo(f"MISMATCH {name} triangle {k}: solver {g}, oracle {w}")
    click.echo(f"{len(jobs) - bad}/{len(jobs)} instances agree with the oracle")
    sys.exit(1 if bad else 0)


# ---------------------------------------------------------------------------


def bench_rows(n: int, kind: str, seed: int, g: int | None, **params) -> list:
    gen = generate(kind, n, seed=seed)
    gg = g if g is not None else default_g(n)
    inst = ProblemInstance(gen.A, gen.B, gen.C, g=gg, seed=seed, **params)
    rep = count_within_triangles(inst)
    wall = {
        "preprocess": sum(rep.timings.get(k, 0.0) for k in PREPROCESS_STAGES),
        "query": rep.timings.get("queries", 0.0),
    }
    rows = []
    for (phase, arity), c in sorted(rep.meter.snapshot().items()):
        rows.append({"n": n, "g": gg, "phase": phase, "arity": arity, "count": c, "wall_time": round(wall.get(phase, 0.0), 6)})
    return rows


def fit_exponent(xs: list, ys: list) -> float:
    """Least-squares slope of log y against log x."""
    pts = [(math.log(x), math.log(y)) for x, y in zip(xs, ys) if x > 0 and y > 0]
    if len(pts) < 2:
        return float("nan")
    mx = sum(p for p, _ in pts) / len(pts)
    my = sum(q for _, q in pts) / len(pts)
    den = sum((p - mx) ** 2 for p, _ in pts)
    return sum((p - mx) * (q - my) for p, q in pts) / den if den else float("nan")


def bench_report(sizes, kind="disjoint-random", seed=0, g=None, **params) -> dict:
    sizes = sorted(set(sizes))
    workers = min(thread_cap(), len(sizes))
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_bench_job, [(n, kind, seed, g, params) for n in sizes]))
    else:
        parts = [bench_rows(n, kind, seed, g, **params) for n in sizes]
    rows = [r for part in parts for r in part]  # merged in size order
    totals = {n: sum(r["count"] for r in rows if r["n"] == n and r["phase"] == "query") for n in sizes}
    return {
        "kind": kind,
        "seed": seed,
        "rows": rows,
        "query_totals": {str(n): t for n, t in totals.items()},
        "query_exponent": fit_exponent(list(totals), list(totals.values())),
    }


def _bench_job(args):
    n, kind, seed, g, params = args
    return bench_rows(n, kind, seed, g, **params)


def render_bench(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.DictWriter(buf, BENCH_FIELDS, lineterminator="\n")
    w.writeheader()
    w.writerows(report["rows"])
    buf.write(f"# query_exponent,{report['query_exponent']:.6f}\n")
    return buf.getvalue()


def parse_bench(text: str, fmt: str) -> dict:
    """Inverse of :func:`render_bench` (rows and exponent)."""
    if fmt == "json":
        return json.loads(text)
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = []
    for r in csv.DictReader(body):
        rows.append({k: (float(v) if k == "wall_time" else v if k == "phase" else int(v)) for k, v in r.items()})
    exp = next(float(ln.split(",")[1]) for ln in text.splitlines() if ln.startswith("# query_exponent"))
    return {"rows": rows, "query_exponent": exp}


@main.command("bench")
@click.option("--n", "sizes", type=int, multiple=True, default=(64, 128, 256, 512), show_default=True)
@click.option("--kind", type=click.Choice(KINDS), default="disjoint-random")
@click.option("--g", type=int, default=None)
@click.option("--r0", type=click.Choice(["2", "4"]), default="2")
@click.option("--delta", callback=_delta, default=None)
@click.option("--n0", type=int, default=None)
@click.option("--oracle", type=click.Choice(["exhaustive", "kd"]), default=None)
@click.option("--seed", type=int, default=0)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def cmd_bench(sizes, kind, g, r0, delta, n0, oracle, seed, fmt, out):
    """Meter counts per size, phase and arity, with the fitted query exponent."""
    params = {"r0": int(r0)}
    for k, v in (("delta", delta), ("n0", n0), ("oracle", oracle)):
        if v is not None:
            params[k] = v
    t0 = time.perf_counter()
    report = bench_report(sizes, kind, seed, g, **params)
    _emit(render_bench(report, fmt), out)
    click.echo(f"bench: {len(sizes)} sizes in {time.perf_counter() - t0:.1f}s, query exponent {report['query_exponent']:.3f}", err=True)


# ---------------------------------------------------------------------------


def rotate_document(doc: InstanceFile) -> InstanceFile:
    """Shear ``(x, y) -> (x + s*y, y)`` leaving no vertical segment or triangle edge."""
    inst = ProblemInstance(doc.A, doc.B, doc.C)
    s = choose_shear(inst)
    out = shear_instance(inst, s)
    total = s if doc.shear is None else doc.shear + s
    return InstanceFile(out.A, out.B, out.C, dict(doc.params), total)


@main.command("rotate")
@click.argument("instance", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def cmd_rotate(instance, out):
    """Apply a small rational shear removing vertical segments and edges."""
    _emit(rotate_document(_load(instance)).dumps(), out)


if __name__ == "__main__":
    main()
