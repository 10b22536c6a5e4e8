"""One test per acceptance criterion; each prints a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines.
"""

import math
import random
import time
from collections import defaultdict
from fractions import Fraction as F

from click.testing import CliRunner

from subquad import cli, solver
from subquad.arrangement import (
    brute_force_sign_vector,
    build_dcel_from_order_type,
    build_order_type_direct,
    levels_build,
    levels_query,
)
from subquad.arrangement.meiser import meiser_build, meiser_query
from subquad.counting import count_long_long
from subquad.cuttings import build_hier_cutting
from subquad.fredman import KdOracle, batched_locate
from subquad.generate import generate
from subquad.geom import Point2, Segment2, Triangle, point_in_triangle, seg_intersect
from subquad.meter import metering
from subquad.solver import ProblemInstance, brute_force_oracle, count_within_triangles, segment_concurrency

from test_arrangement import probes, random_lines
from test_counting import boundary_points, brute_interior_pairs, random_chords, random_cell
from test_cuttings import box_probes, segment_probes
from test_fredman import check, instance, shape_ok

# fixed after one calibration run each, then enforced
MEISER_CONSTANT = 3  # per-query tests <= 3 log2 n
LEVELS_CONSTANT = 3  # per-query tests <= 3 (log2 n)^2
CELL_CONSTANT = 16  # total cells <= 16 r^1.2
CLIQUE_CONSTANT = 4  # vertex size <= 4 m log2 m


def report(name, ok, detail):
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return ok


# ---------------------------------------------------------------------------


def _degenerate_suite(seed):
    """Triangles collapsed to segments and points, many through crossings."""
    gen = generate("disjoint-random", 32, seed=seed)
    rng = random.Random(seed)
    crossings = [p for a in gen.A for b in gen.B if (p := seg_intersect(a, b)) is not None]
    C = []
    for _ in range(10):
        s = rng.choice(gen.A + gen.B)
        C.append(Triangle(s.p, s.q, s.q, degenerate=True))
        if crossings:
            p = rng.choice(crossings)
            C.append(Triangle(p, p, p, degenerate=True))
            d = (rng.randint(-9, 9), rng.randint(1, 9))
            C.append(Triangle(Point2(p.x - d[0], p.y - d[1]), Point2(p.x + d[0], p.y + d[1]), p, degenerate=True))
        u = Point2(rng.randint(0, 1280), rng.randint(0, 1280))
        C.append(Triangle(u, u, u, degenerate=True))
    return ProblemInstance(gen.A, gen.B, C, g=rng.choice([2, 4]), seed=seed)


def test_oracle_equivalence():
    t0 = time.perf_counter()
    suites = defaultdict(lambda: [0, 0])
    jobs = []
    for n in (8, 16, 32, 64):
        for s in range(40):
            jobs.append(("random", "disjoint-random", n, s, 2 + 2 * (s % 2)))
        for s in range(8):
            jobs.append(("planted", "planted-concurrency", n, 100 + s, 4))
        if n <= 16:
            for s in range(6):
                jobs.append(("bundles", "parallel-bundles", n, 200 + s, 2))
    planted_found = 0
    planted_total = 0
    for suite, kind, n, seed, g in jobs:
        gen = generate(kind, n, seed=seed)
        inst = ProblemInstance(gen.A, gen.B, gen.C, g=g, seed=seed)
        got = count_within_triangles(inst).counts
        ok = got == brute_force_oracle(inst)
        suites[suite][0] += ok
        suites[suite][1] += 1
        for a, b, c in gen.planted:
            planted_total += 1
            planted_found += got[c] >= 1
    for seed in range(20):
        inst = _degenerate_suite(seed)
        suites["degenerate"][0] += count_within_triangles(inst).counts == brute_force_oracle(inst)
        suites["degenerate"][1] += 1
    for seed in range(3):
        gen = generate("planted-concurrency", 100, seed=seed, triangles=12)
        segs = [Segment2(t.vertices[0], t.vertices[1]) for t in gen.C if t.degenerate]
        w = segment_concurrency(gen.A, gen.B, segs, g=4)
        ok = w is not None and point_in_triangle(seg_intersect(gen.A[w[0]], gen.B[w[1]]), Triangle.from_segment(segs[w[2]]))
        suites["concurrency"][0] += ok
        suites["concurrency"][1] += 1
    elapsed = time.perf_counter() - t0
    total = sum(v[1] for k, v in suites.items() if k != "concurrency")
    good = all(v[0] == v[1] for v in suites.values()) and planted_found == planted_total
    ok = good and total >= 200 and elapsed < 300
    detail = ", ".join(f"{k} {v[0]}/{v[1]}" for k, v in suites.items())
    report("oracle equivalence", ok, f"{detail}; planted triples found {planted_found}/{planted_total}; {elapsed:.0f}s")
    assert ok


# ---------------------------------------------------------------------------


def _pure(fn, log, name):
    def wrapped(*a, **kw):
        with metering() as m:
            out = fn(*a, **kw)
        log[name].append(m.total())
        return out

    return wrapped


def test_order_type_purity(monkeypatch):
    log = defaultdict(list)
    # inside the solver pipeline, on every instance
    monkeypatch.setattr(solver, "assemble_order_types", _pure(solver.assemble_order_types, log, "assemble_order_types"))
    monkeypatch.setattr(solver, "levels_build", _pure(solver.levels_build, log, "levels_build"))
    for kind, n, seed in [("parallel-bundles", 16, 1), ("parallel-bundles", 24, 2), ("disjoint-random", 64, 3), ("planted-concurrency", 48, 4)]:
        gen = generate(kind, n, seed=seed)
        inst = ProblemInstance(gen.A, gen.B, gen.C, g=4, seed=seed)
        assert count_within_triangles(inst).counts == brute_force_oracle(inst)
    # on standalone arrangements, with and without concurrencies
    rng = random.Random(17)
    for n, hubs in [(16, ()), (64, ((0, 0),)), (256, ()), (200, ((1, 1), (-2, 3)))]:
        ot = build_order_type_direct(random_lines(rng, n, hubs))
        _pure(build_dcel_from_order_type, log, "build_dcel_from_order_type")(ot)
        _pure(levels_build, log, "levels_build")(ot)

        def meiser_full(ot):
            ms = meiser_build(ot, F(1, 2), seed=n)
            list(ms.walk(build=True))  # children are built lazily; force them all

        _pure(meiser_full, log, "meiser_build")(ot)
    ok = all(log[k] and not any(log[k]) for k in ("assemble_order_types", "levels_build", "build_dcel_from_order_type", "meiser_build"))
    report("order-type purity", ok, ", ".join(f"{k}: {len(v)} calls, {sum(v)} counts" for k, v in sorted(log.items())))
    assert ok


# ---------------------------------------------------------------------------


def test_point_location():
    rng = random.Random(2024)
    queries = 0
    mismatches = 0
    for n, count in [(16, 2000), (64, 3000), (256, 5000)]:
        lines = random_lines(rng, n, ((0, 0),) if n == 64 else ())
        ot = build_order_type_direct(lines)
        lv = levels_build(ot)
        ms = meiser_build(ot, F(1, 2), seed=n)
        for q in probes(rng, lines, count)[:count]:
            want = brute_force_sign_vector(q, lines)
            mismatches += levels_query(lv, q, lines).sign_vector() != want
            mismatches += meiser_query(ms, q, lines).sign_vector() != want
            queries += 1
    worst_m, worst_l = 0.0, 0.0
    for n in (16, 32, 64, 128, 256, 512, 1024):
        lines = random_lines(rng, n)
        ot = build_order_type_direct(lines)
        lv = levels_build(ot)
        ms = meiser_build(ot, F(1, 2), seed=n)
        for q in probes(rng, lines, 60):
            with metering() as m:
                meiser_query(ms, q, lines)
            worst_m = max(worst_m, m.total() / math.log2(n))
            with metering() as m:
                levels_query(lv, q, lines)
            worst_l = max(worst_l, m.total() / math.log2(n) ** 2)
    ok_c = mismatches == 0 and queries >= 10**4
    ok_m = worst_m <= MEISER_CONSTANT
    ok_l = worst_l <= LEVELS_CONSTANT
    report(
        "point location",
        ok_c and ok_m and ok_l,
        f"{queries} queries, {mismatches} mismatches; worst Meiser cost {worst_m:.2f}*log2(n) (bound {MEISER_CONSTANT}); "
        f"worst levels cost {worst_l:.2f}*log2(n)^2 (bound {LEVELS_CONSTANT})",
    )
    assert ok_c and ok_l
    assert ok_m, f"Meiser per-query cost {worst_m:.2f}*log2(n) exceeds {MEISER_CONSTANT}*log2(n)"


# ---------------------------------------------------------------------------


class _CellGrid:
    """Bucket cells by bounding box so each probe is tested against few cells."""

    def __init__(self, cells, box, k=32):
        xs = [v.x for v in box.verts]
        ys = [v.y for v in box.verts]
        self.x0, self.y0 = min(xs), min(ys)
        self.w, self.h = (max(xs) - self.x0) / k, (max(ys) - self.y0) / k
        self.k = k
        self.buckets = defaultdict(list)
        for c in cells:
            vx = [v.x for v in c.poly.verts]
            vy = [v.y for v in c.poly.verts]
            for i in range(self._ix(min(vx)), self._ix(max(vx)) + 1):
                for j in range(self._iy(min(vy)), self._iy(max(vy)) + 1):
                    self.buckets[(i, j)].append(c)

    def _ix(self, x):
        return min(self.k - 1, max(0, math.floor((x - self.x0) / self.w)))

    def _iy(self, y):
        return min(self.k - 1, max(0, math.floor((y - self.y0) / self.h)))

    def owners(self, p):
        return sum(c.poly.owns(p, metered=False) for c in self.buckets[(self._ix(p.x), self._iy(p.y))])


def test_cutting_invariants():
    rng = random.Random(7)
    failures = []
    worst_ratio = 0.0
    probes_total = 0
    for r0 in (2, 4):
        for kind, n, g in [("disjoint-random", 64, 2), ("parallel-bundles", 128, 4), ("disjoint-random", 512, 2)]:
            segs = generate(kind, n, seed=r0).A
            r = n // g
            h = build_hier_cutting(segs, r0, r, seed=r0 + n)
            pts = box_probes(rng, h.box, 9000) + segment_probes(rng, segs, 1000)
            for j in range(len(h.levels)):
                grid = _CellGrid(h.level_cells(j), h.box)
                bad = sum(grid.owners(p) != 1 for p in pts)
                probes_total += len(pts)
                if bad:
                    failures.append(f"r0={r0} n={n} level {j}: {bad} probes not owned exactly once")
            over = [len(c.cross) for c in h.bottom() if len(c.cross) > n / r]
            if over:
                failures.append(f"r0={r0} n={n}: bottom conflict lists {over} exceed n/r={n / r}")
            total = sum(len(lvl) for lvl in h.levels[1:])
            worst_ratio = max(worst_ratio, total / r**1.2)
            if total > CELL_CONSTANT * r**1.2:
                failures.append(f"r0={r0} n={n}: {total} cells > {CELL_CONSTANT}*r^1.2")
    ok = not failures
    report("cutting invariants", ok, f"{probes_total} probe checks; worst cells/r^1.2 = {worst_ratio:.2f} (C={CELL_CONSTANT}); " + ("; ".join(failures) or "all levels partition"))
    assert ok


# ---------------------------------------------------------------------------


def test_batched_locate():
    cases = [
        (11, 8, 8, 2, "G", "exhaustive"),
        (12, 60, 50, 4, "G", "kd"),
        (13, 100, 100, 8, "G", "kd"),
        (14, 100, 100, 8, "G", "exhaustive"),
        (15, 300, 200, 16, "G", "kd"),
        (16, 120, 2, 1, "G", "kd"),
        (17, 2, 150, 1, "G", "kd"),
        (18, 60, 60, 3, "H", "kd"),
        (19, 130, 120, 64, "H", "kd"),
    ]
    lines = []
    for seed, M, N, n0, tag, oracle in cases:
        _, _, P, S = instance(seed, M, N, tag)
        cl, rep = batched_locate(P, S, KdOracle() if oracle == "kd" else oracle, n0)
        full = M * N <= 10**4
        check(cl, P, S, tag, sample=None if full else 1000, rng=random.Random(seed))
        shape_ok(rep, n0, 6 if tag == "G" else 4)
        modes = sorted({nd.mode for nd in rep.nodes})
        lines.append(f"{tag} {M}x{N} {'full' if full else 'sampled'} {len(cl)} cliques {'/'.join(modes)}")
    report("batched locate", True, "; ".join(lines))


# ---------------------------------------------------------------------------


def test_counting_equivalences():
    rng = random.Random(99)
    fitted = 0.0
    crossings = 0
    for trial in range(1000):
        cell = random_cell(rng)
        pool = boundary_points(cell, rng.choice([2, 3, 5]))
        A = random_chords(rng, cell, rng.randint(0, 10), pool)
        B = random_chords(rng, cell, rng.randint(0, 10), pool, avoid=A)
        c, dec = count_long_long(cell, A, B)
        inside, _ = brute_interior_pairs(cell, A, B)
        assert c == len(inside), f"trial {trial}: count {c} != {len(inside)}"
        assert dec.edges() == inside, f"trial {trial}: clique edges differ"
        crossings += c
        m = len(A) + len(B)
        if m > 1:
            fitted = max(fitted, dec.vertex_size() / (m * math.log2(m)))
    ok = fitted <= CLIQUE_CONSTANT
    report("counting equivalences", ok, f"1000 cells, {crossings} crossings; vertex size <= {fitted:.2f}*m*log2(m) (c={CLIQUE_CONSTANT})")
    assert ok


# ---------------------------------------------------------------------------


def test_growth_report(tmp_path):
    sizes = (64, 128, 256, 512)
    out = tmp_path / "bench.json"
    res = CliRunner().invoke(cli.main, ["bench", *sum((["--n", str(n)] for n in sizes), []), "--format", "json", "--out", str(out)])
    assert res.exit_code == 0, res.output
    rep = cli.parse_bench(out.read_text(), "json")
    gs = {r["n"]: r["g"] for r in rep["rows"]}
    assert gs == {n: max(2, round(n ** (2 / 31))) for n in sizes}
    totals = {n: rep["query_totals"][str(n)] for n in sizes}
    exponent = rep["query_exponent"]
    # a brute-force pass over one triangle tests each of the n^2 pairs twice
    # (crossing, then containment); the triangle set has n triangles
    below = {n: totals[n] < 2 * n * n * n for n in sizes if n >= 256}
    ok = math.isfinite(exponent) and all(below.values())
    detail = ", ".join(f"n={n}: {totals[n]} ({totals[n] / (2 * n * n):.2f} x 2n^2, {totals[n] / (2 * n**3):.4f} x 2n^2|C|)" for n in sizes)
    report("growth report", ok, f"query exponent {exponent:.3f}; {detail}")
    assert ok
