"""Counting red-blue crossings inside query triangles.

Preprocessing builds a hierarchical cutting for each colour, overlays them and
computes, for every overlay cell, the number of crossings it owns.  In each
bottom cell the crossings of long segments are the vertices of the gamma-line
arrangement of the cell; its order type is resolved in batches and a point
location structure is built on it.  Crossings involving short segments (or
segments running along the cell boundary) are kept as explicit points.

A query triangle is traced down the overlay.  Cells inside it contribute their
cached count; each bottom cell crossed by its boundary is answered by point
location of the dual points of the crossing edges (one or two edges), or by
brute force over the cell's pairs (three edges, or a triangle vertex inside).
Triangles are closed: crossings on the boundary count.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from contextvars import copy_context
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .arrangement import LineRealization, levels_build
from .counting import (
    GammaStructure,
    count_long_long,
    owned_crossings,
    points_in_halfplane_count,
    short_pairs,
    short_triangle_count,
    two_level_count,
)
from .cuttings import (
    TriangleRegion,
    bounding_box,
    build_hier_cutting,
    classify_segments,
    overlay,
    trace_triangle,
)
from .errors import GeneralPositionViolation, ParallelLines
from .fredman import (
    DEFAULT_DELTA,
    DEFAULT_N0,
    CliqueIndex,
    TriplePoint,
    TripleSurface,
    assemble_order_types,
    batched_locate,
    filter_gamma,
    make_oracle,
    required_keys,
)
from .geom import Point2, Q, Segment2, Triangle, gamma_line, point_in_triangle, seg_intersect
from .meter import CostMeter, charge, metering
from .polygon import hp_value


def default_g(n: int) -> int:
    return max(2, round(n ** (2 / 31))) if n > 0 else 2


def thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("SUBQUAD_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class ProblemInstance:
    A: list
    B: list
    C: list
    g: Optional[int] = None
    r0: int = 2
    delta: Fraction = Fraction(1, 20)
    n0: int = DEFAULT_N0
    oracle: str = "kd"
    seed: int = 0

    @property
    def n(self) -> int:
        return max(len(self.A), len(self.B))

    def resolved_g(self) -> int:
        return self.g if self.g is not None else default_g(self.n)


@dataclass
class CountReport:
    counts: list
    meter: CostMeter
    timings: dict = field(default_factory=dict)
    recursion: list = field(default_factory=list)
    fallback_cells: int = 0
    provenance: Optional[list] = None  # per triangle: (kind, cell id, amount)
    shear: Q = Q(0)

    def query_total(self) -> int:
        return self.meter.total("query")


# ---------------------------------------------------------------------------
# shear pre-pass


def _directions(inst: ProblemInstance) -> list:
    out = [(s.q.x - s.p.x, s.q.y - s.p.y) for s in list(inst.A) + list(inst.B)]
    for t in inst.C:
        vs = t.vertices
        out += [(vs[i].x - vs[j].x, vs[i].y - vs[j].y) for i, j in ((0, 1), (1, 2), (2, 0))]
    return [d for d in out if d != (0, 0)]


def needs_shear(inst: ProblemInstance) -> bool:
    return any(dx == 0 for dx, _ in _directions(inst))


def choose_shear(inst: ProblemInstance) -> Q:
    """Smallest ``1/q`` making every segment and triangle edge non-vertical."""
    bad = {-dx / dy for dx, dy in _directions(inst) if dy != 0}
    q = 2 * len(bad) + 1
    while Q(1, q) in bad:
        q += 1
    return Q(1, q)


def shear_point(p: Point2, s: Q) -> Point2:
    return Point2(p.x + s * p.y, p.y)


def shear_instance(inst: ProblemInstance, s: Q) -> ProblemInstance:
    """Image under ``(x, y) -> (x + s*y, y)``; incidences and containment are preserved."""
    seg = lambda t: Segment2(shear_point(t.p, s), shear_point(t.q, s))
    tri = lambda t: Triangle(*(shear_point(v, s) for v in t.vertices), degenerate=t.degenerate)
    return ProblemInstance(
        [seg(a) for a in inst.A],
        [seg(b) for b in inst.B],
        [tri(c) for c in inst.C],
        inst.g,
        inst.r0,
        inst.delta,
        inst.n0,
        inst.oracle,
        inst.seed,
    )


# ---------------------------------------------------------------------------
# preprocessing


@dataclass
class CellData:
    a_all: list
    b_all: list
    gammas: list
    points: list  # explicit crossings owned by the cell: (a, b, point)
    structure: Optional[GammaStructure] = None
    fallback: bool = False


@dataclass
class Prepared:
    inst: ProblemInstance
    overlay: object
    cells: dict  # bottom cell id -> CellData
    recursion: list
    fallback_cells: int


def _cell_stage(inst, ov) -> dict:
    A, B = inst.A, inst.B
    cells = {}
    for sigma in ov.bottom():
        al, ash, bl, bsh = classify_segments(sigma, A, B)
        count, dec = count_long_long(sigma, [A[i] for i in al], [B[i] for i in bl], al, bl)
        pairs = dec.boundary + short_pairs(ash + sigma.a_rim, al, bsh + sigma.b_rim, bl)
        try:
            pts = owned_crossings(sigma.poly, A, B, pairs)
        except GeneralPositionViolation as e:
            bad = next((a, b) for a, b in pairs if not _proper(A[a], B[b]))
            raise GeneralPositionViolation(f"{e} (A segment {bad[0]}, B segment {bad[1]})", (("A", bad[0]), ("B", bad[1]))) from None
        sigma.count = count + len(pts)
        cells[sigma.id] = CellData(sigma.a_set, sigma.b_set, filter_gamma(dec), pts)
    for j in range(ov.depth - 1, -1, -1):
        for sigma in ov.level_cells(j):
            sigma.count = sum(ov.cells[c].count for c in sigma.children)
    return cells


def _proper(a, b) -> bool:
    try:
        seg_intersect(a, b)
    except GeneralPositionViolation:
        return False
    return True


def _order_type_stage(inst, ov, cells) -> tuple:
    """Batch the sign tests of every bottom cell of the red cutting, then
    assemble per-cell order types and build point location on them."""
    LA = [s.line() for s in inst.A]
    LB = [s.line() for s in inst.B]
    groups: dict = {}
    for sigma in ov.bottom():
        if len(cells[sigma.id].gammas) >= 2:
            groups.setdefault(sigma.tau, []).append(sigma.id)
    reports = []
    fallbacks = 0
    oracle = make_oracle(inst.oracle, delta=inst.delta) if inst.oracle == "kd" else make_oracle(inst.oracle)
    for tau, ids in sorted(groups.items()):
        g_red, g_blue, h_red, h_blue = set(), set(), set(), set()
        for cid in ids:
            a, b, c, d = required_keys(cells[cid].gammas)
            g_red |= a
            g_blue |= b
            h_red |= c
            h_blue |= d
        idx = []
        for tag, red, blue in (("G", g_red, g_blue), ("H", h_red, h_blue)):
            P = [TriplePoint(t, tuple(LB[i] for i in t)) for t in sorted(blue)]
            S = [TripleSurface(t, tuple(LA[i] for i in t), tag) for t in sorted(red)]
            cl, rep = batched_locate(P, S, oracle, inst.n0)
            reports.append((tau, tag, rep))
            idx.append(CliqueIndex(P, S, cl))
        for cid in ids:
            try:
                ot = assemble_order_types(idx[0], idx[1], {cid: cells[cid].gammas})[cid]
            except ParallelLines:
                # two crossings of the cell share their x-coordinate
                cells[cid].fallback = True
                fallbacks += 1
                continue
            _attach(cells[cid], LA, LB, ot)
    for sigma in ov.bottom():
        cd = cells[sigma.id]
        if len(cd.gammas) == 1:
            _attach(cd, LA, LB, assemble_order_types(None, None, {0: cd.gammas})[0])
    return reports, fallbacks


def _attach(cd: CellData, LA, LB, ot) -> None:
    lines = [gamma_line(LA[a], LB[b]) for a, b in cd.gammas]
    cd.structure = GammaStructure(lines, levels_build(ot), LineRealization(lines))


def preprocess(inst: ProblemInstance, timings: dict | None = None) -> Prepared:
    timings = {} if timings is None else timings
    n = min(len(inst.A), len(inst.B))
    g = inst.resolved_g()
    r = max(1, n // g) if n else 1
    t0 = time.perf_counter()
    box = bounding_box(list(inst.A) + list(inst.B))
    ha = build_hier_cutting(inst.A, inst.r0, r, seed=2 * inst.seed + 1, box=box)
    hb = build_hier_cutting(inst.B, inst.r0, r, seed=2 * inst.seed + 2, box=box)
    ov = overlay(ha, hb)
    t1 = time.perf_counter()
    cells = _cell_stage(inst, ov)
    t2 = time.perf_counter()
    reports, fallbacks = _order_type_stage(inst, ov, cells)
    t3 = time.perf_counter()
    timings.update(cuttings=t1 - t0, cells=t2 - t1, order_types=t3 - t2)
    return Prepared(inst, ov, cells, reports, fallbacks)


# ---------------------------------------------------------------------------
# queries


def _points_in(points: list, hs: list) -> int:
    if len(hs) == 1:
        return points_in_halfplane_count([p for _, _, p in points], hs)[0]
    charge(3, len(points) * len(hs))
    return sum(1 for _, _, p in points if all(hp_value(h, p) >= 0 for h in hs))


def query_triangle(prep: Prepared, tri: Triangle, record: bool = False) -> tuple:
    """``(count, provenance)`` for one triangle."""
    inst, ov = prep.inst, prep.overlay
    region = TriangleRegion(tri)
    tr = trace_triangle(region, ov, skip=lambda c: c.count == 0)
    total = 0
    prov = [] if record else None
    for ids in tr.contained:
        for cid in ids:
            total += ov.cells[cid].count
            if record:
                prov.append(("contained", cid, ov.cells[cid].count))
    for cid, verdict in tr.bottom.items():
        cd = prep.cells[cid]
        sigma = ov.cells[cid]
        if verdict.short or len(verdict.cutting) >= 3 or cd.fallback:
            got = short_triangle_count(sigma, region, inst.A, inst.B, cd.a_all, cd.b_all)
        else:
            hs = [region.halfplanes[i] for i in verdict.cutting]
            got = _points_in(cd.points, hs)
            if cd.structure is not None:
                got += two_level_count(cd.structure, hs[0], hs[1] if len(hs) > 1 else None)
        total += got
        if record and got:
            prov.append(("crossed", cid, got))
    return total, prov


def count_within_triangles(inst: ProblemInstance, record: bool = False) -> CountReport:
    """Exact number of red-blue crossings inside every (closed) triangle of ``inst.C``."""
    timings: dict = {}
    shear = Q(0)
    if needs_shear(inst):
        shear = choose_shear(inst)
        inst = shear_instance(inst, shear)
    meter = CostMeter()
    if not inst.A or not inst.B:
        return CountReport([0] * len(inst.C), meter, timings, [], 0, [[] for _ in inst.C] if record else None, shear)
    with metering(meter, "preprocess"):
        prep = preprocess(inst, timings)
    t0 = time.perf_counter()
    results = _run_queries(prep, list(inst.C), record, meter)
    timings["queries"] = time.perf_counter() - t0
    counts = [c for c, _ in results]
    prov = [p for _, p in results] if record else None
    return CountReport(counts, meter, timings, prep.recursion, prep.fallback_cells, prov, shear)


def _run_queries(prep: Prepared, tris: list, record: bool, meter: CostMeter) -> list:
    workers = min(thread_cap(), max(1, len(tris)))
    if workers == 1:
        with metering(meter, "query"):
            return [query_triangle(prep, t, record) for t in tris]
    chunks = [tris[i::workers] for i in range(workers)]

    def work(chunk):
        m = CostMeter()
        with metering(m, "query"):
            return m, [query_triangle(prep, t, record) for t in chunk]

    with ThreadPoolExecutor(workers) as ex:
        futs = [ex.submit(copy_context().run, work, ch) for ch in chunks]
        parts = [f.result() for f in futs]
    out = [None] * len(tris)
    for w, (m, res) in enumerate(parts):
        meter._counts.update(m._counts)
        for k, r in enumerate(res):
            out[w + k * workers] = r
    return out


# ---------------------------------------------------------------------------
# oracle and concurrency


def brute_force_oracle(inst: ProblemInstance) -> list:
    """All pairwise crossings, each tested against every (closed) triangle."""
    pts = []
    for a in inst.A:
        for b in inst.B:
            p = seg_intersect(a, b)
            if p is not None:
                pts.append(p)
    return [sum(1 for p in pts if point_in_triangle(p, t)) for t in inst.C]


def segment_concurrency(A: Sequence[Segment2], B: Sequence[Segment2], C: Sequence[Segment2], **params) -> Optional[tuple]:
    """Some ``(a, b, c)`` with the crossing of ``a`` and ``b`` on ``c``, or ``None``.

    The segments of ``C`` become degenerate triangles; the witness is recovered
    by local brute force in a cell that contributed to a nonzero count.
    """
    inst = ProblemInstance(list(A), list(B), [Triangle.from_segment(c) for c in C], **params)
    rep = count_within_triangles(inst, record=True)
    if rep.shear:
        inst = shear_instance(inst, rep.shear)
    hit = next((k for k, c in enumerate(rep.counts) if c), None)
    if hit is None:
        return None
    # rebuild the same overlay (deterministic under the seed) to drill into the cell
    prep = preprocess(inst)
    region = TriangleRegion(inst.C[hit])
    for kind, cid, _ in rep.provenance[hit]:
        stack = [cid]
        while stack:
            sigma = prep.overlay.cells[stack.pop()]
            if sigma.children:
                stack.extend(sigma.children)
                continue
            for a in sigma.a_set:
                for b in sigma.b_set:
                    p = seg_intersect(inst.A[a], inst.B[b])
                    if p is not None and sigma.poly.owns(p) and region.contains(p):
                        return a, b, hit
    raise AssertionError("nonzero count without a witness")
