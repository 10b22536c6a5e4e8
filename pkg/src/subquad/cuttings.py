"""Hierarchical cuttings of disjoint segments, their overlay, and triangle tracing.

Every cell is a :class:`~subquad.polygon.ConvexCell` with half-open ownership,
so each level tiles the bounding box and every point of the box has exactly
one owner per level.  For each cell we keep the segments crossing its
interior (``cross``) and the segments that only touch its kept boundary
(``rim``, e.g. a sample segment lying along the cell's floor).

A level is refined cell by cell: draw a random sample of the cell's crossing
segments, build the trapezoidal map of the sample, clip its trapezoids to the
cell and accept if every piece is crossed by few enough segments.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .errors import DisjointnessViolation, LevelMismatch, VerticalLine
from .geom import Point2, Q, Segment2, Triangle, orient, sgn
from .meter import charge
from .polygon import ConvexCell, chord_params, hp_through, hp_value, point_at, segment_vs_cell

RESAMPLE_ATTEMPTS = 20


def bounding_box(segments: Sequence[Segment2], extra: Sequence[Point2] = ()) -> ConvexCell:
    """Axis box strictly containing every endpoint, enlarged by a factor of two."""
    pts = [p for s in segments for p in (s.p, s.q)] + list(extra)
    if not pts:
        return ConvexCell.box(-1, -1, 1, 1)
    x0, x1 = min(p.x for p in pts), max(p.x for p in pts)
    y0, y1 = min(p.y for p in pts), max(p.y for p in pts)
    cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
    hx, hy = (x1 - x0) + 1, (y1 - y0) + 1  # twice the half-widths, plus a margin
    return ConvexCell.box(cx - hx, cy - hy, cx + hx, cy + hy)


# ---------------------------------------------------------------------------
# trapezoidal map of a small sample


def _y_at(seg: Segment2, x: Q) -> Q:
    p, q = seg.p, seg.q
    return p.y + (q.y - p.y) * (x - p.x) / (q.x - p.x)


def trapezoidal_map(segs, ids: Sequence[int], box: ConvexCell) -> list:
    """Trapezoids of the sample inside the bounding rectangle of ``box``.

    ``segs`` maps ids to segments lying in that rectangle (callers clip them
    first).  Returns ``(cell, floor_id, ceil_id)`` with ``None`` for the
    rectangle's own floor or ceiling.  Raises :class:`DisjointnessViolation`
    when two sample segments touch or cross.
    """
    xb0 = min(p.x for p in box.verts)
    xb1 = max(p.x for p in box.verts)
    yb0 = min(p.y for p in box.verts)
    yb1 = max(p.y for p in box.verts)
    for i in ids:
        if segs[i].is_vertical:
            raise VerticalLine(f"segment {i} is vertical", (i,))
    span = {i: (min(segs[i].p.x, segs[i].q.x), max(segs[i].p.x, segs[i].q.x)) for i in ids}
    xs = sorted({xb0, xb1} | {x for i in ids for x in span[i] if xb0 < x < xb1})
    charge(2, len(ids) * max(1, len(xs)))
    runs = []  # [floor, ceil, x_left, x_right]
    open_runs: dict = {}
    for a, b in zip(xs, xs[1:]):
        mid = (a + b) / 2
        active = [i for i in ids if span[i][0] <= a and span[i][1] >= b]
        active.sort(key=lambda i: _y_at(segs[i], mid))
        for u, v in zip(active, active[1:]):
            if _y_at(segs[u], a) >= _y_at(segs[v], a) or _y_at(segs[u], b) >= _y_at(segs[v], b):
                raise DisjointnessViolation(f"segments {u} and {v} intersect", (u, v))
        stack = [None] + active + [None]
        pairs = set(zip(stack, stack[1:]))
        nxt = {}
        for pr in zip(stack, stack[1:]):
            run = open_runs.get(pr)
            if run is None:
                run = [pr[0], pr[1], a, b]
                runs.append(run)
            else:
                run[3] = b
            nxt[pr] = run
        open_runs = {k: v for k, v in nxt.items() if k in pairs}
    out = []
    for fl, ce, xl, xr in runs:
        cons = [(Q(1), Q(0), -xl), (Q(-1), Q(0), xr)]
        if fl is None:
            cons.append((Q(0), Q(1), -yb0))
            f = lambda x: yb0  # noqa: E731
        else:
            s = segs[fl]
            lp, rp = (s.p, s.q) if s.p.x < s.q.x else (s.q, s.p)
            cons.append(hp_through(lp, rp))
            f = lambda x, s=s: _y_at(s, x)  # noqa: E731
        if ce is None:
            cons.append((Q(0), Q(-1), yb1))
            g = lambda x: yb1  # noqa: E731
        else:
            s = segs[ce]
            lp, rp = (s.p, s.q) if s.p.x < s.q.x else (s.q, s.p)
            cons.append(hp_through(rp, lp))
            g = lambda x, s=s: _y_at(s, x)  # noqa: E731
        verts = [Point2(xl, f(xl)), Point2(xr, f(xr)), Point2(xr, g(xr)), Point2(xl, g(xl))]
        vs = []
        for p in verts:
            if not vs or vs[-1] != p:
                vs.append(p)
        if len(vs) > 1 and vs[0] == vs[-1]:
            vs.pop()
        out.append((ConvexCell(cons, vs), fl, ce))
    return out


def clip_to_cell(seg: Segment2, poly: ConvexCell) -> Segment2:
    charge(3, len(poly.cons))
    t0, t1 = chord_params(seg, poly)
    if t0 == 0 and t1 == 1:
        return seg
    return Segment2(point_at(seg, t0), point_at(seg, t1))


# ---------------------------------------------------------------------------
# hierarchy


@dataclass
class CutCell:
    id: int
    level: int
    parent: Optional[int]
    poly: ConvexCell
    cross: list
    rim: list
    children: list = field(default_factory=list)

    @property
    def conflict(self) -> list:
        return self.cross


@dataclass
class HierCutting:
    segments: list
    r0: int
    r: int
    box: ConvexCell
    cells: list
    levels: list  # level j -> cell ids; level 0 is the box
    targets: list  # level j -> allowed conflict-list size
    attempts: int = 0

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def bottom(self) -> list:
        return [self.cells[c] for c in self.levels[-1]]

    def level_cells(self, j: int) -> list:
        return [self.cells[c] for c in self.levels[j]]

    def locate(self, p: Point2, j: int) -> list:
        """All level-``j`` cells owning ``p`` (exactly one inside the box)."""
        return [c for c in self.level_cells(j) if c.poly.owns(p, metered=False)]


def level_count(r0: int, r: int) -> int:
    if r <= 1:
        return 0
    s = 0
    while r0**s < r:
        s += 1
    return s


def _refine(
    segs,
    cell: CutCell,
    target: Q,
    r0: int,
    rng: random.Random,
    next_id: int,
    level: int,
) -> tuple:
    m = len(cell.cross)
    if m <= target:
        return [CutCell(next_id, level, cell.id, cell.poly, list(cell.cross), list(cell.rim))], 0
    k = min(m, 4 * r0)
    tries = 0
    while True:
        for _ in range(RESAMPLE_ATTEMPTS):
            tries += 1
            sample = sorted(rng.sample(cell.cross, k)) if k < m else list(cell.cross)
            chords = {i: clip_to_cell(segs[i], cell.poly) for i in sample}
            kids = []
            ok = True
            for trap, _, _ in trapezoidal_map(chords, sample, cell.poly):
                poly = trap.intersect(cell.poly)
                if poly is None:
                    continue
                cross, rim = [], []
                for i in cell.cross + cell.rim:
                    inside, meets = segment_vs_cell(segs[i], poly)
                    if inside:
                        cross.append(i)
                    elif meets:
                        rim.append(i)
                if len(cross) > target:
                    ok = False
                    break
                kids.append(CutCell(next_id + len(kids), level, cell.id, poly, cross, rim))
            if ok:
                return kids, tries
            if k >= m:
                raise AssertionError("full sample cannot leave crossings")
        k = min(m, math.ceil(k * 3 / 2))


def build_hier_cutting(segs: Sequence[Segment2], r0: int, r: int, seed: int = 0, box: ConvexCell | None = None) -> HierCutting:
    """Hierarchy of cuttings; level ``j`` conflict lists have size at most ``n / r0**j``
    (and the bottom level at most ``n / r``)."""
    if r0 < 2:
        raise ValueError("r0 must be at least 2")
    segs = list(segs)
    n = len(segs)
    if n and not 1 <= r <= n:
        raise ValueError("need 1 <= r <= n")
    rng = random.Random(seed)
    box = box or bounding_box(segs)
    s = level_count(r0, r)
    root = CutCell(0, 0, None, box, list(range(n)), [])
    cells = [root]
    levels = [[0]]
    targets = [Q(n)]
    attempts = 0
    for j in range(1, s + 1):
        target = max(Q(n, r0**j), Q(n, max(r, 1)))
        targets.append(target)
        ids = []
        for cid in levels[j - 1]:
            parent = cells[cid]
            kids, tries = _refine(segs, parent, target, r0, rng, len(cells), j)
            attempts += tries
            for kid in kids:
                parent.children.append(kid.id)
                cells.append(kid)
                ids.append(kid.id)
        levels.append(ids)
    _check_bottom_disjoint(segs, [cells[c] for c in levels[-1]])
    return HierCutting(segs, r0, r, box, cells, levels, targets, attempts)


def segments_touch(a: Segment2, b: Segment2) -> bool:
    """Closed segments share a point (uncharged helper for validation)."""

    def o(p, q, r):
        return sgn((q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x))

    d1, d2 = o(a.p, a.q, b.p), o(a.p, a.q, b.q)
    d3, d4 = o(b.p, b.q, a.p), o(b.p, b.q, a.q)
    if d1 * d2 < 0 and d3 * d4 < 0:
        return True

    def on(p, q, r):
        return min(p.x, q.x) <= r.x <= max(p.x, q.x) and min(p.y, q.y) <= r.y <= max(p.y, q.y)

    return (
        (d1 == 0 and on(a.p, a.q, b.p))
        or (d2 == 0 and on(a.p, a.q, b.q))
        or (d3 == 0 and on(b.p, b.q, a.p))
        or (d4 == 0 and on(b.p, b.q, a.q))
    )


def _check_bottom_disjoint(segs, bottom) -> None:
    seen = set()
    for c in bottom:
        ids = sorted(set(c.cross) | set(c.rim))
        for x in range(len(ids)):
            for y in range(x + 1, len(ids)):
                pr = (ids[x], ids[y])
                if pr in seen:
                    continue
                seen.add(pr)
                charge(4)
                if segments_touch(segs[pr[0]], segs[pr[1]]):
                    raise DisjointnessViolation(f"segments {pr[0]} and {pr[1]} intersect", pr)


# ---------------------------------------------------------------------------
# overlay


@dataclass
class OverlayCell:
    id: int
    level: int
    tau: int
    tau2: int
    parent: Optional[int]
    poly: ConvexCell
    a_cross: list
    a_rim: list
    b_cross: list
    b_rim: list
    children: list = field(default_factory=list)
    count: int = 0  # crossings owned by the cell, filled in by the solver

    @property
    def a_set(self) -> list:
        return self.a_cross + self.a_rim

    @property
    def b_set(self) -> list:
        return self.b_cross + self.b_rim


@dataclass
class Overlay:
    ha: HierCutting
    hb: HierCutting
    cells: list
    levels: list

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def level_cells(self, j: int) -> list:
        return [self.cells[c] for c in self.levels[j]]

    def bottom(self) -> list:
        return self.level_cells(self.depth)


def _split(segs, ids, poly) -> tuple:
    cross, rim = [], []
    for i in ids:
        inside, meets = segment_vs_cell(segs[i], poly)
        if inside:
            cross.append(i)
        elif meets:
            rim.append(i)
    return cross, rim


def overlay(ha: HierCutting, hb: HierCutting) -> Overlay:
    if ha.depth != hb.depth:
        raise LevelMismatch(f"hierarchies have {ha.depth} and {hb.depth} levels")
    box = ha.box.intersect(hb.box)
    ra, rb = ha.cells[0], hb.cells[0]
    root = OverlayCell(0, 0, 0, 0, None, box, *_split(ha.segments, ra.cross, box), *_split(hb.segments, rb.cross, box))
    cells = [root]
    levels = [[0]]
    for j in range(1, ha.depth + 1):
        ids = []
        for sid in levels[j - 1]:
            sigma = cells[sid]
            ta, tb = ha.cells[sigma.tau], hb.cells[sigma.tau2]
            for ca in ta.children:
                pa = ha.cells[ca].poly
                for cb in tb.children:
                    poly = pa.intersect(hb.cells[cb].poly)
                    if poly is None:
                        continue
                    ac, ar = _split(ha.segments, sigma.a_set, poly)
                    bc, br = _split(hb.segments, sigma.b_set, poly)
                    cell = OverlayCell(len(cells), j, ca, cb, sid, poly, ac, ar, bc, br)
                    sigma.children.append(cell.id)
                    cells.append(cell)
                    ids.append(cell.id)
        levels.append(ids)
    return Overlay(ha, hb, cells, levels)


def classify_segments(sigma: OverlayCell, a_segs, b_segs) -> tuple:
    """``(A_long, A_short, B_long, B_short)`` over the segments crossing the cell.

    Long segments have no endpoint in the cell's interior.  Rim segments
    (``sigma.a_rim``, ``sigma.b_rim``) are neither; counting treats them like
    short ones.
    """

    def split(segs, cross):
        long_, short = [], []
        for i in cross:
            s = segs[i]
            charge(3, 2 * len(sigma.poly.cons))
            if _interior(sigma.poly, s.p) or _interior(sigma.poly, s.q):
                short.append(i)
            else:
                long_.append(i)
        return long_, short

    al, ash = split(a_segs, sigma.a_cross)
    bl, bsh = split(b_segs, sigma.b_cross)
    return al, ash, bl, bsh


def _interior(poly: ConvexCell, p: Point2) -> bool:
    return all(hp_value(h, p) > 0 for h in poly.cons)


# ---------------------------------------------------------------------------
# triangle tracing


class TriangleRegion:
    """Closed triangle (or segment) as an intersection of closed halfplanes."""

    def __init__(self, tri: Triangle):
        self.tri = tri
        vs = list(tri.vertices)
        if tri.degenerate:
            lo, hi = min(vs, key=lambda p: (p.x, p.y)), max(vs, key=lambda p: (p.x, p.y))
            self.verts = [lo, hi] if lo != hi else [lo]
            if lo == hi:
                # four non-vertical lines through the point
                sx, dx = lo.x + lo.y, lo.x - lo.y
                self.halfplanes = [
                    (Q(1), Q(1), -sx),
                    (Q(-1), Q(-1), sx),
                    (Q(-1), Q(1), dx),
                    (Q(1), Q(-1), -dx),
                ]
            else:
                h = hp_through(lo, hi)
                dx, dy = hi.x - lo.x, hi.y - lo.y
                # caps normal to (dx, dy) unless that makes them vertical
                nx, ny = (dx, dy) if dy != 0 else (dx, abs(dx))
                self.halfplanes = [
                    h,
                    (-h[0], -h[1], -h[2]),
                    (nx, ny, -(nx * lo.x + ny * lo.y)),
                    (-nx, -ny, nx * hi.x + ny * hi.y),
                ]
        else:
            if orient(vs[0], vs[1], vs[2]) < 0:
                vs[1], vs[2] = vs[2], vs[1]
            self.verts = vs
            self.halfplanes = [hp_through(vs[i], vs[(i + 1) % 3]) for i in range(3)]
        self._memo: dict = {}

    def side(self, i: int, p: Point2) -> int:
        key = (i, p.x, p.y)
        s = self._memo.get(key)
        if s is None:
            charge(3)
            s = self._memo[key] = sgn(hp_value(self.halfplanes[i], p))
        return s

    def contains(self, p: Point2) -> bool:
        return all(self.side(i, p) >= 0 for i in range(len(self.halfplanes)))


@dataclass
class CellVerdict:
    kind: str  # "inside", "outside" or "crossed"
    cutting: tuple = ()  # halfplane indices whose boundary passes through the cell
    short: bool = False  # the cell owns a triangle vertex


def classify_cell(region: TriangleRegion, poly: ConvexCell) -> CellVerdict:
    signs = [[region.side(i, v) for v in poly.verts] for i in range(len(region.halfplanes))]
    if all(s >= 0 for row in signs for s in row):
        return CellVerdict("inside")
    if any(all(s < 0 for s in row) for row in signs):
        return CellVerdict("outside")
    charge(3, len(poly.cons) * len(region.verts))
    for h in poly.cons:
        if all(hp_value(h, v) < 0 for v in region.verts):
            return CellVerdict("outside")
    cutting = tuple(i for i, row in enumerate(signs) if any(s < 0 for s in row))
    short = any(poly.owns(v, metered=False) for v in region.verts)
    return CellVerdict("crossed", cutting, short)


@dataclass
class TriangleTrace:
    contained: list  # level j -> overlay cell ids fully inside the triangle
    crossed: list  # level j -> overlay cell ids crossed by the boundary
    bottom: dict  # bottom cell id -> CellVerdict


def trace_triangle(
    tri: Triangle | TriangleRegion,
    ov: Overlay,
    skip: Callable[[OverlayCell], bool] | None = None,
) -> TriangleTrace:
    """Descend the overlay; cells are reported at the first level where they are
    contained, crossed cells are refined down to the bottom.  ``skip`` prunes
    cells known to own nothing of interest."""
    region = tri if isinstance(tri, TriangleRegion) else TriangleRegion(tri)
    contained = [[] for _ in ov.levels]
    crossed = [[] for _ in ov.levels]
    bottom: dict = {}
    frontier = [0]
    for j in range(ov.depth + 1):
        nxt = []
        for cid in frontier:
            cell = ov.cells[cid]
            if skip is not None and skip(cell):
                continue
            v = classify_cell(region, cell.poly)
            if v.kind == "outside":
                continue
            if v.kind == "inside":
                contained[j].append(cid)
                continue
            crossed[j].append(cid)
            if j == ov.depth:
                bottom[cid] = v
            else:
                nxt.extend(cell.children)
        frontier = nxt
    return TriangleTrace(contained, crossed, bottom)
