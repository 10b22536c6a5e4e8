"""Convex cells with half-open ownership.

A cell is an intersection of closed halfplanes ``a*x + b*y + c >= 0`` together
with the vertex list of its closure (counter-clockwise).  A point on the
boundary belongs to the cell that contains ``p + (eps**2, eps)`` for tiny
``eps``: for a constraint that vanishes at ``p`` the point is kept iff
``(b, a)`` is lexicographically positive.  Cells that tile a region therefore
own every point of it exactly once (left walls and floors are kept, right
walls and ceilings are not).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .geom import Point2, Q, Segment2, sgn
from .meter import charge


def halfplane_keeps_boundary(h) -> bool:
    a, b, _ = h
    return b > 0 or (b == 0 and a > 0)


def hp_value(h, p: Point2) -> Q:
    return h[0] * p.x + h[1] * p.y + h[2]


def hp_through(p: Point2, q: Point2) -> tuple:
    """Halfplane left of the directed line ``p -> q`` (boundary included)."""
    a = p.y - q.y
    b = q.x - p.x
    return (a, b, -(a * p.x + b * p.y))


def _cross(o: Point2, a: Point2, b: Point2) -> Q:
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)


@dataclass
class ConvexCell:
    cons: list  # halfplanes (a, b, c)
    verts: list  # closure vertices, counter-clockwise

    @classmethod
    def box(cls, x0, y0, x1, y1) -> "ConvexCell":
        x0, y0, x1, y1 = map(Q, (x0, y0, x1, y1))
        cons = [(1, 0, -x0), (-1, 0, x1), (0, 1, -y0), (0, -1, y1)]
        verts = [Point2(x0, y0), Point2(x1, y0), Point2(x1, y1), Point2(x0, y1)]
        return cls([tuple(map(Q, h)) for h in cons], verts)

    def owns(self, p: Point2, metered: bool = True) -> bool:
        if metered:
            charge(3, len(self.cons))
        for h in self.cons:
            v = hp_value(h, p)
            if v < 0 or (v == 0 and not halfplane_keeps_boundary(h)):
                return False
        return True

    def strictly_inside(self, p: Point2) -> bool:
        charge(3, len(self.cons))
        return all(hp_value(h, p) > 0 for h in self.cons)

    def in_closure(self, p: Point2) -> bool:
        charge(3, len(self.cons))
        return all(hp_value(h, p) >= 0 for h in self.cons)

    def area2(self) -> Q:
        v = self.verts
        return sum((v[i].x * v[(i + 1) % len(v)].y - v[(i + 1) % len(v)].x * v[i].y for i in range(len(v))), Q(0))

    def centroid(self) -> Point2:
        n = len(self.verts)
        return Point2(sum(p.x for p in self.verts) / n, sum(p.y for p in self.verts) / n)

    def clip(self, h) -> Optional["ConvexCell"]:
        """Intersection with one more halfplane; ``None`` if it has no interior."""
        vals = [hp_value(h, p) for p in self.verts]
        if all(v >= 0 for v in vals):
            return self
        if all(v <= 0 for v in vals):
            return None
        out = []
        n = len(self.verts)
        for i in range(n):
            p, vp = self.verts[i], vals[i]
            q, vq = self.verts[(i + 1) % n], vals[(i + 1) % n]
            if vp >= 0:
                out.append(p)
            if (vp > 0 and vq < 0) or (vp < 0 and vq > 0):
                t = vp / (vp - vq)
                out.append(Point2(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)))
        return _make(self.cons + [h], out)

    def intersect(self, other: "ConvexCell") -> Optional["ConvexCell"]:
        cell: Optional[ConvexCell] = self
        for h in other.cons:
            cell = cell.clip(h)
            if cell is None:
                return None
        return cell

    def edges(self) -> list:
        n = len(self.verts)
        return [(self.verts[i], self.verts[(i + 1) % n]) for i in range(n)]


def _make(cons: list, verts: list) -> Optional[ConvexCell]:
    pts = []
    for p in verts:
        if not pts or pts[-1] != p:
            pts.append(p)
    while len(pts) > 1 and pts[0] == pts[-1]:
        pts.pop()
    # drop collinear vertices
    changed = True
    while changed and len(pts) >= 3:
        changed = False
        for i in range(len(pts)):
            if _cross(pts[i - 1], pts[i], pts[(i + 1) % len(pts)]) == 0:
                pts.pop(i)
                changed = True
                break
    if len(pts) < 3:
        return None
    kept = []
    n = len(pts)
    for h in cons:
        if any(hp_value(h, pts[i]) == 0 and hp_value(h, pts[(i + 1) % n]) == 0 for i in range(n)):
            if h not in kept:
                kept.append(h)
    return ConvexCell(kept, pts)


# ---------------------------------------------------------------------------
# segments against cells


def segment_vs_cell(seg: Segment2, cell: ConvexCell) -> tuple:
    """``(crosses_interior, meets_cell)`` for the closed segment and half-open cell."""
    charge(3, len(cell.cons))
    p, q = seg.p, seg.q
    dx, dy = q.x - p.x, q.y - p.y
    # open interval for the interior, and a closed/open interval for ownership
    olo, ohi = Q(0), Q(1)
    lo, lo_c, hi, hi_c = Q(0), True, Q(1), True
    interior = True
    meets = True
    for h in cell.cons:
        f0 = hp_value(h, p)
        f1 = h[0] * dx + h[1] * dy
        keep = halfplane_keeps_boundary(h)
        if f1 == 0:
            if f0 <= 0:
                interior = False
            if f0 < 0 or (f0 == 0 and not keep):
                meets = False
            continue
        t = -f0 / f1
        if f1 > 0:
            if t >= olo:
                olo = t
            if t > lo or (t == lo and lo_c):
                lo, lo_c = t, keep
        else:
            if t <= ohi:
                ohi = t
            if t < hi or (t == hi and hi_c):
                hi, hi_c = t, keep
    interior = interior and olo < ohi and olo < 1 and ohi > 0
    meets = meets and (lo < hi or (lo == hi and lo_c and hi_c))
    return interior, meets


def chord_params(seg: Segment2, cell: ConvexCell) -> tuple:
    """Parameter interval ``[t0, t1]`` of the segment inside the closed cell."""
    p, q = seg.p, seg.q
    dx, dy = q.x - p.x, q.y - p.y
    lo, hi = Q(0), Q(1)
    for h in cell.cons:
        f0 = hp_value(h, p)
        f1 = h[0] * dx + h[1] * dy
        if f1 == 0:
            continue
        t = -f0 / f1
        if f1 > 0:
            lo = max(lo, t)
        else:
            hi = min(hi, t)
    return lo, hi


def point_at(seg: Segment2, t: Q) -> Point2:
    return Point2(seg.p.x + t * (seg.q.x - seg.p.x), seg.p.y + t * (seg.q.y - seg.p.y))


def convex_hull_sides(verts: Sequence[Point2], h) -> tuple:
    """Signs of every vertex against a halfplane, as ``(any_pos, any_neg, any_zero)``."""
    s = [sgn(hp_value(h, p)) for p in verts]
    return (1 in s, -1 in s, 0 in s)
