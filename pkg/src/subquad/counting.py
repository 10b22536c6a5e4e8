"""Counting red-blue crossings inside one convex cell.

Long segments are chords of the cell, and two chords cross inside it exactly
when their endpoints interleave along the boundary.  Positions are read
clockwise from the lexicographically smallest vertex of the cell.  Pairs that
meet on the boundary itself are reported separately, since the half-open
ownership rule (not the interleaving test) decides which cell counts them.

The crossing pairs are also returned as edge-disjoint complete bipartite
blocks, built with a segment tree over the boundary order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cmp_to_key
from typing import Sequence

from .geom import Point2, Q, Segment2, _det, seg_intersect
from .meter import charge
from .polygon import ConvexCell, chord_params, hp_value, point_at

BRUTE_FORCE_LIMIT = 256


@dataclass
class PairCliqueDecomposition:
    blocks: list = field(default_factory=list)  # (a ids, b ids) tuples
    boundary: list = field(default_factory=list)  # (a, b) pairs meeting on the cell boundary

    def edges(self) -> set:
        return {(a, b) for A, B in self.blocks for a in A for b in B}

    def vertex_size(self) -> int:
        return sum(len(A) + len(B) for A, B in self.blocks)

    def pairs(self) -> list:
        return [(a, b) for A, B in self.blocks for a in A for b in B]


def _cell_of(sigma) -> ConvexCell:
    return sigma.poly if hasattr(sigma, "poly") else sigma


# ---------------------------------------------------------------------------
# boundary order


class BoundaryOrder:
    """Clockwise boundary of a convex cell, anchored at its smallest vertex."""

    def __init__(self, cell: ConvexCell):
        cw = list(reversed(cell.verts))
        k = min(range(len(cw)), key=lambda i: (cw[i].x, cw[i].y))
        self.verts = cw[k:] + cw[:k]
        self.cell = cell

    def key(self, p: Point2) -> tuple:
        """``(edge index, parameter)`` of a boundary point."""
        vs = self.verts
        m = len(vs)
        charge(3, m)
        for i in range(m):
            u, w = vs[i], vs[(i + 1) % m]
            if _det(u, w, p) != 0:
                continue
            dx, dy = w.x - u.x, w.y - u.y
            t = ((p.x - u.x) * dx + (p.y - u.y) * dy) / (dx * dx + dy * dy)
            if 0 <= t < 1:
                return (i, t)
        raise ValueError(f"{p} is not on the cell boundary")

    def chord(self, seg: Segment2) -> tuple:
        """Boundary keys of the two ends of a long segment's chord."""
        t0, t1 = chord_params(seg, self.cell)
        return self.key(point_at(seg, t0)), self.key(point_at(seg, t1))


def _ranks(order: BoundaryOrder, a_segs, b_segs):
    """Distinct integer positions for every chord end, plus the tied (a, b) pairs.

    Ends sharing a boundary point are ordered so that the chords through it do
    not interleave: the chord whose far end is cyclically farther comes first.
    """
    ends = []  # (key, far key, chord index)
    chords = []
    for s in list(a_segs) + list(b_segs):
        k0, k1 = order.chord(s)
        c = len(chords)
        chords.append((k0, k1))
        ends.append((k0, k1, c))
        ends.append((k1, k0, c))

    def far(e):
        # cyclic distance class of the far end measured from the near end
        return (0 if e[1] > e[0] else 1, e[1])

    def cmp(e, f):
        if e[0] != f[0]:
            return -1 if e[0] < f[0] else 1
        charge(3)
        fe, ff = far(e), far(f)
        return (fe < ff) - (fe > ff)

    ends.sort(key=cmp_to_key(cmp))
    na = len(a_segs)
    pos = [[0, 0] for _ in chords]
    seen = [0] * len(chords)
    for r, (_, _, c) in enumerate(ends):
        pos[c][seen[c]] = r
        seen[c] += 1
    ties = []
    i = 0
    while i < len(ends):
        j = i
        while j < len(ends) and ends[j][0] == ends[i][0]:
            j += 1
        group = {e[2] for e in ends[i:j]}
        ties.extend((a, b - na) for a in group if a < na for b in group if b >= na)
        i = j
    return [tuple(p) for p in pos[:na]], [tuple(p) for p in pos[na:]], ties


# ---------------------------------------------------------------------------
# interleaving pairs as bipartite blocks


def _canonical(lo: int, hi: int, size: int) -> list:
    """Segment-tree nodes ``(start, stop)`` covering ``[lo, hi)`` of ``range(size)``."""
    out = []

    def rec(s, e):
        if hi <= s or e <= lo:
            return
        if lo <= s and e <= hi:
            out.append((s, e))
            return
        m = (s + e) // 2
        rec(s, m)
        rec(m, e)

    if lo < hi:
        rec(0, size)
    return out


def _blocks_one_way(X: list, Y: list, span: int) -> list:
    """Blocks of pairs with ``x0 < y0 < x1 < y1`` (positions already distinct)."""
    at: dict = {}

    def place(c, idx, which):
        s0, s1 = c
        lo, hi = 0, span
        anchor = s1 if which == 0 else s0
        while hi - lo > 1:
            m = (lo + hi) // 2
            if which == 0 and anchor >= m and s0 < m:
                at.setdefault((lo, hi), ([], []))[0].append(idx)
            if which == 1 and anchor < m and s1 >= m:
                at.setdefault((lo, hi), ([], []))[1].append(idx)
            if anchor < m:
                hi = m
            else:
                lo = m

    for i, c in enumerate(X):
        place(c, i, 0)
    for i, c in enumerate(Y):
        place(c, i, 1)
    blocks = []
    for xs, ys in at.values():
        if not xs or not ys:
            continue
        # nested chain: outermost first, so starts ascend and ends descend
        xs.sort(key=lambda i: X[i][0])
        starts = [X[i][0] for i in xs]
        ends = [-X[i][1] for i in xs]
        groups: dict = {}
        for y in ys:
            y0, y1 = Y[y]
            p = _bisect_left(starts, y0)  # x0 < y0
            q = _first_greater(ends, -y1)  # x1 < y1, i.e. -x1 > -y1
            for node in _canonical(q, p, len(xs)):
                groups.setdefault(node, []).append(y)
        for (s, e), yy in groups.items():
            blocks.append((tuple(xs[s:e]), tuple(yy)))
    return blocks


def _bisect_left(a, v):
    lo, hi = 0, len(a)
    while lo < hi:
        m = (lo + hi) // 2
        if a[m] < v:
            lo = m + 1
        else:
            hi = m
    return lo


def _first_greater(a, v):
    lo, hi = 0, len(a)
    while lo < hi:
        m = (lo + hi) // 2
        if a[m] <= v:
            lo = m + 1
        else:
            hi = m
    return lo


def count_long_long(sigma, a_segs: Sequence[Segment2], b_segs: Sequence[Segment2], a_ids=None, b_ids=None) -> tuple:
    """``(count, PairCliqueDecomposition)`` for chords crossing inside the cell.

    ``a_segs`` and ``b_segs`` are the long segments; ``a_ids``/``b_ids`` name
    them in the output (defaults: list positions).
    """
    a_ids = list(range(len(a_segs))) if a_ids is None else list(a_ids)
    b_ids = list(range(len(b_segs))) if b_ids is None else list(b_ids)
    if not a_segs or not b_segs:
        return 0, PairCliqueDecomposition()
    order = BoundaryOrder(_cell_of(sigma))
    pa, pb, ties = _ranks(order, a_segs, b_segs)
    X = [tuple(sorted(p)) for p in pa]
    Y = [tuple(sorted(p)) for p in pb]
    span = 2 * (len(X) + len(Y))
    blocks = [(tuple(a_ids[i] for i in xs), tuple(b_ids[j] for j in ys)) for xs, ys in _blocks_one_way(X, Y, span)]
    blocks += [(tuple(a_ids[i] for i in xs), tuple(b_ids[j] for j in ys)) for ys, xs in _blocks_one_way(Y, X, span)]
    count = sum(len(A) * len(B) for A, B in blocks)
    return count, PairCliqueDecomposition(blocks, [(a_ids[a], b_ids[b]) for a, b in ties])


# ---------------------------------------------------------------------------
# pairs involving short or rim segments


def owned_crossings(cell: ConvexCell, a_segs, b_segs, pairs) -> list:
    """``(a, b, point)`` for the given pairs whose crossing the cell owns."""
    out = []
    for a, b in pairs:
        p = seg_intersect(a_segs[a], b_segs[b])
        if p is not None and cell.owns(p):
            out.append((a, b, p))
    return out


def short_pairs(a_short, a_long, b_short, b_long) -> list:
    """All pairs with at least one short member, each listed once."""
    pairs = [(a, b) for a in a_short for b in list(b_short) + list(b_long)]
    pairs += [(a, b) for a in a_long for b in b_short]
    return pairs


def count_short_involved(sigma, a_segs, b_segs, a_short, a_long, b_short, b_long) -> int:
    """Crossings owned by the cell on pairs with at least one short segment.

    "Short" here covers every segment that is not a chord of the cell, which
    includes the rim segments lying along its boundary.
    """
    cell = _cell_of(sigma)
    return len(owned_crossings(cell, a_segs, b_segs, short_pairs(a_short, a_long, b_short, b_long)))


# ---------------------------------------------------------------------------
# halfplane counting over explicit points


def _angle_cmp(u: tuple, v: tuple) -> int:
    def half(w):
        return 0 if (w[1] > 0 or (w[1] == 0 and w[0] > 0)) else 1

    hu, hv = half(u), half(v)
    if hu != hv:
        return -1 if hu < hv else 1
    c = u[0] * v[1] - u[1] * v[0]
    return -1 if c > 0 else (1 if c < 0 else 0)


def _count_by_rotation(points: list, queries: list) -> list:
    """Offline halfplane counting: rotate a direction once around the circle,
    keeping the points sorted by projection, and answer each query by binary
    search in the order current at its normal's angle."""
    n = len(points)
    order = sorted(range(n), key=lambda i: (points[i].x, points[i].y))
    charge(2, n * max(1, math.ceil(math.log2(max(n, 2)))))
    # events: normals at which two points have equal projection
    events = []
    for i in range(n):
        for j in range(i + 1, n):
            dx, dy = points[j].x - points[i].x, points[j].y - points[i].y
            if dx == 0 and dy == 0:
                continue
            for w in ((-dy, dx), (dy, -dx)):
                if _angle_cmp(w, (Q(1), Q(0))) != 0:
                    events.append(w)
    charge(2, n * (n - 1) // 2)
    events.sort(key=cmp_to_key(_angle_cmp))
    qs = sorted(
        (k for k, h in enumerate(queries) if h[0] != 0 or h[1] != 0),
        key=cmp_to_key(lambda a, b: _angle_cmp(queries[a][:2], queries[b][:2])),
    )
    out = [0] * len(queries)
    for k, h in enumerate(queries):
        if h[0] == 0 and h[1] == 0:
            out[k] = n if h[2] >= 0 else 0
    e = 0
    for k in qs:
        h = queries[k]
        while e < len(events) and _angle_cmp(events[e], h[:2]) < 0:
            w = events[e]
            proj = [w[0] * points[i].x + w[1] * points[i].y for i in order]
            i = 0
            while i < n:
                j = i
                while j + 1 < n and proj[j + 1] == proj[i]:
                    j += 1
                if j > i:
                    order[i : j + 1] = order[i : j + 1][::-1]
                i = j + 1
            while e + 1 < len(events) and _angle_cmp(events[e + 1], w) == 0:
                e += 1
            e += 1
        # projections onto the normal are nondecreasing along ``order``
        lo, hi = 0, n
        while lo < hi:
            m = (lo + hi) // 2
            if hp_value(h, points[order[m]]) >= 0:
                hi = m
            else:
                lo = m + 1
            charge(3)
        out[k] = n - lo
    return out


def points_in_halfplane_count(points: Sequence[Point2], halfplanes: Sequence[tuple]) -> list:
    """For each closed halfplane ``a*x + b*y + c >= 0`` the number of points in it."""
    points = list(points)
    if len(points) < BRUTE_FORCE_LIMIT:
        out = []
        for h in halfplanes:
            charge(3, len(points))
            out.append(sum(1 for p in points if hp_value(h, p) >= 0))
        return out
    return _count_by_rotation(points, list(halfplanes))


# ---------------------------------------------------------------------------
# the gamma-line structure of one cell


def halfplane_dual(h: tuple) -> tuple:
    """Dual point of a halfplane's boundary line and the wanted sign.

    A crossing point ``p`` is in the closed halfplane iff the dual point lies
    on the wanted side of the gamma line of ``p`` (or on it).  Needs ``b != 0``.
    """
    a, b, c = h
    m, k = -a / b, c / b
    return Point2(m, k), (1 if b > 0 else -1)


class GammaStructure:
    """Point location over the gamma lines of one cell, answering halfplane
    queries by the set of lines on the wanted side of the located cell.

    ``pl`` must expose ``query(q, realization) -> Location``.
    """

    def __init__(self, lines: Sequence, pl, realization):
        self.lines = list(lines)
        self.pl = pl
        self.real = realization
        self._masks: dict = {}

    def canonical(self, h: tuple) -> int:
        """Bit mask of the gamma lines whose crossing point lies in ``h``."""
        if not self.lines:
            return 0
        q, want = halfplane_dual(h)
        loc = self.pl.query(q, self.real)
        key = (loc.key(), want)
        mask = self._masks.get(key)
        if mask is None:
            sv = loc.sign_vector()
            mask = 0
            for i, s in enumerate(sv):
                if s == want or s == 0:
                    mask |= 1 << i
            self._masks[key] = mask
        return mask

    def count(self, h: tuple) -> int:
        return bin(self.canonical(h)).count("1")


def two_level_count(structure: GammaStructure, h1: tuple | None, h2: tuple | None) -> int:
    """Gamma crossings inside ``h1`` and ``h2``; ``None`` means the whole plane.

    The first halfplane selects a canonical set of lines, the second counts
    within it.
    """
    full = (1 << len(structure.lines)) - 1
    m1 = full if h1 is None else structure.canonical(h1)
    if not m1:
        return 0
    m2 = full if h2 is None else structure.canonical(h2)
    return bin(m1 & m2).count("1")


def short_triangle_count(sigma, region, a_segs, b_segs, a_ids, b_ids) -> int:
    """Brute force over all pairs of the cell: crossings it owns inside the region."""
    cell = _cell_of(sigma)
    total = 0
    for a in a_ids:
        for b in b_ids:
            p = seg_intersect(a_segs[a], b_segs[b])
            if p is not None and cell.owns(p) and region.contains(p):
                total += 1
    return total
