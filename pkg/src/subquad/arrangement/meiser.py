"""Sampling-based point location built from the order type only.

Each node holds a random sample ``S`` of its lines, the arrangement ``A(S)``
and the fan triangulation of every face from its reference vertex (the finite
boundary vertex with the smallest line-index tuple).  Unbounded faces use
ideal vertices, i.e. line directions.  A line is in the conflict list of a
triangle when some corner lies strictly on each side of it; corner sides come
from crossing ranks, so building needs no coordinates.

A query locates ``q`` in ``A(S)``, then in the fan, and recurses into the
conflict list of the triangle that holds it.  Lines that miss the triangle get
their sign from the corners.  Children are materialised the first time a query
reaches them; that work is again order-type only.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ..errors import SampleFailure
from ..geom import Line2, Point2, sgn
from ..meter import charge
from .dcel import RIGHT_INF, build_dcel_from_order_type
from .levels import LevelsPL, LineRealization
from .ordertype import OrderTypeLines

RESAMPLE_ATTEMPTS = 20
MIN_SAMPLE = 8
SAMPLE_CONSTANT = 40


def sample_size(eps, constant: float = SAMPLE_CONSTANT) -> int:
    inv = 1 / float(eps)
    return max(MIN_SAMPLE, math.ceil(constant * inv * math.log(inv)))


@dataclass(frozen=True)
class SignCell:
    """Cell of ``A(L)`` identified by the sign vector of its points."""

    kind: str
    signs: tuple

    def sign_vector(self) -> tuple:
        return self.signs

    @classmethod
    def from_signs(cls, signs) -> "SignCell":
        zeros = sum(1 for s in signs if s == 0)
        kind = "face" if zeros == 0 else "edge" if zeros == 1 else "vertex"
        return cls(kind, tuple(int(s) for s in signs))


class _SubRealization:
    def __init__(self, base, ids):
        self.base = base
        self.ids = ids

    def side(self, q, i):
        return self.base.side(q, self.ids[i])

    def cmp_x(self, q, i, j):
        return self.base.cmp_x(q, self.ids[i], self.ids[j])


class _Context:
    def __init__(self, ot: OrderTypeLines, eps, seed: int):
        self.ot = ot
        self.eps = Fraction(eps)
        self.rng = random.Random(seed)
        n = ot.n
        r = np.full((n, n), -1, dtype=np.int64)
        for i, row in enumerate(ot.crossing_rank):
            for j, v in enumerate(row):
                if v is not None:
                    r[i, j] = v
        self.rank = r
        self.slope = np.asarray(ot.slope_rank, dtype=np.int64)
        self.nodes = 0

    def corner_signs(self, corners, lines: np.ndarray) -> np.ndarray:
        """Side of each corner against each line (rows: corners, cols: lines)."""
        if not corners:
            return np.zeros((0, len(lines)), dtype=np.int8)
        kind = np.array([c[0] == "v" for c in corners])
        a = np.array([c[1] for c in corners], dtype=np.int64)
        b = np.array([c[2] for c in corners], dtype=np.int64)
        sc = np.sign(self.slope[a][:, None] - self.slope[lines][None, :])
        g = self.rank[a][:, lines]
        r = np.where(kind, self.rank[a, np.where(kind, b, a)], 0)[:, None]
        fin = np.where(g < r, sc, -sc)
        fin[g == r] = 0
        fin[lines[None, :] == a[:, None]] = 0
        ide = sc * np.where(kind, 1, b)[:, None]
        return np.where(kind[:, None], fin, ide).astype(np.int8)


class _Node:
    def __init__(self, ctx: _Context, lines: np.ndarray, constant: float = SAMPLE_CONSTANT):
        self.ctx = ctx
        self.lines = np.asarray(sorted(int(l) for l in lines), dtype=np.int64)
        ctx.nodes += 1
        m = len(self.lines)
        while True:
            s = sample_size(ctx.eps, constant)
            if m <= s:
                self._make_leaf()
                return
            try:
                self._make_inner(s)
                return
            except SampleFailure:
                constant *= 2

    def _make_leaf(self):
        self.leaf = True
        self.sample = self.lines
        self.pl = LevelsPL(build_dcel_from_order_type(self.ctx.ot.restrict(self.sample.tolist())))

    def _make_inner(self, s: int):
        ctx = self.ctx
        m = len(self.lines)
        limit = ctx.eps * m
        for _ in range(RESAMPLE_ATTEMPTS):
            sample = np.asarray(sorted(ctx.rng.sample(self.lines.tolist(), s)), dtype=np.int64)
            rest = np.setdiff1d(self.lines, sample)
            dcel = build_dcel_from_order_type(ctx.ot.restrict(sample.tolist()))
            corners, fans = self._fans(dcel, sample)
            signs = ctx.corner_signs(corners, rest)
            tris = np.array(
                [(f[0], f[i], f[i + 1]) for f in fans if f for i in range(1, len(f) - 1)],
                dtype=np.int64,
            ).reshape(-1, 3)
            st = signs[tris]  # triangles x 3 x lines
            conflict = (st.max(axis=1) > 0) & (st.min(axis=1) < 0)
            if conflict.sum(axis=1).max(initial=0) <= limit:
                break
        else:
            raise SampleFailure(f"no {s}-sample with conflict lists <= {limit} in {RESAMPLE_ATTEMPTS} tries")
        self.leaf = False
        self.sample = sample
        self.rest = rest
        self.pl = LevelsPL(dcel)
        self.corners = corners
        self.fans = fans
        self.signs = signs
        self.conflict = conflict
        offs, acc = [], 0
        for f in fans:
            offs.append(acc)
            acc += len(f) - 2 if f else 0
        self.tri_offset = offs
        self.children: dict = {}
        self.max_conflict = int(conflict.sum(axis=1).max(initial=0))

    @staticmethod
    def _fans(dcel, sample):
        """Corner table and, per face, the corner indices of its fan from the apex."""
        nf = dcel.n_vertices
        corners = []
        index = {}

        def corner(v):
            if v >= nf:
                line, end = dcel.ideal[v - nf]
                key = ("i", int(sample[line]), 1 if end == RIGHT_INF else -1)
            else:
                ls = dcel.vertex_lines[v]
                key = ("v", int(sample[ls[0]]), int(sample[ls[1]]))
            if v not in index:
                index[v] = len(corners)
                corners.append(key)
            return index[v]

        fans = []
        for f in range(len(dcel.face_edge)):
            if f == dcel.outer_face:
                fans.append(None)
                continue
            vs = [dcel.origin[h] for h in dcel.boundary_walk(f)]
            finite = [i for i, v in enumerate(vs) if v < nf]
            apex = min(finite, key=lambda i: tuple(int(sample[l]) for l in dcel.vertex_lines[vs[i]]))
            vs = vs[apex:] + vs[:apex]
            fans.append([corner(v) for v in vs])
        return corners, fans

    # -- query ---------------------------------------------------------------

    def child(self, t: int) -> "_Node | None":
        c = self.children.get(t)
        if c is None and t not in self.children:
            ids = self.rest[self.conflict[t]]
            c = _Node(self.ctx, ids) if len(ids) else None
            self.children[t] = c
        return c

    def locate(self, q: Point2, lines: Sequence[Line2], real, out: np.ndarray) -> None:
        loc = self.pl.query(q, _SubRealization(real, self.sample))
        out[self.sample] = loc.sign_vector()
        if self.leaf:
            return
        ctx = self.ctx
        rest = self.rest
        if loc.kind == "vertex":
            lids = self.pl.dcel.vertex_lines[loc.ident]
            a, b = int(self.sample[lids[0]]), int(self.sample[lids[1]])
            out[rest] = ctx.corner_signs([("v", a, b)], rest)[0]
            return
        if loc.kind == "edge":
            self._locate_on_edge(q, loc.ident, real, out)
            return
        fan = self.fans[loc.ident]
        pts = {}

        def orient(i, j):
            ca, cw = self.corners[fan[i]], self.corners[fan[j]]
            pa = _corner_point(ca, lines, pts)
            charge(2 + (2 if cw[0] == "v" else 1) + 1)
            if cw[0] == "v":
                pw = _corner_point(cw, lines, pts)
                dx, dy = pw.x - pa.x, pw.y - pa.y
            else:
                l = lines[cw[1]]
                dx, dy = cw[2], cw[2] * l.m
            return sgn(dx * (q.y - pa.y) - dy * (q.x - pa.x))

        lo, hi = 1, len(fan) - 1
        support = None
        while hi - lo > 1:
            mid = (lo + hi) // 2
            o = orient(0, mid)
            if o == 0:
                support = (0, mid)
                lo, hi = mid - 1, mid
                break
            if o > 0:
                lo = mid
            else:
                hi = mid
        if support is None:
            support = (0, lo, hi)
        rows = self.signs[[fan[i] for i in support]]
        out[rest] = np.where(rows.max(axis=0) > 0, 1, np.where(rows.min(axis=0) < 0, -1, 0))
        t = self.tri_offset[loc.ident] + lo - 1
        c = self.child(t)
        if c is not None:
            c.locate(q, lines, real, out)

    def _locate_on_edge(self, q, h, real, out):
        ctx = self.ctx
        dcel = self.pl.dcel
        ga = int(self.sample[dcel.hline[h]])
        u, w = dcel.edge_endpoints(h)
        if not dcel.forward[h]:
            u, w = w, u
        rest = self.rest

        def end_rank(v, default):
            if v >= dcel.n_vertices:
                return default
            other = next(l for l in dcel.vertex_lines[v] if int(self.sample[l]) != ga)
            return int(ctx.rank[ga, int(self.sample[other])])

        lo_r = end_rank(u, -1)
        hi_r = end_rank(w, ctx.ot.n + 1)
        g = ctx.rank[ga, rest]
        inside = (g > lo_r) & (g < hi_r)
        ranks = sorted(set(g[inside].tolist()))
        rep = {}
        for t, gr in zip(rest[inside].tolist(), g[inside].tolist()):
            rep.setdefault(gr, t)
        # position of q among crossing ranks: pos_lo < rank(q) < pos_hi, or equal
        a, b = 0, len(ranks)
        qrank = None
        while a < b:
            mid = (a + b) // 2
            c = real.cmp_x(q, ga, rep[ranks[mid]])
            if c == 0:
                qrank = ranks[mid]
                break
            if c > 0:
                a = mid + 1
            else:
                b = mid
        sc = np.sign(ctx.slope[ga] - ctx.slope[rest])
        if qrank is None:
            left = g < (ranks[a] if a < len(ranks) else hi_r)
            res = np.where(left, sc, -sc)
        else:
            res = np.where(g < qrank, sc, np.where(g > qrank, -sc, 0))
        out[rest] = res


def _corner_point(c, lines, cache) -> Point2:
    p = cache.get(c)
    if p is None:
        la, lb = lines[c[1]], lines[c[2]]
        x = (la.k - lb.k) / (la.m - lb.m)
        p = cache[c] = Point2(x, la.m * x - la.k)
    return p


class MeiserPL:
    def __init__(self, ot: OrderTypeLines, eps, seed: int = 0):
        if not 0 < Fraction(eps) < 1:
            raise ValueError("eps must lie strictly between 0 and 1")
        self.ot = ot
        self.ctx = _Context(ot, eps, seed)
        self.root = _Node(self.ctx, np.arange(ot.n))

    @property
    def n(self) -> int:
        return self.ot.n

    def query(self, q: Point2, lines) -> SignCell:
        real = lines if hasattr(lines, "cmp_x") else LineRealization(lines)
        raw = real.lines if isinstance(real, LineRealization) else lines
        out = np.zeros(self.ot.n, dtype=np.int8)
        self.root.locate(q, raw, real, out)
        return SignCell.from_signs(out.tolist())

    def walk(self, build: bool = False):
        """Yield materialised nodes (all of them when ``build`` is set)."""
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if node.leaf:
                continue
            ts = range(len(node.conflict)) if build else list(node.children)
            for t in ts:
                c = node.child(t) if build else node.children[t]
                if c is not None:
                    stack.append(c)


def meiser_build(ot: OrderTypeLines, eps=Fraction(1, 2), seed: int = 0) -> MeiserPL:
    return MeiserPL(ot, eps, seed)


def meiser_query(structure: MeiserPL, q: Point2, lines) -> SignCell:
    return structure.query(q, lines)
