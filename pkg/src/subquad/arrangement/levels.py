"""Point location by binary search over the levels of a line arrangement.

Levels are read off the sweep that builds the DCEL, so construction uses the
order type only.  A query runs a primary binary search over the levels and,
inside each, a secondary binary search over the level's vertices by
x-coordinate; each comparison is one metered test against the realised lines.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

from ..geom import Line2, Point2, sgn
from ..meter import charge
from .dcel import ArrangementDCEL, build_dcel_from_order_type
from .ordertype import OrderTypeLines


class Realization(Protocol):
    """Query-time access to the actual lines behind an order type."""

    def side(self, q, line: int) -> int:
        """+1 if ``q`` is above line ``line``, 0 on it, -1 below."""

    def cmp_x(self, q, i: int, j: int) -> int:
        """Sign of ``x(q) - x(line_i x line_j)``."""


class LineRealization:
    """Realisation over explicit :class:`Line2` values and :class:`Point2` queries."""

    def __init__(self, lines: Sequence[Line2]):
        self.lines = list(lines)

    def side(self, q: Point2, line: int) -> int:
        charge(2)
        l = self.lines[line]
        return sgn(q.y - (l.m * q.x - l.k))

    def cmp_x(self, q: Point2, i: int, j: int) -> int:
        charge(3)
        a, b = self.lines[i], self.lines[j]
        # x = (ka - kb) / (ma - mb)
        den = a.m - b.m
        return sgn((q.x * den - (a.k - b.k)) * sgn(den))


@dataclass(frozen=True)
class Location:
    """Relatively open cell of an arrangement: ``kind`` is face, edge or vertex."""

    kind: str
    ident: int
    arrangement: ArrangementDCEL

    def sign_vector(self) -> tuple:
        return self.arrangement.sign_vector(self.kind, self.ident)

    def key(self) -> tuple:
        return (self.kind, self.ident)


class LevelsPL:
    def __init__(self, dcel: ArrangementDCEL):
        self.dcel = dcel
        self.n = dcel.n_lines

    @classmethod
    def from_order_type(cls, ot: OrderTypeLines) -> "LevelsPL":
        return cls(build_dcel_from_order_type(ot))

    @property
    def levels(self) -> list:
        return self.dcel.level_vertices

    def _compare_level(self, j: int, q, real: Realization):
        """Relation of ``q`` to level ``j``: ``(sign, half_edge, vertex_or_None)``."""
        d = self.dcel
        verts = d.level_vertices[j]
        edges = d.level_edges[j]
        lo, hi = 0, len(verts)  # answer: number of vertices with x <= x(q)
        at_vertex = None
        while lo < hi:
            mid = (lo + hi) // 2
            v = verts[mid]
            a, b = d.vertex_lines[v][:2]
            c = real.cmp_x(q, a, b)
            if c == 0:
                at_vertex = mid
                lo = mid + 1
                break
            if c > 0:
                lo = mid + 1
            else:
                hi = mid
        h = edges[lo]
        s = real.side(q, d.hline[h])
        vertex = verts[at_vertex] if at_vertex is not None else None
        return s, h, vertex

    def query(self, q, real: Realization) -> Location:
        d = self.dcel
        if self.n == 0:
            return Location("face", 0, d)
        lo, hi = 0, self.n
        found = {}
        while lo < hi:
            mid = (lo + hi) // 2
            s, h, vertex = self._compare_level(mid, q, real)
            if s == 0:
                if vertex is not None:
                    return Location("vertex", vertex, d)
                return Location("edge", h, d)
            found[mid] = h
            if s > 0:
                lo = mid + 1
            else:
                hi = mid
        if lo < self.n:
            return Location("face", d.face[d.twin[found[lo]]], d)
        return Location("face", d.face[found[lo - 1]], d)


def levels_build(ot: OrderTypeLines) -> LevelsPL:
    return LevelsPL.from_order_type(ot)


def levels_query(structure: LevelsPL, q, lines) -> Location:
    real = lines if hasattr(lines, "cmp_x") else LineRealization(lines)
    return structure.query(q, real)


def brute_force_sign_vector(q: Point2, lines: Sequence[Line2]) -> tuple:
    """Reference locator: the sign of ``q`` against every line, unmetered."""
    return tuple(sgn(q.y - (l.m * q.x - l.k)) for l in lines)
