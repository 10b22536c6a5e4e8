"""Exact planar primitives, point-line duality, and the gamma-line sign predicates.

All coordinates are exact rationals (``gmpy2.mpq``, exported here as ``Q``).  Duality maps the line
``y = m*x - k`` to the point ``(m, k)`` and the point ``(px, py)`` to the line
``y = px*x - py``; a point lies above a line iff the dual of the line lies above
the dual of the point.

For segments ``a``, ``b`` the gamma line through the duals of their supporting
lines is exactly the dual of the crossing point ``a x b`` of those lines.  Hence
ordering crossings of gamma lines reduces to slopes between crossing points,
which is what the fast integer paths below exploit.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from fractions import Fraction
from typing import Optional, Union

from gmpy2 import mpq as Q

from .errors import (
    DegenerateDualPair,
    GeneralPositionViolation,
    ParallelGammaLines,
    VerticalDualLine,
    VerticalLine,
)
from .meter import charge

Scalar = Union[int, str, Fraction, Q]
_MPQ = type(Q(0))


def to_q(value: Scalar) -> Q:
    """Parse an exact rational from an int, a ``"p/q"`` string or a rational."""
    if type(value) is _MPQ:
        return value
    if isinstance(value, Fraction):
        return Q(value.numerator, value.denominator)
    if isinstance(value, bool):
        raise TypeError("booleans are not coordinates")
    if isinstance(value, int):
        return Q(value)
    if isinstance(value, str):
        return Q(value.strip())
    raise TypeError(f"not an exact rational: {value!r} ({type(value).__name__})")


def sgn(v) -> int:
    return (v > 0) - (v < 0)


@dataclass(frozen=True, slots=True)
class Point2:
    x: Q
    y: Q

    def __post_init__(self):
        object.__setattr__(self, "x", to_q(self.x))
        object.__setattr__(self, "y", to_q(self.y))

    def __iter__(self):
        yield self.x
        yield self.y

    def __repr__(self) -> str:
        return f"Point2({self.x}, {self.y})"


def P(x: Scalar, y: Scalar) -> Point2:
    return Point2(to_q(x), to_q(y))


@dataclass(frozen=True, slots=True)
class Line2:
    """Non-vertical line ``y = m*x - k``."""

    m: Q
    k: Q

    def __post_init__(self):
        object.__setattr__(self, "m", to_q(self.m))
        object.__setattr__(self, "k", to_q(self.k))

    def at(self, x: Q) -> Q:
        return self.m * x - self.k


@dataclass(frozen=True, slots=True)
class Segment2:
    p: Point2
    q: Point2

    def __post_init__(self):
        if self.p == self.q:
            raise GeneralPositionViolation("segment endpoints coincide")

    @property
    def is_vertical(self) -> bool:
        return self.p.x == self.q.x

    def line(self) -> Line2:
        if self.is_vertical:
            raise VerticalLine(f"segment {self} has a vertical supporting line")
        m = (self.q.y - self.p.y) / (self.q.x - self.p.x)
        return Line2(m, m * self.p.x - self.p.y)

    def hline(self) -> tuple:
        """Integer coefficients ``(a, b, c)`` with ``a*x + b*y + c = 0``."""
        return hline_through(self.p, self.q)


@dataclass(frozen=True, slots=True)
class Triangle:
    v1: Point2
    v2: Point2
    v3: Point2
    degenerate: bool = False

    def __post_init__(self):
        area = _det(self.v1, self.v2, self.v3)
        if not self.degenerate and area == 0:
            raise GeneralPositionViolation("triangle vertices are collinear; set degenerate=True")
        if self.degenerate and area != 0:
            raise GeneralPositionViolation("degenerate triangle must have collinear vertices")

    @classmethod
    def from_segment(cls, seg: Segment2) -> "Triangle":
        return cls(seg.p, seg.q, seg.q, degenerate=True)

    @property
    def vertices(self) -> tuple:
        return (self.v1, self.v2, self.v3)

    def edges(self) -> list:
        """Edges as point pairs; a degenerate triangle yields its single span."""
        if self.degenerate:
            lo, hi = span_of(self.vertices)
            return [(lo, hi)]
        return [(self.v1, self.v2), (self.v2, self.v3), (self.v3, self.v1)]


def span_of(points) -> tuple:
    pts = sorted(points, key=lambda p: (p.x, p.y))
    return pts[0], pts[-1]


# ---------------------------------------------------------------------------
# exact helpers (uncharged; callers charge)


def _det(p: Point2, q: Point2, r: Point2) -> Q:
    return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x)


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def hline_through(p: Point2, q: Point2) -> tuple:
    """Integer ``(a, b, c)`` of the line through ``p`` and ``q``.

    ``a*x + b*y + c`` is positive exactly for points strictly left of the
    directed line ``p -> q``.
    """
    x1, y1, w1 = hpoint(p)
    x2, y2, w2 = hpoint(q)
    return (y1 * w2 - w1 * y2, w1 * x2 - x1 * w2, x1 * y2 - y1 * x2)


def hpoint(p: Point2) -> tuple:
    """Homogeneous integer triple ``(X, Y, W)`` with ``W > 0``."""
    w = _lcm(p.x.denominator, p.y.denominator)
    return (p.x.numerator * (w // p.x.denominator), p.y.numerator * (w // p.y.denominator), w)


def hmeet(l1: tuple, l2: tuple) -> Optional[tuple]:
    """Homogeneous crossing of two integer lines, ``W > 0``; ``None`` if parallel."""
    a1, b1, c1 = l1
    a2, b2, c2 = l2
    w = a1 * b2 - a2 * b1
    if w == 0:
        return None
    x = b1 * c2 - b2 * c1
    y = c1 * a2 - c2 * a1
    if w < 0:
        return (-x, -y, -w)
    return (x, y, w)


def hside(line: tuple, pt: tuple) -> int:
    a, b, c = line
    X, Y, W = pt
    return sgn(a * X + b * Y + c * W)


def horient(p: tuple, q: tuple, r: tuple) -> int:
    """Orientation of three homogeneous points (all ``W > 0``)."""
    x1, y1, w1 = p
    x2, y2, w2 = q
    x3, y3, w3 = r
    d = x1 * (y2 * w3 - y3 * w2) - y1 * (x2 * w3 - x3 * w2) + w1 * (x2 * y3 - x3 * y2)
    return sgn(d)


def hcmp_x(p: tuple, q: tuple) -> int:
    return sgn(p[0] * q[2] - q[0] * p[2])


def hcmp_y(p: tuple, q: tuple) -> int:
    return sgn(p[1] * q[2] - q[1] * p[2])


def hto_point(p: tuple) -> Point2:
    return Point2(Q(p[0], p[2]), Q(p[1], p[2]))


# ---------------------------------------------------------------------------
# metered predicates


def orient(p: Point2, q: Point2, r: Point2) -> int:
    """Sign of ``det(q - p, r - p)``: +1 counter-clockwise, 0 collinear."""
    charge(3)
    return sgn(_det(p, q, r))


def seg_intersect(a: Segment2, b: Segment2) -> Optional[Point2]:
    """Proper crossing point of two segments, or ``None``.

    Raises :class:`GeneralPositionViolation` if the segments share a supporting
    line or an endpoint of one lies on the other.
    """
    charge(2)
    d1 = _det(a.p, a.q, b.p)
    d2 = _det(a.p, a.q, b.q)
    d3 = _det(b.p, b.q, a.p)
    d4 = _det(b.p, b.q, a.q)
    if d1 == 0 and d2 == 0:
        raise GeneralPositionViolation("segments share a supporting line")
    if d1 == 0 or d2 == 0 or d3 == 0 or d4 == 0:
        if _touches(a, b, d1, d2, d3, d4):
            raise GeneralPositionViolation("an endpoint lies on the other segment")
        return None
    if sgn(d1) == sgn(d2) or sgn(d3) == sgn(d4):
        return None
    t = d3 / (d3 - d4)
    return Point2(a.p.x + t * (a.q.x - a.p.x), a.p.y + t * (a.q.y - a.p.y))


def _touches(a, b, d1, d2, d3, d4) -> bool:
    def within(s: Segment2, p: Point2) -> bool:
        return min(s.p.x, s.q.x) <= p.x <= max(s.p.x, s.q.x) and min(s.p.y, s.q.y) <= p.y <= max(
            s.p.y, s.q.y
        )

    return (
        (d1 == 0 and within(a, b.p))
        or (d2 == 0 and within(a, b.q))
        or (d3 == 0 and within(b, a.p))
        or (d4 == 0 and within(b, a.q))
    )


def dual_of_line(line: Line2) -> Point2:
    if not isinstance(line, Line2):
        raise VerticalLine("only non-vertical Line2 values have duals")
    return Point2(line.m, line.k)


def dual_of_point(p: Point2) -> Line2:
    return Line2(p.x, p.y)


def line_through(p: Point2, q: Point2) -> Line2:
    if p.x == q.x:
        raise VerticalLine("points share their x-coordinate")
    m = (q.y - p.y) / (q.x - p.x)
    return Line2(m, m * p.x - p.y)


def gamma_line(la: Line2, lb: Line2) -> Line2:
    """Line through the dual points of ``la`` and ``lb``."""
    pa, pb = dual_of_line(la), dual_of_line(lb)
    if pa == pb:
        raise DegenerateDualPair("the two supporting lines coincide")
    if pa.x == pb.x:
        raise VerticalDualLine("equal slopes give a vertical gamma line")
    return line_through(pa, pb)


def _pair_terms(la: Line2, lb: Line2) -> tuple:
    # crossing of la, lb is (X/D, Y/D); D = 0 iff the gamma line is vertical
    d = la.m - lb.m
    x = la.k - lb.k
    y = la.k * lb.m - la.m * lb.k
    return d, x, y


def g_polynomial(l1, l2, l3, l4, l5, l6) -> Q:
    """Cleared-denominator 12-variate polynomial behind :func:`sign_G`.

    Arguments are the supporting lines of ``(a1, b1, a2, b2, a3, b3)``.  No
    checks; the value is meaningful only when every denominator is nonzero.
    """
    d1, x1, y1 = _pair_terms(l1, l2)
    d2, x2, y2 = _pair_terms(l3, l4)
    d3, x3, y3 = _pair_terms(l5, l6)
    u2 = x2 * d1 - x1 * d2
    u3 = x3 * d1 - x1 * d3
    v2 = y2 * d1 - y1 * d2
    v3 = y3 * d1 - y1 * d3
    return v2 * u2 * u3 * u3 - v3 * u3 * u2 * u2


def h_polynomial(l1, l2, l3, l4) -> Q:
    """Cleared form of ``slope(gamma(l1, l2)) - slope(gamma(l3, l4))``."""
    d1, x1, _ = _pair_terms(l1, l2)
    d2, x2, _ = _pair_terms(l3, l4)
    return (x1 * d2 - x2 * d1) * d1 * d2


def sign_G(l1: Line2, l2: Line2, l3: Line2, l4: Line2, l5: Line2, l6: Line2) -> int:
    """Order of ``g1 x g2`` versus ``g1 x g3`` along ``g1``, with ``gi = gamma(l_{2i-1}, l_{2i})``.

    -1 means the first crossing is to the left.
    """
    for la, lb in ((l1, l2), (l3, l4), (l5, l6)):
        if la.m == lb.m:
            raise VerticalDualLine("a pair of supporting lines is parallel")
    d1, x1, _ = _pair_terms(l1, l2)
    d2, x2, _ = _pair_terms(l3, l4)
    d3, x3, _ = _pair_terms(l5, l6)
    if x2 * d1 == x1 * d2 or x3 * d1 == x1 * d3:
        raise ParallelGammaLines("gamma lines are parallel; crossing undefined")
    charge(6)
    return sgn(g_polynomial(l1, l2, l3, l4, l5, l6))


def sign_H(l1: Line2, l2: Line2, l3: Line2, l4: Line2) -> int:
    """Sign of ``slope(gamma(l1, l2)) - slope(gamma(l3, l4))``."""
    for la, lb in ((l1, l2), (l3, l4)):
        if la == lb:
            raise DegenerateDualPair("the two supporting lines coincide")
        if la.m == lb.m:
            raise VerticalDualLine("a pair of supporting lines is parallel")
    charge(4)
    return sgn(h_polynomial(l1, l2, l3, l4))


def point_in_triangle(p: Point2, tri: Triangle) -> bool:
    """Closed containment; a degenerate triangle is its closed segment."""
    if tri.degenerate:
        lo, hi = span_of(tri.vertices)
        if lo == hi:
            charge(2)
            return p == lo
        if orient(lo, hi, p) != 0:
            return False
        return (lo.x, lo.y) <= (p.x, p.y) <= (hi.x, hi.y)
    s1 = orient(tri.v1, tri.v2, p)
    s2 = orient(tri.v2, tri.v3, p)
    s3 = orient(tri.v3, tri.v1, p)
    return not ((s1 < 0 or s2 < 0 or s3 < 0) and (s1 > 0 or s2 > 0 or s3 > 0))
