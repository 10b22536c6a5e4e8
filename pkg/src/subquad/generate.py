"""Seeded instance generators.

``disjoint-random``
    Two families of short random segments with integer endpoints; each family
    is pairwise disjoint, so red-blue crossings are sparse.
``parallel-bundles``
    A stack of nearly horizontal red segments and a row of steep blue ones;
    every red segment crosses every blue one.
``planted-concurrency``
    ``disjoint-random`` plus degenerate triangles (segments) passing exactly
    through chosen red-blue crossings; the planted triples are returned as an
    answer key.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from .cuttings import segments_touch
from .errors import GenerationTimeout
from .geom import P, Point2, Q, Segment2, Triangle, _det

KINDS = ("disjoint-random", "parallel-bundles", "planted-concurrency")


@dataclass
class Generated:
    A: list
    B: list
    C: list
    planted: list = field(default_factory=list)  # (a, b, c) index triples


def _slope(s: Segment2) -> Q:
    return (s.q.y - s.p.y) / (s.q.x - s.p.x)


def _disjoint_family(rng, n, size, length, deadline, avoid_slopes=()):
    out: list = []
    slopes = set(avoid_slopes)
    while len(out) < n:
        if time.monotonic() > deadline:
            raise GenerationTimeout(f"could only place {len(out)} of {n} disjoint segments")
        x, y = rng.randint(0, size), rng.randint(0, size)
        dx = rng.randint(-length, length)
        dy = rng.randint(-length, length)
        if dx == 0 or (dx, dy) == (0, 0):
            continue
        s = Segment2(P(x, y), P(x + dx, y + dy))
        m = _slope(s)
        if m in slopes:
            continue
        if any(segments_touch(s, t) for t in out):
            continue
        out.append(s)
        slopes.add(m)
    return out


def _cross_point(a: Segment2, b: Segment2):
    d = _det(a.p, a.q, b.p) - _det(a.p, a.q, b.q)
    if d == 0:
        return None
    t = _det(a.p, a.q, b.p) / d
    p = Point2(b.p.x + t * (b.q.x - b.p.x), b.p.y + t * (b.q.y - b.p.y))
    if 0 < t < 1 and min(a.p.x, a.q.x) < p.x < max(a.p.x, a.q.x):
        return p
    return None


def _endpoint_on_other(a: Segment2, b: Segment2) -> bool:
    for p in (a.p, a.q):
        if _det(b.p, b.q, p) == 0 and min(b.p.x, b.q.x) <= p.x <= max(b.p.x, b.q.x):
            return True
    for p in (b.p, b.q):
        if _det(a.p, a.q, p) == 0 and min(a.p.x, a.q.x) <= p.x <= max(a.p.x, a.q.x):
            return True
    return False


def _random_triangle(rng, size) -> Triangle:
    while True:
        pts = [P(rng.randint(0, size), rng.randint(0, size)) for _ in range(3)]
        if _det(*pts) != 0:
            return Triangle(*pts)


def generate(kind: str, n: int, seed: int = 0, triangles: int | None = None, timeout: float = 60.0) -> Generated:
    """Deterministic instance of the given kind; ``triangles`` defaults to ``n``."""
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}; choose from {', '.join(KINDS)}")
    rng = random.Random(f"{kind}:{n}:{seed}")
    t = n if triangles is None else triangles
    deadline = time.monotonic() + timeout
    if kind == "parallel-bundles":
        w = 10 * n + 10
        A = [Segment2(P(0, 10 * i + 5 + i % 3), P(w, 10 * i + 5 + (7 * i) % 5)) for i in range(n)]
        B = [Segment2(P(10 * j + 5 + j % 3, 0), P(10 * j + 8 + j % 4, w)) for j in range(n)]
        C = [_random_triangle(rng, w) for _ in range(t)]
        return Generated(A, B, C)
    size = 40 * n
    length = max(8, int(size * 1.5 / max(1, n) ** 0.5))
    A = _disjoint_family(rng, n, size, length, deadline)
    slopes = {_slope(a) for a in A}
    B = []
    while len(B) < n:
        fam = _disjoint_family(rng, 1, size, length, deadline, slopes)
        s = fam[0]
        if any(segments_touch(s, u) for u in B) or any(_endpoint_on_other(s, a) for a in A):
            continue
        B.append(s)
        slopes.add(_slope(s))
    C = [_random_triangle(rng, size) for _ in range(t)]
    planted: list = []
    if kind == "planted-concurrency":
        crossings = [(i, j, p) for i, a in enumerate(A) for j, b in enumerate(B) if (p := _cross_point(a, b))]
        rng.shuffle(crossings)
        for i, j, p in crossings[: max(1, t // 4)]:
            # a segment through p with an integer direction, p strictly inside it
            while True:
                dx, dy = rng.randint(-length, length), rng.randint(-length, length)
                if (dx, dy) != (0, 0):
                    break
            lo = Point2(p.x - dx, p.y - dy)
            hi = Point2(p.x + 2 * dx, p.y + 2 * dy)
            k = rng.randrange(len(C) + 1)
            C.insert(k, Triangle(lo, hi, hi, degenerate=True))
            planted = [(a, b, c + (c >= k)) for a, b, c in planted]
            planted.append((i, j, k))
    return Generated(A, B, C, planted)
