"""Order types of non-vertical line sets.

An order type stores, for every line, the left-to-right rank of its crossings
with the other lines (ties mark concurrent crossings) together with the slope
order, which is the vertical order at ``x = -inf`` read upside down.  Nothing
else about the lines is kept, so structures built from an order type cannot
look at coordinates.
"""

from __future__ import annotations

from functools import cmp_to_key
from typing import Callable, Sequence

from ..errors import ParallelLines
from ..geom import Line2, Q
from ..meter import charge


def _dense_ranks(order: list, same: Callable[[int, int], bool]) -> dict:
    ranks = {}
    r = -1
    prev = None
    for item in order:
        if prev is None or not same(prev, item):
            r += 1
        ranks[item] = r
        prev = item
    return ranks


class OrderTypeLines:
    """Combinatorial description of an arrangement of ``n`` lines.

    ``crossing_rank[i][j]`` is the (dense, tie-aware) rank of the crossing of
    line ``i`` with line ``j`` along line ``i``; ``None`` for ``j == i``.
    ``slope_rank[i]`` ranks lines by ascending slope.
    """

    __slots__ = ("n", "crossing_rank", "slope_rank")

    def __init__(self, crossing_rank: list, slope_rank: list):
        self.n = len(slope_rank)
        self.crossing_rank = crossing_rank
        self.slope_rank = slope_rank

    def orient(self, i: int, j: int, k: int) -> int:
        """-1 if ``i x j`` is left of ``i x k`` along line ``i``, 0 if they coincide."""
        a = self.crossing_rank[i][j]
        b = self.crossing_rank[i][k]
        return (a > b) - (a < b)

    def slope_cmp(self, i: int, j: int) -> int:
        a, b = self.slope_rank[i], self.slope_rank[j]
        return (a > b) - (a < b)

    def order_at_minus_infinity(self) -> list:
        """Line ids bottom to top far to the left (steepest first)."""
        return sorted(range(self.n), key=lambda i: -self.slope_rank[i])

    def local_sequence(self, i: int) -> list:
        """Crossings along line ``i`` as tuples of concurrent line ids."""
        row = self.crossing_rank[i]
        groups: dict = {}
        for j in range(self.n):
            if j != i:
                groups.setdefault(row[j], []).append(j)
        return [tuple(groups[r]) for r in sorted(groups)]

    def restrict(self, ids: Sequence[int]) -> "OrderTypeLines":
        """Order type of the sub-arrangement on ``ids`` (renumbered ``0..len-1``)."""
        ids = list(ids)
        rank = [[None if a == b else self.crossing_rank[a][b] for b in ids] for a in ids]
        return OrderTypeLines(rank, [self.slope_rank[a] for a in ids])

    @classmethod
    def from_comparators(
        cls,
        n: int,
        cmp3: Callable[[int, int, int], int],
        slope_cmp: Callable[[int, int], int],
    ) -> "OrderTypeLines":
        """Materialise an order type from triple and slope comparators.

        The comparators are trusted to be consistent; they are typically free
        table lookups, so nothing is charged here.
        """
        slope_order = sorted(range(n), key=cmp_to_key(slope_cmp))
        for a, b in zip(slope_order, slope_order[1:]):
            if slope_cmp(a, b) == 0:
                raise ParallelLines(f"lines {a} and {b} are parallel", (a, b))
        srank = _dense_ranks(slope_order, lambda a, b: False)
        rows = []
        for i in range(n):
            others = [j for j in range(n) if j != i]
            others.sort(key=cmp_to_key(lambda j, k, i=i: cmp3(i, j, k)))
            r = _dense_ranks(others, lambda j, k, i=i: cmp3(i, j, k) == 0)
            rows.append([r.get(j) for j in range(n)])
        return cls(rows, [srank[i] for i in range(n)])


def build_order_type_direct(lines: Sequence[Line2]) -> OrderTypeLines:
    """Order type by exact evaluation; the reference path for tests and oracles.

    Charges one arity-3 test per resolved triple and one arity-2 test per
    slope pair.
    """
    n = len(lines)
    ms = [l.m for l in lines]
    for i in range(n):
        for j in range(i + 1, n):
            if ms[i] == ms[j]:
                raise ParallelLines(f"lines {i} and {j} are parallel or identical", (i, j))
    slope_order = sorted(range(n), key=lambda i: ms[i])
    srank = {i: r for r, i in enumerate(slope_order)}
    charge(2, n * (n - 1) // 2)
    rows = []
    for i in range(n):
        li = lines[i]
        xs = {}
        for j in range(n):
            if j != i:
                lj = lines[j]
                xs[j] = Q(li.k - lj.k) / (li.m - lj.m)
        order = sorted(xs, key=xs.__getitem__)
        r = _dense_ranks(order, lambda a, b: xs[a] == xs[b])
        rows.append([r.get(j) for j in range(n)])
        charge(3, (n - 1) * (n - 2) // 2)
    return OrderTypeLines(rows, [srank[i] for i in range(n)])
