"""Batched sign resolution between "points" and "surfaces" (Fredman's trick).

Every comparison of three gamma lines is a sign of one polynomial whose
arguments split into three red and three blue segments.  Grouping the blue
halves into points and the red halves into surfaces (in R^6; in R^4 for the
slope comparisons) turns all comparisons of a cell into one batched problem:
emit complete bipartite blocks of (point, surface) pairs over which the sign
is constant.

The recursion partitions the point side with a :class:`PartitionOracle`,
emits a block for every surface that does not cross a partition cell, and
recurses on the crossing surfaces with the roles of points and surfaces
swapped.  Small subproblems are resolved by direct evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .errors import MissingCoverage, OracleContractViolation
from .geom import Line2, Q, g_polynomial, h_polynomial, sgn
from .meter import charge
from .arrangement.ordertype import OrderTypeLines

DEFAULT_DELTA = Q(1, 20)
DEFAULT_N0 = 64


@dataclass(frozen=True)
class TripleSurface:
    """Red half of a comparison: ids and supporting lines of segments of one cell."""

    ids: tuple
    lines: tuple
    tag: str = "G"  # "G" for triples, "H" for pairs


@dataclass(frozen=True)
class TriplePoint:
    ids: tuple
    lines: tuple


@dataclass
class SignedClique:
    points: tuple  # indices into the point list
    surfaces: tuple  # indices into the surface list
    sign: int


@dataclass
class RecursionNode:
    depth: int
    M: int  # points of the original orientation
    N: int  # surfaces of the original orientation
    mode: str  # "base", "primal" (points partitioned), "dual" (surfaces partitioned) or "stalled"
    one_sided: bool = False
    parent: int | None = None


@dataclass
class RecursionReport:
    M: int
    N: int
    total_size: int = 0
    depth: int = 0
    nodes: list = field(default_factory=list)
    # per partition step: (cells, side size, largest cell, other side size, most crossings in a cell)
    steps: list = field(default_factory=list)

    def per_level(self) -> list:
        out: list = []
        for nd in self.nodes:
            while len(out) <= nd.depth:
                out.append(0)
            out[nd.depth] += 1
        return out


# ---------------------------------------------------------------------------
# interval arithmetic for sign-constancy over a box


class Interval:
    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        self.lo = lo
        self.hi = lo if hi is None else hi

    @staticmethod
    def _of(v):
        return v if isinstance(v, Interval) else Interval(v)

    def __add__(self, o):
        o = Interval._of(o)
        return Interval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __sub__(self, o):
        o = Interval._of(o)
        return Interval(self.lo - o.hi, self.hi - o.lo)

    def __rsub__(self, o):
        return Interval._of(o) - self

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __mul__(self, o):
        o = Interval._of(o)
        ps = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Interval(min(ps), max(ps))

    __rmul__ = __mul__

    def sign(self):
        """Constant sign over the interval, or ``None``."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == 0 and self.hi == 0:
            return 0
        return None


@dataclass(frozen=True)
class _BoxLine:
    m: Interval
    k: Interval


# ---------------------------------------------------------------------------
# predicates


def _interleave(red: Sequence, blue: Sequence) -> list:
    out = []
    for a, b in zip(red, blue):
        out += [a, b]
    return out


class Predicate:
    """Sign of the G (triples) or H (pairs) polynomial on one red/blue split."""

    def __init__(self, tag: str):
        self.tag = tag
        self.arity = 6 if tag == "G" else 4
        self.dim = 2 * (3 if tag == "G" else 2)
        self._poly = g_polynomial if tag == "G" else h_polynomial

    def value(self, red_lines, blue_lines):
        return self._poly(*_interleave(red_lines, blue_lines))

    def evaluate(self, red_lines, blue_lines) -> int:
        charge(self.arity)
        return sgn(self.value(red_lines, blue_lines))

    def box_sign(self, box, fixed_lines, box_is_red: bool):
        """Constant sign for every object in ``box`` against ``fixed_lines``, else ``None``."""
        charge(self.arity)
        lines = [_BoxLine(Interval(box[2 * i][0], box[2 * i][1]), Interval(box[2 * i + 1][0], box[2 * i + 1][1])) for i in range(len(fixed_lines))]
        red, blue = (lines, fixed_lines) if box_is_red else (fixed_lines, lines)
        return self.value(red, blue).sign()


def coordinates(lines) -> tuple:
    return tuple(c for l in lines for c in (l.m, l.k))


# ---------------------------------------------------------------------------
# partition oracles


@dataclass
class OracleCell:
    members: list  # indices into the partitioned side
    box: list | None  # per-coordinate (lo, hi) of the members, if the oracle uses boxes


class PartitionOracle:
    """Splits the current point side into cells and classifies surfaces against each."""

    name = "abstract"

    def partition(self, coords: list, members: list) -> list:
        raise NotImplementedError

    def classify(self, cell: OracleCell, surfaces: list, pred: Predicate, objects, others, red_side: bool) -> dict:
        """``{surface: sign}`` for surfaces of constant sign over the cell; others cross."""
        raise NotImplementedError


class ExhaustiveOracle(PartitionOracle):
    """One cell per point; every surface is classified by direct evaluation, so
    nothing ever crosses and the whole batch is resolved pair by pair."""

    name = "exhaustive"

    def partition(self, coords, members):
        return [OracleCell([i], None) for i in members]

    def classify(self, cell, surfaces, pred, objects, others, red_side):
        (i,) = cell.members
        out = {}
        for s in surfaces:
            red, blue = (objects[i], others[s]) if red_side else (others[s], objects[i])
            out[s] = pred.evaluate(red, blue)
        return out


class KdOracle(PartitionOracle):
    """Recursive median splits over the coordinates, with exact interval tests
    of each surface against the bounding box of every cell."""

    name = "kd"

    def __init__(self, fanout: int = 8, delta=DEFAULT_DELTA):
        self.fanout = max(2, fanout)
        self.delta = delta

    def partition(self, coords, members):
        cells = [list(members)]
        dim = len(coords[members[0]]) if members else 0
        axis = 0
        while len(cells) < self.fanout:
            split_any = False
            nxt = []
            for c in cells:
                parts = None
                for t in range(dim):
                    ax = (axis + t) % dim
                    vals = sorted(coords[i][ax] for i in c)
                    if vals[0] == vals[-1]:
                        continue
                    med = vals[len(vals) // 2]
                    if med == vals[0]:
                        med = next(v for v in vals if v > vals[0])
                    lo = [i for i in c if coords[i][ax] < med]
                    if lo:
                        hi = [i for i in c if coords[i][ax] >= med]
                        parts = [lo, hi]
                        break
                if parts is None:
                    nxt.append(c)
                else:
                    nxt.extend(parts)
                    split_any = True
            cells = nxt
            axis += 1
            if not split_any:
                break
        out = []
        for c in cells:
            box = [(min(coords[i][d] for i in c), max(coords[i][d] for i in c)) for d in range(dim)]
            out.append(OracleCell(c, box))
        return out

    def classify(self, cell, surfaces, pred, objects, others, red_side):
        out = {}
        for s in surfaces:
            v = pred.box_sign(cell.box, others[s], red_side)
            if v is not None:
                out[s] = v
        return out


ORACLES = {"exhaustive": ExhaustiveOracle, "kd": KdOracle}


def make_oracle(name: str, **kw) -> PartitionOracle:
    try:
        return ORACLES[name](**kw) if name == "kd" else ORACLES[name]()
    except KeyError:
        raise ValueError(f"unknown oracle {name!r}; choose from {', '.join(ORACLES)}") from None


# ---------------------------------------------------------------------------
# the recursion


def batched_locate(
    P: Sequence[TriplePoint],
    Psi: Sequence[TripleSurface],
    oracle: PartitionOracle | str = "kd",
    n0: int = DEFAULT_N0,
) -> tuple:
    """Resolve the sign of every (point, surface) pair as signed cliques.

    Returns ``(cliques, RecursionReport)``.  The cliques cover ``P x Psi``
    exactly once.
    """
    if isinstance(oracle, str):
        oracle = make_oracle(oracle)
    P, Psi = list(P), list(Psi)
    report = RecursionReport(len(P), len(Psi))
    if not P or not Psi:
        return [], report
    tags = {s.tag for s in Psi}
    if len(tags) != 1:
        raise ValueError("surfaces must share one predicate tag")
    pred = Predicate(tags.pop())
    blue = [tuple(p.lines) for p in P]
    red = [tuple(s.lines) for s in Psi]
    coords = {"P": [coordinates(l) for l in blue], "S": [coordinates(l) for l in red]}
    cliques: list = []

    def emit(points, surfaces, sign):
        cliques.append(SignedClique(tuple(points), tuple(surfaces), sign))

    def base(pts, srfs):
        for s in srfs:
            groups: dict = {}
            for p in pts:
                groups.setdefault(pred.evaluate(red[s], blue[p]), []).append(p)
            for sign, ps in sorted(groups.items()):
                emit(ps, [s], sign)

    def rec(pts, srfs, depth, last_mode, parent, stalled=False):
        M, N = len(pts), len(srfs)
        if not M or not N:
            return
        report.depth = max(report.depth, depth)
        node_id = len(report.nodes)
        if min(M, N) <= n0:
            report.nodes.append(RecursionNode(depth, M, N, "base", False, parent))
            base(pts, srfs)
            return
        d = pred.dim
        if M > N**d:
            mode, one_sided = "primal", True
        elif N > M**d:
            mode, one_sided = "dual", True
        else:
            mode = "dual" if last_mode == "primal" else "primal"
            one_sided = False
        report.nodes.append(RecursionNode(depth, M, N, mode, one_sided, parent))
        if mode == "primal":
            side, members, others_members = "P", pts, srfs
            objects, others = blue, red
        else:
            side, members, others_members = "S", srfs, pts
            objects, others = red, blue
        cells = oracle.partition(coords[side], members)
        worst_cross = 0
        seen = sorted(i for c in cells for i in c.members)
        if seen != sorted(members):
            raise OracleContractViolation(f"{oracle.name} oracle cells do not partition the point set")
        for c in cells:
            signs = oracle.classify(c, others_members, pred, objects, others, red_side=(side == "S"))
            by_sign: dict = {}
            for o, sg in signs.items():
                by_sign.setdefault(sg, []).append(o)
            for sg, os_ in sorted(by_sign.items()):
                if side == "P":
                    emit(c.members, os_, sg)
                else:
                    emit(os_, c.members, sg)
            crossing = [o for o in others_members if o not in signs]
            worst_cross = max(worst_cross, len(crossing))
            if not crossing:
                continue
            sub_p, sub_s = (c.members, crossing) if side == "P" else (crossing, c.members)
            stuck = len(cells) == 1 and len(crossing) == len(others_members)
            if stuck and (stalled or one_sided):
                # neither side can be split any further (repeated coordinates)
                report.nodes.append(RecursionNode(depth + 1, len(sub_p), len(sub_s), "stalled", False, node_id))
                base(sub_p, sub_s)
                continue
            rec(sub_p, sub_s, depth + 1, mode, node_id, stuck)
        report.steps.append((len(cells), len(members), max(len(c.members) for c in cells), len(others_members), worst_cross))

    rec(list(range(len(P))), list(range(len(Psi))), 0, None, None)
    report.total_size = sum(len(c.points) + len(c.surfaces) for c in cliques)
    return cliques, report


# ---------------------------------------------------------------------------
# lookups and order types


class CliqueIndex:
    """Sign lookup for (point ids, surface ids) keys; charges nothing."""

    def __init__(self, P: Sequence[TriplePoint], Psi: Sequence[TripleSurface], cliques: Sequence[SignedClique]):
        self._pkey = {p.ids: i for i, p in enumerate(P)}
        self._skey = {s.ids: j for j, s in enumerate(Psi)}
        self._by_point: dict = {}
        for c in cliques:
            surf = frozenset(c.surfaces)
            for p in c.points:
                self._by_point.setdefault(p, []).append((surf, c.sign))

    def sign(self, point_ids: tuple, surface_ids: tuple) -> int:
        p = self._pkey.get(point_ids)
        s = self._skey.get(surface_ids)
        if p is not None and s is not None:
            for surf, sign in self._by_point.get(p, ()):
                if s in surf:
                    return sign
        raise MissingCoverage((point_ids, surface_ids))


def filter_gamma(decomposition) -> list:
    """Gamma lines of a cell: one ``(a, b)`` per edge of the crossing-pair blocks."""
    return sorted(decomposition.pairs())


def required_keys(gammas: Sequence[tuple]) -> tuple:
    """Red and blue keys the order type of these gamma lines will ask for.

    Returns ``(g_red, g_blue, h_red, h_blue)`` as sets of id tuples.
    """
    g_red, g_blue, h_red, h_blue = set(), set(), set(), set()
    k = len(gammas)
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            h_red.add((gammas[i][0], gammas[j][0]))
            h_blue.add((gammas[i][1], gammas[j][1]))
            if k < 3:
                continue
            for l in range(k):
                if l != i and l != j:
                    g_red.add((gammas[i][0], gammas[j][0], gammas[l][0]))
                    g_blue.add((gammas[i][1], gammas[j][1], gammas[l][1]))
    return g_red, g_blue, h_red, h_blue


def assemble_order_types(g_index: CliqueIndex | None, h_index: CliqueIndex | None, cells: dict) -> dict:
    """Order type of the gamma lines of every cell from clique lookups alone.

    ``cells`` maps a cell id to its list of ``(a, b)`` gamma pairs.  Raises
    :class:`MissingCoverage` if a needed sign was not resolved and
    :class:`~subquad.errors.ParallelLines` if two gamma lines are parallel.
    """
    out = {}
    for cid, gam in cells.items():
        def cmp3(i, j, k, gam=gam):
            return g_index.sign((gam[i][1], gam[j][1], gam[k][1]), (gam[i][0], gam[j][0], gam[k][0]))

        def slope(i, j, gam=gam):
            return h_index.sign((gam[i][1], gam[j][1]), (gam[i][0], gam[j][0]))

        out[cid] = OrderTypeLines.from_comparators(len(gam), cmp3, slope)
    return out
