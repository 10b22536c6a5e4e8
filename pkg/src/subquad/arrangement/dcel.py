"""Line arrangement reconstructed from an order type alone.

The construction is a combinatorial topological sweep: starting from the
vertical order at ``x = -inf`` it repeatedly processes a vertex that is the
next crossing on every line through it, reversing that contiguous bundle.
Concurrent lines are fine; parallel lines are not.

The plane is compactified by a circle at infinity carrying one ideal vertex
per line end, so every face boundary (including the outer face beyond the
circle) is a closed walk.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import InconsistentOrderType
from .ordertype import OrderTypeLines

LEFT_INF = "left"
RIGHT_INF = "right"


@dataclass
class ArrangementDCEL:
    ot: OrderTypeLines
    vertex_lines: list  # finite vertex -> sorted tuple of line ids
    ideal: list  # ideal vertex (index - n_finite) -> (line, LEFT_INF | RIGHT_INF)
    origin: list
    twin: list
    next: list
    prev: list
    face: list
    hline: list  # half-edge -> line id, or -1 on the circle at infinity
    forward: list  # half-edge -> True when it runs left to right along its line
    face_edge: list  # face -> one boundary half-edge
    outer_face: int
    line_edges: list  # line -> forward half-edges left to right
    level_edges: list  # level j -> forward half-edges left to right
    level_vertices: list  # level j -> finite vertices left to right
    group_index: list = field(repr=False)  # [line][other] -> crossing group rank
    vertex_group: dict = field(repr=False)  # (vertex, line) -> group rank on that line

    # -- counts -------------------------------------------------------------

    @property
    def n_lines(self) -> int:
        return self.ot.n

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_lines)

    @property
    def n_edges(self) -> int:
        return sum(len(e) for e in self.line_edges)

    @property
    def n_faces(self) -> int:
        return len(self.face_edge) - 1

    def euler_characteristic(self) -> int:
        """V - E + F of the compactified subdivision (2 for a valid sphere map)."""
        v = len(self.vertex_lines) + len(self.ideal)
        e = len(self.origin) // 2
        return v - e + len(self.face_edge)

    def boundary_walk(self, f: int) -> list:
        start = self.face_edge[f]
        walk = [start]
        h = self.next[start]
        guard = len(self.origin) + 1
        while h != start:
            walk.append(h)
            h = self.next[h]
            guard -= 1
            if guard < 0:
                raise InconsistentOrderType(f"boundary walk of face {f} does not close")
        return walk

    def edge_endpoints(self, h: int) -> tuple:
        return self.origin[h], self.origin[self.twin[h]]

    # -- combinatorial side tests --------------------------------------------

    def _vertex_rank(self, v: int, line: int) -> float:
        nf = len(self.vertex_lines)
        if v >= nf:
            return -1.0 if self.ideal[v - nf][1] == LEFT_INF else float("inf")
        return self.vertex_group[(v, line)]

    def _edge_side(self, h: int, t: int) -> int:
        """Side (+1 above) of the open edge under half-edge ``h`` w.r.t. line ``t``."""
        line = self.hline[h]
        u, w = self.edge_endpoints(h)
        if not self.forward[h]:
            u, w = w, u
        g = self.group_index[line][t]
        steeper = self.ot.slope_cmp(line, t)
        if g <= self._vertex_rank(u, line):
            return steeper
        return -steeper

    def sign_vector(self, kind: str, ident: int) -> tuple:
        """Above (+1) / on (0) / below (-1) for every line; no coordinates used."""
        n = self.n_lines
        sv = [0] * n
        if kind == "vertex":
            lines = self.vertex_lines[ident]
            base = lines[0]
            rank = self.vertex_group[(ident, base)]
            on = set(lines)
            for t in range(n):
                if t in on:
                    continue
                steeper = self.ot.slope_cmp(base, t)
                sv[t] = steeper if self.group_index[base][t] < rank else -steeper
            return tuple(sv)
        if kind == "edge":
            h = ident
            line = self.hline[h]
            for t in range(n):
                if t != line:
                    sv[t] = self._edge_side(h, t)
            return tuple(sv)
        if kind == "face":
            if n == 0:
                return ()
            h = self.face_edge[ident]
            walk = self.boundary_walk(ident)
            h = next(e for e in walk if self.hline[e] >= 0)
            line = self.hline[h]
            for t in range(n):
                sv[t] = self._edge_side(h, t) if t != line else (1 if self.forward[h] else -1)
            return tuple(sv)
        raise ValueError(kind)


def _vertex_table(ot: OrderTypeLines):
    n = ot.n
    keys: dict = {}
    vertex_lines: list = []
    seqs = []
    vertex_group = {}
    group_index = []
    for i in range(n):
        seq = ot.local_sequence(i)
        row = [None] * n
        vids = []
        for g, grp in enumerate(seq):
            for j in grp:
                row[j] = g
            key = frozenset(grp + (i,))
            vid = keys.get(key)
            if vid is None:
                vid = keys[key] = len(vertex_lines)
                vertex_lines.append(tuple(sorted(key)))
            vids.append(vid)
            vertex_group[(vid, i)] = g
        seqs.append(vids)
        group_index.append(row)
    for vid, lines in enumerate(vertex_lines):
        for l in lines:
            if (vid, l) not in vertex_group:
                raise InconsistentOrderType(
                    f"vertex {lines} is missing from the local sequence of line {l}", lines
                )
    return vertex_lines, seqs, vertex_group, group_index


def build_dcel_from_order_type(ot: OrderTypeLines) -> ArrangementDCEL:
    """Arrangement DCEL using only order-type lookups (no coordinates, no charges)."""
    n = ot.n
    vertex_lines, seqs, vertex_group, group_index = _vertex_table(ot)
    nf = len(vertex_lines)
    order = ot.order_at_minus_infinity()
    for a, b in zip(order, order[1:]):
        if ot.slope_cmp(a, b) == 0:
            raise InconsistentOrderType("parallel lines are not supported", (a, b))
    initial_order = list(order)
    pos = {l: p for p, l in enumerate(order)}

    ideal = [(l, LEFT_INF) for l in range(n)] + [(l, RIGHT_INF) for l in range(n)]
    left_id = lambda l: nf + l  # noqa: E731
    right_id = lambda l: nf + n + l  # noqa: E731

    origin: list = []
    twin: list = []
    hline: list = []
    forward: list = []
    rot: dict = {}

    def new_edge(o: int, line: int, fwd: bool) -> int:
        h = len(origin)
        origin.extend((o, -1))
        twin.extend((h + 1, h))
        hline.extend((line, line))
        forward.extend((fwd, not fwd))
        return h

    line_edges = [[] for _ in range(n)]
    current = [0] * n
    for l in range(n):
        h = new_edge(left_id(l), l, True)
        current[l] = h
        line_edges[l].append(h)

    level_edges = [[current[order[p]]] for p in range(n)]
    level_vertices = [[] for _ in range(n)]

    ptr = [0] * n
    hits = [0] * nf
    ready = []
    for l in range(n):
        if seqs[l]:
            v = seqs[l][0]
            hits[v] += 1
            if hits[v] == len(vertex_lines[v]):
                ready.append(v)

    processed = 0
    while ready:
        v = ready.pop()
        lines = vertex_lines[v]
        ps = sorted(pos[l] for l in lines)
        lo, k = ps[0], len(ps)
        if ps[-1] - lo != k - 1:
            raise InconsistentOrderType(f"lines of vertex {lines} are not adjacent", lines)
        bundle = order[lo : lo + k]
        incoming = []
        outgoing = []
        for l in bundle:
            h = current[l]
            origin[twin[h]] = v
            incoming.append(twin[h])
            nh = new_edge(v, l, True)
            current[l] = nh
            line_edges[l].append(nh)
            outgoing.append(nh)
        # CCW: out edges bottom->top after the crossing, then in edges top->bottom before it
        rot[v] = list(reversed(outgoing)) + list(reversed(incoming))
        bundle.reverse()
        order[lo : lo + k] = bundle
        for p in range(lo, lo + k):
            pos[order[p]] = p
            level_vertices[p].append(v)
            level_edges[p].append(current[order[p]])
        for l in lines:
            ptr[l] += 1
            if ptr[l] < len(seqs[l]):
                w = seqs[l][ptr[l]]
                hits[w] += 1
                if hits[w] == len(vertex_lines[w]):
                    ready.append(w)
        processed += 1

    if processed != nf:
        raise InconsistentOrderType(f"sweep stalled after {processed} of {nf} vertices")

    for l in range(n):
        origin[twin[current[l]]] = right_id(l)

    # circle at infinity, CCW: right ends bottom->top, then left ends top->bottom
    ring = [right_id(l) for l in order] + [left_id(l) for l in reversed(initial_order)]
    m = len(ring)
    arc_out: dict = {}
    arc_back: dict = {}
    if m >= 2:
        for t in range(m):
            a, b = ring[t], ring[(t + 1) % m]
            h = new_edge(a, -1, True)
            origin[h + 1] = b
            arc_out[a] = h
            arc_back[b] = h + 1
    for l in range(n):
        first = line_edges[l][0]
        last_back = twin[line_edges[l][-1]]
        for vid, inward in ((left_id(l), first), (right_id(l), last_back)):
            rot[vid] = [arc_out[vid], inward, arc_back[vid]] if m >= 2 else [inward]

    H = len(origin)
    nxt = [-1] * H
    for v, hs in rot.items():
        d = len(hs)
        for i, h in enumerate(hs):
            nxt[twin[h]] = hs[(i - 1) % d]
    prv = [-1] * H
    for h in range(H):
        if nxt[h] < 0:
            raise InconsistentOrderType("incomplete rotation system")
        prv[nxt[h]] = h

    face = [-1] * H
    face_edge = []
    outer = -1
    for h in range(H):
        if face[h] >= 0:
            continue
        f = len(face_edge)
        face_edge.append(h)
        e = h
        is_outer = True
        while face[e] < 0:
            face[e] = f
            if not (hline[e] < 0 and not forward[e]):
                is_outer = False
            e = nxt[e]
        if e != h:
            raise InconsistentOrderType("boundary walk does not close")
        if is_outer:
            outer = f

    if n == 0:
        # the whole plane plus a nominal outer face
        face_edge, outer = [-1, -1], 1

    return ArrangementDCEL(
        ot=ot,
        vertex_lines=vertex_lines,
        ideal=ideal,
        origin=origin,
        twin=twin,
        next=nxt,
        prev=prv,
        face=face,
        hline=hline,
        forward=forward,
        face_edge=face_edge,
        outer_face=outer,
        line_edges=line_edges,
        level_edges=level_edges,
        level_vertices=level_vertices,
        group_index=group_index,
        vertex_group=vertex_group,
    )
