import itertools
import random
from fractions import Fraction as F

import pytest

from subquad.arrangement import build_order_type_direct
from subquad.counting import count_long_long
from subquad.cuttings import bounding_box, build_hier_cutting, classify_segments, overlay
from subquad.errors import MissingCoverage, OracleContractViolation, ParallelGammaLines, ParallelLines
from subquad.fredman import (
    CliqueIndex,
    ExhaustiveOracle,
    KdOracle,
    OracleCell,
    TriplePoint,
    TripleSurface,
    assemble_order_types,
    batched_locate,
    filter_gamma,
    required_keys,
)
from subquad.generate import generate
from subquad.geom import Line2, g_polynomial, gamma_line, seg_intersect, sgn, sign_G, sign_H
from subquad.meter import metering


def random_lines(rng, n, lo, hi):
    slopes = rng.sample(range(lo, hi), n)
    return [Line2(F(s, 3), F(rng.randint(-5000, 5000), 7)) for s in slopes]


def triples(rng, lines, count, width=3):
    ids = list(range(len(lines)))
    out = set()
    while len(out) < count:
        out.add(tuple(rng.sample(ids, width)))
    return sorted(out)


def instance(seed, M, N, tag="G"):
    rng = random.Random(seed)
    A = random_lines(rng, 12, -60, 0)
    B = random_lines(rng, 12, 1, 60)
    w = 3 if tag == "G" else 2
    P = [TriplePoint(t, tuple(B[i] for i in t)) for t in triples(rng, B, M, w)]
    S = [TripleSurface(t, tuple(A[i] for i in t), tag) for t in triples(rng, A, N, w)]
    return A, B, P, S


def direct(tag, p, s):
    a, b = s.lines, p.lines
    if tag == "G":
        try:
            return sign_G(a[0], b[0], a[1], b[1], a[2], b[2])
        except ParallelGammaLines:
            return sgn(g_polynomial(a[0], b[0], a[1], b[1], a[2], b[2]))
    return sign_H(a[0], b[0], a[1], b[1])


def check(cliques, P, S, tag, sample=None, rng=None):
    assert sum(len(c.points) * len(c.surfaces) for c in cliques) == len(P) * len(S)
    owner = {}
    for k, c in enumerate(cliques):
        for p in c.points:
            for s in c.surfaces:
                assert (p, s) not in owner
                owner[(p, s)] = k
    pairs = list(owner)
    if sample is not None and len(pairs) > sample:
        pairs = rng.sample(pairs, sample)
    for p, s in pairs:
        assert cliques[owner[(p, s)]].sign == direct(tag, P[p], S[s])


def test_trivial_inputs():
    A, B, P, S = instance(1, 1, 1)
    cl, rep = batched_locate(P, S, "kd", 64)
    assert len(cl) == 1 and cl[0].sign == direct("G", P[0], S[0])
    assert batched_locate([], S, "kd", 64)[0] == []


@pytest.mark.parametrize("oracle", ["kd", "exhaustive"])
def test_eight_by_eight_fully_verified(oracle):
    A, B, P, S = instance(2, 8, 8)
    cl, rep = batched_locate(P, S, oracle, 2)
    check(cl, P, S, "G")
    assert rep.total_size == sum(len(c.points) + len(c.surfaces) for c in cl)


def shape_ok(rep, n0, d):
    for nd in rep.nodes:
        if nd.mode == "stalled":
            continue
        assert (nd.mode == "base") == (min(nd.M, nd.N) <= n0)
        if nd.mode != "base":
            assert nd.one_sided == (nd.M > nd.N**d or nd.N > nd.M**d)
            par = rep.nodes[nd.parent] if nd.parent is not None else None
            if not nd.one_sided and par is not None and not par.one_sided and par.mode != "base":
                assert nd.mode != par.mode


@pytest.mark.parametrize("seed,M,N,n0,tag", [(3, 60, 50, 4, "G"), (4, 120, 2, 1, "G"), (5, 2, 150, 1, "G"), (6, 40, 40, 3, "H")])
def test_recursion_shape_and_cover(seed, M, N, n0, tag):
    A, B, P, S = instance(seed, M, N, tag)
    cl, rep = batched_locate(P, S, KdOracle(), n0)
    check(cl, P, S, tag, sample=1000, rng=random.Random(seed))
    shape_ok(rep, n0, 6 if tag == "G" else 4)
    assert any(nd.mode != "base" for nd in rep.nodes)
    if M > N**6 or N > M**6:
        assert rep.nodes[0].one_sided


def test_broken_oracle_is_reported():
    class Lossy(KdOracle):
        def partition(self, coords, members):
            return [OracleCell(members[1:], None)]

    A, B, P, S = instance(7, 10, 10)
    with pytest.raises(OracleContractViolation):
        batched_locate(P, S, Lossy(), 1)


def cells_with_gammas(kind, n, seed, g):
    inst = generate(kind, n, seed=seed)
    box = bounding_box(inst.A + inst.B)
    ov = overlay(build_hier_cutting(inst.A, 2, n // g, seed=seed, box=box), build_hier_cutting(inst.B, 2, n // g, seed=seed + 1, box=box))
    out = {}
    for sigma in ov.bottom():
        al, _, bl, _ = classify_segments(sigma, inst.A, inst.B)
        _, dec = count_long_long(sigma, [inst.A[i] for i in al], [inst.B[i] for i in bl], al, bl)
        out[sigma.id] = (sigma, al, bl, filter_gamma(dec))
    return inst, out


def resolve(inst, gammas, oracle="kd", n0=64):
    g_red, g_blue, h_red, h_blue = set(), set(), set(), set()
    for gam in gammas.values():
        a, b, c, d = required_keys(gam)
        g_red |= a
        g_blue |= b
        h_red |= c
        h_blue |= d
    LA = [s.line() for s in inst.A]
    LB = [s.line() for s in inst.B]
    idx = []
    for tag, red, blue in (("G", g_red, g_blue), ("H", h_red, h_blue)):
        P = [TriplePoint(t, tuple(LB[i] for i in t)) for t in sorted(blue)]
        S = [TripleSurface(t, tuple(LA[i] for i in t), tag) for t in sorted(red)]
        cl, _ = batched_locate(P, S, oracle, n0)
        idx.append(CliqueIndex(P, S, cl))
    return idx


@pytest.mark.parametrize("kind,seed", [("parallel-bundles", 1), ("disjoint-random", 2)])
def test_assembled_order_types_match_direct(kind, seed):
    inst, cells = cells_with_gammas(kind, 16, seed, 4)
    gammas = {cid: v[3] for cid, v in cells.items() if v[3]}
    if kind == "parallel-bundles":
        assert any(len(g) >= 3 for g in gammas.values())
    gi, hi = resolve(inst, gammas, "kd", 8)
    for cid, gam in gammas.items():
        lines = [gamma_line(inst.A[a].line(), inst.B[b].line()) for a, b in gam]
        try:
            want = build_order_type_direct(lines)
        except ParallelLines:
            with pytest.raises(ParallelLines):
                assemble_order_types(gi, hi, {cid: gam})
            continue
        with metering() as m:
            got = assemble_order_types(gi, hi, {cid: gam})[cid]
        assert m.total() == 0
        k = len(gam)
        for i, j, l in itertools.permutations(range(k), 3):
            assert got.orient(i, j, l) == want.orient(i, j, l)
        for i, j in itertools.permutations(range(k), 2):
            assert got.slope_cmp(i, j) == want.slope_cmp(i, j)


def test_single_gamma_and_missing_coverage():
    inst, cells = cells_with_gammas("parallel-bundles", 16, 3, 4)
    gam = next(v[3] for v in cells.values() if len(v[3]) >= 2)
    ot = assemble_order_types(None, None, {0: gam[:1]})[0]
    assert ot.n == 1
    gi, hi = resolve(inst, {0: gam[:1]})
    with pytest.raises(MissingCoverage):
        assemble_order_types(gi, hi, {0: gam[:2]})


def test_filter_gamma_matches_pairwise_tests():
    inst, cells = cells_with_gammas("disjoint-random", 24, 4, 4)
    for sigma, al, bl, gam in cells.values():
        want = set()
        for a in al:
            for b in bl:
                p = seg_intersect(inst.A[a], inst.B[b])
                if p is not None and sigma.poly.strictly_inside(p):
                    want.add((a, b))
        assert set(gam) == want
