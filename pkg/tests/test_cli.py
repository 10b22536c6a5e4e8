import json
import math
from fractions import Fraction

import pytest
from click.testing import CliRunner

from subquad import cli
from subquad.errors import InstanceFormatError
from subquad.geom import P, Q, Segment2, Triangle, seg_intersect, point_in_triangle
from subquad.instancefile import InstanceFile, format_q, parse_q
from subquad.solver import ProblemInstance, brute_force_oracle, count_within_triangles, shear_point


def run(*args, **kw):
    return CliRunner(**kw).invoke(cli.main, [str(a) for a in args], catch_exceptions=False)


def test_rationals_text_form():
    assert format_q(Q(-3, 4)) == "-3/4" and format_q(Q(6, 3)) == "2"
    assert parse_q("-3/4") == Q(-3, 4) and parse_q(5) == 5 and parse_q(" 10 / 4 ") == Q(5, 2)
    for bad in ("1.5", "1/0", True, None, "x"):
        with pytest.raises(ValueError):
            parse_q(bad)


def test_round_trip_is_lossless():
    doc = InstanceFile(
        [Segment2(P(Q(1, 3), Q(-7, 11)), P(Q(10**30 + 1, 7), 2))],
        [Segment2(P(0, 5), P(4, Q(-1, 2)))],
        [Triangle(P(0, 0), P(1, 0), P(0, Q(1, 9))), Triangle(P(0, 0), P(1, 1), P(2, 2), degenerate=True)],
        {"g": 4, "delta": Fraction(1, 20), "oracle": "exhaustive", "seed": 3},
        Q(1, 5),
    )
    text = doc.dumps()
    back = InstanceFile.loads(text)
    assert back == doc
    assert back.dumps() == text
    assert back.C[1].degenerate


def test_empty_sets_round_trip():
    doc = InstanceFile([], [], [])
    assert InstanceFile.loads(doc.dumps()) == doc


def _bad(text):
    with pytest.raises(InstanceFormatError) as e:
        InstanceFile.loads(text)
    return e.value


def test_format_errors_carry_line_numbers():
    good = InstanceFile([Segment2(P(0, 0), P(1, 1)), Segment2(P(2, 0), P(3, 1))], [Segment2(P(0, 1), P(1, 0))], [Triangle(P(0, 0), P(1, 0), P(0, 1))]).dumps()
    lines = good.splitlines()
    k = next(i for i, ln in enumerate(lines) if '"2", "0"' in ln)
    lines[k] = lines[k].replace('"2", "0"', '"2.5", "0"')
    err = _bad("\n".join(lines))
    assert err.line == k + 1 and "A[1]" in str(err)

    lines = good.splitlines()
    k = next(i for i, ln in enumerate(lines) if ln.strip().startswith('[["0", "0"], ["1", "0"]'))
    lines[k] = '    [["0", "0"], ["1", "0"]]'
    err = _bad("\n".join(lines))
    assert err.line == k + 1 and "C[0]" in str(err)

    assert _bad('{\n  "format": "subquad-instance",\n  "version": 1,\n  "A": [\n').line == 5
    assert _bad(good.replace('"version": 1', '"version": 9')).line == 3
    assert "unknown params" in str(_bad(good.replace('"version": 1', '"version": 1, "params": {"colour": 1}')))


def test_generate_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run("generate", "--n", 30, "--seed", 7, "--out", a)
    run("generate", "--n", 30, "--seed", 7, "--out", b)
    assert a.read_bytes() == b.read_bytes()
    doc = InstanceFile.read(str(a))
    assert len(doc.A) == len(doc.B) == len(doc.C) == 30
    one = run("generate", "--n", 1)
    assert len(InstanceFile.loads(one.output).A) == 1


def test_planted_sidecar_is_found_by_solver(tmp_path):
    out = tmp_path / "p.json"
    run("generate", "--n", 40, "--kind", "planted-concurrency", "--seed", 2, "--triangles", 12, "--out", out)
    side = json.loads((tmp_path / "p.answers.json").read_text())["planted"]
    assert len(side) == 3
    res = run("solve", out, "--g", 4)
    counts = json.loads(res.output)["counts"]
    doc = InstanceFile.read(str(out))
    for t in side:
        p = seg_intersect(doc.A[t["a"]], doc.B[t["b"]])
        assert point_in_triangle(p, doc.C[t["c"]]) and counts[t["c"]] >= 1


def test_solve_outputs(tmp_path):
    f = tmp_path / "i.json"
    run("generate", "--n", 20, "--seed", 1, "--out", f)
    js = json.loads(run("solve", f, "--g", 2).output)
    doc = InstanceFile.read(str(f))
    assert js["counts"] == brute_force_oracle(ProblemInstance(doc.A, doc.B, doc.C))
    assert any(k.startswith("query/") for k in js["meter"])
    rows = run("solve", f, "--g", 2, "--format", "csv", "--oracle", "exhaustive").output.splitlines()
    assert rows[0] == "triangle,count" and [int(r.split(",")[1]) for r in rows[1:]] == js["counts"]


def test_solve_reports_crossing_red_segments(tmp_path):
    f = tmp_path / "x.json"
    doc = InstanceFile(
        [Segment2(P(0, 0), P(4, 4)), Segment2(P(0, 2), P(1, 2)), Segment2(P(0, 4), P(4, 0))],
        [Segment2(P(0, 3), P(4, 2))],
        [Triangle(P(0, 0), P(4, 0), P(0, 4))],
    )
    doc.write(str(f))
    res = CliRunner().invoke(cli.main, ["solve", str(f), "--g", "2"])
    assert res.exit_code != 0
    assert "DisjointnessViolation" in res.output and "0 and 2" in res.output


def test_verify_exit_codes(tmp_path, monkeypatch):
    f = tmp_path / "i.json"
    run("generate", "--n", 16, "--seed", 4, "--out", f)
    assert run("verify", f, "--g", 4).exit_code == 0
    res = run("verify", "--n", 8, "--n", 16, "--count", 3, "--g", 2)
    assert res.exit_code == 0 and "6/6" in res.output

    real = cli.count_within_triangles

    def off_by_one(inst):
        rep = real(inst)
        rep.counts[0] += 1
        return rep

    monkeypatch.setattr(cli, "count_within_triangles", off_by_one)
    res = run("verify", f)
    assert res.exit_code == 1 and "MISMATCH" in res.output


def test_rotate_removes_vertical_lines_and_keeps_counts(tmp_path):
    f, g = tmp_path / "v.json", tmp_path / "r.json"
    A = [Segment2(P(1, 0), P(1, 4)), Segment2(P(3, 0), P(4, 4))]
    B = [Segment2(P(0, 1), P(5, 2)), Segment2(P(0, 3), P(5, 3))]
    C = [Triangle(P(0, 0), P(6, 0), P(0, 6)), Triangle(P(1, 0), P(1, 4), P(5, 2)), Triangle(P(1, 1), P(1, 3), P(1, 2), degenerate=True)]
    InstanceFile(A, B, C).write(str(f))
    run("rotate", f, "--out", g)
    rot = InstanceFile.read(str(g))
    assert not any(s.is_vertical for s in rot.A + rot.B)
    assert all(u.x != v.x for t in rot.C for u, v in t.edges())
    before = brute_force_oracle(ProblemInstance(A, B, C))
    after = count_within_triangles(ProblemInstance(rot.A, rot.B, rot.C, g=2))
    assert after.shear == 0 and after.counts == before


def test_rotate_generic_instance_differs_only_by_shear(tmp_path):
    f, g = tmp_path / "i.json", tmp_path / "r.json"
    run("generate", "--n", 12, "--seed", 5, "--out", f)
    run("rotate", f, "--out", g)
    a, b = InstanceFile.read(str(f)), InstanceFile.read(str(g))
    s = b.shear
    assert s is not None and s != 0 and b.params == a.params
    for x, y in zip(a.A + a.B, b.A + b.B):
        assert (shear_point(x.p, s), shear_point(x.q, s)) == (y.p, y.q)
    for x, y in zip(a.C, b.C):
        assert tuple(shear_point(v, s) for v in x.vertices) == y.vertices
    assert brute_force_oracle(ProblemInstance(a.A, a.B, a.C)) == brute_force_oracle(ProblemInstance(b.A, b.B, b.C))


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_bench_report_is_parseable(fmt, tmp_path):
    out = tmp_path / f"bench.{fmt}"
    run("bench", "--n", 16, "--n", 32, "--n", 64, "--format", fmt, "--out", out)
    rep = cli.parse_bench(out.read_text(), fmt)
    assert set(rep["rows"][0]) == set(cli.BENCH_FIELDS)
    totals = [sum(r["count"] for r in rep["rows"] if r["n"] == n and r["phase"] == "query") for n in (16, 32, 64)]
    assert totals == sorted(totals) and totals[0] > 0
    assert all(r["g"] == 2 for r in rep["rows"])
    assert math.isfinite(rep["query_exponent"])
    assert rep["query_exponent"] == pytest.approx(cli.fit_exponent([16, 32, 64], totals), abs=1e-5)


def test_bench_is_reproducible_under_threads(monkeypatch):
    one = cli.bench_report([16, 24], seed=3)
    monkeypatch.setenv("SUBQUAD_THREADS", "2")
    two = cli.bench_report([16, 24], seed=3)
    strip = lambda rep: [{k: v for k, v in r.items() if k != "wall_time"} for r in rep["rows"]]
    assert strip(one) == strip(two)


def test_fit_exponent():
    assert cli.fit_exponent([2, 4, 8], [3 * 2**1.5, 3 * 4**1.5, 3 * 8**1.5]) == pytest.approx(1.5)
    assert math.isnan(cli.fit_exponent([2], [1]))
