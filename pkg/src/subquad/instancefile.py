"""Versioned JSON instance files with exact rational coordinates.

Coordinates are written as strings, ``"7"`` or ``"-3/4"``; readers also accept
plain JSON integers.  Each segment and triangle sits on its own line so that
errors can point at a line number.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .errors import InstanceFormatError
from .geom import Point2, Q, Segment2, Triangle, _det

FORMAT = "subquad-instance"
VERSION = 1
PARAM_KEYS = ("g", "r0", "delta", "n0", "oracle", "seed")
_RATIONAL = re.compile(r"^\s*-?\d+(\s*/\s*\d+)?\s*$")


def format_q(x) -> str:
    x = Q(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_q(v: Any) -> Q:
    if isinstance(v, bool):
        raise ValueError(f"not a rational: {v!r}")
    if isinstance(v, int):
        return Q(v)
    if isinstance(v, str) and _RATIONAL.match(v):
        num, _, den = v.replace(" ", "").partition("/")
        if den and int(den) == 0:
            raise ValueError(f"zero denominator in {v!r}")
        return Q(int(num), int(den or 1))
    raise ValueError(f"not a rational: {v!r}")


@dataclass
class InstanceFile:
    A: list
    B: list
    C: list
    params: dict = field(default_factory=dict)
    shear: Q | None = None  # set by the rotate command

    # -- writing ---------------------------------------------------------

    def dumps(self) -> str:
        pt = lambda p: f'["{format_q(p.x)}", "{format_q(p.y)}"]'
        seg = lambda s: f"[{pt(s.p)}, {pt(s.q)}]"
        tri = lambda t: "[" + ", ".join(pt(v) for v in t.vertices) + "]"

        def block(name, items, show):
            if not items:
                return f'  "{name}": []'
            return f'  "{name}": [\n' + ",\n".join("    " + show(x) for x in items) + "\n  ]"

        head = [f'  "format": "{FORMAT}"', f'  "version": {VERSION}']
        if self.params:
            head.append('  "params": ' + json.dumps(_params_out(self.params), sort_keys=True))
        if self.shear is not None:
            head.append(f'  "shear": "{format_q(self.shear)}"')
        body = head + [block("A", self.A, seg), block("B", self.B, seg), block("C", self.C, tri)]
        return "{\n" + ",\n".join(body) + "\n}\n"

    def write(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write(self.dumps())

    # -- reading ---------------------------------------------------------

    @classmethod
    def loads(cls, text: str) -> "InstanceFile":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise InstanceFormatError(f"invalid JSON: {e.msg}", e.lineno) from None
        if not isinstance(doc, dict):
            raise InstanceFormatError("top level must be an object", 1)
        if doc.get("format") != FORMAT:
            raise InstanceFormatError(f"format must be {FORMAT!r}", _line_of(text, '"format"'))
        if doc.get("version") != VERSION:
            raise InstanceFormatError(f"unsupported version {doc.get('version')!r}", _line_of(text, '"version"'))
        lines = _item_lines(text)
        A = [_segment(v, text, lines, "A", k) for k, v in enumerate(_list(doc, "A", text))]
        B = [_segment(v, text, lines, "B", k) for k, v in enumerate(_list(doc, "B", text))]
        C = [_triangle(v, text, lines, k) for k, v in enumerate(_list(doc, "C", text))]
        params = _params_in(doc.get("params") or {}, text)
        shear = None
        if "shear" in doc:
            try:
                shear = parse_q(doc["shear"])
            except ValueError as e:
                raise InstanceFormatError(str(e), _line_of(text, '"shear"')) from None
        return cls(A, B, C, params, shear)

    @classmethod
    def read(cls, path: str) -> "InstanceFile":
        with open(path) as fh:
            return cls.loads(fh.read())


def _params_out(params: dict) -> dict:
    out = {}
    for k, v in params.items():
        if v is None:
            continue
        out[k] = format_q(v) if k == "delta" else v
    return out


def _params_in(raw: Any, text: str) -> dict:
    where = _line_of(text, '"params"')
    if not isinstance(raw, dict):
        raise InstanceFormatError("params must be an object", where)
    unknown = set(raw) - set(PARAM_KEYS)
    if unknown:
        raise InstanceFormatError(f"unknown params: {', '.join(sorted(unknown))}", where)
    out = dict(raw)
    try:
        if "delta" in out:
            out["delta"] = Fraction(str(parse_q(out["delta"])))
        for k in ("g", "r0", "n0", "seed"):
            if k in out and (not isinstance(out[k], int) or isinstance(out[k], bool)):
                raise ValueError(f"{k} must be an integer")
    except ValueError as e:
        raise InstanceFormatError(str(e), where) from None
    if "oracle" in out and out["oracle"] not in ("exhaustive", "kd"):
        raise InstanceFormatError(f"unknown oracle {out['oracle']!r}", where)
    return out


def _line_of(text: str, needle: str, start: int = 0) -> int | None:
    i = text.find(needle, start)
    return None if i < 0 else text.count("\n", 0, i) + 1


def _item_lines(text: str) -> dict:
    """Line number of every item in the A, B and C arrays.

    Walks the JSON once with a small bracket scanner; strings never contain
    brackets in a valid file, but are skipped anyway.
    """
    out: dict = {}
    depth, key, line, idx = 0, None, 1, -1
    i, n = 0, len(text)
    last_str = None
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
        elif ch == '"':
            j = i + 1
            while j < n and text[j] != '"':
                j += 2 if text[j] == "\\" else 1
            last_str = text[i + 1 : j]
            i = j
        elif ch in "[{":
            depth += 1
            if depth == 2 and ch == "[" and last_str in ("A", "B", "C"):
                key, idx = last_str, -1
            elif depth == 3 and key is not None:
                idx += 1
                out[(key, idx)] = line
        elif ch in "]}":
            if depth == 2:
                key = None
            depth -= 1
        i += 1
    return out


def _list(doc: dict, name: str, text: str) -> list:
    v = doc.get(name)
    if not isinstance(v, list):
        raise InstanceFormatError(f"{name} must be a list", _line_of(text, f'"{name}"') or 1)
    return v


def _point(v: Any) -> Point2:
    if not isinstance(v, list) or len(v) != 2:
        raise ValueError(f"point must be a pair, got {v!r}")
    return Point2(parse_q(v[0]), parse_q(v[1]))


def _segment(v, text, lines, name, k) -> Segment2:
    try:
        if not isinstance(v, list) or len(v) != 2:
            raise ValueError("segment must have two endpoints")
        p, q = _point(v[0]), _point(v[1])
        if p == q:
            raise ValueError("segment endpoints coincide")
        return Segment2(p, q)
    except ValueError as e:
        raise InstanceFormatError(f"{name}[{k}]: {e}", lines.get((name, k))) from None


def _triangle(v, text, lines, k) -> Triangle:
    try:
        if not isinstance(v, list) or len(v) != 3:
            raise ValueError("triangle must have three vertices")
        a, b, c = (_point(x) for x in v)
        return Triangle(a, b, c, degenerate=_det(a, b, c) == 0)
    except ValueError as e:
        raise InstanceFormatError(f"C[{k}]: {e}", lines.get(("C", k))) from None
