"""Decision-tree cost accounting.

Every predicate that reads input coordinates calls :func:`charge`, which bumps
the active :class:`CostMeter` under the active phase.  Purely combinatorial
work never charges.  Meters are installed per context with :func:`metering`,
so concurrent callers each see their own counters.
"""

from __future__ import annotations

import contextvars
from collections import Counter
from contextlib import contextmanager
from typing import Iterator

PHASES = ("preprocess", "query", "oracle-build")

_active_meter: contextvars.ContextVar["CostMeter | None"] = contextvars.ContextVar(
    "subquad_meter", default=None
)
_active_phase: contextvars.ContextVar[str] = contextvars.ContextVar(
    "subquad_phase", default="preprocess"
)


class CostMeter:
    """Monotone counters keyed by ``(phase, arity)``."""

    def __init__(self) -> None:
        self._counts: Counter = Counter()

    def add(self, phase: str, arity: int, amount: int = 1) -> None:
        if amount < 0:
            raise ValueError("meter counts never decrease")
        if phase not in PHASES:
            raise ValueError(f"unknown phase {phase!r}")
        self._counts[(phase, arity)] += amount

    def total(self, phase: str | None = None, arity: int | None = None) -> int:
        return sum(
            v
            for (p, a), v in self._counts.items()
            if (phase is None or p == phase) and (arity is None or a == arity)
        )

    def snapshot(self) -> dict:
        return dict(self._counts)

    def merge(self, other: "CostMeter") -> "CostMeter":
        """Return a new meter holding the sum of both (associative, commutative)."""
        out = CostMeter()
        out._counts = self._counts + other._counts
        return out

    def by_phase(self) -> dict:
        return {p: self.total(p) for p in PHASES}

    def __repr__(self) -> str:
        return f"CostMeter({dict(sorted(self._counts.items()))})"


def charge(arity: int, amount: int = 1) -> None:
    meter = _active_meter.get()
    if meter is not None and amount:
        meter.add(_active_phase.get(), arity, amount)


def current_meter() -> CostMeter | None:
    return _active_meter.get()


@contextmanager
def metering(meter: CostMeter | None = None, phase: str | None = None) -> Iterator[CostMeter]:
    """Install ``meter`` (a fresh one by default) for the enclosed block."""
    meter = meter if meter is not None else CostMeter()
    tok = _active_meter.set(meter)
    ptok = _active_phase.set(phase) if phase is not None else None
    try:
        yield meter
    finally:
        _active_meter.reset(tok)
        if ptok is not None:
            _active_phase.reset(ptok)


@contextmanager
def in_phase(phase: str) -> Iterator[None]:
    if phase not in PHASES:
        raise ValueError(f"unknown phase {phase!r}")
    tok = _active_phase.set(phase)
    try:
        yield
    finally:
        _active_phase.reset(tok)
