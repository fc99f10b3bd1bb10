from __future__ import annotations
from typing import Optional, Sequence

from src.traces.trace import IoRequest, Op, Trace, WorkloadCategory


def req(page: int, size: int = 1, op: str = "R", ts: int = 0) -> IoRequest:
    return IoRequest(ts, page, size, Op(op))


def trace_of(pages: Sequence[int], sizes: Optional[Sequence[int]] = None, ops: Optional[str] = None,
             category: Optional[WorkloadCategory] = None, gap_us: int = 1000) -> Trace:
    sizes = sizes or [1] * len(pages)
    ops = ops or "R" * len(pages)
    return Trace([IoRequest(i * gap_us, p, s, Op(o)) for i, (p, s, o) in enumerate(zip(pages, sizes, ops))],
                 category=category)
