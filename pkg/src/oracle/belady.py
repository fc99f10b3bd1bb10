from __future__ import annotations
import heapq
import math
from typing import Dict, List, Tuple

from src.engine.metrics import Metrics
from src.policies.base import BYPASS, HIT, CachePolicy, Decision, Outcome
from src.traces.trace import IoRequest, Trace

NEVER = math.inf


def next_uses(trace: Trace) -> List[Tuple[float, ...]]:
    """For request i, the index of the next access to each of its pages (inf if none)."""
    last: Dict[int, int] = {}
    out: List[Tuple[float, ...]] = [()] * len(trace)
    for i in range(len(trace) - 1, -1, -1):
        req = trace.requests[i]
        out[i] = tuple(last.get(p, NEVER) for p in req.pages())
        for p in req.pages():
            last[p] = i
    return out


class BeladyPolicy(CachePolicy):
    """
    Farthest-next-use replacement with full knowledge of the trace.
    A missed request's absent pages come in or stay out together: they are
    admitted only when every resident that must make room is next needed after
    the earliest reuse of any of them. Otherwise the request is bypassed.
    """
    name = "belady"

    def __init__(self, trace: Trace, capacity: int):
        super().__init__(capacity)
        self._next = next_uses(trace)
        self._resident: Dict[int, float] = {}
        self._heap: List[Tuple[float, int]] = []  # (-next_use, page), lazily invalidated

    def _set(self, page: int, nu: float) -> None:
        self._resident[page] = nu
        heapq.heappush(self._heap, (-nu, page))

    def _pop_farthest(self) -> Tuple[float, int]:
        while self._heap:
            neg, page = heapq.heappop(self._heap)
            if self._resident.get(page) == -neg:
                return -neg, page
        raise RuntimeError("no resident page")

    def on_access(self, req: IoRequest, index: int) -> Outcome:
        pages = list(req.pages())
        absent: List[Tuple[int, float]] = []
        for p, nu in zip(pages, self._next[index]):
            if p in self._resident:
                self._set(p, nu)
            else:
                absent.append((p, nu))
        if not absent:
            return HIT

        reuse = min(nu for _, nu in absent)
        if reuse == NEVER or len(pages) > self.capacity:
            return BYPASS

        need = len(self._resident) + len(absent) - self.capacity
        own = set(pages)
        victims: List[Tuple[float, int]] = []
        skipped: List[Tuple[float, int]] = []
        while len(victims) < need:
            entry = self._pop_farthest()
            (skipped if entry[1] in own else victims).append(entry)
        for nu, page in skipped:
            heapq.heappush(self._heap, (-nu, page))

        if any(nu <= reuse for nu, _ in victims):
            for nu, page in victims:
                heapq.heappush(self._heap, (-nu, page))
            return BYPASS

        for _, page in victims:
            del self._resident[page]
        for p, nu in absent:
            self._set(p, nu)
        return Outcome(Decision.MISS_ADMIT, tuple(page for _, page in victims))

    def resident_pages(self) -> List[int]:
        return list(self._resident)


def belady_replay(trace: Trace, cache_size_pages: int) -> Metrics:
    """Hit/miss/replacement counts of the farthest-next-use policy (optimal for single-page traces)."""
    policy = BeladyPolicy(trace, cache_size_pages)
    m = Metrics(policy=policy.name)
    for i, req in enumerate(trace.requests):
        m.record(req, policy.on_access(req, i))
    return m.finish()
