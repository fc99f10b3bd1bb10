from __future__ import annotations
import heapq
from collections import defaultdict
from typing import Dict, List, Tuple

from src.policies.base import BYPASS, HIT, CachePolicy, Decision, Outcome
from src.traces.trace import IoRequest


class AccessFrequencyPolicy(CachePolicy):
    """
    Frequency-priority cache. Lifetime access counts are kept for every page seen;
    a miss on a full cache displaces the coldest residents (lowest count, then least
    recent) only if the incoming page's count is strictly higher than theirs.
    """
    name = "access"

    def __init__(self, capacity: int):
        super().__init__(capacity)
        self.counts: Dict[int, int] = defaultdict(int)
        self._stamp: Dict[int, int] = {}          # resident page -> last access tick
        self._heap: List[Tuple[int, int, int]] = []  # (count, tick, page), lazily invalidated
        self._tick = 0

    def _note(self, page: int) -> None:
        self._tick += 1
        self._stamp[page] = self._tick
        heapq.heappush(self._heap, (self.counts[page], self._tick, page))

    def _pop_coldest(self) -> Tuple[int, int, int]:
        while self._heap:
            entry = heapq.heappop(self._heap)
            if self._stamp.get(entry[2]) == entry[1]:
                return entry
        raise RuntimeError("no resident page to evict")

    def on_access(self, req: IoRequest, index: int = 0) -> Outcome:
        pages, absent = self._split(req, self._stamp)
        for p in pages:
            self.counts[p] += 1
            if p in self._stamp:
                self._note(p)
        if not absent:
            return HIT
        if len(pages) > self.capacity:
            return BYPASS

        need = len(self._stamp) + len(absent) - self.capacity
        own = set(pages)
        victims: List[Tuple[int, int, int]] = []
        skipped: List[Tuple[int, int, int]] = []
        while len(victims) < need:
            entry = self._pop_coldest()
            (skipped if entry[2] in own else victims).append(entry)
        for entry in skipped:
            heapq.heappush(self._heap, entry)

        incoming = self.counts[req.page_id]
        if any(count >= incoming for count, _, _ in victims):
            for entry in victims:
                heapq.heappush(self._heap, entry)
            return BYPASS

        for _, _, page in victims:
            del self._stamp[page]
        for p in absent:
            self._note(p)
        return Outcome(Decision.MISS_ADMIT, tuple(page for _, _, page in victims))

    def resident_pages(self) -> List[int]:
        return list(self._stamp)
