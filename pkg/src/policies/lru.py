from __future__ import annotations
from typing import List

from src.policies.base import BYPASS, HIT, CachePolicy, Decision, LruList, Outcome, lru_admit
from src.traces.trace import IoRequest


class LruPolicy(CachePolicy):
    """Admit every miss; evict the least recently used page."""
    name = "lru"

    def __init__(self, capacity: int):
        super().__init__(capacity)
        self.queue = LruList()

    def on_access(self, req: IoRequest, index: int = 0) -> Outcome:
        pages, absent = self._split(req, self.queue)
        for p in pages:
            if p in self.queue:
                self.queue.touch(p)
        if not absent:
            return HIT
        if len(pages) > self.capacity:
            return BYPASS
        return Outcome(Decision.MISS_ADMIT, lru_admit(self.queue, absent, self.capacity))

    def resident_pages(self) -> List[int]:
        return list(self.queue)
