from __future__ import annotations
from typing import List, Optional

from src.policies.base import BYPASS, HIT, CachePolicy, Decision, LruList, Outcome, lru_admit
from src.traces.trace import IoRequest


class LarcPolicy(CachePolicy):
    """
    Lazy admission: a missed page is first remembered in a metadata-only ghost
    list and bypassed; a second miss while still in the ghost list promotes it
    into the main LRU cache.
    """
    name = "larc"

    def __init__(self, capacity: int, ghost_capacity: Optional[int] = None):
        super().__init__(capacity)
        self.ghost_capacity = capacity if ghost_capacity is None else ghost_capacity
        if self.ghost_capacity < 1:
            raise ValueError("ghost_capacity must be ≥ 1")
        self.main = LruList()
        self.ghost = LruList()

    def on_access(self, req: IoRequest, index: int = 0) -> Outcome:
        pages, absent = self._split(req, self.main)
        for p in pages:
            if p in self.main:
                self.main.touch(p)
        if not absent:
            return HIT

        if len(pages) > self.capacity or not all(p in self.ghost for p in absent):
            for p in absent:
                if p in self.ghost:
                    self.ghost.touch(p)
                else:
                    self.ghost.push_head(p)
                    if len(self.ghost) > self.ghost_capacity:
                        self.ghost.pop_tail()
            return BYPASS

        for p in absent:
            self.ghost.remove(p)
        return Outcome(Decision.MISS_ADMIT, lru_admit(self.main, absent, self.capacity))

    def resident_pages(self) -> List[int]:
        return list(self.main)
