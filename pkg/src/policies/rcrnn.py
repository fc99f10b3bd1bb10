from __future__ import annotations
import heapq
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from src.oracle.labels import DurationLabel
from src.policies.base import BYPASS, HIT, CachePolicy, Decision, LruList, Outcome
from src.traces.trace import IoRequest

DEMOTE_AFTER = 5       # x capacity requests since (re)entry
EXEMPT_TOP = 0.2       # fraction of a queue, counted from the head

_LOWER = {DurationLabel.Late: DurationLabel.Mean, DurationLabel.Mean: DurationLabel.Soon}
# eviction search order
_ORDER = (DurationLabel.Soon, DurationLabel.Mean, DurationLabel.Late)


@dataclass
class CacheEntry:
    page_id: int
    queue: DurationLabel
    admitted_at: int
    last_touch: int
    n_acc: int = 1
    n_reads: int = 0
    seq: int = 0
    row: Optional[np.ndarray] = None   # feature row of the page's latest access


class RcRnnPolicy(CachePolicy):
    """
    Learned admission with one LRU queue per duration label.
    Victims come from the tail of Soon, then Mean, then Late. Pages that stay
    5 x capacity requests in Late/Mean drop one queue (to its tail) unless they
    sit in the top 20% of their queue.
    """
    name = "rcrnn"

    def __init__(self, capacity: int, one_shot_demotion: bool = False):
        super().__init__(capacity)
        self.one_shot_demotion = one_shot_demotion
        self.queues: Dict[DurationLabel, LruList] = {lbl: LruList() for lbl in DurationLabel}
        self.entries: Dict[int, CacheEntry] = {}
        self._due: List[Tuple[int, int, int]] = []   # (due index, seq, page)
        # exempt pages per queue: (queue version to re-check at, seq, page)
        self._parked: Dict[DurationLabel, List[Tuple[int, int, int]]] = {lbl: [] for lbl in _LOWER}
        self._seq = 0
        self.demotions = 0

    # ---------- bookkeeping ----------
    def _arm(self, entry: CacheEntry, due: Optional[int] = None) -> None:
        self._seq += 1
        entry.seq = self._seq
        if entry.queue is not DurationLabel.Soon:
            when = entry.admitted_at + DEMOTE_AFTER * self.capacity if due is None else due
            heapq.heappush(self._due, (when, entry.seq, entry.page_id))

    def resident_pages(self) -> List[int]:
        return list(self.entries)

    def queue_of(self, page: int) -> DurationLabel:
        return self.entries[page].queue

    # ---------- operations ----------
    def on_access(
        self,
        req: IoRequest,
        index: int,
        decision: Tuple[bool, DurationLabel] = (True, DurationLabel.Soon),
        row: Optional[np.ndarray] = None,
    ) -> Outcome:
        self.demote(index)
        pages, absent = self._split(req, self.entries)
        for p in pages:
            e = self.entries.get(p)
            if e is not None:
                self.queues[e.queue].touch(p)
                e.last_touch = index
                e.n_acc += 1
                e.n_reads += int(req.is_read)
                if row is not None:
                    e.row = row
        if not absent:
            return HIT

        admit, label = decision
        if not admit or len(pages) > self.capacity:
            return BYPASS

        protect = set(pages)
        evicted = []
        while len(self.entries) + len(absent) > self.capacity:
            evicted.append(self.evict(protect))
        for p in absent:
            e = CacheEntry(p, label, admitted_at=index, last_touch=index,
                           n_reads=int(req.is_read), row=row)
            self.entries[p] = e
            self.queues[label].push_head(p)
            self._arm(e)
        return Outcome(Decision.MISS_ADMIT, tuple(evicted))

    def evict(self, protect=frozenset()) -> int:
        """Remove and return the victim: tail of Soon, else Mean, else Late."""
        for lbl in _ORDER:
            for page in self.queues[lbl].from_tail():
                if page not in protect:
                    self.queues[lbl].remove(page)
                    del self.entries[page]
                    return page
        raise RuntimeError("eviction requested from an empty cache")

    def demote(self, current_index: int) -> None:
        due: List[CacheEntry] = []
        for lbl, parked in self._parked.items():
            while parked and parked[0][0] <= self.queues[lbl].version:
                _, seq, page = heapq.heappop(parked)
                e = self.entries.get(page)
                if e is not None and e.seq == seq and e.queue is lbl:
                    due.append(e)
        while self._due and self._due[0][0] <= current_index:
            _, seq, page = heapq.heappop(self._due)
            e = self.entries.get(page)
            if e is not None and e.seq == seq and e.queue is not DurationLabel.Soon:
                due.append(e)
        if not due:
            return

        exempt: Dict[DurationLabel, Dict[int, int]] = {}
        version: Dict[DurationLabel, int] = {}
        for lbl in _LOWER:
            q = self.queues[lbl]
            top = q.head_items(math.ceil(EXEMPT_TOP * len(q)))
            exempt[lbl] = {page: len(top) - rank for rank, page in enumerate(top)}
            version[lbl] = q.version
        for e in due:
            margin = exempt[e.queue].get(e.page_id)
            if margin is not None:
                # cannot leave the exempt top before `margin` more changes to its queue
                heapq.heappush(self._parked[e.queue], (version[e.queue] + margin, e.seq, e.page_id))
                continue
            dest = _LOWER[e.queue]
            self.queues[e.queue].remove(e.page_id)
            self.queues[dest].push_tail(e.page_id)
            e.queue = dest
            e.admitted_at = current_index
            self.demotions += 1
            if self.one_shot_demotion:
                self._seq += 1
                e.seq = self._seq
            else:
                self._arm(e)

    def relabel(self, labels: Mapping[int, DurationLabel]) -> None:
        """Move residents to new queues, keeping relative recency inside each queue."""
        if not self.entries:
            return
        for lbl in DurationLabel:
            self.queues[lbl] = LruList()
        order = sorted(self.entries.values(), key=lambda e: (e.last_touch, e.seq))
        self._due = []
        self._parked = {lbl: [] for lbl in _LOWER}
        for e in order:
            e.queue = labels.get(e.page_id, e.queue)
            self.queues[e.queue].push_head(e.page_id)
            self._arm(e)
