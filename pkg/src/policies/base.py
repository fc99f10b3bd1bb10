from __future__ import annotations
import abc
from collections import OrderedDict
from dataclasses import dataclass
from enum import Enum
from itertools import islice
from typing import Iterator, List, Sequence, Tuple

from src.traces.trace import IoRequest


class Decision(Enum):
    HIT = "hit"
    MISS_ADMIT = "miss_admit"
    MISS_BYPASS = "miss_bypass"


@dataclass(frozen=True)
class Outcome:
    decision: Decision
    evicted: Tuple[int, ...] = ()


HIT = Outcome(Decision.HIT)
BYPASS = Outcome(Decision.MISS_BYPASS)


class LruList:
    """Recency list of page ids. Head = most recently used, tail = eviction end.
    `version` counts mutations.
    """

    def __init__(self):
        self._od: "OrderedDict[int, None]" = OrderedDict()
        self.version = 0

    def __contains__(self, page: int) -> bool:
        return page in self._od

    def __len__(self) -> int:
        return len(self._od)

    def __iter__(self) -> Iterator[int]:
        """Head to tail."""
        return reversed(self._od)

    def push_head(self, page: int) -> None:
        self.version += 1
        self._od[page] = None
        self._od.move_to_end(page)

    def push_tail(self, page: int) -> None:
        self.version += 1
        self._od[page] = None
        self._od.move_to_end(page, last=False)

    def touch(self, page: int) -> None:
        self.version += 1
        self._od.move_to_end(page)

    def remove(self, page: int) -> None:
        self.version += 1
        del self._od[page]

    def pop_tail(self) -> int:
        self.version += 1
        return self._od.popitem(last=False)[0]

    def tail(self) -> int:
        return next(iter(self._od))

    def from_tail(self) -> Iterator[int]:
        return iter(self._od)

    def head_items(self, k: int) -> List[int]:
        return list(islice(reversed(self._od), k))


class CachePolicy(abc.ABC):
    """
    Page-granular SSD cache. A request hits only when every page it covers is
    resident; on a miss the absent pages are admitted or bypassed together.
    """
    name = "policy"

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be ≥ 1")
        self.capacity = capacity

    @abc.abstractmethod
    def on_access(self, req: IoRequest, index: int) -> Outcome:
        ...

    @abc.abstractmethod
    def resident_pages(self) -> List[int]:
        ...

    def __len__(self) -> int:
        return len(self.resident_pages())

    def _split(self, req: IoRequest, resident) -> Tuple[List[int], List[int]]:
        pages = list(req.pages())
        return pages, [p for p in pages if p not in resident]


def lru_admit(lst: LruList, absent: Sequence[int], capacity: int) -> Tuple[int, ...]:
    """Insert `absent` at the head, evicting from the tail to make room."""
    evicted = []
    while len(lst) + len(absent) > capacity:
        evicted.append(lst.pop_tail())
    for p in absent:
        lst.push_head(p)
    return tuple(evicted)
