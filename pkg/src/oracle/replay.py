from __future__ import annotations
import heapq
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from src.oracle.benefit import PageStats, benefit
from src.oracle.labels import DurationLabel, label_duration
from src.policies.base import BYPASS, HIT, CachePolicy, Decision, Outcome
from src.traces.trace import HEADER, IoRequest, Op, Trace, TraceFormatError

logger = logging.getLogger(__name__)

LABELED_HEADER = HEADER + ",cached,duration_label"


@dataclass(frozen=True)
class LabeledRequest:
    request: IoRequest
    cached: bool
    duration_label: Optional[DurationLabel] = None

    def __post_init__(self):
        if self.cached != (self.duration_label is not None):
            raise ValueError("duration_label must be present exactly when cached")


class OracleBenefitPolicy(CachePolicy):
    """
    Omniscient benefit-driven cache: a miss is admitted into free space when its
    benefit is positive, and into a full cache only by displacing residents of
    strictly lower benefit (ties: least recently admitted goes first).
    """
    name = "oracle-benefit"

    def __init__(self, capacity: int, stats: Mapping[int, PageStats]):
        super().__init__(capacity)
        self._benefit: Dict[int, float] = {p: benefit(s) for p, s in stats.items()}
        self._seq: Dict[int, int] = {}                  # resident page -> admission seq
        self._heap: List[Tuple[float, int, int]] = []   # (benefit, seq, page)
        self._next = 0

    def benefit_of(self, page: int) -> float:
        try:
            return self._benefit[page]
        except KeyError:
            raise ValueError(f"page stats missing page {page}") from None

    def _pop_min(self) -> Tuple[float, int, int]:
        while self._heap:
            entry = heapq.heappop(self._heap)
            if self._seq.get(entry[2]) == entry[1]:
                return entry
        raise RuntimeError("no resident page to evict")

    def on_access(self, req: IoRequest, index: int = 0) -> Outcome:
        pages, absent = self._split(req, self._seq)
        for p in pages:
            self.benefit_of(p)
        if not absent:
            return HIT
        incoming = self.benefit_of(req.page_id)
        if incoming <= 0 or len(pages) > self.capacity:
            return BYPASS

        need = len(self._seq) + len(absent) - self.capacity
        own = set(pages)
        victims: List[Tuple[float, int, int]] = []
        skipped: List[Tuple[float, int, int]] = []
        while len(victims) < need:
            entry = self._pop_min()
            (skipped if entry[2] in own else victims).append(entry)
        for entry in skipped:
            heapq.heappush(self._heap, entry)
        if any(b >= incoming for b, _, _ in victims):
            for entry in victims:
                heapq.heappush(self._heap, entry)
            return BYPASS

        for _, _, page in victims:
            del self._seq[page]
        for p in absent:
            self._next += 1
            self._seq[p] = self._next
            heapq.heappush(self._heap, (self._benefit[p], self._next, p))
        return Outcome(Decision.MISS_ADMIT, tuple(page for _, _, page in victims))

    def resident_pages(self) -> List[int]:
        return list(self._seq)


def oracle_replay(trace: Trace, cache_size_pages: int, stats: Mapping[int, PageStats]) -> List[LabeledRequest]:
    """
    Replay the benefit oracle and tag every access with `cached` and, for cached
    accesses, the duration label of the residency episode of the request's first page.
    Duration = requests processed between admission and eviction (or trace end).
    """
    policy = OracleBenefitPolicy(cache_size_pages, stats)
    episodes: List[List[int]] = []        # [start, end]
    open_episode: Dict[int, int] = {}     # resident page -> episode id
    tagged: List[Tuple[IoRequest, Optional[int]]] = []

    for i, req in enumerate(trace.requests):
        absent = [p for p in req.pages() if p not in open_episode]
        out = policy.on_access(req, i)
        for v in out.evicted:
            episodes[open_episode.pop(v)][1] = i
        if out.decision is Decision.MISS_ADMIT:
            for p in absent:
                open_episode[p] = len(episodes)
                episodes.append([i, -1])
        cached = out.decision is not Decision.MISS_BYPASS
        tagged.append((req, open_episode[req.page_id] if cached else None))

    n = len(trace.requests)
    for ep in open_episode.values():
        episodes[ep][1] = n
    labels = [label_duration(end - start, cache_size_pages) for start, end in episodes]

    out_rows = [
        LabeledRequest(req, ep is not None, labels[ep] if ep is not None else None)
        for req, ep in tagged
    ]
    logger.info("oracle replay: %d requests, %d cached, %d episodes",
                n, sum(r.cached for r in out_rows), len(episodes))
    return out_rows


def majority_baseline(labeled: Sequence[LabeledRequest]) -> Tuple[float, float]:
    """
    Accuracy of a static tagger that always answers the most frequent `cached`
    value, and the most frequent duration label over cached accesses.
    """
    if not labeled:
        raise ValueError("empty labeled trace")
    n_cached = sum(r.cached for r in labeled)
    cached_acc = max(n_cached, len(labeled) - n_cached) / len(labeled)
    counts = [0] * len(DurationLabel)
    for r in labeled:
        if r.cached:
            counts[r.duration_label.value] += 1
    dur_acc = max(counts) / n_cached if n_cached else 1.0
    return cached_acc, dur_acc


def write_labeled(labeled: Sequence[LabeledRequest], path: Path | str, trace: Optional[Trace] = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as f:
        if trace is not None and trace.category is not None:
            f.write(f"# category={trace.category.name}\n")
        f.write(LABELED_HEADER + "\n")
        for r in labeled:
            q = r.request
            lbl = r.duration_label.code if r.duration_label is not None else "-"
            f.write(f"{q.timestamp_us},{q.page_id},{q.size_pages},{q.op.value},{int(r.cached)},{lbl}\n")


def parse_labeled(path: Path | str) -> List[LabeledRequest]:
    out: List[LabeledRequest] = []
    seen_header = False
    with open(path, "r", encoding="utf-8") as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if not seen_header:
                if line != LABELED_HEADER:
                    raise TraceFormatError(f"expected header {LABELED_HEADER!r}", line_no)
                seen_header = True
                continue
            parts = line.split(",")
            if len(parts) != 6:
                raise TraceFormatError(f"expected 6 fields, got {len(parts)}", line_no)
            try:
                req = IoRequest(int(parts[0]), int(parts[1]), int(parts[2]), Op(parts[3]))
                cached = parts[4] == "1"
                lbl = None if parts[5] == "-" else DurationLabel.from_code(parts[5])
                out.append(LabeledRequest(req, cached, lbl))
            except (ValueError, KeyError) as e:
                raise TraceFormatError(f"bad labeled row {line!r} ({e})", line_no) from None
    if not out:
        raise TraceFormatError("empty trace")
    return out
