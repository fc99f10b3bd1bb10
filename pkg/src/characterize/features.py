from __future__ import annotations
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from src.oracle.labels import DurationLabel
from src.traces.trace import IoRequest

CHARACTERIZER_DIM = 4
CACHE_DIM = 6

PrevDecision = Optional[Tuple[bool, Optional[DurationLabel]]]


def extract_characterizer_features(window: Sequence[IoRequest]) -> np.ndarray:
    """
    (len(window), 4) rows of [ln(1 + interarrival_us), page_id / max page_id in window,
    ln(size_pages), 1 for reads]. The first row has no predecessor, so its gap is 0.
    """
    if not window:
        raise ValueError("empty window")
    ts = np.array([r.timestamp_us for r in window], dtype=np.float64)
    pid = np.array([r.page_id for r in window], dtype=np.float64)
    size = np.array([r.size_pages for r in window], dtype=np.float64)
    op = np.array([1.0 if r.is_read else 0.0 for r in window])

    gaps = np.zeros_like(ts)
    gaps[1:] = np.diff(ts)
    peak = pid.max()
    return np.column_stack([
        np.log1p(gaps),
        pid / peak if peak > 0 else np.zeros_like(pid),
        np.log(size),
        op,
    ])


def label_feature(label: Optional[DurationLabel]) -> float:
    # Soon -> 0, Mean -> 0.5, Late -> 1
    return 0.0 if label is None else label.value / (len(DurationLabel) - 1)


def extract_cache_features(req: IoRequest, prev_decision: PrevDecision, max_page_id: int) -> np.ndarray:
    """
    Row of [page_id / max_page_id, ln(size_pages), read 0/1, cached 0/1, label, absent 0/1].
    `prev_decision` is (cached, label) of the preceding request; None or a bypass sets
    the absent flag and zeroes the label feature.
    """
    cached, label = prev_decision if prev_decision is not None else (False, None)
    if not cached:
        label = None
    peak = max(max_page_id, req.page_id)
    return np.array([
        req.page_id / peak if peak > 0 else 0.0,
        math.log(req.size_pages),
        1.0 if req.is_read else 0.0,
        1.0 if cached else 0.0,
        label_feature(label),
        0.0 if cached else 1.0,
    ])
