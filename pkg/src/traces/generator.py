from __future__ import annotations
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.traces.trace import (
    PAGE_SIZE, IoRequest, Op, Segment, Trace, WorkloadCategory,
)

KB_PER_PAGE = PAGE_SIZE / 1024


@dataclass(frozen=True)
class TraceStats:
    name: str
    requests: int
    rw_ratio: Optional[float]  # reads per write; None = all reads
    mean_size_kb: float

    @property
    def read_fraction(self) -> float:
        if self.rw_ratio is None:
            return 1.0
        return self.rw_ratio / (self.rw_ratio + 1.0)


# General characteristics of the reference traces (request count, R/W ratio, mean size)
TRACE_STATS: Dict[str, TraceStats] = {s.name: s for s in (
    TraceStats("radius_authentication", 80_000, 0.07, 12.44),
    TraceStats("radius_backed_SQL", 60_000, 0.21, 9.37),
    TraceStats("mail_index", 60_000, 2.56, 42.0),
    TraceStats("home_ikki", 60_000, 0.84, 4.0),
    TraceStats("home_madmax", 60_000, 0.25, 4.0),
    TraceStats("home_topgun", 60_000, 0.11, 4.0),
    TraceStats("enterprise_tpc_1", 90_000, 2.05, 8.24),
    TraceStats("MS_enterprise_ex", 70_000, 0.16, 21.6),
    TraceStats("Cambridge1", 65_000, 1.3, 9.46),
    TraceStats("MS_build_server", 60_000, 7.5, 4.0),
    TraceStats("MS_live_maps", 70_000, None, 4.0),
    TraceStats("web_proxy", 60_000, 4.5, 4.0),
    TraceStats("web_server", 60_000, 12.7, 4.0),
)}

ALIASES = {"Radius_Auth": "radius_authentication"}

# category -> (reference trace row, sequential-run probability)
CATEGORY_ANCHORS: Dict[WorkloadCategory, Tuple[str, float]] = {
    WorkloadCategory.MailServer: ("mail_index", 0.3),
    WorkloadCategory.WebServer: ("web_server", 0.1),
    WorkloadCategory.Database: ("enterprise_tpc_1", 0.2),
    WorkloadCategory.FileServer: ("home_ikki", 0.4),
}

TRACE_CATEGORY: Dict[str, WorkloadCategory] = {
    "mail_index": WorkloadCategory.MailServer,
    "web_server": WorkloadCategory.WebServer,
    "radius_authentication": WorkloadCategory.WebServer,
    "enterprise_tpc_1": WorkloadCategory.Database,
    "home_ikki": WorkloadCategory.FileServer,
}

# Storage server scenarios: which reference workloads run side by side
SCENARIOS: Dict[str, Tuple[str, ...]] = {
    "single": ("Radius_Auth", "mail_index"),
    "virt": ("home_ikki", "Radius_Auth", "mail_index"),
    "storage": ("enterprise_tpc_1", "home_ikki", "Radius_Auth", "mail_index"),
}

DEFAULT_HOT_SET_PAGES = 4096
DEFAULT_INTERARRIVAL_US = 1000.0
REGION_PAGES = 1 << 20  # address stride between interleaved streams


@dataclass(frozen=True)
class GeneratorProfile:
    read_ratio: float
    mean_size_kb: float
    zipf_s: float = 1.0
    hot_set_pages: int = DEFAULT_HOT_SET_PAGES
    seq_run_prob: float = 0.2
    mean_interarrival_us: float = DEFAULT_INTERARRIVAL_US
    seed: int = 0
    name: str = "custom"
    category: Optional[WorkloadCategory] = None
    base_page: int = 0

    def __post_init__(self):
        if not 0.0 <= self.read_ratio <= 1.0:
            raise ValueError("read_ratio must be in [0, 1]")
        if not 0.0 <= self.seq_run_prob <= 1.0:
            raise ValueError("seq_run_prob must be in [0, 1]")
        if self.zipf_s <= 0 or self.mean_interarrival_us <= 0:
            raise ValueError("zipf_s and mean_interarrival_us must be positive")
        if self.mean_size_kb < KB_PER_PAGE:
            raise ValueError(f"mean_size_kb must be ≥ {KB_PER_PAGE:g} (one page)")
        if self.hot_set_pages < 1:
            raise ValueError("hot_set_pages must be ≥ 1")
        if self.base_page < 0:
            raise ValueError("base_page must be ≥ 0")


def category_profile(category: WorkloadCategory, seed: int = 0, **overrides) -> GeneratorProfile:
    """Built-in profile for one of the four workload categories."""
    row, seq = CATEGORY_ANCHORS[category]
    st = TRACE_STATS[row]
    prof = GeneratorProfile(
        read_ratio=st.read_fraction, mean_size_kb=st.mean_size_kb,
        seq_run_prob=seq, seed=seed, name=category.name, category=category,
    )
    return replace(prof, **overrides) if overrides else prof


def profile_for_trace(name: str, seed: int = 0, **overrides) -> GeneratorProfile:
    """Profile matching a reference trace row; locality follows its category when known."""
    key = ALIASES.get(name, name)
    if key not in TRACE_STATS:
        raise ValueError(f"unknown reference trace {name!r}")
    st = TRACE_STATS[key]
    cat = TRACE_CATEGORY.get(key)
    seq = CATEGORY_ANCHORS[cat][1] if cat is not None else 0.2
    prof = GeneratorProfile(
        read_ratio=st.read_fraction, mean_size_kb=st.mean_size_kb,
        seq_run_prob=seq, seed=seed, name=key, category=cat,
    )
    return replace(prof, **overrides) if overrides else prof


def _zipf_cdf(n: int, s: float) -> np.ndarray:
    w = 1.0 / np.power(np.arange(1, n + 1, dtype=np.float64), s)
    cdf = np.cumsum(w)
    return cdf / cdf[-1]


def generate_synthetic(profile: GeneratorProfile, n: int) -> Trace:
    """
    Synthetic block trace.
    Page popularity is a truncated Zipf over the hot set (rank r -> page base_page + r);
    with probability seq_run_prob a request instead continues where the previous one ended.
    Sizes are geometric in pages with the profile's mean; arrivals are exponential.
    """
    if n < 1:
        raise ValueError("n must be ≥ 1")
    rng = np.random.default_rng(profile.seed)

    mean_pages = profile.mean_size_kb / KB_PER_PAGE
    sizes = rng.geometric(1.0 / mean_pages, size=n)
    reads = rng.random(n) < profile.read_ratio
    gaps = rng.exponential(profile.mean_interarrival_us, size=n)
    seq = rng.random(n) < profile.seq_run_prob
    ranks = np.searchsorted(_zipf_cdf(profile.hot_set_pages, profile.zipf_s), rng.random(n), side="right")
    ranks = np.minimum(ranks, profile.hot_set_pages - 1)

    gaps[0] = 0.0
    stamps = np.floor(np.cumsum(gaps)).astype(np.int64)

    out: List[IoRequest] = []
    prev: Optional[IoRequest] = None
    for i in range(n):
        if prev is not None and seq[i]:
            pid = prev.end_page
        else:
            pid = profile.base_page + int(ranks[i])
        req = IoRequest(int(stamps[i]), pid, int(sizes[i]), Op.READ if reads[i] else Op.WRITE)
        out.append(req)
        prev = req
    return Trace(out, category=profile.category)


def _gaps(trace: Trace) -> List[int]:
    r = trace.requests
    return [0] + [r[i].timestamp_us - r[i - 1].timestamp_us for i in range(1, len(r))]


def _merge(pieces: Sequence[Tuple[Trace, int, int]]) -> Trace:
    """Stitch (trace, start, stop) slices, re-timestamping from each stream's own gaps."""
    out: List[IoRequest] = []
    segments: List[Segment] = []
    clock = 0
    for trace, lo, hi in pieces:
        gaps = _gaps(trace)
        cat = trace.category
        if cat is not None and (not segments or segments[-1].category is not cat):
            segments.append(Segment(len(out), cat))
        for i in range(lo, hi):
            clock += gaps[i] if out else 0
            out.append(replace(trace.requests[i], timestamp_us=clock))
    cats = {s.category for s in segments}
    single = next(iter(cats)) if len(cats) == 1 else None
    return Trace(out, category=single, segments=tuple(segments) if len(cats) > 1 else ())


def interleave(traces: Sequence[Trace], chunk: int = 1000) -> Trace:
    """Round-robin merge of streams in `chunk`-request blocks."""
    if chunk < 1:
        raise ValueError("chunk must be ≥ 1")
    pos = [0] * len(traces)
    pieces: List[Tuple[Trace, int, int]] = []
    while any(p < len(t) for p, t in zip(pos, traces)):
        for k, t in enumerate(traces):
            if pos[k] < len(t):
                hi = min(len(t), pos[k] + chunk)
                pieces.append((t, pos[k], hi))
                pos[k] = hi
    return _merge(pieces)


def concatenate(traces: Sequence[Trace]) -> Trace:
    return _merge([(t, 0, len(t)) for t in traces])


def generate_scenario(name: str, n_per_stream: int, seed: int = 0, chunk: int = 1000) -> Trace:
    """Interleave the reference workloads of a server scenario, each in its own address region."""
    if name not in SCENARIOS:
        raise ValueError(f"unknown scenario {name!r}; expected one of {sorted(SCENARIOS)}")
    streams = []
    for k, wl in enumerate(SCENARIOS[name]):
        prof = profile_for_trace(wl, seed=seed + k, base_page=k * REGION_PAGES)
        streams.append(generate_synthetic(prof, n_per_stream))
    return interleave(streams, chunk=chunk)
