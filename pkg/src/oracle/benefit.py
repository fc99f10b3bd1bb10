from __future__ import annotations
from dataclasses import dataclass
from typing import Dict, List, Optional

from src.device.latency import Device, DeviceModel, is_sequential, response_time
from src.traces.trace import IoRequest, Trace


@dataclass(frozen=True)
class PageStats:
    n_acc: int
    n_reads: int
    mean_size_pages: float
    t_hdd_ms: float
    t_ssd_ms: float

    def __post_init__(self):
        if self.n_acc < 1 or not 0 <= self.n_reads <= self.n_acc:
            raise ValueError("need n_acc ≥ 1 and 0 ≤ n_reads ≤ n_acc")
        if self.mean_size_pages <= 0 or self.t_hdd_ms <= 0 or self.t_ssd_ms <= 0:
            raise ValueError("size and times must be positive")


def aggregate_page_stats(trace: Trace, model: DeviceModel) -> Dict[int, PageStats]:
    """Whole-trace counters per page; every page a request covers is credited with that request."""
    acc: Dict[int, List[float]] = {}  # page -> [n_acc, n_reads, size_sum, hdd_sum, ssd_sum]
    prev: Optional[IoRequest] = None
    for req in trace.requests:
        seq = is_sequential(prev, req)
        t_hdd = response_time(model, req, Device.HDD, seq)
        t_ssd = response_time(model, req, Device.SSD)
        for p in req.pages():
            a = acc.get(p)
            if a is None:
                a = acc[p] = [0, 0, 0.0, 0.0, 0.0]
            a[0] += 1
            a[1] += int(req.is_read)
            a[2] += req.size_pages
            a[3] += t_hdd
            a[4] += t_ssd
        prev = req
    return {
        p: PageStats(int(n), int(r), s / n, h / n, d / n)
        for p, (n, r, s, h, d) in acc.items()
    }


def benefit(stats: PageStats) -> float:
    """(T_hdd/T_ssd) * (N_acc - 1) * (1 / Req_size) * (1 + N_reads / N_acc)."""
    return (
        (stats.t_hdd_ms / stats.t_ssd_ms)
        * (stats.n_acc - 1)
        * (1.0 / stats.mean_size_pages)
        * (1.0 + stats.n_reads / stats.n_acc)
    )
