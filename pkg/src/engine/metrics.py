from __future__ import annotations
from dataclasses import dataclass, field
from typing import Dict, List

from src.policies.base import Decision, Outcome
from src.traces.trace import IoRequest


@dataclass
class Metrics:
    policy: str = ""
    window: int = 1000
    requests: int = 0
    hits: int = 0
    misses: int = 0
    admissions: int = 0
    bypasses: int = 0
    replacements: int = 0
    ssd_writes: int = 0
    write_hits: int = 0
    latency_ms_total: float = 0.0
    window_hit_ratios: List[float] = field(default_factory=list)
    _win_hits: int = field(default=0, repr=False)
    _win_n: int = field(default=0, repr=False)

    def record(self, req: IoRequest, outcome: Outcome, latency_ms: float = 0.0) -> None:
        self.requests += 1
        self.latency_ms_total += latency_ms
        hit = outcome.decision is Decision.HIT
        if hit:
            self.hits += 1
            if not req.is_read:
                self.write_hits += 1
                self.ssd_writes += 1
        else:
            self.misses += 1
            if outcome.decision is Decision.MISS_ADMIT:
                self.admissions += 1
                self.ssd_writes += 1
                if outcome.evicted:
                    self.replacements += 1
            else:
                self.bypasses += 1
        self._win_hits += int(hit)
        self._win_n += 1
        if self._win_n == self.window:
            self._flush()

    def _flush(self) -> None:
        if self._win_n:
            self.window_hit_ratios.append(self._win_hits / self._win_n)
        self._win_hits = self._win_n = 0

    def finish(self) -> "Metrics":
        """Close a trailing partial window."""
        self._flush()
        return self

    @property
    def hit_ratio(self) -> float:
        return self.hits / self.requests if self.requests else 0.0

    @property
    def mean_latency_ms(self) -> float:
        return self.latency_ms_total / self.requests if self.requests else 0.0

    def per_100(self, count: int) -> float:
        return count * 100.0 / self.requests if self.requests else 0.0

    def conservation_violations(self) -> List[str]:
        out = []
        if self.hits + self.misses != self.requests:
            out.append("hits + misses != requests")
        if self.admissions + self.bypasses != self.misses:
            out.append("admissions + bypasses != misses")
        if self.replacements > self.admissions:
            out.append("replacements > admissions")
        if self.ssd_writes != self.admissions + self.write_hits:
            out.append("ssd_writes != admissions + write_hits")
        return out

    def as_row(self) -> Dict[str, float]:
        return {
            "policy": self.policy,
            "requests": self.requests,
            "hits": self.hits,
            "misses": self.misses,
            "admissions": self.admissions,
            "bypasses": self.bypasses,
            "replacements": self.replacements,
            "ssd_writes": self.ssd_writes,
            "write_hits": self.write_hits,
            "hit_ratio": self.hit_ratio,
            "replacements_per_100": self.per_100(self.replacements),
            "ssd_writes_per_100": self.per_100(self.ssd_writes),
            "latency_ms_total": self.latency_ms_total,
            "mean_latency_ms": self.mean_latency_ms,
        }
