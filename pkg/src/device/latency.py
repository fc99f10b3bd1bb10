from __future__ import annotations
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from src.traces.trace import IoRequest, Op


class Device(Enum):
    HDD = "hdd"
    SSD = "ssd"


@dataclass(frozen=True)
class DeviceModel:
    """Analytic service-time model; times in milliseconds, rates in MB/s (10^6 bytes)."""
    ssd_read_base_ms: float = 0.10
    ssd_write_base_ms: float = 0.25
    hdd_random_base_ms: float = 8.0
    hdd_seq_mb_per_s: float = 150.0
    ssd_mb_per_s: float = 500.0

    def __post_init__(self):
        for name in ("ssd_read_base_ms", "ssd_write_base_ms", "hdd_random_base_ms",
                     "hdd_seq_mb_per_s", "ssd_mb_per_s"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.hdd_random_base_ms <= self.ssd_read_base_ms:
            raise ValueError("hdd_random_base_ms must exceed ssd_read_base_ms")


def _transfer_ms(size_bytes: int, mb_per_s: float) -> float:
    return size_bytes / (mb_per_s * 1e6) * 1e3


def response_time(model: DeviceModel, req: IoRequest, device: Device, sequential: bool = False) -> float:
    if device is Device.SSD:
        base = model.ssd_read_base_ms if req.op is Op.READ else model.ssd_write_base_ms
        return base + _transfer_ms(req.size_bytes, model.ssd_mb_per_s)
    transfer = _transfer_ms(req.size_bytes, model.hdd_seq_mb_per_s)
    return transfer if sequential else model.hdd_random_base_ms + transfer


def is_sequential(prev: Optional[IoRequest], cur: IoRequest) -> bool:
    return prev is not None and cur.page_id == prev.page_id + prev.size_pages
