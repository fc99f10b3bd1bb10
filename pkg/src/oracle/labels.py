from __future__ import annotations
from enum import Enum


class DurationLabel(Enum):
    """How long the oracle kept a page, in units of cache size."""
    Soon = 0
    Mean = 1
    Late = 2

    @property
    def code(self) -> str:
        return self.name.lower()

    @classmethod
    def from_code(cls, code: str) -> "DurationLabel":
        return cls[code.strip().capitalize()]


def label_duration(duration: int, cache_size_pages: int) -> DurationLabel:
    """Soon: d <= C ; Mean: C < d <= 5C ; Late: d > 5C."""
    if duration < 0:
        raise ValueError("duration must be ≥ 0")
    if duration <= cache_size_pages:
        return DurationLabel.Soon
    if duration <= 5 * cache_size_pages:
        return DurationLabel.Mean
    return DurationLabel.Late
