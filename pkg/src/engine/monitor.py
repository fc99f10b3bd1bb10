from __future__ import annotations
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from src.characterize.cache_model import duration_labels
from src.characterize.characterizer import WINDOW, classify_workload
from src.nn.lstm import RnnModel
from src.policies.rcrnn import RcRnnPolicy
from src.traces.trace import IoRequest, WorkloadCategory, split_windows

logger = logging.getLogger(__name__)

MONITOR_EVERY = 1000


@dataclass
class SwitchEvent:
    index: int
    old: Optional[WorkloadCategory]
    new: WorkloadCategory
    votes: Dict[WorkloadCategory, int]


@dataclass
class MonitorState:
    registry: Dict[WorkloadCategory, RnnModel]
    current: Optional[WorkloadCategory] = None
    every: int = MONITOR_EVERY
    window: int = WINDOW
    buffer: List[IoRequest] = field(default_factory=list)
    seen: int = 0
    rounds: int = 0
    events: List[SwitchEvent] = field(default_factory=list)

    def __post_init__(self):
        if self.every < self.window or self.every % self.window:
            raise ValueError("monitor period must be a positive multiple of the window length")


def vote(categories: List[WorkloadCategory]) -> Optional[WorkloadCategory]:
    """Plurality winner, or None when the top count is shared."""
    ranked = Counter(categories).most_common()
    if not ranked or (len(ranked) > 1 and ranked[0][1] == ranked[1][1]):
        return None
    return ranked[0][0]


def monitor_and_reconfigure(monitor: MonitorState, characterizer: RnnModel, req: IoRequest) -> Optional[SwitchEvent]:
    """Buffer `req`; every `monitor.every` requests classify the buffered windows and vote."""
    monitor.buffer.append(req)
    monitor.seen += 1
    if len(monitor.buffer) < monitor.every:
        return None
    votes = [classify_workload(characterizer, w)[0] for w in split_windows(monitor.buffer, monitor.window)]
    monitor.buffer.clear()
    monitor.rounds += 1
    winner = vote(votes)
    if winner is None or winner is monitor.current:
        return None
    if winner not in monitor.registry:
        logger.debug("no cache model for %s; keeping %s", winner.name, monitor.current)
        return None
    event = SwitchEvent(monitor.seen - 1, monitor.current, winner, dict(Counter(votes)))
    monitor.current = winner
    monitor.events.append(event)
    logger.info("request %d: workload switch %s -> %s",
                event.index, event.old.name if event.old else "-", winner.name)
    return event


def reevaluate_residents(policy: RcRnnPolicy, model: RnnModel) -> None:
    """Relabel every resident from its latest feature row through the new duration head."""
    pages = [p for p, e in policy.entries.items() if e.row is not None]
    if not pages:
        return
    rows = np.stack([policy.entries[p].row for p in pages])
    policy.relabel(dict(zip(pages, duration_labels(model, rows))))
