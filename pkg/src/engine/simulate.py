from __future__ import annotations
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Optional

from src.characterize.cache_model import CacheInferenceStream
from src.device.latency import Device, DeviceModel, is_sequential, response_time
from src.engine.metrics import Metrics
from src.engine.monitor import MONITOR_EVERY, MonitorState, monitor_and_reconfigure, reevaluate_residents
from src.nn.lstm import RnnModel
from src.oracle.belady import BeladyPolicy
from src.oracle.benefit import aggregate_page_stats
from src.oracle.replay import OracleBenefitPolicy
from src.policies.access import AccessFrequencyPolicy
from src.policies.base import CachePolicy, Decision, Outcome
from src.policies.larc import LarcPolicy
from src.policies.lru import LruPolicy
from src.policies.rcrnn import RcRnnPolicy
from src.traces.trace import IoRequest, Op, Trace, WorkloadCategory

logger = logging.getLogger(__name__)

POLICIES = ("lru", "larc", "access", "belady", "oracle-benefit", "rcrnn")


class SimulationError(ValueError):
    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field


@dataclass
class ModelRegistry:
    """Models for the learned policy: a fixed cache model and/or one per workload category."""
    characterizer: Optional[RnnModel] = None
    cache: Optional[RnnModel] = None
    per_category: Dict[WorkloadCategory, RnnModel] = field(default_factory=dict)

    @property
    def adaptive(self) -> bool:
        return self.characterizer is not None and bool(self.per_category)

    def initial(self) -> tuple[Optional[WorkloadCategory], RnnModel]:
        if self.cache is not None:
            return None, self.cache
        if self.per_category:
            cat = min(self.per_category, key=lambda c: c.value)
            return cat, self.per_category[cat]
        raise SimulationError("policy rcrnn needs a cache model (models.cache)", "models.cache")


def make_policy(name: str, trace: Trace, capacity: int, device: DeviceModel = DeviceModel(),
                one_shot_demotion: bool = False) -> CachePolicy:
    if capacity < 1:
        raise SimulationError("capacity must be ≥ 1", "capacity_pages")
    if name == "lru":
        return LruPolicy(capacity)
    if name == "larc":
        return LarcPolicy(capacity)
    if name == "access":
        return AccessFrequencyPolicy(capacity)
    if name == "belady":
        return BeladyPolicy(trace, capacity)
    if name == "oracle-benefit":
        return OracleBenefitPolicy(capacity, aggregate_page_stats(trace, device))
    if name == "rcrnn":
        return RcRnnPolicy(capacity, one_shot_demotion=one_shot_demotion)
    raise SimulationError(f"unknown policy {name!r}; expected one of {', '.join(POLICIES)}", "policies")


def request_latency(device: DeviceModel, req: IoRequest, outcome: Outcome, prev: Optional[IoRequest]) -> float:
    """Hit: SSD; bypass: HDD; admission: HDD plus the SSD write of the copy."""
    if outcome.decision is Decision.HIT:
        return response_time(device, req, Device.SSD)
    t = response_time(device, req, Device.HDD, is_sequential(prev, req))
    if outcome.decision is Decision.MISS_ADMIT:
        t += response_time(device, replace(req, op=Op.WRITE), Device.SSD)
    return t


def simulate(
    trace: Trace,
    policy: str,
    capacity: int,
    device: DeviceModel = DeviceModel(),
    models: Optional[ModelRegistry] = None,
    seed: int = 0,
    monitor_every: int = MONITOR_EVERY,
    inference_overhead_ms: float = 0.0,
    one_shot_demotion: bool = False,
    window: int = 1000,
) -> Metrics:
    """
    Drive one policy over the trace and tally counters and modeled latency.
    Every policy is deterministic, so `seed` only labels the run.
    """
    cache = make_policy(policy, trace, capacity, device, one_shot_demotion)
    metrics = Metrics(policy=policy, window=window)
    prev: Optional[IoRequest] = None

    if not isinstance(cache, RcRnnPolicy):
        for i, req in enumerate(trace.requests):
            out = cache.on_access(req, i)
            metrics.record(req, out, request_latency(device, req, out, prev))
            prev = req
        return metrics.finish()

    models = models or ModelRegistry()
    category, model = models.initial()
    stream = CacheInferenceStream(model)
    monitor = MonitorState(models.per_category, category, every=monitor_every) if models.adaptive else None

    for i, req in enumerate(trace.requests):
        admit, label, row = stream.decide(req)
        out = cache.on_access(req, i, (admit, label), row)
        if out.decision is Decision.HIT:
            stream.feedback(True, cache.queue_of(req.page_id))
        else:
            stream.feedback(out.decision is Decision.MISS_ADMIT, label)
        lat = request_latency(device, req, out, prev) + inference_overhead_ms
        metrics.record(req, out, lat)
        prev = req

        if monitor is not None:
            event = monitor_and_reconfigure(monitor, models.characterizer, req)
            if event is not None:
                new_model = models.per_category[event.new]
                stream.reset(new_model)
                before = len(cache)
                reevaluate_residents(cache, new_model)
                if len(cache) != before:
                    raise RuntimeError("reconfiguration changed the resident set")

    logger.info("%s: hit ratio %.4f over %d requests (%d demotions%s)",
                policy, metrics.hit_ratio, metrics.requests, cache.demotions,
                f", {len(monitor.events)} switches" if monitor else "")
    return metrics.finish()
