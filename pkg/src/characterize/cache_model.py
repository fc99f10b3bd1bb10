"""
Caching-decision model: a stacked LSTM with an admit head (2 classes) and a
duration head (Soon / Mean / Late).

Training is teacher-forced: row t carries the oracle's cached/duration tags of
request t-1. At run time the same columns are filled from the cache manager's
own decisions (closed loop).
"""
from __future__ import annotations
import logging
import time
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.characterize.features import CACHE_DIM, PrevDecision, extract_cache_features
from src.nn.lstm import RnnModel, State, initial_state, init_model, step
from src.nn.optim import TrainConfig
from src.nn.train import FitResult, Sample, evaluate, fit
from src.oracle.labels import DurationLabel
from src.oracle.replay import LabeledRequest
from src.traces.trace import IoRequest, Trace

logger = logging.getLogger(__name__)

WINDOW = 100
HIDDEN = 256
LAYERS = 3
KIND = "cache-model"
HEADS = (2, len(DurationLabel))


def build_cache_model(seed: int = 0, hidden: int = HIDDEN, layers: int = LAYERS) -> RnnModel:
    return init_model(CACHE_DIM, hidden, HEADS, num_layers=layers, seed=seed, kind=KIND)


def teacher_forced_rows(labeled: Sequence[LabeledRequest]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Feature matrix (N, 6), admit targets (N,), duration targets (N,) with -1 on uncached rows."""
    X = np.empty((len(labeled), CACHE_DIM))
    admit = np.empty(len(labeled), dtype=np.int64)
    dur = np.full(len(labeled), -1, dtype=np.int64)
    prev: PrevDecision = None
    peak = 0
    for i, lr in enumerate(labeled):
        peak = max(peak, lr.request.page_id)
        X[i] = extract_cache_features(lr.request, prev, peak)
        admit[i] = int(lr.cached)
        if lr.cached:
            dur[i] = lr.duration_label.value
        prev = (lr.cached, lr.duration_label)
    return X, admit, dur


def cache_model_dataset(labeled: Sequence[LabeledRequest], window: int = WINDOW) -> List[Sample]:
    """Consecutive windows, supervised at every step; a short input yields one short window."""
    if not labeled:
        raise ValueError("empty labeled trace")
    X, admit, dur = teacher_forced_rows(labeled)
    n = len(labeled)
    if n < window:
        return [Sample(X, (admit, dur))]
    return [
        Sample(X[lo:lo + window], (admit[lo:lo + window], dur[lo:lo + window]))
        for lo in range(0, n - window + 1, window)
    ]


def train_cache_model(
    labeled: Sequence[LabeledRequest],
    config: TrainConfig,
    hidden: int = HIDDEN,
    layers: int = LAYERS,
    window: int = WINDOW,
    holdout: bool = True,
) -> FitResult:
    samples = cache_model_dataset(labeled, window)
    model = build_cache_model(config.seed, hidden, layers)
    result = fit(model, samples, config, holdout=holdout)
    logger.info("cache model: %d windows, train acc %s, held-out acc %s",
                len(samples), result.train_accuracy, result.held_accuracy)
    return result


class CacheInferenceStream:
    """
    Closed-loop decoder over a request stream. The recurrent state is carried
    across calls and cleared every `reset_every` requests (the training window
    length), and by `reset()` on reconfiguration.
    """

    def __init__(self, model: RnnModel, reset_every: Optional[int] = WINDOW):
        if model.input_dim != CACHE_DIM or [h.num_classes for h in model.heads] != list(HEADS):
            raise ValueError(f"dimension mismatch: not a cache-decision model ({model.kind})")
        self.model = model
        self.reset_every = reset_every
        self.max_page_id = 0
        self.prev: PrevDecision = None
        self.state: State = initial_state(model)
        self._steps = 0

    def reset(self, model: Optional[RnnModel] = None) -> None:
        if model is not None:
            self.model = model
        self.state = initial_state(self.model)
        self._steps = 0

    def decide(self, req: IoRequest) -> Tuple[bool, DurationLabel, np.ndarray]:
        """Admit flag and duration label for `req`, plus the feature row that produced them."""
        if self.reset_every and self._steps and self._steps % self.reset_every == 0:
            self.state = initial_state(self.model)
        self.max_page_id = max(self.max_page_id, req.page_id)
        row = extract_cache_features(req, self.prev, self.max_page_id)
        probs, self.state = step(self.model, row, self.state)
        self._steps += 1
        admit = bool(np.argmax(probs[0][0]) == 1)
        return admit, DurationLabel(int(np.argmax(probs[1][0]))), row

    def feedback(self, cached: bool, label: Optional[DurationLabel]) -> None:
        """Record what the manager actually did with the last request."""
        self.prev = (cached, label if cached else None)


def infer_cache_decision(stream: CacheInferenceStream, req: IoRequest) -> Tuple[bool, DurationLabel]:
    admit, label, _ = stream.decide(req)
    return admit, label


def duration_labels(model: RnnModel, rows: np.ndarray) -> List[DurationLabel]:
    """Duration-head labels for independent feature rows, each from a fresh state."""
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    probs, _ = step(model, rows, initial_state(model, len(rows)))
    return [DurationLabel(int(k)) for k in np.argmax(probs[1], axis=1)]


@dataclass
class CacheModelScore:
    teacher_forced: Tuple[float, float]   # (admit accuracy, duration accuracy on cached rows)
    closed_loop: Tuple[float, float]


def evaluate_cache_model(model: RnnModel, labeled: Sequence[LabeledRequest], window: int = WINDOW) -> CacheModelScore:
    _, tf = evaluate(model, cache_model_dataset(labeled, window))
    stream = CacheInferenceStream(model, reset_every=window)
    admit_ok = dur_ok = n_cached = 0
    for lr in labeled:
        admit, label, _ = stream.decide(lr.request)
        stream.feedback(admit, label)
        admit_ok += int(admit == lr.cached)
        if lr.cached:
            n_cached += 1
            dur_ok += int(label is lr.duration_label)
    cl = (admit_ok / len(labeled), dur_ok / n_cached if n_cached else float("nan"))
    score = CacheModelScore((tf[0], tf[1]), cl)
    if cl[0] > tf[0]:
        logger.warning("closed-loop admit accuracy %.4f exceeds teacher-forced %.4f", cl[0], tf[0])
    return score


def measure_inference_latency(model: RnnModel, trace: Trace, n: int = 10_000) -> float:
    """Mean wall-clock milliseconds per closed-loop decision over the first n requests."""
    reqs = trace.requests[:n]
    stream = CacheInferenceStream(model)
    t0 = time.perf_counter()
    for req in reqs:
        admit, label, _ = stream.decide(req)
        stream.feedback(admit, label)
    return (time.perf_counter() - t0) * 1e3 / len(reqs)
