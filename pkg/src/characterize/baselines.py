from __future__ import annotations
import logging
import math
from collections import Counter
from enum import Enum
from typing import Dict, List, Sequence, Tuple

import numpy as np

from src.characterize.characterizer import HIDDEN, LAYERS, WINDOW, labeled_windows, train_characterizer
from src.nn.lstm import log_softmax, softmax
from src.nn.optim import TrainConfig, clip_gradients, rmsprop_step
from src.traces.trace import IoRequest, Trace, WorkloadCategory

logger = logging.getLogger(__name__)

SEQ_SIZE_PAGES = 16     # 64 KB
STRIDE_PAGES = 8
HISTORY = 16
SIZE_BINS = 8


class TwsdType(Enum):
    Strided = 0
    Sequential = 1
    Random = 2
    Overlapped = 3


class Method(Enum):
    TWSD = "twsd"
    Frequency = "frequency"
    IOSize = "iosize"


def twsd_classify(req: IoRequest, recent: Sequence[IoRequest]) -> TwsdType:
    """Precedence: Sequential > Overlapped > Strided > Random."""
    if req.size_pages >= SEQ_SIZE_PAGES:
        return TwsdType.Sequential
    if any(req.page_id == h.end_page or req.end_page == h.page_id for h in recent):
        return TwsdType.Sequential
    if any(req.page_id < h.end_page and h.page_id < req.end_page for h in recent):
        return TwsdType.Overlapped
    for h in recent:
        gap = req.page_id - h.end_page if req.page_id >= h.end_page else h.page_id - req.end_page
        if gap <= STRIDE_PAGES:
            return TwsdType.Strided
    return TwsdType.Random


def _twsd(window: Sequence[IoRequest]) -> np.ndarray:
    hist = np.zeros(len(TwsdType))
    for i, req in enumerate(window):
        hist[twsd_classify(req, window[max(0, i - HISTORY):i]).value] += 1
    return hist / len(window)


def _frequency(window: Sequence[IoRequest]) -> np.ndarray:
    counts = Counter(p for r in window for p in r.pages())
    return np.array([
        sum(counts.values()) / len(counts),
        sum(r.is_read for r in window) / len(window),
        sum(r.size_pages for r in window) / len(window),
    ])


def _iosize(window: Sequence[IoRequest]) -> np.ndarray:
    hist = np.zeros(SIZE_BINS)
    for r in window:
        hist[min(int(math.log2(r.size_pages)), SIZE_BINS - 1)] += 1
    return hist / len(window)


_SUMMARY = {Method.TWSD: _twsd, Method.Frequency: _frequency, Method.IOSize: _iosize}


def baseline_characterize(method: Method, window: Sequence[IoRequest]) -> np.ndarray:
    if not window:
        raise ValueError("empty window")
    return _SUMMARY[Method(method)](window)


class ShallowClassifier:
    """Single softmax layer over standardized summary features."""

    def __init__(self, n_features: int, n_classes: int = len(WorkloadCategory), seed: int = 0):
        rng = np.random.default_rng(seed)
        lim = 1.0 / math.sqrt(n_features)
        self.W = rng.uniform(-lim, lim, size=(n_features, n_classes))
        self.b = np.zeros(n_classes)
        self.accumulators = [np.zeros_like(self.W), np.zeros_like(self.b)]
        self.mean = np.zeros(n_features)
        self.std = np.ones(n_features)

    def parameters(self) -> List[np.ndarray]:
        return [self.W, self.b]

    def _logits(self, F: np.ndarray) -> np.ndarray:
        return ((F - self.mean) / self.std) @ self.W + self.b

    def fit(self, F: np.ndarray, y: np.ndarray, config: TrainConfig) -> None:
        self.mean = F.mean(axis=0)
        self.std = np.where(F.std(axis=0) > 0, F.std(axis=0), 1.0)
        Z = (F - self.mean) / self.std
        rng = np.random.default_rng(config.seed)
        for _ in range(config.epochs):
            order = rng.permutation(len(Z))
            for lo in range(0, len(Z), config.batch_size):
                idx = order[lo:lo + config.batch_size]
                p = np.exp(log_softmax(Z[idx] @ self.W + self.b))
                p[np.arange(len(idx)), y[idx]] -= 1.0
                p /= len(idx)
                grads = clip_gradients([Z[idx].T @ p, p.sum(axis=0)], config.clip_norm)
                rmsprop_step(self, grads, config)

    def predict_proba(self, F: np.ndarray) -> np.ndarray:
        return softmax(self._logits(np.atleast_2d(F)))

    def predict(self, F: np.ndarray) -> np.ndarray:
        return np.argmax(self.predict_proba(F), axis=1)


def _split(rows: List[Tuple[np.ndarray, int]], every: int = 5):
    train = [r for i, r in enumerate(rows) if i % every != every - 1]
    held = [r for i, r in enumerate(rows) if i % every == every - 1]
    return train, held


def train_baseline(
    method: Method, traces: Sequence[Trace], config: TrainConfig, window: int = WINDOW
) -> Tuple[ShallowClassifier, float, float]:
    """Returns the classifier with its train and held-out window accuracy."""
    rows = [
        (baseline_characterize(method, win), cat.value)
        for t in traces for win, cat in labeled_windows(t, window)
    ]
    train, held = _split(rows)
    if not train:
        raise ValueError("empty dataset")
    F = np.stack([f for f, _ in train])
    y = np.array([c for _, c in train])
    clf = ShallowClassifier(F.shape[1], seed=config.seed)
    clf.fit(F, y, config)
    train_acc = float(np.mean(clf.predict(F) == y))
    held_acc = float("nan")
    if held:
        Fh = np.stack([f for f, _ in held])
        held_acc = float(np.mean(clf.predict(Fh) == np.array([c for _, c in held])))
    logger.info("%s baseline: train acc %.4f, held-out acc %.4f", Method(method).value, train_acc, held_acc)
    return clf, train_acc, held_acc


def evaluate_characterizers(
    traces: Sequence[Trace], config: TrainConfig, window: int = WINDOW, hidden: int = HIDDEN, layers: int = LAYERS,
) -> Dict[str, float]:
    """Held-out window accuracy of the recurrent characterizer and each shallow baseline."""
    rnn = train_characterizer(traces, config, hidden, layers, window)
    out = {"rnn": rnn.held_accuracy[0] if rnn.held_accuracy else float("nan")}
    for m in Method:
        out[m.value] = train_baseline(m, traces, config, window)[2]
    return out
