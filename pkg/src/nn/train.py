from __future__ import annotations
import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.nn.lstm import RnnModel, batch_pass
from src.nn.optim import TrainConfig, clip_gradients, rmsprop_step

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Sample:
    """One window: x is (T, D); targets holds one (T,) int array per head, -1 = unsupervised."""
    x: np.ndarray
    targets: Tuple[np.ndarray, ...]

    @classmethod
    def final(cls, x: np.ndarray, label: int) -> "Sample":
        """Single-head sample supervised only at the last timestep."""
        x = np.asarray(x, dtype=np.float64)
        y = np.full(len(x), -1, dtype=np.int64)
        y[-1] = label
        return cls(x, (y,))


@dataclass
class EpochStats:
    epoch: int
    loss: float
    accuracy: float


@dataclass
class TrainHistory:
    epochs: List[EpochStats] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.epochs)

    def write_csv(self, path: Path | str) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["epoch", "loss", "accuracy"])
            for e in self.epochs:
                w.writerow([e.epoch, f"{e.loss:.6f}", f"{e.accuracy:.6f}"])


def stack(samples: Sequence[Sample]) -> Tuple[np.ndarray, List[np.ndarray]]:
    if not samples:
        raise ValueError("empty batch")
    shape = samples[0].x.shape
    n_heads = len(samples[0].targets)
    for s in samples:
        if s.x.shape != shape or len(s.targets) != n_heads:
            raise ValueError("dimension mismatch: samples in a batch must share window shape and heads")
    X = np.stack([s.x for s in samples])
    Ys = [np.stack([s.targets[k] for s in samples]) for k in range(n_heads)]
    return X, Ys


def loss_and_gradients(model: RnnModel, batch: Sequence[Sample]) -> Tuple[float, List[np.ndarray]]:
    X, Ys = stack(batch)
    res = batch_pass(model, X, Ys, need_grads=True)
    return res.loss, res.gradients


def train(model: RnnModel, dataset: Sequence[Sample], config: TrainConfig) -> TrainHistory:
    """Mini-batch BPTT with RMSProp; reshuffles every epoch from config.seed.
    Reported accuracy is the first head's, accumulated over the epoch's batches."""
    if not dataset:
        raise ValueError("empty dataset")
    rng = np.random.default_rng(config.seed)
    history = TrainHistory()
    n = len(dataset)
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        loss_sum = 0.0
        correct = total = 0
        for lo in range(0, n, config.batch_size):
            batch = [dataset[j] for j in order[lo:lo + config.batch_size]]
            X, Ys = stack(batch)
            res = batch_pass(model, X, Ys, need_grads=True)
            rmsprop_step(model, clip_gradients(res.gradients, config.clip_norm), config)
            loss_sum += res.loss * len(batch)
            correct += res.correct[0]
            total += res.total[0]
        stats = EpochStats(epoch, loss_sum / n, correct / total if total else 0.0)
        history.epochs.append(stats)
        logger.info("epoch %d loss=%.4f acc=%.4f", stats.epoch, stats.loss, stats.accuracy)
    return history


def evaluate(model: RnnModel, dataset: Sequence[Sample], batch_size: int = 64) -> Tuple[float, List[float]]:
    """Forward-only mean loss and per-head accuracy over supervised positions."""
    if not dataset:
        raise ValueError("empty dataset")
    n_heads = len(model.heads)
    loss_sum = 0.0
    correct = [0] * n_heads
    total = [0] * n_heads
    for lo in range(0, len(dataset), batch_size):
        batch = dataset[lo:lo + batch_size]
        X, Ys = stack(batch)
        res = batch_pass(model, X, Ys, need_grads=False)
        loss_sum += res.loss * len(batch)
        for k in range(n_heads):
            correct[k] += res.correct[k]
            total[k] += res.total[k]
    acc = [c / t if t else float("nan") for c, t in zip(correct, total)]
    return loss_sum / len(dataset), acc


def holdout_split(samples: Sequence[Sample], every: int = 5) -> Tuple[List[Sample], List[Sample]]:
    """Deterministic 80/20 split by window index: every `every`-th window is held out."""
    train_set = [s for i, s in enumerate(samples) if i % every != every - 1]
    held = [s for i, s in enumerate(samples) if i % every == every - 1]
    return train_set, held


@dataclass
class FitResult:
    model: RnnModel
    history: TrainHistory
    train_accuracy: List[float]
    held_accuracy: Optional[List[float]] = None


def fit(model: RnnModel, samples: Sequence[Sample], config: TrainConfig, holdout: bool = True) -> FitResult:
    """Train on the non-held-out windows and score both parts (per-head accuracy)."""
    train_set, held = holdout_split(samples) if holdout else (list(samples), [])
    if not train_set:
        raise ValueError("empty dataset")
    history = train(model, train_set, config)
    _, train_acc = evaluate(model, train_set)
    held_acc = evaluate(model, held)[1] if held else None
    return FitResult(model, history, train_acc, held_acc)
