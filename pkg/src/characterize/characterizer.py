from __future__ import annotations
import logging
from typing import List, Sequence, Tuple, Union

import numpy as np

from src.characterize.features import CHARACTERIZER_DIM, extract_characterizer_features
from src.nn.lstm import RnnModel, forward, init_model
from src.nn.optim import TrainConfig
from src.nn.train import FitResult, Sample, fit
from src.traces.trace import IoRequest, Trace, WorkloadCategory, split_windows

logger = logging.getLogger(__name__)

WINDOW = 100
HIDDEN = 50
LAYERS = 1
KIND = "characterizer"


def build_characterizer(seed: int = 0, hidden: int = HIDDEN, layers: int = LAYERS) -> RnnModel:
    return init_model(CHARACTERIZER_DIM, hidden, len(WorkloadCategory), num_layers=layers, seed=seed, kind=KIND)


def labeled_windows(trace: Trace, window: int = WINDOW) -> List[Tuple[List[IoRequest], WorkloadCategory]]:
    """Windows tagged with the true category of their first request; untagged windows are skipped."""
    out = []
    for k, win in enumerate(split_windows(trace, window)):
        cat = trace.category_at(k * window)
        if cat is not None:
            out.append((win, cat))
    return out


def characterizer_dataset(traces: Sequence[Trace], window: int = WINDOW) -> List[Sample]:
    samples = [
        Sample.final(extract_characterizer_features(win), cat.value)
        for t in traces
        for win, cat in labeled_windows(t, window)
    ]
    if not samples:
        raise ValueError("empty dataset: no window carries a workload category")
    return samples


def train_characterizer(
    traces: Sequence[Trace],
    config: TrainConfig,
    hidden: int = HIDDEN,
    layers: int = LAYERS,
    window: int = WINDOW,
    holdout: bool = True,
) -> FitResult:
    samples = characterizer_dataset(traces, window)
    model = build_characterizer(config.seed, hidden, layers)
    result = fit(model, samples, config, holdout=holdout)
    logger.info("characterizer: %d windows, train acc %.4f, held-out acc %s",
                len(samples), result.train_accuracy[0],
                "n/a" if result.held_accuracy is None else f"{result.held_accuracy[0]:.4f}")
    return result


def classify_workload(
    model: RnnModel, window: Union[Sequence[IoRequest], np.ndarray]
) -> Tuple[WorkloadCategory, np.ndarray]:
    """Category with the highest probability (lowest index on ties) and the full distribution."""
    x = window if isinstance(window, np.ndarray) else extract_characterizer_features(window)
    probs = forward(model, x)
    return WorkloadCategory(int(np.argmax(probs))), probs
