from __future__ import annotations
from dataclasses import dataclass
from typing import List, Optional, Protocol, Sequence

import numpy as np


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.001
    rho: float = 0.9
    epsilon: float = 1e-7
    batch_size: int = 32
    epochs: int = 10
    seed: int = 0
    clip_norm: Optional[float] = 5.0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.epsilon <= 0:
            raise ValueError("learning_rate and epsilon must be positive")
        if not 0.0 < self.rho < 1.0:
            raise ValueError("rho must be in (0, 1)")
        if self.batch_size < 1:
            raise ValueError("batch_size must be ≥ 1")
        if self.epochs < 0:
            raise ValueError("epochs must be ≥ 0")
        if self.clip_norm is not None and self.clip_norm <= 0:
            raise ValueError("clip_norm must be positive")


class Trainable(Protocol):
    """Anything with parameter arrays and matching RMSProp accumulators."""
    accumulators: List[np.ndarray]

    def parameters(self) -> List[np.ndarray]:
        ...


def global_norm(grads: Sequence[np.ndarray]) -> float:
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads)))


def clip_gradients(grads: List[np.ndarray], max_norm: Optional[float]) -> List[np.ndarray]:
    """Rescale all gradients together when their global L2 norm exceeds max_norm."""
    if max_norm is None:
        return grads
    norm = global_norm(grads)
    if norm <= max_norm:
        return grads
    scale = max_norm / norm
    return [g * scale for g in grads]


def rmsprop_step(model: Trainable, gradients: Sequence[np.ndarray], config: TrainConfig) -> None:
    """acc <- rho*acc + (1-rho)*g^2 ; param <- param - lr*g/(sqrt(acc)+eps), in place."""
    params = model.parameters()
    if len(params) != len(gradients) or len(params) != len(model.accumulators):
        raise ValueError("gradient / accumulator count does not match parameters")
    for p, g, acc in zip(params, gradients, model.accumulators):
        if g.shape != p.shape or acc.shape != p.shape:
            raise ValueError("gradient / accumulator shape does not match parameter")
        acc *= config.rho
        acc += (1.0 - config.rho) * g * g
        p -= config.learning_rate * g / (np.sqrt(acc) + config.epsilon)
