"""Plateau learning-rate scheduler."""

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError


@dataclass
class SchedulerState:
    patience: int = 8
    reduction_factor: float = 0.5
    min_learning_rate: float = 1e-5
    best_loss: float = float("inf")
    epochs_since_improvement: int = 0

    def __post_init__(self):
        if not 0.0 < self.reduction_factor < 1.0:
            raise ConfigurationError("reduction factor must be in (0,1)")
        if self.patience < 1:
            raise ConfigurationError("patience must be >= 1")


def scheduler_step(state: SchedulerState, epoch_loss: float, current_lr: float) -> float:
    """Update plateau counters; LR drops by the factor after `patience`
    consecutive non-improving epochs, floored at the minimum LR."""
    if not np.isfinite(epoch_loss):
        raise ConfigurationError("epoch loss must be finite")
    if epoch_loss < state.best_loss:
        state.best_loss = epoch_loss
        state.epochs_since_improvement = 0
        return current_lr
    state.epochs_since_improvement += 1
    if state.epochs_since_improvement >= state.patience:
        state.epochs_since_improvement = 0
        return max(current_lr * state.reduction_factor, state.min_learning_rate)
    return current_lr
