"""First-order optimizers over flat parameter vectors."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError, NumericError

SGD_MOMENTUM = "sgd-momentum"
ADAPTIVE_MOMENT = "adaptive-moment"


@dataclass(frozen=True)
class OptimizerConfig:
    kind: str
    learning_rate: float
    momentum: float = 0.0
    weight_decay: float = 0.0
    # second-moment constants for the adaptive kind
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.kind not in (SGD_MOMENTUM, ADAPTIVE_MOMENT):
            raise ConfigurationError(f"unknown optimizer kind {self.kind!r}")
        if self.learning_rate <= 0.0:
            raise ConfigurationError("learning rate must be > 0")
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigurationError("momentum must be in [0,1)")
        if self.weight_decay < 0.0:
            raise ConfigurationError("weight decay must be >= 0")


@dataclass
class OptimizerState:
    velocity: np.ndarray
    second_moment: np.ndarray
    step_count: int = 0

    @classmethod
    def fresh(cls, parameter_count: int) -> "OptimizerState":
        return cls(velocity=np.zeros(parameter_count),
                   second_moment=np.zeros(parameter_count))


def optimizer_step(cfg: OptimizerConfig, params: np.ndarray, grads: np.ndarray,
                   state: OptimizerState, learning_rate: float | None = None) -> np.ndarray:
    """One in-place-free update; returns new params, mutates state.

    learning_rate overrides cfg.learning_rate so schedulers can drive it.
    """
    params = np.asarray(params, dtype=np.float64)
    grads = np.asarray(grads, dtype=np.float64)
    if params.shape != grads.shape or params.shape != state.velocity.shape:
        raise ConfigurationError("params, grads and state lengths differ")
    if not np.all(np.isfinite(grads)):
        raise NumericError("non-finite gradient")
    lr = cfg.learning_rate if learning_rate is None else learning_rate
    g = grads if cfg.weight_decay == 0.0 else grads + cfg.weight_decay * params
    if cfg.kind == SGD_MOMENTUM:
        state.velocity *= cfg.momentum
        state.velocity += g
        state.step_count += 1
        return params - lr * state.velocity
    # adaptive-moment: exponential first/second moments with bias correction
    b1, b2 = cfg.momentum, cfg.beta2
    state.step_count += 1
    t = state.step_count
    state.velocity *= b1
    state.velocity += (1.0 - b1) * g
    state.second_moment *= b2
    state.second_moment += (1.0 - b2) * g * g
    m_hat = state.velocity / (1.0 - b1 ** t)
    v_hat = state.second_moment / (1.0 - b2 ** t)
    return params - lr * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
