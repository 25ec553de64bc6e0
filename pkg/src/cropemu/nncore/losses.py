"""Training losses with analytic output-gradients.

Every loss reports the mean over all contributing elements and returns
d(loss)/d(prediction) with the same shape as the prediction, so network
backward passes can start from any of them uniformly.
"""

import numpy as np

from ..errors import ConfigurationError

BCE_EPS = 1e-7


def mse_loss(pred: np.ndarray, target: np.ndarray) -> tuple:
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ConfigurationError(
            f"prediction shape {pred.shape} != target shape {target.shape}")
    diff = pred - target
    value = float(np.mean(diff * diff))
    grad = (2.0 / diff.size) * diff
    return value, grad


def bce_loss(pred: np.ndarray, target: np.ndarray) -> tuple:
    """Binary cross-entropy on probabilities, clipped away from {0,1}."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ConfigurationError(
            f"prediction shape {pred.shape} != target shape {target.shape}")
    p = np.clip(pred, BCE_EPS, 1.0 - BCE_EPS)
    value = float(np.mean(-(target * np.log(p) + (1.0 - target) * np.log1p(-p))))
    grad = (p - target) / (p * (1.0 - p)) / p.size
    # Clipped coordinates sit on a flat spot of the surrogate objective.
    grad = np.where((pred > BCE_EPS) & (pred < 1.0 - BCE_EPS), grad, 0.0)
    return value, grad


def masked_mse_loss(pred: np.ndarray, target: np.ndarray, mask: np.ndarray) -> tuple:
    """MSE averaged only over elements where mask is true."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    mask = np.asarray(mask).astype(np.float64)
    if pred.shape != target.shape or pred.shape != mask.shape:
        raise ConfigurationError(
            f"shapes differ: pred {pred.shape}, target {target.shape}, mask {mask.shape}")
    count = float(mask.sum())
    if count == 0.0:
        return 0.0, np.zeros_like(pred)
    diff = (pred - target) * mask
    value = float(np.sum(diff * diff) / count)
    grad = (2.0 / count) * diff
    return value, grad


def loss_and_grad(kind: str, pred, target, mask=None) -> tuple:
    if kind == "mse":
        return mse_loss(pred, target)
    if kind == "bce":
        return bce_loss(pred, target)
    if kind == "masked-mse":
        if mask is None:
            raise ConfigurationError("masked-mse requires a mask")
        return masked_mse_loss(pred, target, mask)
    raise ConfigurationError(f"unknown loss {kind!r}")
