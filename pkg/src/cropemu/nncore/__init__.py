"""Minimal numpy neural-network substrate with analytic gradients.

Sequential networks built from dense / conv1d / batchnorm1d / relu /
sigmoid layers (plus parameter-free flatten / reshape1d / upsample1d
plumbing), trained with sgd-momentum or adaptive-moment updates and a
reduce-on-plateau learning-rate schedule.
"""

from .layers import (
    LayerSpec,
    NetworkSpec,
    dense,
    conv1d,
    batchnorm1d,
    relu,
    sigmoid,
    flatten,
    reshape1d,
    upsample1d,
)
from .network import Network, network_forward, network_gradients
from .losses import loss_and_grad, mse_loss, bce_loss, masked_mse_loss
from .optim import OptimizerConfig, OptimizerState, optimizer_step
from .scheduler import SchedulerState, scheduler_step

__all__ = [
    "LayerSpec",
    "NetworkSpec",
    "Network",
    "dense",
    "conv1d",
    "batchnorm1d",
    "relu",
    "sigmoid",
    "flatten",
    "reshape1d",
    "upsample1d",
    "network_forward",
    "network_gradients",
    "loss_and_grad",
    "mse_loss",
    "bce_loss",
    "masked_mse_loss",
    "OptimizerConfig",
    "OptimizerState",
    "optimizer_step",
    "SchedulerState",
    "scheduler_step",
]
