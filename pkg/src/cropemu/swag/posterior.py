"""Gaussian posterior over network weights from SGD snapshots.

Fine-tuning runs plain SGD with momentum from a trained model; the last
epochs contribute weight snapshots to a running first/second moment plus
a low-rank deviation matrix. Sampling follows the half-diagonal,
half-low-rank construction:

    w = mean + (1/sqrt(2)) * sqrt(diagVar) * z1
             + (1/sqrt(2(K-1))) * D @ z2

so the implied covariance is diag/2 + D D^T / (2(K-1)).
"""

import logging
import struct
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError, ParseError
from ..nncore.optim import OptimizerConfig, OptimizerState, optimizer_step

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SwagConfig:
    learning_rate: float = 1e-2
    momentum: float = 0.9
    weight_decay: float = 1e-4
    total_epochs: int = 30
    collect_from_epoch: int = 21
    sample_count: int = 30
    max_rank: int = 10
    batch_size: int = 256

    def __post_init__(self):
        if self.collect_from_epoch < 1 or self.collect_from_epoch > self.total_epochs:
            raise ConfigurationError(
                "collect_from_epoch must lie in [1, total_epochs]")
        if self.sample_count < 2:
            raise ConfigurationError("sample_count must be >= 2")
        if self.max_rank < 1:
            raise ConfigurationError("max_rank must be >= 1")
        if self.learning_rate <= 0.0:
            raise ConfigurationError("learning rate must be > 0")

    @property
    def snapshot_count(self) -> int:
        return self.total_epochs - self.collect_from_epoch + 1


@dataclass
class SwagPosterior:
    mean: np.ndarray
    second_moment: np.ndarray
    deviations: list = field(default_factory=list)  # columns, oldest first
    snapshot_count: int = 0
    max_rank: int = 10

    @classmethod
    def empty(cls, n_params: int, max_rank: int = 10) -> "SwagPosterior":
        return cls(np.zeros(n_params), np.zeros(n_params), [], 0, max_rank)

    def update(self, snapshot: np.ndarray) -> None:
        """Fold one weight snapshot into the running moments."""
        n = self.snapshot_count
        self.mean = (n * self.mean + snapshot) / (n + 1)
        self.second_moment = (n * self.second_moment + snapshot * snapshot) / (n + 1)
        self.snapshot_count = n + 1
        self.deviations.append(snapshot - self.mean)
        if len(self.deviations) > self.max_rank:
            del self.deviations[0]

    @property
    def diagonal_variance(self) -> np.ndarray:
        return np.maximum(self.second_moment - self.mean * self.mean, 0.0)

    @property
    def deviation_matrix(self) -> np.ndarray:
        """(n_params, K) column matrix; empty shape when no deviations."""
        if not self.deviations:
            return np.zeros((self.mean.size, 0))
        return np.stack(self.deviations, axis=1)

    def covariance(self) -> np.ndarray:
        """Dense closed-form covariance; for small synthetic posteriors."""
        d = self.deviation_matrix
        cov = 0.5 * np.diag(self.diagonal_variance)
        if d.shape[1] >= 2:
            cov = cov + (d @ d.T) / (2.0 * (d.shape[1] - 1))
        return cov


def swag_sample(posterior: SwagPosterior, seed: int) -> np.ndarray:
    """One weight draw; deterministic per seed."""
    if posterior.snapshot_count < 2:
        raise ConfigurationError("posterior needs at least 2 snapshots")
    rng = np.random.default_rng(seed)
    n = posterior.mean.size
    z1 = rng.standard_normal(n)
    w = posterior.mean + np.sqrt(0.5 * posterior.diagonal_variance) * z1
    d = posterior.deviation_matrix
    k = d.shape[1]
    if k >= 2:
        z2 = rng.standard_normal(k)
        w = w + (d @ z2) / np.sqrt(2.0 * (k - 1))
    elif k == 1 and np.any(d != 0.0):
        log.warning("single deviation column; sampling diagonal-only")
    return w


def finetune_collect(model, data, cfg: SwagConfig = SwagConfig(),
                     seed: int = 0) -> SwagPosterior:
    """SGD-momentum fine-tune of a trained emulator, collecting snapshots.

    Epochs before `collect_from_epoch` just move the weights; each epoch
    from there on contributes one end-of-epoch snapshot.
    """
    if cfg.snapshot_count < 2:
        raise ConfigurationError("collection window must cover >= 2 epochs")
    pool = data.train_indices
    x = model.standardizer.transform_features(data.features[pool])
    t = model.standardizer.transform_targets(data.targets[pool])

    params = model.params.copy()
    net = model.network
    opt_cfg = OptimizerConfig("sgd-momentum", cfg.learning_rate,
                              momentum=cfg.momentum,
                              weight_decay=cfg.weight_decay)
    opt_state = OptimizerState.fresh(params.size)
    rng = np.random.default_rng(seed)
    posterior = SwagPosterior.empty(params.size, cfg.max_rank)

    n = x.shape[0]
    for epoch in range(1, cfg.total_epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            rows = order[start:start + cfg.batch_size]
            _, grads = net.gradients(params, x[rows], t[rows], "mse")
            params = optimizer_step(opt_cfg, params, grads, opt_state)
        if epoch >= cfg.collect_from_epoch:
            posterior.update(params.copy())
    return posterior


def save_posterior(path, posterior: SwagPosterior) -> None:
    with open(path, "wb") as fh:
        fh.write(b"CSWG")
        fh.write(struct.pack("<I", 1))
        fh.write(struct.pack("<QII", posterior.mean.size,
                             posterior.snapshot_count, posterior.max_rank))
        d = posterior.deviation_matrix
        fh.write(struct.pack("<I", d.shape[1]))
        for arr in (posterior.mean, posterior.second_moment):
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(d, dtype="<f8").tobytes())


def load_posterior(path) -> SwagPosterior:
    with open(path, "rb") as fh:
        if fh.read(4) != b"CSWG":
            raise ParseError(f"{path}: not a posterior file")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != 1:
            raise ParseError(f"{path}: unsupported version {version}")
        n, count, max_rank = struct.unpack("<QII", fh.read(16))
        (k,) = struct.unpack("<I", fh.read(4))
        mean = np.frombuffer(fh.read(8 * n), dtype="<f8").copy()
        second = np.frombuffer(fh.read(8 * n), dtype="<f8").copy()
        d = np.frombuffer(fh.read(8 * n * k), dtype="<f8").reshape(n, k).copy()
    return SwagPosterior(mean, second, [d[:, j] for j in range(k)],
                         count, max_rank)
