"""Training, evaluation and learning-curve runs for the yield emulator."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError
from ..nncore.layers import NetworkSpec, batchnorm1d, dense, relu
from ..nncore.network import Network
from ..nncore.optim import OptimizerConfig, OptimizerState, optimizer_step
from ..nncore.scheduler import SchedulerState, scheduler_step
from .dataset import EmulatorDataset, Standardizer

DESK_HIDDEN = (64, 64, 64, 32)
PAPER_HIDDEN = (256, 256, 256, 128)


def emulator_spec(n_features: int, hidden, n_targets: int) -> NetworkSpec:
    layers = []
    width = n_features
    for h in hidden:
        layers += [dense(width, h), relu(), batchnorm1d(h)]
        width = h
    layers.append(dense(width, n_targets))
    return NetworkSpec(layers)


@dataclass
class EmulatorModel:
    network: Network
    params: np.ndarray
    standardizer: Standardizer
    hidden: tuple
    feature_labels: tuple
    target_labels: tuple
    epoch_losses: list = field(default_factory=list)

    def predict_standardized(self, features: np.ndarray) -> np.ndarray:
        x = self.standardizer.transform_features(np.asarray(features, float))
        return self.network.forward(self.params, x, training=False)

    def predict(self, features: np.ndarray) -> np.ndarray:
        return self.standardizer.inverse_targets(
            self.predict_standardized(features))


def train_emulator(data: EmulatorDataset, rows: int = None,
                   hidden=DESK_HIDDEN, learning_rate: float = 3e-4,
                   weight_decay: float = 1e-4, epochs: int = 50,
                   batch_size: int = 256, seed: int = 0) -> EmulatorModel:
    pool = data.train_indices
    if rows is not None:
        if rows < 1 or rows > len(pool):
            raise InputError(f"rows={rows} outside the {len(pool)}-row train pool")
        pool = pool[:rows]
    if len(pool) == 0:
        raise InputError("empty training split")

    x_raw = data.features[pool]
    t_raw = data.targets[pool]
    std = Standardizer.fit(x_raw, t_raw, data.feature_labels, data.target_labels)
    x = std.transform_features(x_raw)
    t = std.transform_targets(t_raw)

    spec = emulator_spec(x.shape[1], tuple(hidden), t.shape[1])
    net = Network(spec, (x.shape[1],))
    rng = np.random.default_rng(seed)
    params = net.init_params(rng)

    opt_cfg = OptimizerConfig("adaptive-moment", learning_rate,
                              momentum=0.9, weight_decay=weight_decay)
    opt_state = OptimizerState.fresh(params.size)
    sched = SchedulerState()
    current_lr = learning_rate
    losses = []
    n = x.shape[0]
    for _ in range(epochs):
        order = rng.permutation(n)
        epoch_loss, batches = 0.0, 0
        for start in range(0, n, batch_size):
            rows_b = order[start:start + batch_size]
            loss, grads = net.gradients(params, x[rows_b], t[rows_b], "mse")
            params = optimizer_step(opt_cfg, params, grads, opt_state,
                                    learning_rate=current_lr)
            epoch_loss += loss
            batches += 1
        mean_loss = epoch_loss / batches
        losses.append(mean_loss)
        current_lr = scheduler_step(sched, mean_loss, current_lr)

    net.refresh_running_stats(params, x)
    return EmulatorModel(net, params, std, tuple(hidden),
                         data.feature_labels, data.target_labels, losses)


@dataclass(frozen=True)
class RegressionReport:
    per_output_mse: np.ndarray   # standardized scale
    per_output_mae: np.ndarray   # standardized scale
    per_output_raw_mae: np.ndarray
    mse: float
    mae: float
    rmse: float
    r2: float
    target_labels: tuple


def evaluate(model: EmulatorModel, features: np.ndarray,
             targets: np.ndarray) -> RegressionReport:
    features = np.asarray(features, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if features.shape[0] == 0:
        raise InputError("empty evaluation split")

    pred_std = model.predict_standardized(features)
    t_std = model.standardizer.transform_targets(targets)
    err = pred_std - t_std
    per_mse = np.mean(err * err, axis=0)
    per_mae = np.mean(np.abs(err), axis=0)
    raw_err = model.standardizer.inverse_targets(pred_std) - targets
    raw_mae = np.mean(np.abs(raw_err), axis=0)

    mse = float(np.mean(err * err))
    mae = float(np.mean(np.abs(err)))
    centered = t_std - t_std.mean(axis=0)
    sst = float(np.mean(centered * centered))
    r2 = 1.0 - mse / sst if sst > 0.0 else float("nan")
    return RegressionReport(per_mse, per_mae, raw_mae, mse, mae,
                            float(np.sqrt(mse)), r2, model.target_labels)


def evaluate_split(model: EmulatorModel, data: EmulatorDataset,
                   split: str = "test") -> RegressionReport:
    if split == "test":
        idx = data.test_indices
    elif split == "train":
        idx = data.train_indices
    else:
        raise InputError(f"unknown split '{split}'")
    return evaluate(model, data.features[idx], data.targets[idx])


@dataclass(frozen=True)
class LearningCurvePoint:
    size: int
    train_r2: float
    test_r2: float
    test_rmse: float


def learning_curve(data: EmulatorDataset, sizes, seed: int = 0,
                   **train_kwargs) -> list:
    """One independently trained model per size on nested train subsets."""
    sizes = list(sizes)
    if sizes != sorted(sizes):
        raise InputError("sizes must be ascending")
    if sizes and sizes[-1] > len(data.train_indices):
        raise InputError(f"size {sizes[-1]} exceeds the "
                         f"{len(data.train_indices)}-row train pool")
    points = []
    for size in sizes:
        model = train_emulator(data, rows=size, seed=seed, **train_kwargs)
        sub = data.train_indices[:size]
        train_rep = evaluate(model, data.features[sub], data.targets[sub])
        test_rep = evaluate_split(model, data, "test")
        points.append(LearningCurvePoint(size, train_rep.r2, test_rep.r2,
                                         test_rep.rmse))
    return points
