"""Ensemble prediction from SWAG weight samples plus calibration metrics.

Each ensemble member refreshes the batch-norm running statistics on a
training subset before predicting (sampled weights shift the activation
distributions, so stale statistics would skew eval-mode outputs).
Intervals are Gaussian: mean +/- 1.96 standard deviations.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, InputError
from .posterior import SwagPosterior, swag_sample

CV_EPSILON = 1e-9
INTERVAL_Z = 1.96


@dataclass(frozen=True)
class EnsemblePrediction:
    mean: np.ndarray          # (rows, outputs) raw units
    variance: np.ndarray      # across members, ddof=1
    interval_low: np.ndarray
    interval_high: np.ndarray
    cv: np.ndarray            # std / max(|mean|, eps)

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(self.variance)


def ensemble_predict(posterior: SwagPosterior, model, inputs: np.ndarray,
                     bn_subset: np.ndarray, sample_count: int = 30,
                     seed: int = 0) -> EnsemblePrediction:
    if sample_count < 2:
        raise ConfigurationError("sample_count must be >= 2")
    inputs = np.asarray(inputs, dtype=np.float64)
    net, std = model.network, model.standardizer
    has_bn = len(net.running_mean) > 0
    bn_subset = np.asarray(bn_subset, dtype=np.float64)
    if has_bn and bn_subset.shape[0] == 0:
        raise ConfigurationError("batch-norm refresh needs a nonempty subset")

    x = std.transform_features(inputs)
    bn_x = std.transform_features(bn_subset) if has_bn else None
    members = np.empty((sample_count, x.shape[0], std.target_means.size))
    for m in range(sample_count):
        w = swag_sample(posterior, seed + m)
        if has_bn:
            net.refresh_running_stats(w, bn_x)
        members[m] = std.inverse_targets(net.forward(w, x, training=False))

    mean = members.mean(axis=0)
    variance = members.var(axis=0, ddof=1)
    sd = np.sqrt(variance)
    cv = sd / np.maximum(np.abs(mean), CV_EPSILON)
    return EnsemblePrediction(mean, variance, mean - INTERVAL_Z * sd,
                              mean + INTERVAL_Z * sd, cv)


@dataclass(frozen=True)
class CalibrationReport:
    coverage95: np.ndarray       # per output
    mean_interval_width: np.ndarray
    mean_variance: np.ndarray
    corr_var_sqerr: float        # None when variance is degenerate
    target_labels: tuple


def calibration_metrics(prediction: EnsemblePrediction, targets: np.ndarray,
                        target_labels=()) -> CalibrationReport:
    targets = np.asarray(targets, dtype=np.float64)
    if targets.shape != prediction.mean.shape:
        raise InputError("targets and predictions must align")
    inside = ((targets >= prediction.interval_low)
              & (targets <= prediction.interval_high))
    coverage = inside.mean(axis=0)
    width = (prediction.interval_high - prediction.interval_low).mean(axis=0)
    mean_var = prediction.variance.mean(axis=0)

    var_flat = prediction.variance.ravel()
    sqerr_flat = ((prediction.mean - targets) ** 2).ravel()
    if var_flat.std() == 0.0 or sqerr_flat.std() == 0.0:
        corr = None
    else:
        corr = float(np.corrcoef(var_flat, sqerr_flat)[0, 1])
    return CalibrationReport(coverage, width, mean_var, corr,
                             tuple(target_labels))


def rank_environments_by_cv(cv_values, env_tags) -> list:
    """Environment names ordered by mean CV, most uncertain first."""
    cv_values = np.asarray(cv_values, dtype=np.float64)
    env_tags = list(env_tags)
    if cv_values.shape[0] != len(env_tags):
        raise InputError("cv values and environment tags must align")
    means = {}
    for env in sorted(set(env_tags)):
        mask = np.array([tag == env for tag in env_tags])
        means[env] = float(cv_values[mask].mean())
    # ties broken by name so the ranking is deterministic
    return sorted(means, key=lambda env: (-means[env], env))


def cv_filter(cv_values, env_tags, env_ranking,
              default_threshold: float = 0.5,
              relaxed_threshold: float = 1.0,
              relaxed_env_count: int = 4) -> np.ndarray:
    """Boolean retention mask under the two-tier CV rule."""
    cv_values = np.asarray(cv_values, dtype=np.float64)
    env_tags = list(env_tags)
    if cv_values.shape[0] != len(env_tags):
        raise InputError("cv values and environment tags must align")
    known = set(env_ranking)
    for tag in env_tags:
        if tag not in known:
            raise InputError(f"unknown environment tag '{tag}'")
    relaxed = set(env_ranking[:relaxed_env_count])
    thresholds = np.array([relaxed_threshold if tag in relaxed
                           else default_threshold for tag in env_tags])
    return cv_values <= thresholds
