"""Permutation importance against a pluggable predictor."""

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, InputError


def _r2(predicted: np.ndarray, targets: np.ndarray) -> float:
    sst = float(((targets - targets.mean()) ** 2).sum())
    if sst <= 0.0:
        raise InputError("targets have zero variance")
    sse = float(((targets - predicted) ** 2).sum())
    return 1.0 - sse / sst


@dataclass(frozen=True)
class ImportanceReport:
    feature_names: tuple
    baseline_r2: float
    importance: np.ndarray      # mean r2 drop per feature
    importance_std: np.ndarray  # spread of the drop across repeats
    percent: np.ndarray         # share of total positive importance
    rank: np.ndarray            # 1 = most important


def permutation_importance(predict_fn, features: np.ndarray,
                           targets: np.ndarray, feature_names=None,
                           repeats: int = 10,
                           seed: int = 0) -> ImportanceReport:
    """Mean r2 drop when one input column is shuffled.

    `predict_fn` maps an (n, d) feature matrix to n predictions. The
    drop is measured against the same targets the baseline uses, so a
    feature the predictor never reads scores zero exactly.
    """
    features = np.asarray(features, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64).ravel()
    if features.ndim != 2 or features.shape[0] == 0:
        raise InputError("features must be a nonempty 2-D array")
    if targets.shape[0] != features.shape[0]:
        raise InputError("features and targets must have matching rows")
    if repeats < 1:
        raise ConfigurationError("repeats must be >= 1")
    n, d = features.shape
    if feature_names is None:
        feature_names = tuple(f"x{j}" for j in range(d))
    feature_names = tuple(feature_names)
    if len(feature_names) != d:
        raise InputError("feature_names must match the feature count")

    baseline = _r2(np.asarray(predict_fn(features)).ravel(), targets)
    rng = np.random.default_rng(seed)
    drops = np.empty((d, repeats))
    for j in range(d):
        for r in range(repeats):
            shuffled = features.copy()
            shuffled[:, j] = features[rng.permutation(n), j]
            score = _r2(np.asarray(predict_fn(shuffled)).ravel(), targets)
            drops[j, r] = baseline - score

    importance = drops.mean(axis=1)
    spread = drops.std(axis=1, ddof=1) if repeats > 1 else np.zeros(d)
    positive_total = np.clip(importance, 0.0, None).sum()
    if positive_total > 0.0:
        percent = 100.0 * importance / positive_total
    else:
        percent = np.zeros(d)
    # ties in importance rank by column position
    order = np.lexsort((np.arange(d), -importance))
    rank = np.empty(d, dtype=np.int64)
    rank[order] = np.arange(1, d + 1)
    return ImportanceReport(feature_names, baseline, importance, spread,
                            percent, rank)
