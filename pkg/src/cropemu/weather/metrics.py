"""Reconstruction metrics for weather series.

Continuous rain metrics are restricted to days that were actually wet in
the original record; occurrence is scored as a binary problem over all
days with a 0.5 probability threshold.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InputError

WET_THRESHOLD = 0.0  # original rain strictly above this counts as wet


@dataclass(frozen=True)
class ChannelMetrics:
    rmse: float
    mae: float
    bias: float
    corr: float | None
    r2: float | None


@dataclass(frozen=True)
class OccurrenceMetrics:
    accuracy: float
    precision: float | None
    recall: float | None
    f1: float | None


@dataclass(frozen=True)
class ReconMetrics:
    radn: ChannelMetrics
    maxt: ChannelMetrics
    mint: ChannelMetrics
    rain: ChannelMetrics          # wet days only
    occurrence: OccurrenceMetrics


def channel_metrics(original, reconstructed) -> ChannelMetrics:
    original = np.asarray(original, dtype=np.float64).ravel()
    reconstructed = np.asarray(reconstructed, dtype=np.float64).ravel()
    if original.shape != reconstructed.shape:
        raise InputError("length mismatch")
    if original.size == 0:
        raise InputError("empty channel")
    err = reconstructed - original
    rmse = float(np.sqrt(np.mean(err * err)))
    mae = float(np.mean(np.abs(err)))
    bias = float(np.mean(err))
    sst = float(np.sum((original - original.mean()) ** 2))
    if sst == 0.0:
        return ChannelMetrics(rmse, mae, bias, None, None)
    r2 = 1.0 - float(np.sum(err * err)) / sst
    denom = original.std() * reconstructed.std()
    corr = None
    if denom > 0.0:
        corr = float(np.mean((original - original.mean())
                             * (reconstructed - reconstructed.mean())) / denom)
    return ChannelMetrics(rmse, mae, bias, corr, r2)


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def occurrence_metrics(true_wet, predicted_wet) -> OccurrenceMetrics:
    true_wet = np.asarray(true_wet, dtype=bool).ravel()
    predicted_wet = np.asarray(predicted_wet, dtype=bool).ravel()
    if true_wet.shape != predicted_wet.shape:
        raise InputError("length mismatch")
    tp = int(np.sum(true_wet & predicted_wet))
    fp = int(np.sum(~true_wet & predicted_wet))
    fn = int(np.sum(true_wet & ~predicted_wet))
    tn = int(np.sum(~true_wet & ~predicted_wet))
    total = tp + fp + fn + tn
    if total == 0:
        raise InputError("empty occurrence vectors")
    accuracy = (tp + tn) / total
    precision = tp / (tp + fp) if tp + fp > 0 else None
    recall = tp / (tp + fn) if tp + fn > 0 else None
    f1 = None
    if precision is not None and recall is not None:
        f1 = f1_score(precision, recall)
    return OccurrenceMetrics(accuracy, precision, recall, f1)


def reconstruction_metrics(original_list, reconstructed_list) -> ReconMetrics:
    """Pooled metrics over matched series lists."""
    if len(original_list) != len(reconstructed_list) or not original_list:
        raise InputError("need equal-length nonempty series lists")
    channels = {}
    for name in ("radn", "maxt", "mint"):
        orig = np.concatenate([getattr(s, name) for s in original_list])
        recon = np.concatenate([getattr(s, name) for s in reconstructed_list])
        channels[name] = channel_metrics(orig, recon)

    rain_orig = np.concatenate([s.rain for s in original_list])
    rain_recon = np.concatenate([s.rain for s in reconstructed_list])
    wet = rain_orig > WET_THRESHOLD
    if np.any(wet):
        rain = channel_metrics(rain_orig[wet], rain_recon[wet])
    else:
        rain = ChannelMetrics(math.nan, math.nan, math.nan, None, None)
    occ = occurrence_metrics(wet, rain_recon > WET_THRESHOLD)
    return ReconMetrics(channels["radn"], channels["maxt"], channels["mint"],
                        rain, occ)
