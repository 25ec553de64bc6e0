"""Supervised dataset assembly for the yield emulator.

Feature layout is fixed: the 21 free config dimensions in canonical
variable order, then the 10 temperature-radiation latents, the 6 rain
latents, and latitude. Targets are the 13 simulator outputs.
"""

from dataclasses import dataclass

import numpy as np

from ..cropsim.simulate import OUTPUT_NAMES
from ..errors import ConfigurationError, InputError
from ..sampling.space import DERIVED, FIELD_BY_NAME, ParamSpace

TEMPRAD_FEATURES = tuple(f"ztr{i}" for i in range(10))
RAIN_FEATURES = tuple(f"zrn{i}" for i in range(6))


def feature_names(space: ParamSpace) -> tuple:
    config_part = tuple(v.name for v in space.variables if v.kind != DERIVED)
    return config_part + TEMPRAD_FEATURES + RAIN_FEATURES + ("latitude",)


@dataclass(frozen=True)
class Standardizer:
    feature_means: np.ndarray
    feature_stds: np.ndarray
    target_means: np.ndarray
    target_stds: np.ndarray

    @classmethod
    def fit(cls, features: np.ndarray, targets: np.ndarray,
            feature_labels=None, target_labels=None) -> "Standardizer":
        def stats(mat, labels, what):
            means = mat.mean(axis=0)
            stds = mat.std(axis=0)
            # constant columns leave rounding dust in the std, so the
            # degeneracy check has to be relative to the column magnitude
            floor = 1e-12 * np.maximum(1.0, np.abs(means))
            for j in np.flatnonzero(stds <= floor):
                name = labels[j] if labels is not None else f"column {j}"
                raise ConfigurationError(f"zero-variance {what} '{name}'")
            return means, stds

        fm, fs = stats(np.asarray(features, dtype=np.float64),
                       feature_labels, "feature")
        tm, ts = stats(np.asarray(targets, dtype=np.float64),
                       target_labels, "target")
        return cls(fm, fs, tm, ts)

    def transform_features(self, features: np.ndarray) -> np.ndarray:
        return (features - self.feature_means) / self.feature_stds

    def inverse_features(self, standardized: np.ndarray) -> np.ndarray:
        return standardized * self.feature_stds + self.feature_means

    def transform_targets(self, targets: np.ndarray) -> np.ndarray:
        return (targets - self.target_means) / self.target_stds

    def inverse_targets(self, standardized: np.ndarray) -> np.ndarray:
        return standardized * self.target_stds + self.target_means


@dataclass(frozen=True)
class EmulatorDataset:
    features: np.ndarray       # (n, freeDims + 16 + 1) raw units
    targets: np.ndarray        # (n, 13) raw units
    train_indices: np.ndarray  # shuffled; learning-curve subsets are prefixes
    test_indices: np.ndarray
    feature_labels: tuple
    target_labels: tuple

    def __len__(self) -> int:
        return self.features.shape[0]


def config_features(space: ParamSpace, configs) -> np.ndarray:
    """(n, freeDimension) raw variable values in canonical order."""
    free = [v.name for v in space.variables if v.kind != DERIVED]
    out = np.empty((len(configs), len(free)))
    for i, cfg in enumerate(configs):
        for j, name in enumerate(free):
            out[i, j] = float(getattr(cfg, FIELD_BY_NAME[name]))
    return out


def build_dataset(space: ParamSpace, configs, latents, lats, outputs,
                  test_fraction: float = 0.1, seed: int = 0) -> EmulatorDataset:
    latents = np.asarray(latents, dtype=np.float64)
    lats = np.asarray(lats, dtype=np.float64)
    outputs = np.asarray(outputs, dtype=np.float64)
    n = len(configs)
    if not (latents.shape[0] == lats.shape[0] == outputs.shape[0] == n):
        raise InputError("configs, latents, latitudes and outputs must have "
                         "matching row counts")
    if latents.shape[1] != 16:
        raise InputError(f"expected 16 latent columns, got {latents.shape[1]}")
    if not np.all(np.isfinite(latents)):
        raise InputError("latent matrix has non-finite entries")
    if not 0.0 < test_fraction < 1.0:
        raise ConfigurationError("test fraction must be in (0, 1)")

    features = np.hstack([config_features(space, configs), latents,
                          lats[:, None]])
    order = np.random.default_rng(seed).permutation(n)
    n_test = int(round(n * test_fraction))
    if n_test == 0 or n_test == n:
        raise ConfigurationError("split leaves an empty train or test side")
    return EmulatorDataset(features, outputs, order[n_test:], order[:n_test],
                           feature_names(space), tuple(OUTPUT_NAMES))
