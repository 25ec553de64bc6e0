"""Two-component PCA of the resilient trait space."""

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, InputError


@dataclass(frozen=True)
class PcaResult:
    coordinates: np.ndarray  # (n, components)
    explained: np.ndarray    # fraction of total variance per component
    loadings: np.ndarray     # (d, components), unit norm
    means: np.ndarray
    stds: np.ndarray


def pca_project(points: np.ndarray, components: int = 2) -> PcaResult:
    """Eigen-decomposition PCA on z-scored columns.

    The sign of each component is fixed by making its largest-magnitude
    loading positive, so results do not depend on numerical quirks of
    the solver or on input row order.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] < 2:
        raise InputError("at least 2 points are required")
    d = points.shape[1]
    if not 1 <= components <= d:
        raise ConfigurationError(f"components must lie in [1, {d}]")

    means = points.mean(axis=0)
    stds = points.std(axis=0)
    stds = np.where(stds > 1e-12, stds, 1.0)  # constant columns stay zero
    z = (points - means) / stds

    cov = np.cov(z, rowvar=False, ddof=1)
    cov = np.atleast_2d(cov)
    eigvals, eigvecs = np.linalg.eigh(cov)
    eigvals = np.clip(eigvals, 0.0, None)  # rounding can leave tiny negatives
    order = np.argsort(eigvals)[::-1][:components]

    loadings = eigvecs[:, order].copy()
    for c in range(loadings.shape[1]):
        peak = np.abs(loadings[:, c]).argmax()
        if loadings[peak, c] < 0.0:
            loadings[:, c] = -loadings[:, c]

    total = eigvals.sum()
    explained = (eigvals[order] / total if total > 0.0
                 else np.zeros(components))
    return PcaResult(z @ loadings, explained, loadings, means, stds)
