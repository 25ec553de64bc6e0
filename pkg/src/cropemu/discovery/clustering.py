"""Lloyd k-means over z-scored trait vectors plus cluster summaries."""

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, InputError
from ..sampling.space import DERIVED, FIELD_BY_NAME, ParamSpace

MAX_LLOYD_ITERATIONS = 200


def genotype_names(space: ParamSpace) -> tuple:
    return tuple(v.name for v in space.variables
                 if v.group == "G" and v.kind != DERIVED)


def genotype_matrix(space: ParamSpace, configs) -> np.ndarray:
    """(n, traits) raw genotype values in canonical variable order."""
    names = genotype_names(space)
    out = np.empty((len(configs), len(names)))
    for i, cfg in enumerate(configs):
        for j, name in enumerate(names):
            out[i, j] = float(getattr(cfg, FIELD_BY_NAME[name]))
    return out


def _kmeans_pp_init(points: np.ndarray, k: int, rng) -> np.ndarray:
    """k-means++ seeding: spread the initial centers by squared distance."""
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    closest = np.full(n, np.inf)
    for c in range(1, k):
        dist = ((points - centers[c - 1]) ** 2).sum(axis=1)
        closest = np.minimum(closest, dist)
        total = closest.sum()
        if total <= 0.0:
            # all remaining points coincide with a chosen center
            centers[c:] = points[rng.integers(n, size=k - c)]
            break
        centers[c] = points[rng.choice(n, p=closest / total)]
    return centers


def _assign(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    return d2.argmin(axis=1)


def _sse(points: np.ndarray, centers: np.ndarray,
         assignments: np.ndarray) -> float:
    return float(((points - centers[assignments]) ** 2).sum())


@dataclass(frozen=True)
class KMeansResult:
    assignments: np.ndarray
    centers: np.ndarray
    sse: float
    sse_trace: tuple   # per-iteration SSE of the winning restart


def kmeans(points: np.ndarray, k: int, seed: int = 0,
           restarts: int = 8) -> KMeansResult:
    """Best-of-restarts Lloyd iterations; deterministic per seed."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] == 0:
        raise InputError("points must be a nonempty 2-D array")
    if k < 1:
        raise ConfigurationError("k must be >= 1")
    if points.shape[0] < k:
        raise ConfigurationError(
            f"{points.shape[0]} points cannot form {k} clusters")
    if restarts < 1:
        raise ConfigurationError("restarts must be >= 1")

    best = None
    for restart in range(restarts):
        rng = np.random.default_rng((seed, restart))
        centers = _kmeans_pp_init(points, k, rng)
        assignments = _assign(points, centers)
        trace = [_sse(points, centers, assignments)]
        for _ in range(MAX_LLOYD_ITERATIONS):
            for c in range(k):
                mask = assignments == c
                if mask.any():
                    centers[c] = points[mask].mean(axis=0)
                else:
                    # re-seat an emptied cluster at the worst-fit point
                    worst = ((points - centers[assignments]) ** 2) \
                        .sum(axis=1).argmax()
                    centers[c] = points[worst]
            new_assignments = _assign(points, centers)
            trace.append(_sse(points, centers, new_assignments))
            if np.array_equal(new_assignments, assignments):
                break
            assignments = new_assignments
        candidate = KMeansResult(assignments, centers.copy(), trace[-1],
                                 tuple(trace))
        if best is None or candidate.sse < best.sse:
            best = candidate
    return best


@dataclass(frozen=True)
class ClusterSummary:
    cluster_count: int
    trait_names: tuple
    assignments: np.ndarray          # cluster index per resilient config
    trait_means: np.ndarray          # (k, traits) raw units
    yield_mean: np.ndarray           # (k,) pooled over locations
    yield_std: np.ndarray            # (k,)
    best_cluster_per_location: dict  # location -> cluster index
    sse: float


def cluster_summary(traits: np.ndarray, trait_names,
                    yields_by_location: dict, k: int = 4, seed: int = 0,
                    restarts: int = 8) -> ClusterSummary:
    """Cluster resilient trait vectors and summarize in raw units.

    `yields_by_location` maps a location name to the predicted yield of
    each resilient config there; the best cluster per location is the
    one with the highest mean predicted yield.
    """
    traits = np.asarray(traits, dtype=np.float64)
    trait_names = tuple(trait_names)
    if traits.ndim != 2 or traits.shape[1] != len(trait_names):
        raise InputError("traits and trait_names must align")
    if not yields_by_location:
        raise InputError("at least one location is required")
    for loc, y in yields_by_location.items():
        if np.asarray(y).shape != (traits.shape[0],):
            raise InputError(f"yields for '{loc}' must have one entry per "
                             "config")

    means = traits.mean(axis=0)
    stds = traits.std(axis=0)
    stds = np.where(stds > 1e-12, stds, 1.0)
    result = kmeans((traits - means) / stds, k, seed=seed, restarts=restarts)

    trait_means = np.empty((k, traits.shape[1]))
    yield_mean = np.empty(k)
    yield_std = np.empty(k)
    stacked = np.column_stack([np.asarray(yields_by_location[loc],
                                          dtype=np.float64)
                               for loc in sorted(yields_by_location)])
    for c in range(k):
        mask = result.assignments == c
        trait_means[c] = traits[mask].mean(axis=0)
        pooled = stacked[mask].ravel()
        yield_mean[c] = pooled.mean()
        yield_std[c] = pooled.std()

    best = {}
    for j, loc in enumerate(sorted(yields_by_location)):
        per_cluster = np.array([stacked[result.assignments == c, j].mean()
                                for c in range(k)])
        best[loc] = int(per_cluster.argmax())

    return ClusterSummary(k, trait_names, result.assignments, trait_means,
                          yield_mean, yield_std, best, result.sse)
