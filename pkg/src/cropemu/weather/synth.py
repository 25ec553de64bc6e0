"""Synthetic weather by convex combination of neighboring latent codes.

The neighbor search runs in a z-scored 17-column space (10 temp-rad
dims, 6 rain dims, latitude) with the latitude column upweighted so
same-region years dominate the neighborhoods. The combination itself
happens in raw latent space; decoding the mixed codes yields new,
physically consistent series.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, InputError
from .autoencoder import (RainAutoencoder, TempRadAutoencoder, decode_rain,
                          decode_temprad)
from .series import SYNTHETIC, WeatherSeries

DEFAULT_NEIGHBORS = 5
DEFAULT_LATITUDE_WEIGHT = 3.0


@dataclass(frozen=True)
class LatentIndex:
    latents: np.ndarray        # (N, 16) raw codes: 10 temp-rad + 6 rain
    lats: np.ndarray
    lons: np.ndarray
    years: tuple
    locations: tuple
    normalized: np.ndarray     # (N, 17) search space
    means: np.ndarray          # (17,)
    stds: np.ndarray           # (17,)
    latitude_weight: float

    def __len__(self) -> int:
        return len(self.latents)


def build_latent_index(latents: np.ndarray, series_list,
                       latitude_weight: float = DEFAULT_LATITUDE_WEIGHT) -> LatentIndex:
    latents = np.asarray(latents, dtype=np.float64)
    if latents.ndim != 2 or latents.shape[0] != len(series_list):
        raise InputError("latent matrix must have one row per series")
    if latitude_weight <= 1.0:
        raise ConfigurationError("latitude weight must exceed 1")
    lats = np.array([s.lat for s in series_list])
    lons = np.array([s.lon for s in series_list])
    columns = np.hstack([latents, lats[:, None]])
    means = columns.mean(axis=0)
    stds = columns.std(axis=0)
    stds = np.where(stds > 1e-12, stds, 1.0)
    normalized = (columns - means) / stds
    normalized[:, -1] *= latitude_weight
    return LatentIndex(latents, lats, lons,
                       tuple(s.year for s in series_list),
                       tuple(s.location for s in series_list),
                       normalized, means, stds, latitude_weight)


def _neighbors(index: LatentIndex, anchor: int, k: int,
               restrict_location: bool) -> np.ndarray:
    deltas = index.normalized - index.normalized[anchor]
    dist = np.einsum("ij,ij->i", deltas, deltas)
    dist[anchor] = np.inf
    if restrict_location:
        same = np.array([loc == index.locations[anchor]
                         for loc in index.locations])
        dist = np.where(same, dist, np.inf)
        if np.sum(np.isfinite(dist)) < k:
            raise ConfigurationError(
                f"not enough same-location neighbors for k={k}")
    order = np.argsort(dist, kind="stable")
    return order[:k]


def synth_latents(index: LatentIndex, count: int, k: int = DEFAULT_NEIGHBORS,
                  seed: int = 0, restrict_location: bool = False) -> tuple:
    """Mixed latent rows plus their interpolated lat/lon and anchor ids.

    Each row is a Dirichlet-weighted convex combination of an anchor and
    its k nearest corpus neighbors, taken in raw latent space.
    """
    if k < 1:
        raise ConfigurationError("k must be >= 1")
    if k >= len(index):
        raise ConfigurationError(f"k={k} needs a corpus larger than k")
    if count < 1:
        raise InputError("count must be >= 1")
    rng = np.random.default_rng(seed)

    mixed = np.empty((count, index.latents.shape[1]))
    mixed_lat = np.empty(count)
    mixed_lon = np.empty(count)
    anchors = rng.integers(0, len(index), size=count)
    for i, anchor in enumerate(anchors):
        nb = _neighbors(index, int(anchor), k, restrict_location)
        members = np.concatenate([[anchor], nb])
        weights = rng.dirichlet(np.ones(k + 1))
        mixed[i] = weights @ index.latents[members]
        mixed_lat[i] = weights @ index.lats[members]
        mixed_lon[i] = weights @ index.lons[members]
    return mixed, mixed_lat, mixed_lon, anchors


def synth_generate(index: LatentIndex, temprad: TempRadAutoencoder,
                   rain_model: RainAutoencoder, count: int,
                   k: int = DEFAULT_NEIGHBORS, seed: int = 0,
                   restrict_location: bool = False) -> list:
    """Sample `count` synthetic series; deterministic per seed."""
    mixed, mixed_lat, mixed_lon, anchors = synth_latents(
        index, count, k, seed, restrict_location)

    phys = decode_temprad(temprad, mixed[:, :temprad_latent_dim(index)])
    rain = decode_rain(rain_model, mixed[:, temprad_latent_dim(index):])
    out = []
    for i in range(count):
        anchor = int(anchors[i])
        out.append(WeatherSeries(
            location=f"synth-{index.locations[anchor]}-{i}",
            lat=float(mixed_lat[i]), lon=float(mixed_lon[i]),
            year=index.years[anchor],
            radn=phys[i, 2], maxt=phys[i, 0],
            mint=phys[i, 0] - phys[i, 1], rain=rain[i],
            source_tag=SYNTHETIC))
    return out


def temprad_latent_dim(index: LatentIndex) -> int:
    # 16 latent columns split 10 temp-rad / 6 rain
    return index.latents.shape[1] - 6
