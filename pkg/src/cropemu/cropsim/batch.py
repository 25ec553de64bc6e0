"""Batch execution: design configs x assigned weather -> dataset rows.

The dataset CSV carries 22 decoded inputs, a weather reference (key +
latitude), 16 weather-latent columns (left blank until the weather
models encode them), and the 13 oracle outputs.
"""

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..errors import InputError, ParseError
from ..sampling.space import FIELD_BY_NAME, config_from_values, config_values
from .simulate import OUTPUT_NAMES, simulate
from .soils import SoilProfile

TEMPRAD_LATENT_DIM = 10
RAIN_LATENT_DIM = 6
DATASET_LATENT_COLUMNS = tuple(
    [f"ztr{i}" for i in range(TEMPRAD_LATENT_DIM)]
    + [f"zrn{i}" for i in range(RAIN_LATENT_DIM)])


@dataclass(frozen=True)
class BatchResult:
    sobol_indices: tuple
    configs: tuple
    weather_keys: tuple     # one per row, indexes into the corpus by key
    weather_indices: tuple  # position of each row's series in the corpus list
    lats: np.ndarray
    outputs: np.ndarray     # rows x 13

    def __len__(self) -> int:
        return len(self.configs)


def _run_slice(args):
    configs, weather_list, weather_idx, soil = args
    return [simulate(c, weather_list[w], soil).as_array()
            for c, w in zip(configs, weather_idx)]


def run_batch(configs, sobol_indices, weather_list, soil: SoilProfile,
              seed: int = 0, jobs: int = 1) -> BatchResult:
    """Assign one weather series per config (seeded uniform draw) and run
    the oracle over every row."""
    if not weather_list:
        raise InputError("empty weather corpus")
    if len(configs) != len(sobol_indices):
        raise InputError("configs and sobol indices must align")
    n = len(configs)
    rng = np.random.default_rng(seed)
    weather_idx = rng.integers(0, len(weather_list), size=n)

    if jobs > 1 and n > 1:
        bounds = np.linspace(0, n, num=min(jobs, n) + 1, dtype=int)
        tasks = [(tuple(configs[a:b]), weather_list, weather_idx[a:b], soil)
                 for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        with ProcessPoolExecutor(max_workers=len(tasks)) as pool:
            chunks = list(pool.map(_run_slice, tasks))
        outputs = np.vstack([row for chunk in chunks for row in [np.array(chunk)]])
    else:
        outputs = np.array(_run_slice((configs, weather_list, weather_idx, soil)))

    keys = tuple(weather_list[w].key for w in weather_idx)
    lats = np.array([weather_list[w].lat for w in weather_idx])
    return BatchResult(tuple(sobol_indices), tuple(configs), keys,
                       tuple(int(w) for w in weather_idx), lats, outputs)


def write_dataset_csv(path, batch: BatchResult, latents: np.ndarray | None = None) -> None:
    names = list(FIELD_BY_NAME)
    header = (["sobol_index"] + names + ["weather_key", "lat"]
              + list(DATASET_LATENT_COLUMNS) + list(OUTPUT_NAMES))
    n = len(batch)
    if latents is not None:
        latents = np.asarray(latents)
        if latents.shape != (n, len(DATASET_LATENT_COLUMNS)):
            raise InputError(f"latents must be {n}x{len(DATASET_LATENT_COLUMNS)}")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(n):
            values = config_values(batch.configs[i])
            row = [batch.sobol_indices[i]]
            row += [repr(values[name]) for name in names]
            row += [batch.weather_keys[i], repr(float(batch.lats[i]))]
            if latents is None:
                row += [""] * len(DATASET_LATENT_COLUMNS)
            else:
                row += [repr(float(v)) for v in latents[i]]
            row += [repr(float(v)) for v in batch.outputs[i]]
            writer.writerow(row)


def read_dataset_csv(path) -> dict:
    """Parse a dataset CSV; absent latent entries come back as NaN."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError(f"{path}: empty file")
        expected = (["sobol_index"] + list(FIELD_BY_NAME) + ["weather_key", "lat"]
                    + list(DATASET_LATENT_COLUMNS) + list(OUTPUT_NAMES))
        if header != expected:
            raise ParseError(f"{path}: unexpected dataset header")
        sobol_indices, configs, keys, lats, latents, outputs = [], [], [], [], [], []
        n_vars = len(FIELD_BY_NAME)
        n_lat = len(DATASET_LATENT_COLUMNS)
        for row in reader:
            sobol_indices.append(int(row[0]))
            values = dict(zip(FIELD_BY_NAME, row[1:1 + n_vars]))
            configs.append(config_from_values(values))
            keys.append(row[1 + n_vars])
            lats.append(float(row[2 + n_vars]))
            raw = row[3 + n_vars:3 + n_vars + n_lat]
            latents.append([float(v) if v != "" else np.nan for v in raw])
            outputs.append([float(v) for v in row[3 + n_vars + n_lat:]])
    return {
        "sobol_indices": tuple(sobol_indices),
        "configs": tuple(configs),
        "weather_keys": tuple(keys),
        "lats": np.array(lats),
        "latents": np.array(latents).reshape(len(configs), n_lat),
        "outputs": np.array(outputs).reshape(len(configs), len(OUTPUT_NAMES)),
    }
