"""Design batches: consecutive Sobol points decoded into trait configs."""

import csv
from dataclasses import dataclass

from ..errors import InputError, ParseError
from .sobol import SobolState
from .space import (FIELD_BY_NAME, ParamSpace, TraitConfig, config_from_values,
                    config_values, decode_sample)

DEFAULT_SKIP = 1  # drop the all-zeros initial point


@dataclass(frozen=True)
class DesignBatch:
    space: ParamSpace
    skip_count: int
    configs: tuple          # TraitConfig per row
    sobol_indices: tuple    # absolute index in the underlying sequence

    def __len__(self) -> int:
        return len(self.configs)


def design_batch(space: ParamSpace, count: int, skip_count: int = DEFAULT_SKIP,
                 seed: int | None = None) -> DesignBatch:
    """Decode `count` consecutive points starting at `skip_count`.

    The sequence is deterministic; `seed` is accepted for interface
    symmetry with random designs and deliberately unused.
    """
    del seed
    if count < 1:
        raise InputError("count must be >= 1")
    state = SobolState(space.free_dimension, skip_count=skip_count)
    points = state.next_points(count)
    configs = tuple(decode_sample(space, p) for p in points)
    indices = tuple(range(skip_count, skip_count + count))
    return DesignBatch(space, skip_count, configs, indices)


def write_design_csv(path, batch: DesignBatch) -> None:
    names = list(FIELD_BY_NAME)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sobol_index"] + names)
        for idx, config in zip(batch.sobol_indices, batch.configs):
            row = config_values(config)
            writer.writerow([idx] + [repr(row[name]) for name in names])


def read_design_csv(path) -> tuple:
    """Returns (sobol_indices, configs) parsed back from write_design_csv."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[0] != "sobol_index":
            raise ParseError(f"{path}: not a design CSV")
        names = header[1:]
        missing = set(FIELD_BY_NAME) - set(names)
        if missing:
            raise ParseError(f"{path}: missing variables {sorted(missing)}")
        indices, configs = [], []
        for row in reader:
            indices.append(int(row[0]))
            values = dict(zip(names, row[1:]))
            configs.append(config_from_values(values))
    return tuple(indices), tuple(configs)
