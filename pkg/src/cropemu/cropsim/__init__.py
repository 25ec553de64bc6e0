"""Toy mechanistic maize oracle: daily phenology, light, water, nitrogen
and grain filling, standing in for a full process simulator."""

from .soils import (SOIL_TABLE, SoilProfile, nearest_texture_index,
                    pin_environment, soil_by_name, soil_names)
from .water import WaterFluxes, water_balance_step
from .simulate import (OUTPUT_NAMES, SimOutputs, lai_integral, potential_evap,
                       simulate, thermal_time)
from .batch import (DATASET_LATENT_COLUMNS, run_batch, read_dataset_csv,
                    write_dataset_csv)

__all__ = [
    "SOIL_TABLE", "SoilProfile", "nearest_texture_index", "pin_environment",
    "soil_by_name", "soil_names",
    "WaterFluxes", "water_balance_step",
    "OUTPUT_NAMES", "SimOutputs", "lai_integral", "potential_evap",
    "simulate", "thermal_time",
    "DATASET_LATENT_COLUMNS", "run_batch", "read_dataset_csv", "write_dataset_csv",
]
