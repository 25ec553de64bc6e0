"""Low-discrepancy design sampling over the crop trait space."""

from .sobol import MAX_DIMENSION, SobolState, sobol_points
from .space import (ParamSpace, TraitConfig, VariableDef, decode_sample,
                    default_space, encode_config)
from .design import DesignBatch, design_batch, write_design_csv, read_design_csv

__all__ = [
    "MAX_DIMENSION", "SobolState", "sobol_points",
    "ParamSpace", "TraitConfig", "VariableDef", "decode_sample",
    "default_space", "encode_config",
    "DesignBatch", "design_batch", "write_design_csv", "read_design_csv",
]
