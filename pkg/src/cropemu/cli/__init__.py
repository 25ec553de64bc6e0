"""Command-line front door for the emulation pipeline."""

from .config import RunConfig, load_config, parse_config
from .main import main
from .stages import ARTIFACTS, STAGE_ORDER, run_stage

__all__ = [
    "ARTIFACTS",
    "RunConfig",
    "STAGE_ORDER",
    "load_config",
    "main",
    "parse_config",
    "run_stage",
]
