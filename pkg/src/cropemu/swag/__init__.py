"""SWAG weight posterior, ensemble prediction and calibration metrics."""

from .posterior import (SwagConfig, SwagPosterior, finetune_collect,
                        load_posterior, save_posterior, swag_sample)
from .ensemble import (CalibrationReport, EnsemblePrediction,
                       calibration_metrics, cv_filter, ensemble_predict,
                       rank_environments_by_cv)

__all__ = [
    "SwagConfig", "SwagPosterior", "finetune_collect", "load_posterior",
    "save_posterior", "swag_sample",
    "CalibrationReport", "EnsemblePrediction", "calibration_metrics",
    "cv_filter", "ensemble_predict", "rank_environments_by_cv",
]
