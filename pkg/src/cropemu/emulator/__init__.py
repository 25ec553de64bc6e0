"""Neural emulator of the crop oracle: dataset assembly, training,
evaluation, learning curves and model serialization."""

from .dataset import (EmulatorDataset, Standardizer, build_dataset,
                      config_features, feature_names)
from .train import (DESK_HIDDEN, PAPER_HIDDEN, EmulatorModel,
                    LearningCurvePoint, RegressionReport, emulator_spec,
                    evaluate, evaluate_split, learning_curve, train_emulator)
from .serialize import load_emulator, save_emulator

__all__ = [
    "EmulatorDataset", "Standardizer", "build_dataset", "config_features",
    "feature_names",
    "DESK_HIDDEN", "PAPER_HIDDEN", "EmulatorModel", "LearningCurvePoint",
    "RegressionReport", "emulator_spec", "evaluate", "evaluate_split",
    "learning_curve", "train_emulator",
    "load_emulator", "save_emulator",
]
