"""Climate-scenario perturbation of historical or synthetic series.

Stand-ins for downscaled projection ensembles: mean warming, seasonal
peak amplification, wet-day frequency resampling, intensity scaling and
a heavy-tail boost above the 95th percentile of wet-day rain. Identity
parameters leave the series bit-identical.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError
from .series import DAYS_PER_YEAR, PERTURBED, WeatherSeries

SUMMER_PEAK_DOY = 197.0


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    delta_mean_t: float = 0.0
    seasonal_amplification: float = 1.0
    wet_day_frequency_factor: float = 1.0
    intensity_scale: float = 1.0
    extreme_quantile_boost: float = 1.0

    def __post_init__(self):
        for attr in ("seasonal_amplification", "wet_day_frequency_factor",
                     "intensity_scale", "extreme_quantile_boost"):
            if getattr(self, attr) <= 0.0:
                raise ConfigurationError(f"{attr} must be > 0")

    @property
    def is_identity(self) -> bool:
        return (self.delta_mean_t == 0.0
                and self.seasonal_amplification == 1.0
                and self.wet_day_frequency_factor == 1.0
                and self.intensity_scale == 1.0
                and self.extreme_quantile_boost == 1.0)


SCENARIO_PRESETS = {
    "control": ScenarioSpec("control"),
    "ssp245-like": ScenarioSpec("ssp245-like", delta_mean_t=2.5),
    "ssp585-like": ScenarioSpec("ssp585-like", delta_mean_t=5.0,
                                extreme_quantile_boost=1.5),
}


def scenario_perturb(base: WeatherSeries, spec: ScenarioSpec,
                     seed: int = 0) -> WeatherSeries:
    if spec.is_identity:
        return base.with_fields(source_tag=base.source_tag)
    rng = np.random.default_rng(seed)

    maxt = base.maxt.copy()
    mint = base.mint.copy()
    if spec.delta_mean_t != 0.0:
        maxt = maxt + spec.delta_mean_t
        mint = mint + spec.delta_mean_t
    if spec.seasonal_amplification != 1.0:
        day = np.arange(1.0, DAYS_PER_YEAR + 1)
        weight = 0.5 * (1.0 + np.cos(2.0 * math.pi * (day - SUMMER_PEAK_DOY)
                                     / DAYS_PER_YEAR))
        factor = 1.0 + (spec.seasonal_amplification - 1.0) * weight
        center = maxt.mean()
        # both temperatures scale around the same center with the same
        # positive factor, so the diurnal range stays nonnegative
        maxt = center + (maxt - center) * factor
        mint = center + (mint - center) * factor

    rain = base.rain.copy()
    if spec.wet_day_frequency_factor != 1.0:
        wet_idx = np.flatnonzero(rain > 0.0)
        dry_idx = np.flatnonzero(rain == 0.0)
        target = int(round(len(wet_idx) * spec.wet_day_frequency_factor))
        target = min(target, DAYS_PER_YEAR)
        if target < len(wet_idx):
            drop = rng.choice(wet_idx, size=len(wet_idx) - target, replace=False)
            rain[drop] = 0.0
        elif target > len(wet_idx) and len(wet_idx) > 0:
            add = rng.choice(dry_idx, size=min(target - len(wet_idx),
                                               len(dry_idx)), replace=False)
            rain[add] = rng.choice(rain[wet_idx], size=len(add), replace=True)
    if spec.intensity_scale != 1.0:
        rain = rain * spec.intensity_scale
    if spec.extreme_quantile_boost != 1.0:
        wet = rain > 0.0
        if np.any(wet):
            q95 = np.quantile(rain[wet], 0.95)
            heavy = rain > q95
            rain = np.where(heavy, rain * spec.extreme_quantile_boost, rain)

    return base.with_fields(maxt=maxt, mint=mint, rain=rain,
                            source_tag=PERTURBED)
