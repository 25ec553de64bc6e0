"""Weather data model, convolutional autoencoders, latent synthesis and
scenario perturbation."""

from .series import (DAYS_PER_YEAR, DEMO_SITES, WeatherSeries, load_weather_csv,
                     make_synthetic_series, synthetic_corpus, write_weather_csv)
from .metrics import (ChannelMetrics, OccurrenceMetrics, ReconMetrics,
                      channel_metrics, f1_score, occurrence_metrics,
                      reconstruction_metrics)
from .autoencoder import (RainAutoencoder, TempRadAutoencoder, decode_rain,
                          decode_temprad, encode_series, rain_channels,
                          reconstruct_series, temprad_channels, train_rain_ae,
                          train_temprad_ae)
from .serialize import load_autoencoder, save_autoencoder
from .synth import (LatentIndex, build_latent_index, synth_generate,
                    synth_latents)
from .scenario import SCENARIO_PRESETS, ScenarioSpec, scenario_perturb

__all__ = [
    "DAYS_PER_YEAR", "DEMO_SITES", "WeatherSeries", "load_weather_csv",
    "make_synthetic_series", "synthetic_corpus", "write_weather_csv",
    "ChannelMetrics", "OccurrenceMetrics", "ReconMetrics", "channel_metrics",
    "f1_score", "occurrence_metrics", "reconstruction_metrics",
    "RainAutoencoder", "TempRadAutoencoder", "decode_rain", "decode_temprad",
    "encode_series", "rain_channels", "reconstruct_series", "temprad_channels",
    "train_rain_ae", "train_temprad_ae",
    "load_autoencoder", "save_autoencoder",
    "LatentIndex", "build_latent_index", "synth_generate", "synth_latents",
    "SCENARIO_PRESETS", "ScenarioSpec", "scenario_perturb",
]
