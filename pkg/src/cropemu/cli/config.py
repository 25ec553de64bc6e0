"""Declarative run configuration.

One JSON file drives every pipeline stage. Parsing is strict: unknown
keys are rejected with their full path so typos fail before any stage
spends compute.
"""

import hashlib
import json
from dataclasses import dataclass, field, fields

from ..errors import ConfigurationError, ParseError
from ..weather.scenario import SCENARIO_PRESETS

MANAGEMENT_VARIABLES = ("Population", "StartDateOffset", "FertilizeAtSowing")


@dataclass(frozen=True)
class PathsConfig:
    output_dir: str = "cropemu-out"
    weather_csv: str = ""   # empty: use the bundled synthetic corpus


@dataclass(frozen=True)
class SamplingConfig:
    count: int = 20000
    skip: int = 1
    seed: int = 0


@dataclass(frozen=True)
class OracleConfig:
    soil: str = ""          # empty: soil follows each series' location
    jobs: int = 1


@dataclass(frozen=True)
class WeatherConfig:
    epochs: int = 150
    temprad_learning_rate: float = 1e-3
    rain_learning_rate: float = 5e-4
    batch_size: int = 96
    seed: int = 0
    synth_count: int = 18
    neighbors: int = 5
    latitude_weight: float = 3.0
    scenarios: tuple = ("control", "ssp245-like", "ssp585-like")
    variants: int = 2


@dataclass(frozen=True)
class EmulatorSection:
    hidden: tuple = (64, 64, 64, 32)
    learning_rate: float = 1e-3
    weight_decay: float = 1e-4
    epochs: int = 150
    batch_size: int = 256
    test_fraction: float = 0.1
    seed: int = 0
    curve_sizes: tuple = ()


@dataclass(frozen=True)
class SwagSection:
    learning_rate: float = 1e-2
    momentum: float = 0.9
    weight_decay: float = 1e-4
    total_epochs: int = 30
    collect_from_epoch: int = 21
    sample_count: int = 30
    max_rank: int = 10
    batch_size: int = 256
    bn_rows: int = 512
    seed: int = 0


@dataclass(frozen=True)
class DiscoverySection:
    count: int = 500
    top_k: int = 50
    cv_default_threshold: float = 0.5
    cv_relaxed_threshold: float = 1.0
    cv_relaxed_env_count: int = 4
    cluster_count: int = 4
    cluster_restarts: int = 8
    importance_repeats: int = 10
    pca_components: int = 2
    management: dict = field(default_factory=lambda: {
        "Population": 7, "StartDateOffset": 10, "FertilizeAtSowing": 180})
    seed: int = 0


_SECTIONS = {
    "paths": PathsConfig,
    "sampling": SamplingConfig,
    "oracle": OracleConfig,
    "weather": WeatherConfig,
    "emulator": EmulatorSection,
    "swag": SwagSection,
    "discovery": DiscoverySection,
}


@dataclass(frozen=True)
class RunConfig:
    paths: PathsConfig = field(default_factory=PathsConfig)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)
    weather: WeatherConfig = field(default_factory=WeatherConfig)
    emulator: EmulatorSection = field(default_factory=EmulatorSection)
    swag: SwagSection = field(default_factory=SwagSection)
    discovery: DiscoverySection = field(default_factory=DiscoverySection)

    def effective(self) -> dict:
        """Full settings tree with defaults filled in."""
        out = {}
        for name, section in _SECTIONS.items():
            block = getattr(self, name)
            out[name] = {f.name: _plain(getattr(block, f.name))
                         for f in fields(section)}
        return out

    def sha256(self) -> str:
        dump = json.dumps(self.effective(), sort_keys=True,
                          separators=(",", ":"))
        return hashlib.sha256(dump.encode("utf-8")).hexdigest()


def _plain(value):
    if isinstance(value, tuple):
        return list(value)
    if isinstance(value, dict):
        return dict(sorted(value.items()))
    return value


def _coerce(path: str, value, default):
    """Match `value` against the type of the field default."""
    if isinstance(default, bool):
        raise ConfigurationError(f"{path}: no boolean settings exist")
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigurationError(f"{path}: expected an integer, "
                                     f"got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"{path}: expected a number, "
                                     f"got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigurationError(f"{path}: expected a string, "
                                     f"got {value!r}")
        return value
    if isinstance(default, tuple):
        if not isinstance(value, list):
            raise ConfigurationError(f"{path}: expected a list, got {value!r}")
        element = default[0] if default else 0
        return tuple(_coerce(f"{path}[{i}]", v, element)
                     for i, v in enumerate(value))
    if isinstance(default, dict):
        if not isinstance(value, dict):
            raise ConfigurationError(f"{path}: expected an object, "
                                     f"got {value!r}")
        return value
    raise ConfigurationError(f"{path}: unsupported setting type")


def _parse_section(name: str, cls, data: dict):
    template = cls()
    known = {f.name for f in fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigurationError(f"unknown key '{name}.{key}'")
        kwargs[key] = _coerce(f"{name}.{key}", value,
                              getattr(template, key))
    return cls(**kwargs)


def _validate(cfg: RunConfig) -> None:
    def positive(path, value):
        if value < 1:
            raise ConfigurationError(f"{path} must be >= 1, got {value}")

    positive("sampling.count", cfg.sampling.count)
    if cfg.sampling.skip < 1:
        raise ConfigurationError("sampling.skip must be >= 1")
    positive("oracle.jobs", cfg.oracle.jobs)
    positive("weather.epochs", cfg.weather.epochs)
    positive("weather.variants", cfg.weather.variants)
    positive("weather.neighbors", cfg.weather.neighbors)
    if cfg.weather.synth_count < 0:
        raise ConfigurationError("weather.synth_count must be >= 0")
    if not cfg.weather.scenarios:
        raise ConfigurationError("weather.scenarios must not be empty")
    for scen in cfg.weather.scenarios:
        if scen not in SCENARIO_PRESETS:
            raise ConfigurationError(
                f"weather.scenarios: unknown preset '{scen}'; known: "
                f"{', '.join(sorted(SCENARIO_PRESETS))}")
    if not cfg.emulator.hidden:
        raise ConfigurationError("emulator.hidden must not be empty")
    positive("emulator.epochs", cfg.emulator.epochs)
    if not 0.0 < cfg.emulator.test_fraction < 1.0:
        raise ConfigurationError("emulator.test_fraction must lie in (0, 1)")
    positive("swag.bn_rows", cfg.swag.bn_rows)
    positive("discovery.count", cfg.discovery.count)
    positive("discovery.top_k", cfg.discovery.top_k)
    if cfg.discovery.top_k > cfg.discovery.count:
        raise ConfigurationError("discovery.top_k cannot exceed "
                                 "discovery.count")
    positive("discovery.cluster_count", cfg.discovery.cluster_count)
    positive("discovery.importance_repeats", cfg.discovery.importance_repeats)
    for key, value in cfg.discovery.management.items():
        if key not in MANAGEMENT_VARIABLES:
            raise ConfigurationError(
                f"discovery.management: unknown variable '{key}'; expected "
                f"one of {', '.join(MANAGEMENT_VARIABLES)}")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(
                f"discovery.management.{key}: expected a number, "
                f"got {value!r}")


def parse_config(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigurationError("config root must be a JSON object")
    kwargs = {}
    for key, value in data.items():
        if key not in _SECTIONS:
            raise ConfigurationError(f"unknown key '{key}'")
        if not isinstance(value, dict):
            raise ConfigurationError(f"{key}: expected an object, "
                                     f"got {value!r}")
        kwargs[key] = _parse_section(key, _SECTIONS[key], value)
    cfg = RunConfig(**kwargs)
    _validate(cfg)
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    return parse_config(data)
