"""The 22-variable maize design space.

Variables carry a group tag: G (genotype traits), E (environment/soil),
M (management). Two of the 22 are derived rather than sampled: SWCON
follows the soil texture class, and the texture class itself also fixes
the (LL15, DUL) pair with SAT = DUL + 0.10. The remaining 21 variables
form the free sampling dimension.
"""

from dataclasses import dataclass, replace

import numpy as np

from ..errors import ConfigurationError, InputError, ParseError

CONTINUOUS = "continuous"
CATEGORICAL_GRID = "categorical-grid"
CATEGORICAL_LEVELS = "categorical-levels"
DERIVED = "derived"

# texture class -> (LL15, DUL, SWCON); SAT is always DUL + 0.10
TEXTURE_TABLE = {
    0: ("sandy", 0.10, 0.20, 0.5),
    1: ("loam", 0.20, 0.33, 0.5),
    2: ("clay", 0.30, 0.46, 0.2),
}
SAT_OFFSET = 0.10

# FOMCrop flag -> initial fresh-organic-matter pools, kg/ha
FOM_POOLS = {0: (1000.0, 1000.0), 1: (1500.0, 1500.0)}


@dataclass(frozen=True)
class VariableDef:
    name: str
    group: str
    kind: str
    lower: float = 0.0
    upper: float = 0.0
    grid_step: float = 0.0
    levels: tuple = ()
    derivation_rule: str = ""

    def __post_init__(self):
        if self.group not in ("G", "E", "M"):
            raise ConfigurationError(f"{self.name}: group must be G, E or M")
        if self.kind in (CONTINUOUS, CATEGORICAL_GRID) and not self.lower < self.upper:
            raise ConfigurationError(f"{self.name}: needs lower < upper")
        if self.kind == CATEGORICAL_GRID and self.grid_step <= 0:
            raise ConfigurationError(f"{self.name}: grid step must be > 0")
        if self.kind == CATEGORICAL_LEVELS and not self.levels:
            raise ConfigurationError(f"{self.name}: needs explicit levels")
        if self.kind == DERIVED and not self.derivation_rule:
            raise ConfigurationError(f"{self.name}: derived variable needs a rule")
        if self.kind not in (CONTINUOUS, CATEGORICAL_GRID, CATEGORICAL_LEVELS, DERIVED):
            raise ConfigurationError(f"{self.name}: unknown kind {self.kind!r}")

    @property
    def grid_values(self) -> np.ndarray:
        if self.kind != CATEGORICAL_GRID:
            raise ConfigurationError(f"{self.name} has no grid")
        count = int(round((self.upper - self.lower) / self.grid_step)) + 1
        return self.lower + self.grid_step * np.arange(count)

    def decode(self, u: float) -> float:
        if not 0.0 <= u < 1.0:
            raise InputError(f"{self.name}: coordinate {u} outside [0,1)")
        if self.kind == CONTINUOUS:
            return self.lower + u * (self.upper - self.lower)
        if self.kind == CATEGORICAL_GRID:
            values = self.grid_values
            idx = min(int(u * len(values)), len(values) - 1)
            return float(values[idx])
        if self.kind == CATEGORICAL_LEVELS:
            idx = min(int(u * len(self.levels)), len(self.levels) - 1)
            return float(self.levels[idx])
        raise ConfigurationError(f"{self.name}: derived variables are not sampled")

    def encode(self, value: float) -> float:
        """Unit coordinate whose decode returns `value` (cell midpoint for
        categorical kinds)."""
        if self.kind == CONTINUOUS:
            return (value - self.lower) / (self.upper - self.lower)
        if self.kind == CATEGORICAL_GRID:
            values = self.grid_values
            idx = int(np.argmin(np.abs(values - value)))
            return (idx + 0.5) / len(values)
        if self.kind == CATEGORICAL_LEVELS:
            idx = int(np.argmin(np.abs(np.asarray(self.levels) - value)))
            return (idx + 0.5) / len(self.levels)
        raise ConfigurationError(f"{self.name}: derived variables have no coordinate")


def _variables() -> tuple:
    v = VariableDef
    return (
        v("ShootLag", "G", CATEGORICAL_GRID, 45, 65, 1),
        v("ShootRate", "G", CONTINUOUS, 0.4, 0.8),
        v("JuvenileTarget", "G", CATEGORICAL_GRID, 200, 240, 1),
        v("FloweringToGrainFillingTarget", "G", CATEGORICAL_GRID, 100, 200, 1),
        v("GrainFillingTarget", "G", CATEGORICAL_GRID, 600, 800, 1),
        v("MaximumPotentialGrainSize", "G", CATEGORICAL_GRID, 250, 350, 1),
        v("MaximumGrainsPerCob", "G", CATEGORICAL_GRID, 500, 1000, 1),
        v("FinalNconc", "G", CONTINUOUS, 0.0067, 0.016),
        v("TemperatureFactor1", "G", CATEGORICAL_GRID, 5, 12, 1),
        v("TemperatureFactor2", "G", CATEGORICAL_GRID, 20, 27, 1),
        v("PotentialExtinctionCoeff", "G", CONTINUOUS, 0.3, 0.5),
        v("RUE", "G", CONTINUOUS, 1.6, 2.2),
        v("soilTextureIndex", "E", CATEGORICAL_LEVELS, levels=(0, 1, 2)),
        v("Carbon", "E", CONTINUOUS, 0.01, 0.05),
        v("InitialWaterFraction", "E", CATEGORICAL_GRID, 50, 100, 1),
        v("FInert", "E", CATEGORICAL_LEVELS, levels=(0.25, 0.5, 0.75)),
        v("CN2Bare", "E", CONTINUOUS, 60, 100),
        v("SWCON", "E", DERIVED, derivation_rule="texture-swcon"),
        v("FOMCrop", "E", CATEGORICAL_LEVELS, levels=(0, 1)),
        v("Population", "M", CATEGORICAL_GRID, 5, 9, 1),
        v("StartDateOffset", "M", CATEGORICAL_GRID, 0, 50, 1),
        v("FertilizeAtSowing", "M", CATEGORICAL_GRID, 30, 350, 10),
    )


@dataclass(frozen=True)
class ParamSpace:
    variables: tuple

    @property
    def free_dimension(self) -> int:
        return sum(1 for v in self.variables if v.kind != DERIVED)

    @property
    def names(self) -> tuple:
        return tuple(v.name for v in self.variables)

    def variable(self, name: str) -> VariableDef:
        for v in self.variables:
            if v.name == name:
                return v
        raise ConfigurationError(f"no variable named {name!r}")

    def group_names(self, group: str) -> tuple:
        return tuple(v.name for v in self.variables if v.group == group)


def default_space() -> ParamSpace:
    return ParamSpace(_variables())


@dataclass(frozen=True)
class TraitConfig:
    """One fully decoded design point; attribute order mirrors the space."""
    shoot_lag: float
    shoot_rate: float
    juvenile_target: float
    flowering_to_grain_filling_target: float
    grain_filling_target: float
    maximum_potential_grain_size: float  # mg per grain as sampled
    maximum_grains_per_cob: float
    final_n_conc: float
    temperature_factor1: float
    temperature_factor2: float
    potential_extinction_coeff: float
    rue: float
    soil_texture_index: int
    carbon: float
    initial_water_fraction: float
    f_inert: float
    cn2_bare: float
    swcon: float
    fom_crop: int
    population: float
    start_date_offset: int
    fertilize_at_sowing: float

    @property
    def ll15(self) -> float:
        return TEXTURE_TABLE[self.soil_texture_index][1]

    @property
    def dul(self) -> float:
        return TEXTURE_TABLE[self.soil_texture_index][2]

    @property
    def sat(self) -> float:
        return self.dul + SAT_OFFSET

    @property
    def texture_label(self) -> str:
        return TEXTURE_TABLE[self.soil_texture_index][0]

    @property
    def fom_pools(self) -> tuple:
        return FOM_POOLS[self.fom_crop]

    def replace(self, **kw) -> "TraitConfig":
        return replace(self, **kw)


# CSV/attribute correspondence, in canonical variable order
FIELD_BY_NAME = {
    "ShootLag": "shoot_lag",
    "ShootRate": "shoot_rate",
    "JuvenileTarget": "juvenile_target",
    "FloweringToGrainFillingTarget": "flowering_to_grain_filling_target",
    "GrainFillingTarget": "grain_filling_target",
    "MaximumPotentialGrainSize": "maximum_potential_grain_size",
    "MaximumGrainsPerCob": "maximum_grains_per_cob",
    "FinalNconc": "final_n_conc",
    "TemperatureFactor1": "temperature_factor1",
    "TemperatureFactor2": "temperature_factor2",
    "PotentialExtinctionCoeff": "potential_extinction_coeff",
    "RUE": "rue",
    "soilTextureIndex": "soil_texture_index",
    "Carbon": "carbon",
    "InitialWaterFraction": "initial_water_fraction",
    "FInert": "f_inert",
    "CN2Bare": "cn2_bare",
    "SWCON": "swcon",
    "FOMCrop": "fom_crop",
    "Population": "population",
    "StartDateOffset": "start_date_offset",
    "FertilizeAtSowing": "fertilize_at_sowing",
}

_INT_FIELDS = ("soil_texture_index", "fom_crop", "start_date_offset")


def swcon_for_texture(texture_index: int) -> float:
    try:
        return TEXTURE_TABLE[int(texture_index)][3]
    except KeyError:
        raise InputError(f"texture index must be 0, 1 or 2, got {texture_index}")


def config_from_values(values: dict) -> TraitConfig:
    kwargs = {}
    for name, field in FIELD_BY_NAME.items():
        if name not in values:
            raise InputError(f"missing variable {name}")
        raw = values[name]
        kwargs[field] = int(raw) if field in _INT_FIELDS else float(raw)
    return TraitConfig(**kwargs)


def decode_sample(space: ParamSpace, point) -> TraitConfig:
    """Unit-hypercube coordinates -> typed config; derived values last."""
    point = np.asarray(point, dtype=np.float64)
    if point.shape != (space.free_dimension,):
        raise InputError(
            f"point must have {space.free_dimension} coordinates, got {point.shape}")
    values, cursor = {}, 0
    for var in space.variables:
        if var.kind == DERIVED:
            continue
        values[var.name] = var.decode(float(point[cursor]))
        cursor += 1
    values["SWCON"] = swcon_for_texture(values["soilTextureIndex"])
    return config_from_values(values)


def encode_config(space: ParamSpace, config: TraitConfig) -> np.ndarray:
    coords = []
    for var in space.variables:
        if var.kind == DERIVED:
            continue
        coords.append(var.encode(getattr(config, FIELD_BY_NAME[var.name])))
    return np.asarray(coords)


def config_values(config: TraitConfig) -> dict:
    return {name: getattr(config, field) for name, field in FIELD_BY_NAME.items()}


def space_to_text(space: ParamSpace) -> str:
    """Plain-text definition, one variable per line."""
    lines = ["# name group kind spec"]
    for v in space.variables:
        if v.kind == CONTINUOUS:
            lines.append(f"{v.name} {v.group} {v.kind} {v.lower!r} {v.upper!r}")
        elif v.kind == CATEGORICAL_GRID:
            lines.append(f"{v.name} {v.group} {v.kind} {v.lower!r} {v.upper!r} {v.grid_step!r}")
        elif v.kind == CATEGORICAL_LEVELS:
            levels = ",".join(repr(x) for x in v.levels)
            lines.append(f"{v.name} {v.group} {v.kind} {levels}")
        else:
            lines.append(f"{v.name} {v.group} {v.kind} {v.derivation_rule}")
    return "\n".join(lines) + "\n"


def space_from_text(text: str) -> ParamSpace:
    variables = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 4:
            raise ParseError(f"line {lineno}: expected at least 4 fields")
        name, group, kind = parts[0], parts[1], parts[2]
        try:
            if kind == CONTINUOUS:
                variables.append(VariableDef(name, group, kind,
                                             float(parts[3]), float(parts[4])))
            elif kind == CATEGORICAL_GRID:
                variables.append(VariableDef(name, group, kind, float(parts[3]),
                                             float(parts[4]), float(parts[5])))
            elif kind == CATEGORICAL_LEVELS:
                levels = tuple(float(x) for x in parts[3].split(","))
                variables.append(VariableDef(name, group, kind, levels=levels))
            elif kind == DERIVED:
                variables.append(VariableDef(name, group, kind,
                                             derivation_rule=parts[3]))
            else:
                raise ParseError(f"line {lineno}: unknown kind {kind!r}")
        except (ValueError, IndexError) as exc:
            raise ParseError(f"line {lineno}: {exc}") from exc
    space = ParamSpace(tuple(variables))
    if len(space.variables) != len(set(space.names)):
        raise ParseError("duplicate variable names")
    return space
