"""Six static county soil/location profiles.

Values embedded verbatim; the root zone is a single 1000 mm bucket.
For trait discovery a config's environment variables are pinned to a
site by copying the site's measured values and snapping the texture
class to the nearest (LL15, DUL) pair.
"""

from dataclasses import dataclass

from ..errors import InputError
from ..sampling.space import TEXTURE_TABLE, TraitConfig, swcon_for_texture

ROOT_ZONE_DEPTH_MM = 1000.0


@dataclass(frozen=True)
class SoilProfile:
    county: str
    lon: float
    lat: float
    dul: float
    ll15: float
    carbon: float
    initial_water_percent: float
    f_inert: float
    cn2: float
    sat: float
    bd: float
    texture: str
    root_zone_depth: float = ROOT_ZONE_DEPTH_MM

    def __post_init__(self):
        assert self.ll15 < self.dul < self.sat
        assert self.sat <= 1.0 - self.bd / 2.65 + 1e-3  # porosity bound
        assert 0.0 <= self.initial_water_percent <= 100.0


SOIL_TABLE = (
    SoilProfile("Randolph", -90.0600, 38.0567, 0.4479, 0.3281, 0.0074, 92.71,
                0.7472, 100.00, 0.5469, 1.1982, "clay loam"),
    SoilProfile("Mason", -89.7201, 40.3537, 0.0967, 0.0406, 0.0066, 90.64,
                0.7780, 60.00, 0.4257, 1.5200, "sandy"),
    SoilProfile("Poweshiek", -92.2234, 41.5487, 0.3022, 0.1718, 0.0055, 69.68,
                0.7837, 92.67, 0.4285, 1.5117, "sandy loam"),
    SoilProfile("Bremer", -92.1385, 42.8147, 0.3134, 0.1631, 0.0293, 95.61,
                0.6214, 100.00, 0.5205, 1.2681, "sandy loam"),
    SoilProfile("Logan", -89.4897, 39.9315, 0.3661, 0.1604, 0.0118, 88.15,
                0.7317, 74.67, 0.4964, 1.3318, "sandy loam"),
    SoilProfile("Osceola", -95.8179, 43.3630, 0.3977, 0.2216, 0.0287, 83.18,
                0.6137, 99.33, 0.5761, 1.1208, "clay loam"),
)


def soil_names() -> tuple:
    return tuple(s.county for s in SOIL_TABLE)


def soil_by_name(name: str) -> SoilProfile:
    for soil in SOIL_TABLE:
        if soil.county.lower() == name.lower():
            return soil
    raise InputError(f"unknown soil {name!r}; choose from {soil_names()}")


def nearest_texture_index(ll15: float, dul: float) -> int:
    best, best_dist = 0, float("inf")
    for idx, (_, t_ll15, t_dul, _) in TEXTURE_TABLE.items():
        dist = abs(ll15 - t_ll15) + abs(dul - t_dul)
        if dist < best_dist:
            best, best_dist = idx, dist
    return best


def pin_environment(config: TraitConfig, soil: SoilProfile) -> TraitConfig:
    """Copy of `config` with all E variables taken from the site profile.

    Site measurements may fall outside the sampled design ranges; that is
    intentional, the ranges constrain sampling, not physical reality.
    """
    texture = nearest_texture_index(soil.ll15, soil.dul)
    return config.replace(
        soil_texture_index=texture,
        carbon=soil.carbon,
        initial_water_fraction=soil.initial_water_percent,
        f_inert=soil.f_inert,
        cn2_bare=soil.cn2,
        swcon=swcon_for_texture(texture),
    )
