"""Daily maize growth oracle.

Deliberately simple process model: thermal-time phenology through five
stages, logistic canopy growth, exponential light interception, a
curve-number bucket water balance, a nitrogen pool fed by fertilizer and
mineralization, and sink/source-limited grain filling. Every one of the
22 design variables influences at least one output, and yield is built
multiplicative in RUE (canopy and stress dynamics never read biomass),
which makes RUE monotonicity provable rather than empirical.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InputError, NumericError
from ..sampling.space import TraitConfig
from ..weather.series import WeatherSeries
from .soils import SoilProfile
from .water import water_balance_step

SOWING_DOY = 121          # May 1, non-leap calendar
SOWING_DEPTH_MM = 30.0
MIN_SEASON_DAYS = 30

LATENT_HEAT = 2.45        # MJ per kg water
PT_COEFF = 0.8

LAI_SEED = 0.1
LAI_RATE = 0.025          # logistic gain per degree-day
LAI_PER_PLANT = 0.65
SENESCENCE_RATE = 0.05

GNF_MIDPOINT = 15.0       # g m-2 d-1 growth at half grain set
GNF_SCALE = 5.0
GRAIN_FILL_FRACTION = 0.9
RETRANS_RATE = 0.005
ROOT_FRACTION = 0.12

N_DEMAND_PER_DAY = 4.0    # kg/ha at reference population
N_REF_POPULATION = 7.0
NFAC_FLOOR = 0.25
MINERALIZATION_COEFF = 25.0
FOM_N_FRACTION = 0.004
FOM_RELEASE_RATE = 0.002
TT_REF = 20.0             # degree-days for full-rate soil biology

DRYING_DAYS_TO_HARVEST = 7

STAGE_PRE_EMERGENCE = 0
STAGE_JUVENILE = 1
STAGE_FLOWERING_WINDOW = 2
STAGE_GRAIN_FILL = 3
STAGE_END_GRAIN_FILL = 4

OUTPUT_NAMES = (
    "DAPtoFlowering", "DAPtoMaturity", "DAPtoHarvesting", "LAIIntegral",
    "AboveGroundWt", "GrainSize", "GrainTotalWt", "TotalWt", "GrainN",
    "AboveGroundN", "LeafTranspiration", "SoilWaterEs", "GrainNumberFunction",
)


@dataclass(frozen=True)
class SimOutputs:
    dap_to_flowering: float
    dap_to_maturity: float
    dap_to_harvesting: float
    lai_integral: float
    above_ground_wt: float     # kg/ha
    grain_size: float          # g per grain
    grain_total_wt: float      # g/m2
    total_wt: float            # g/m2
    grain_n: float             # g/m2
    above_ground_n: float      # kg/ha
    leaf_transpiration: float  # mm
    soil_water_es: float       # mm
    grain_number_function: float

    def as_array(self) -> np.ndarray:
        return np.array([
            self.dap_to_flowering, self.dap_to_maturity, self.dap_to_harvesting,
            self.lai_integral, self.above_ground_wt, self.grain_size,
            self.grain_total_wt, self.total_wt, self.grain_n,
            self.above_ground_n, self.leaf_transpiration, self.soil_water_es,
            self.grain_number_function,
        ])

    @staticmethod
    def from_array(values) -> "SimOutputs":
        values = [float(v) for v in values]
        if len(values) != len(OUTPUT_NAMES):
            raise InputError(f"expected {len(OUTPUT_NAMES)} outputs")
        return SimOutputs(*values)


def thermal_time(max_t: float, min_t: float, base_t: float, opt_t: float) -> float:
    mean = 0.5 * (max_t + min_t)
    return min(max(mean, base_t), opt_t) - base_t


def lai_integral(daily_lai) -> float:
    daily_lai = np.asarray(daily_lai, dtype=np.float64)
    if daily_lai.size < 2:
        raise InputError("LAI series needs at least 2 days")
    return float(np.trapezoid(daily_lai))


def potential_evap(radn: float, mean_t: float) -> float:
    """Priestley-Taylor flavored: radiation-equivalent mm scaled by warmth."""
    warmth = min(max(mean_t / 30.0, 0.05), 1.2)
    return PT_COEFF * (radn / LATENT_HEAT) * warmth


def _grain_number_function(mean_growth: float) -> float:
    return 1.0 / (1.0 + math.exp(-(mean_growth - GNF_MIDPOINT) / GNF_SCALE))


def simulate(config: TraitConfig, weather: WeatherSeries,
             soil: SoilProfile) -> SimOutputs:
    sow = SOWING_DOY - 1 + int(config.start_date_offset)
    season_days = len(weather.maxt) - sow
    if season_days < MIN_SEASON_DAYS:
        raise InputError(
            f"weather covers only {season_days} days after sowing offset "
            f"{config.start_date_offset}")

    maxt = weather.maxt[sow:]
    mint = weather.mint[sow:]
    radn = weather.radn[sow:]
    rain = weather.rain[sow:]
    mean_t = 0.5 * (maxt + mint)

    tf1, tf2 = config.temperature_factor1, config.temperature_factor2
    tt = np.clip(mean_t, tf1, tf2) - tf1
    warmth = np.clip(mean_t / 30.0, 0.05, 1.2)
    pe = PT_COEFF * (radn / LATENT_HEAT) * warmth
    f_tt = np.clip(tt / TT_REF, 0.0, 1.0)

    ll15, dul, sat, swcon = config.ll15, config.dul, config.sat, config.swcon
    depth = soil.root_zone_depth
    water = (ll15 + (config.initial_water_fraction / 100.0) * (dul - ll15)) * depth

    stage = STAGE_PRE_EMERGENCE
    stage_tt = 0.0
    targets = {
        STAGE_PRE_EMERGENCE: config.shoot_lag + SOWING_DEPTH_MM * config.shoot_rate,
        STAGE_JUVENILE: config.juvenile_target,
        STAGE_FLOWERING_WINDOW: config.flowering_to_grain_filling_target,
        STAGE_GRAIN_FILL: config.grain_filling_target,
    }
    dap_flowering = dap_maturity = dap_harvest = 0

    lai = 0.0
    lai_max = LAI_PER_PLANT * config.population
    k = config.potential_extinction_coeff
    lai_series = [0.0]  # sowing-day value, before any growth

    biomass = 0.0        # above-ground, g/m2, grain included
    grain = 0.0
    window_growth = 0.0
    window_days = 0
    gnf = 0.0
    grain_number = 0.0
    sink_cap = 0.0

    n_pool = float(config.fertilize_at_sowing)   # kg/ha
    fom_n = (config.fom_pools[0] + config.fom_pools[1]) * FOM_N_FRACTION
    n_uptake_total = 0.0
    mineral_rate = MINERALIZATION_COEFF * config.carbon * (1.0 - config.f_inert)

    # frozen at maturity (biomass and nitrogen are recorded there)
    at_maturity = None

    transp_sum = 0.0
    evap_sum = 0.0
    drying_days = 0

    for d in range(season_days):
        dap = d + 1
        tt_d = float(tt[d])

        cover = 1.0 - math.exp(-k * lai)
        fluxes = water_balance_step(water, float(rain[d]), config.cn2_bare,
                                    cover, float(pe[d]), ll15, dul, sat,
                                    swcon, depth)
        water = fluxes.new_state
        transp_sum += fluxes.transpiration
        evap_sum += fluxes.soil_evap
        stress = fluxes.stress

        # nitrogen pool turns over independently of plant biomass
        f_bio = float(f_tt[d])
        n_pool += mineral_rate * f_bio
        fom_release = fom_n * FOM_RELEASE_RATE * f_bio
        fom_n -= fom_release
        n_pool += fom_release
        if STAGE_JUVENILE <= stage <= STAGE_GRAIN_FILL:
            demand = N_DEMAND_PER_DAY * (config.population / N_REF_POPULATION) * f_bio
            if demand > 1e-12:
                uptake = min(demand, n_pool)
                n_pool -= uptake
                n_uptake_total += uptake
                nfac = NFAC_FLOOR + (1.0 - NFAC_FLOOR) * (uptake / demand)
            else:
                nfac = 1.0
        else:
            nfac = 1.0

        growth = 0.0
        if STAGE_JUVENILE <= stage <= STAGE_GRAIN_FILL:
            growth = config.rue * float(radn[d]) * cover * stress * nfac
            biomass += growth

        if stage == STAGE_FLOWERING_WINDOW:
            window_growth += growth
            window_days += 1

        if stage == STAGE_GRAIN_FILL:
            transfer = GRAIN_FILL_FRACTION * growth \
                + RETRANS_RATE * (biomass - grain)
            grain = min(grain + transfer, sink_cap, biomass)

        # canopy after assimilation: expands through flowering, holds during
        # grain fill, senesces afterwards
        if stage in (STAGE_JUVENILE, STAGE_FLOWERING_WINDOW):
            lai += LAI_RATE * tt_d * lai * (1.0 - lai / lai_max) * stress
        elif stage == STAGE_END_GRAIN_FILL:
            lai *= 1.0 - SENESCENCE_RATE
        lai_series.append(lai)

        # phenology advances on thermal time, carrying overflow across stages
        if stage < STAGE_END_GRAIN_FILL:
            stage_tt += tt_d
            while stage < STAGE_END_GRAIN_FILL and stage_tt >= targets[stage]:
                stage_tt -= targets[stage]
                stage += 1
                if stage == STAGE_JUVENILE:
                    lai = LAI_SEED
                elif stage == STAGE_FLOWERING_WINDOW:
                    dap_flowering = dap
                elif stage == STAGE_GRAIN_FILL:
                    mean_growth = window_growth / max(window_days, 1)
                    gnf = _grain_number_function(mean_growth)
                    grain_number = (config.maximum_grains_per_cob
                                    * config.population * gnf)
                    sink_cap = grain_number \
                        * (config.maximum_potential_grain_size / 1000.0)
                elif stage == STAGE_END_GRAIN_FILL:
                    dap_maturity = dap
                    at_maturity = (biomass, grain, n_uptake_total)
        else:
            if tt_d > 0.0:
                drying_days += 1
            if drying_days >= DRYING_DAYS_TO_HARVEST:
                dap_harvest = dap
                break

        if not (math.isfinite(water) and math.isfinite(biomass)
                and math.isfinite(lai) and math.isfinite(n_pool)):
            raise NumericError(f"non-finite state on day {dap}")

    last_dap = len(lai_series) - 1
    if dap_flowering == 0:
        dap_flowering = last_dap
    if dap_maturity == 0:
        dap_maturity = max(last_dap, dap_flowering)
        at_maturity = (biomass, grain, n_uptake_total)
    if dap_harvest == 0:
        dap_harvest = dap_maturity  # season ended before full dry-down

    biomass_m, grain_m, uptake_m = at_maturity
    if grain_number > 0.0:
        grain_size = grain_m / grain_number
    else:
        grain_size = 0.0
    grain_n = min(config.final_n_conc * grain_m, 0.1 * uptake_m)

    return SimOutputs(
        dap_to_flowering=float(dap_flowering),
        dap_to_maturity=float(dap_maturity),
        dap_to_harvesting=float(dap_harvest),
        lai_integral=lai_integral(lai_series),
        above_ground_wt=10.0 * biomass_m,
        grain_size=grain_size,
        grain_total_wt=grain_m,
        total_wt=biomass_m * (1.0 + ROOT_FRACTION),
        grain_n=grain_n,
        above_ground_n=uptake_m,
        leaf_transpiration=transp_sum,
        soil_water_es=evap_sum,
        grain_number_function=gnf,
    )
