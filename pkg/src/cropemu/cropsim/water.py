"""Single-bucket daily soil water balance.

State is plant-available water storage in mm over the root zone. Runoff
uses a curve-number-style fraction scaled by profile wetness, drainage
is first-order above the drained upper limit, and evaporation and
transpiration are demand-driven but supply-limited. Every step conserves
water: rain == Δstate + runoff + drainage + soilEvap + transpiration.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class WaterFluxes:
    new_state: float
    runoff: float
    drainage: float
    soil_evap: float
    transpiration: float
    stress: float


def water_balance_step(state: float, rain: float, cn2: float, cover: float,
                       potential_evap: float, ll15: float, dul: float,
                       sat: float, swcon: float, depth: float) -> WaterFluxes:
    lower = ll15 * depth
    upper_dul = dul * depth
    upper_sat = sat * depth

    wetness = (state - lower) / (upper_sat - lower)
    wetness = min(max(wetness, 0.0), 1.0)
    runoff = rain * (cn2 / 100.0) ** 2 * wetness
    state = state + (rain - runoff)
    if state > upper_sat:  # saturation excess joins runoff
        runoff += state - upper_sat
        state = upper_sat

    drainage = swcon * max(state - upper_dul, 0.0)
    state -= drainage

    evap_demand = (1.0 - cover) * potential_evap
    evap_supply = max(state - 0.5 * lower, 0.0)
    soil_evap = min(evap_demand, evap_supply)
    state -= soil_evap

    transp_demand = cover * potential_evap
    transp_supply = max(state - lower, 0.0)
    transpiration = min(transp_demand, transp_supply)
    state -= transpiration
    if transp_demand > 0.0:
        stress = min(1.0, transp_supply / transp_demand)
    else:
        stress = 1.0

    return WaterFluxes(state, runoff, drainage, soil_evap, transpiration, stress)
