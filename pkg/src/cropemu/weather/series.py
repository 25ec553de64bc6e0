"""Daily weather series: data model, CSV I/O and a synthetic demo corpus.

A series is one location-year of 365 daily records. Leap days are
dropped on load so every year has the same length. The bundled synthetic
corpus mimics midwestern seasonality: sinusoidal temperature and
radiation cycles with autocorrelated anomalies, and rainfall from a
two-state occurrence chain with seasonal exponential intensities.
"""

import csv
import zlib
from dataclasses import dataclass, replace

import numpy as np

from ..errors import InputError, ParseError

DAYS_PER_YEAR = 365

HISTORICAL = "historical"
SYNTHETIC = "synthetic"
PERTURBED = "perturbed"

# Demo sites (name -> lat, lon); coordinates match the county profiles.
DEMO_SITES = {
    "Randolph": (38.0567, -90.0600),
    "Poweshiek": (41.5487, -92.2234),
    "Osceola": (43.3630, -95.8179),
}

CSV_COLUMNS = ("location", "lat", "lon", "year", "doy",
               "radn", "maxt", "mint", "rain")


@dataclass(frozen=True)
class WeatherSeries:
    location: str
    lat: float
    lon: float
    year: int
    radn: np.ndarray
    maxt: np.ndarray
    mint: np.ndarray
    rain: np.ndarray
    source_tag: str = HISTORICAL

    def __post_init__(self):
        for name in ("radn", "maxt", "mint", "rain"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            object.__setattr__(self, name, arr)
            if arr.shape != (DAYS_PER_YEAR,):
                raise InputError(f"{name} must have {DAYS_PER_YEAR} days, "
                                 f"got {arr.shape}")
        if np.any(self.maxt < self.mint):
            day = int(np.argmax(self.maxt < self.mint)) + 1
            raise InputError(f"maxT < minT on day {day} "
                             f"({self.location} {self.year})")
        if np.any(self.radn < 0.0):
            raise InputError(f"negative radiation ({self.location} {self.year})")
        if np.any(self.rain < 0.0):
            raise InputError(f"negative rainfall ({self.location} {self.year})")

    @property
    def key(self) -> str:
        return f"{self.location}:{self.year}:{self.source_tag}"

    def with_fields(self, **kw) -> "WeatherSeries":
        return replace(self, **kw)


def write_weather_csv(path, series_list) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS + ("sourceTag",))
        for s in series_list:
            for d in range(DAYS_PER_YEAR):
                writer.writerow([s.location, repr(s.lat), repr(s.lon), s.year,
                                 d + 1, repr(float(s.radn[d])),
                                 repr(float(s.maxt[d])), repr(float(s.mint[d])),
                                 repr(float(s.rain[d])), s.source_tag])


def load_weather_csv(path) -> list:
    """Parse the `location,lat,lon,year,doy,...` schema into series.

    Years with 366 rows are treated as leap years: day-of-year 60 (Feb 29)
    is dropped and later days renumbered.
    """
    groups = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError(f"{path}: empty file")
        header = [h.strip() for h in header]
        try:
            idx = {name: header.index(name) for name in CSV_COLUMNS}
        except ValueError as exc:
            raise ParseError(f"{path}: missing column ({exc})") from exc
        tag_idx = header.index("sourceTag") if "sourceTag" in header else None
        for lineno, row in enumerate(reader, start=2):
            try:
                key = (row[idx["location"]], float(row[idx["lat"]]),
                       float(row[idx["lon"]]), int(row[idx["year"]]),
                       row[tag_idx] if tag_idx is not None else HISTORICAL)
                doy = int(row[idx["doy"]])
                record = (doy, float(row[idx["radn"]]), float(row[idx["maxt"]]),
                          float(row[idx["mint"]]), float(row[idx["rain"]]))
            except (ValueError, IndexError) as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
            groups.setdefault(key, []).append((lineno, record))
    out = []
    for (location, lat, lon, year, tag), rows in groups.items():
        rows.sort(key=lambda item: item[1][0])
        doys = [r[1][0] for r in rows]
        if len(rows) == DAYS_PER_YEAR + 1 and doys == list(range(1, 367)):
            del rows[59]  # drop Feb 29
        elif doys != list(range(1, DAYS_PER_YEAR + 1)):
            raise ParseError(f"{path}: {location} {year} has day-of-year gaps "
                             f"or duplicates ({len(rows)} rows)")
        data = np.array([r[1][1:] for r in rows])
        for lineno, record in rows:
            if record[2] < record[3]:
                raise InputError(f"{path}:{lineno}: maxT < minT")
        out.append(WeatherSeries(location, lat, lon, year,
                                 radn=data[:, 0], maxt=data[:, 1],
                                 mint=data[:, 2], rain=data[:, 3],
                                 source_tag=tag))
    out.sort(key=lambda s: (s.location, s.year, s.source_tag))
    return out


def _seasonal(day: np.ndarray, mean: float, amplitude: float,
              peak_doy: float) -> np.ndarray:
    return mean + amplitude * np.cos(2.0 * np.pi * (day - peak_doy) / DAYS_PER_YEAR)


def _ar1(rng: np.random.Generator, n: int, rho: float, sigma: float) -> np.ndarray:
    noise = rng.normal(0.0, sigma, size=n)
    out = np.empty(n)
    out[0] = noise[0]
    for i in range(1, n):
        out[i] = rho * out[i - 1] + noise[i]
    return out


def make_synthetic_series(rng: np.random.Generator, location: str, lat: float,
                          lon: float, year: int) -> WeatherSeries:
    day = np.arange(1.0, DAYS_PER_YEAR + 1)
    # colder and a bit dimmer at higher latitudes
    t_mean = 16.0 - 0.65 * (lat - 40.0) + rng.normal(0.0, 0.6)
    t_amp = 13.5 + 0.25 * (lat - 40.0) + rng.normal(0.0, 0.4)
    peak = 197.0 + rng.normal(0.0, 3.0)  # mid-July
    anomaly = _ar1(rng, DAYS_PER_YEAR, rho=0.82, sigma=1.5)
    maxt = _seasonal(day, t_mean + 6.0, t_amp, peak) + anomaly \
        + rng.normal(0.0, 0.7, DAYS_PER_YEAR)
    diurnal = 8.0 + 2.5 * np.cos(2.0 * np.pi * (day - peak) / DAYS_PER_YEAR) \
        + np.abs(rng.normal(0.0, 1.2, DAYS_PER_YEAR))
    mint = maxt - np.maximum(diurnal, 0.5)

    r_mean = 14.5 - 0.12 * (lat - 40.0) + rng.normal(0.0, 0.3)
    radn = _seasonal(day, r_mean, 8.5, 172.0) \
        + _ar1(rng, DAYS_PER_YEAR, rho=0.55, sigma=1.6)
    radn = np.clip(radn, 0.5, None)

    wet_prob = np.clip(0.28 + 0.10 * np.cos(2.0 * np.pi * (day - 160.0)
                                            / DAYS_PER_YEAR), 0.05, 0.9)
    wet = np.zeros(DAYS_PER_YEAR, dtype=bool)
    persistence = 0.45
    u = rng.random(DAYS_PER_YEAR)
    for i in range(DAYS_PER_YEAR):
        p = wet_prob[i] * (1.0 + (persistence if i > 0 and wet[i - 1] else 0.0))
        wet[i] = u[i] < min(p, 0.95)
    intensity_mean = 6.0 + 4.0 * np.cos(2.0 * np.pi * (day - 170.0) / DAYS_PER_YEAR)
    rain = np.where(wet, rng.exponential(np.clip(intensity_mean, 1.5, None)), 0.0)

    return WeatherSeries(location, lat, lon, year, radn=radn, maxt=maxt,
                         mint=mint, rain=rain, source_tag=HISTORICAL)


def synthetic_corpus(sites: dict | None = None, years=range(1991, 2021),
                     seed: int = 2024) -> list:
    """Deterministic demo corpus: one series per (site, year)."""
    sites = DEMO_SITES if sites is None else sites
    out = []
    for name in sorted(sites):
        lat, lon = sites[name]
        site_hash = zlib.crc32(name.encode())
        for year in years:
            rng = np.random.default_rng([seed, site_hash, year])
            out.append(make_synthetic_series(rng, name, lat, lon, year))
    return out
