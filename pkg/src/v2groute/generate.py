"""Synthetic instance generator.

Instances follow the experiment-design knobs of the evaluation setting:
bounding-box fraction, ride-length bucket, order time period, station count,
and time-of-use / feed-in tariff schedules. Generation is a pure function of
the parameters (seed included).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace

from .metrics import order_fare
from .model import (
    EMPTY_SCHEDULE,
    EvProfile,
    FareParams,
    GRID_STATION,
    HOME_DESTINATION,
    HOME_SOURCE,
    Horizon,
    Instance,
    Location,
    ModelError,
    Order,
    Query,
    Station,
    Tariff,
)
from .simulate import is_feasible


class InvalidParams(ValueError):
    pass


RIDE_BUCKETS = {"5-10": (5.0, 10.0), "10-25": (10.0, 25.0), "25+": (25.0, 50.0)}
PERIODS = {"2h": (540, 660), "5h": (540, 840), "8h": (540, 1020)}
BBOX_FRACTIONS = (0.10, 0.40, 0.70, 1.00)

# Melbourne-ish metropolitan rectangle used as the default region.
DEFAULT_REGION = (-38.10, -37.60, 144.60, 145.40)

STATION_POWERS_KW = (7.0, 22.0, 50.0, 120.0)
HOME_POWER_KW = 7.0

# Home (source/destination) two-period TOU buy prices, $/kWh.
TOU_PEAK_PRICE = 0.412
TOU_OFFPEAK_PRICE = 0.2665
TOU_PEAK_WINDOW = (900, 1260)  # 3pm - 9pm

# Feed-in tariff sell prices, $/kWh.
FIT_PEAK_PRICE = 0.117
FIT_SHOULDER_PRICE = 0.061
FIT_OFFPEAK_PRICE = 0.043
FIT_PEAK_WINDOW = (960, 1260)  # 4pm - 9pm
FIT_OFFPEAK_WINDOW = (600, 840)  # 10am - 2pm


def tou_charge_template(horizon: Horizon) -> tuple[float, ...]:
    """Per-slot buy prices: peak window at the peak price, off-peak elsewhere."""
    out = []
    for k in range(horizon.slot_count):
        mid = (k + 0.5) * horizon.slot_minutes
        out.append(TOU_PEAK_PRICE if TOU_PEAK_WINDOW[0] <= mid < TOU_PEAK_WINDOW[1] else TOU_OFFPEAK_PRICE)
    return tuple(out)


def fit_discharge_template(horizon: Horizon) -> tuple[float, ...]:
    """Per-slot sell prices: peak / shoulder / off-peak feed-in periods."""
    out = []
    for k in range(horizon.slot_count):
        mid = (k + 0.5) * horizon.slot_minutes
        if FIT_PEAK_WINDOW[0] <= mid < FIT_PEAK_WINDOW[1]:
            out.append(FIT_PEAK_PRICE)
        elif FIT_OFFPEAK_WINDOW[0] <= mid < FIT_OFFPEAK_WINDOW[1]:
            out.append(FIT_OFFPEAK_PRICE)
        else:
            out.append(FIT_SHOULDER_PRICE)
    return tuple(out)


@dataclass(frozen=True)
class GenParams:
    seed: int = 0
    n_orders: int = 100
    n_stations: int = 10
    bbox_fraction: float = 0.40
    ride_length_bucket: str = "10-25"
    period: str = "8h"
    region_bbox: tuple[float, float, float, float] = DEFAULT_REGION
    fare_params: FareParams = field(default_factory=FareParams)
    slot_minutes: int = 15
    work_start_min: int = 540
    work_end_min: int = 1020
    ev_capacity_kwh: float = 70.0
    ev_efficiency_kwh_per_km: float = 0.175
    ev_initial_frac: float = 1.0
    ev_final_frac: float = 0.0
    avg_speed_kmh: float = 40.0
    detour_factor: float = 1.3

    def validate(self) -> None:
        if self.n_orders < 1 or self.n_stations < 1:
            raise InvalidParams("need at least one order and one station")
        if not (0.0 < self.bbox_fraction <= 1.0):
            raise InvalidParams(f"bbox_fraction outside (0, 1]: {self.bbox_fraction}")
        if self.ride_length_bucket not in RIDE_BUCKETS:
            raise InvalidParams(f"unknown ride bucket {self.ride_length_bucket!r}")
        if self.period not in PERIODS:
            raise InvalidParams(f"unknown period {self.period!r}")
        lat0, lat1, lon0, lon1 = self.region_bbox
        if lat0 >= lat1 or lon0 >= lon1:
            raise InvalidParams("degenerate region bbox")
        if not (0.0 <= self.ev_final_frac <= self.ev_initial_frac <= 1.0):
            raise InvalidParams("need 0 <= final frac <= initial frac <= 1")


def _scaled_bbox(params: GenParams) -> tuple[float, float, float, float]:
    """Shrink the region around its center so the area ratio is bbox_fraction."""
    lat0, lat1, lon0, lon1 = params.region_bbox
    scale = math.sqrt(params.bbox_fraction)
    clat, clon = (lat0 + lat1) / 2.0, (lon0 + lon1) / 2.0
    hlat, hlon = (lat1 - lat0) / 2.0 * scale, (lon1 - lon0) / 2.0 * scale
    return clat - hlat, clat + hlat, clon - hlon, clon + hlon


def _offset(origin: Location, dist_km: float, bearing_rad: float) -> Location:
    """Point roughly `dist_km` away on the given bearing (equirectangular)."""
    dlat = dist_km * math.cos(bearing_rad) / 110.574
    dlon = dist_km * math.sin(bearing_rad) / (111.320 * math.cos(math.radians(origin.lat)))
    return Location(origin.lat + dlat, origin.lon + dlon)


def generate(params: GenParams) -> Instance:
    """Build a full instance from the parameters; deterministic per seed."""
    params.validate()
    rng = random.Random(params.seed)
    horizon = Horizon(params.slot_minutes)
    bbox = _scaled_bbox(params)
    lat0, lat1, lon0, lon1 = bbox
    p0, p1 = PERIODS[params.period]
    span = p1 - p0
    d_lo, d_hi = RIDE_BUCKETS[params.ride_length_bucket]

    home = Location(rng.uniform(lat0, lat1), rng.uniform(lon0, lon1))

    orders = []
    for i in range(params.n_orders):
        pickup = Location(rng.uniform(lat0, lat1), rng.uniform(lon0, lon1))
        dist = rng.uniform(d_lo, d_hi)
        bearing = rng.uniform(0.0, 2.0 * math.pi)
        dropoff = _offset(pickup, dist / params.detour_factor, bearing)
        service_time = dist / params.avg_speed_kmh * 60.0 * rng.uniform(0.8, 1.2)
        base_width = min(float(span), service_time + 30.0)
        width = min(float(span), base_width + rng.uniform(0.0, 60.0))
        start = p0 + rng.uniform(0.0, span - width)
        w_start = math.floor(start)
        w_end = min(p1, math.ceil(start + width))
        orders.append(
            Order(
                id=i,
                pickup=pickup,
                dropoff=dropoff,
                fare=order_fare(dist, service_time, params.fare_params),
                service_distance_km=dist,
                service_time_min=service_time,
                window_start_min=w_start,
                window_end_min=w_end,
            )
        )

    charge_template = tou_charge_template(horizon)
    discharge_template = fit_discharge_template(horizon)
    rlat0, rlat1, rlon0, rlon1 = params.region_bbox
    stations = []
    for i in range(params.n_stations):
        loc = Location(rng.uniform(rlat0, rlat1), rng.uniform(rlon0, rlon1))
        power = rng.choice(STATION_POWERS_KW)
        factor = rng.uniform(0.9, 1.1)
        stations.append(
            Station(
                id=i,
                location=loc,
                power_kw=power,
                tariff=Tariff(
                    tuple(p * factor for p in charge_template),
                    tuple(p * factor for p in discharge_template),
                ),
                kind=GRID_STATION,
            )
        )
    home_tariff = Tariff(charge_template, discharge_template)
    stations.append(Station(params.n_stations, home, HOME_POWER_KW, home_tariff, HOME_SOURCE))
    stations.append(Station(params.n_stations + 1, home, HOME_POWER_KW, home_tariff, HOME_DESTINATION))

    ev = EvProfile(
        capacity_kwh=params.ev_capacity_kwh,
        efficiency_kwh_per_km=params.ev_efficiency_kwh_per_km,
        initial_soc_kwh=params.ev_initial_frac * params.ev_capacity_kwh,
        final_soc_min_kwh=params.ev_final_frac * params.ev_capacity_kwh,
    )
    query = Query(home, home, params.work_start_min, params.work_end_min, ev)
    try:
        inst = Instance(
            horizon,
            tuple(orders),
            tuple(stations),
            query,
            params.avg_speed_kmh,
            params.detour_factor,
        )
    except ModelError as exc:
        raise InvalidParams(str(exc)) from exc
    if not is_feasible(EMPTY_SCHEDULE, inst):
        raise InvalidParams("generated instance does not admit the empty schedule")
    return inst


def scale_prices(
    inst: Instance,
    price_factor: float = 1.0,
    power_factor: float = 1.0,
    fare_factor: float = 1.0,
) -> Instance:
    """New instance with station prices/powers and order fares scaled."""
    if price_factor <= 0 or power_factor <= 0 or fare_factor <= 0:
        raise InvalidParams("scale factors must be positive")
    orders = tuple(replace(o, fare=o.fare * fare_factor) for o in inst.orders)
    stations = tuple(
        replace(
            s,
            power_kw=s.power_kw * power_factor,
            tariff=Tariff(
                tuple(p * price_factor for p in s.tariff.charge_price),
                tuple(p * price_factor for p in s.tariff.discharge_price),
            ),
        )
        for s in inst.stations
    )
    return replace(inst, orders=orders, stations=stations)
