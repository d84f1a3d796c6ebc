"""Hand-built micro instances shared by the unit tests.

Everything here is constructed directly (not via the generator) so tests can
pin exact coordinates, tariffs, and windows.
"""

from __future__ import annotations

import math

from v2groute.model import (
    EvProfile,
    GRID_STATION,
    HOME_DESTINATION,
    HOME_SOURCE,
    Horizon,
    Instance,
    Location,
    Order,
    Query,
    Station,
    Tariff,
)

EARTH_RADIUS_KM = 6371.0088


def point_at_km(origin: Location, east_km: float, north_km: float = 0.0) -> Location:
    """Point offset from origin by the given east/north crow-fly distances."""
    dlat = math.degrees(north_km / EARTH_RADIUS_KM)
    dlon = math.degrees(east_km / (EARTH_RADIUS_KM * math.cos(math.radians(origin.lat))))
    return Location(origin.lat + dlat, origin.lon + dlon)


def flat_tariff(horizon: Horizon, charge: float, discharge: float) -> Tariff:
    n = horizon.slot_count
    return Tariff((charge,) * n, (discharge,) * n)


def micro_instance(
    *,
    slot_minutes: int = 30,
    orders: tuple = (),
    grid_stations: tuple = (),
    work_start: float = 540,
    work_end: float = 1020,
    capacity: float = 70.0,
    efficiency: float = 0.175,
    initial_soc: float = 70.0,
    final_soc_min: float = 0.0,
    home: Location = Location(-37.81, 144.96),
    home_power: float = 7.0,
    home_charge_price: float = 0.2665,
    home_discharge_price: float = 0.061,
    home_discharge_profile: tuple | None = None,
    avg_speed: float = 40.0,
    detour: float = 1.3,
) -> Instance:
    """Small instance with co-located home source/destination stations."""
    horizon = Horizon(slot_minutes)
    if home_discharge_profile is not None:
        home_tariff = Tariff((home_charge_price,) * horizon.slot_count, tuple(home_discharge_profile))
    else:
        home_tariff = flat_tariff(horizon, home_charge_price, home_discharge_price)
    n_grid = len(grid_stations)
    stations = tuple(grid_stations) + (
        Station(n_grid, home, home_power, home_tariff, HOME_SOURCE),
        Station(n_grid + 1, home, home_power, home_tariff, HOME_DESTINATION),
    )
    ev = EvProfile(capacity, efficiency, initial_soc, final_soc_min)
    query = Query(home, home, work_start, work_end, ev)
    return Instance(horizon, tuple(orders), stations, query, avg_speed, detour)


def simple_order(
    oid: int,
    pickup: Location,
    dropoff: Location,
    *,
    fare: float = 20.0,
    distance: float = 10.0,
    service_min: float = 15.0,
    window: tuple[float, float] = (540, 1020),
) -> Order:
    return Order(oid, pickup, dropoff, fare, distance, service_min, window[0], window[1])


def grid_station(
    sid: int,
    location: Location,
    horizon: Horizon,
    *,
    power: float = 50.0,
    charge: float = 0.30,
    discharge: float = 0.10,
) -> Station:
    return Station(sid, location, power, flat_tariff(horizon, charge, discharge), GRID_STATION)
