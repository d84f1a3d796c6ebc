"""Travel metric, energy model, fares, and the energy-cost penalty."""

from __future__ import annotations

import math

from .model import EvProfile, FareParams, Horizon, Instance, Location, Station

EARTH_RADIUS_KM = 6371.0088


def haversine_km(a: Location, b: Location) -> float:
    """Great-circle distance between two points in km."""
    if a.lat == b.lat and a.lon == b.lon:
        return 0.0
    la1, lo1, la2, lo2 = map(math.radians, (a.lat, a.lon, b.lat, b.lon))
    s = math.sin((la2 - la1) / 2.0) ** 2 + math.cos(la1) * math.cos(la2) * math.sin((lo2 - lo1) / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(math.sqrt(s))


def travel(a: Location, b: Location, inst: Instance) -> tuple[float, float]:
    """Edge weight between two points: (distance km, time minutes).

    Distance is haversine scaled by the instance detour factor; time follows
    from the average speed. Symmetric, zero on identical points, cached per
    instance.
    """
    cache = inst.context()._travel_cache
    key = (a, b)
    hit = cache.get(key)
    if hit is not None:
        return hit
    dist = haversine_km(a, b) * inst.detour_factor
    out = (dist, dist / inst.avg_speed_kmh * 60.0)
    cache[key] = out
    cache[(b, a)] = out
    return out


def energy(distance_km: float, ev: EvProfile) -> float:
    """Energy consumed driving `distance_km`, in kWh."""
    return ev.efficiency_kwh_per_km * distance_km


def order_fare(distance_km: float, time_min: float, params: FareParams = FareParams()) -> float:
    """Driver-side fare for a ride of the given length and duration."""
    gross = params.base + params.per_km * distance_km + params.per_min * time_min
    return params.driver_share * gross


def slot_energy(station: Station, horizon: Horizon) -> float:
    """Energy moved in one full slot at the station, in kWh."""
    return station.power_kw * horizon.slot_minutes / 60.0


def energy_penalty(a: Location, b: Location, inst: Instance) -> float:
    """Monetary value of the energy burned travelling a->b, priced at the
    highest charge price anywhere on the instance."""
    dist, _ = travel(a, b, inst)
    return dist * inst.context().pe_factor
