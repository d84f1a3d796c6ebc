"""Strict JSON (de)serialization for instances and schedules.

Unknown keys are rejected so that schema drift surfaces immediately; parse
errors name the offending field (and station, for tariff problems).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .model import (
    Charge,
    Discharge,
    EvProfile,
    Horizon,
    Instance,
    Location,
    ModelError,
    Order,
    Query,
    Schedule,
    Serve,
    Station,
    Tariff,
)


class ParseError(ValueError):
    """Malformed instance/schedule JSON; message carries the field path."""


def _require(obj: dict, keys: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object")
    missing = keys - obj.keys()
    if missing:
        raise ParseError(f"{where}: missing keys {sorted(missing)}")
    unknown = obj.keys() - keys
    if unknown:
        raise ParseError(f"{where}: unknown keys {sorted(unknown)}")


def _num(obj: dict, key: str, where: str) -> float:
    v = obj[key]
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ParseError(f"{where}.{key}: expected a number")
    return float(v)


def _int(obj: dict, key: str, where: str) -> int:
    v = obj[key]
    if not isinstance(v, int) or isinstance(v, bool):
        raise ParseError(f"{where}.{key}: expected an integer")
    return v


def _location(obj: Any, where: str) -> Location:
    _require(obj, {"lat", "lon"}, where)
    return Location(_num(obj, "lat", where), _num(obj, "lon", where))


def instance_to_json(inst: Instance) -> dict:
    return {
        "horizon": {"slot_minutes": inst.horizon.slot_minutes},
        "ev": {
            "capacity_kwh": inst.query.ev.capacity_kwh,
            "efficiency_kwh_per_km": inst.query.ev.efficiency_kwh_per_km,
            "initial_soc_kwh": inst.query.ev.initial_soc_kwh,
            "final_soc_min_kwh": inst.query.ev.final_soc_min_kwh,
        },
        "query": {
            "source": {"lat": inst.query.source.lat, "lon": inst.query.source.lon},
            "destination": {"lat": inst.query.destination.lat, "lon": inst.query.destination.lon},
            "work_start_min": inst.query.work_start_min,
            "work_end_min": inst.query.work_end_min,
        },
        "orders": [
            {
                "id": o.id,
                "pickup": {"lat": o.pickup.lat, "lon": o.pickup.lon},
                "dropoff": {"lat": o.dropoff.lat, "lon": o.dropoff.lon},
                "fare": o.fare,
                "service_distance_km": o.service_distance_km,
                "service_time_min": o.service_time_min,
                "window_start_min": o.window_start_min,
                "window_end_min": o.window_end_min,
            }
            for o in inst.orders
        ],
        "stations": [
            {
                "id": s.id,
                "kind": s.kind,
                "location": {"lat": s.location.lat, "lon": s.location.lon},
                "power_kw": s.power_kw,
                "tariff": {
                    "charge_price_per_kwh": list(s.tariff.charge_price),
                    "discharge_price_per_kwh": list(s.tariff.discharge_price),
                },
            }
            for s in inst.stations
        ],
        "travel": {"avg_speed_kmh": inst.avg_speed_kmh, "detour_factor": inst.detour_factor},
    }


def instance_from_json(doc: Any) -> Instance:
    _require(doc, {"horizon", "ev", "query", "orders", "stations", "travel"}, "instance")
    _require(doc["horizon"], {"slot_minutes"}, "horizon")
    horizon = Horizon(_int(doc["horizon"], "slot_minutes", "horizon"))
    _require(
        doc["ev"],
        {"capacity_kwh", "efficiency_kwh_per_km", "initial_soc_kwh", "final_soc_min_kwh"},
        "ev",
    )
    ev = EvProfile(
        _num(doc["ev"], "capacity_kwh", "ev"),
        _num(doc["ev"], "efficiency_kwh_per_km", "ev"),
        _num(doc["ev"], "initial_soc_kwh", "ev"),
        _num(doc["ev"], "final_soc_min_kwh", "ev"),
    )
    _require(doc["query"], {"source", "destination", "work_start_min", "work_end_min"}, "query")
    query = Query(
        _location(doc["query"]["source"], "query.source"),
        _location(doc["query"]["destination"], "query.destination"),
        _num(doc["query"], "work_start_min", "query"),
        _num(doc["query"], "work_end_min", "query"),
        ev,
    )
    order_keys = {
        "id",
        "pickup",
        "dropoff",
        "fare",
        "service_distance_km",
        "service_time_min",
        "window_start_min",
        "window_end_min",
    }
    orders = []
    for i, od in enumerate(doc["orders"]):
        where = f"orders[{i}]"
        _require(od, order_keys, where)
        orders.append(
            Order(
                _int(od, "id", where),
                _location(od["pickup"], f"{where}.pickup"),
                _location(od["dropoff"], f"{where}.dropoff"),
                _num(od, "fare", where),
                _num(od, "service_distance_km", where),
                _num(od, "service_time_min", where),
                _num(od, "window_start_min", where),
                _num(od, "window_end_min", where),
            )
        )
    slot_count = horizon.slot_count
    stations = []
    for i, sd in enumerate(doc["stations"]):
        where = f"stations[{i}]"
        _require(sd, {"id", "kind", "location", "power_kw", "tariff"}, where)
        _require(sd["tariff"], {"charge_price_per_kwh", "discharge_price_per_kwh"}, f"{where}.tariff")
        sid = _int(sd, "id", where)
        charge = sd["tariff"]["charge_price_per_kwh"]
        discharge = sd["tariff"]["discharge_price_per_kwh"]
        if len(charge) != slot_count or len(discharge) != slot_count:
            raise ParseError(
                f"station {sid}: tariff arrays must have {slot_count} entries "
                f"(got {len(charge)}/{len(discharge)})"
            )
        stations.append(
            Station(
                sid,
                _location(sd["location"], f"{where}.location"),
                _num(sd, "power_kw", where),
                Tariff(tuple(float(p) for p in charge), tuple(float(p) for p in discharge)),
                sd["kind"],
            )
        )
    _require(doc["travel"], {"avg_speed_kmh", "detour_factor"}, "travel")
    try:
        return Instance(
            horizon,
            tuple(orders),
            tuple(stations),
            query,
            _num(doc["travel"], "avg_speed_kmh", "travel"),
            _num(doc["travel"], "detour_factor", "travel"),
        )
    except ModelError as exc:
        raise ParseError(str(exc)) from exc


def save_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance_to_json(inst), indent=1) + "\n")


def load_instance(path: str | Path) -> Instance:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc}") from exc
    try:
        return instance_from_json(doc)
    except ModelError as exc:
        raise ParseError(str(exc)) from exc


def schedule_to_json(schedule: Schedule) -> dict:
    actions = []
    for a in schedule.actions:
        if isinstance(a, Serve):
            actions.append({"type": "serve", "order": a.order_id})
        elif isinstance(a, Charge):
            actions.append(
                {"type": "charge", "station": a.station_id, "slot_begin": a.slot_begin, "slot_end": a.slot_end}
            )
        else:
            actions.append(
                {"type": "discharge", "station": a.station_id, "slot_begin": a.slot_begin, "slot_end": a.slot_end}
            )
    return {"actions": actions}


def schedule_from_json(doc: Any) -> Schedule:
    _require(doc, {"actions"}, "schedule")
    actions = []
    for i, ad in enumerate(doc["actions"]):
        where = f"actions[{i}]"
        if not isinstance(ad, dict) or "type" not in ad:
            raise ParseError(f"{where}: expected an action object with a type")
        kind = ad["type"]
        if kind == "serve":
            _require(ad, {"type", "order"}, where)
            actions.append(Serve(_int(ad, "order", where)))
        elif kind in ("charge", "discharge"):
            _require(ad, {"type", "station", "slot_begin", "slot_end"}, where)
            cls = Charge if kind == "charge" else Discharge
            try:
                actions.append(
                    cls(_int(ad, "station", where), _int(ad, "slot_begin", where), _int(ad, "slot_end", where))
                )
            except ModelError as exc:
                raise ParseError(f"{where}: {exc}") from exc
        else:
            raise ParseError(f"{where}: unknown action type {kind!r}")
    return Schedule(tuple(actions))


def save_schedule(schedule: Schedule, path: str | Path) -> None:
    Path(path).write_text(json.dumps(schedule_to_json(schedule), indent=1) + "\n")


def load_schedule(path: str | Path) -> Schedule:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc}") from exc
    return schedule_from_json(doc)
