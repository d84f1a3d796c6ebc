"""JSON round trips and strict-mode parse errors."""

from __future__ import annotations

import json

import pytest

from v2groute.generate import GenParams, generate
from v2groute.io import (
    ParseError,
    instance_from_json,
    instance_to_json,
    load_instance,
    load_schedule,
    save_instance,
    save_schedule,
    schedule_from_json,
    schedule_to_json,
)
from v2groute.model import Charge, Discharge, Schedule, Serve


def small_instance():
    return generate(GenParams(seed=3, n_orders=5, n_stations=2))


def test_instance_round_trip(tmp_path):
    inst = small_instance()
    path = tmp_path / "inst.json"
    save_instance(inst, path)
    loaded = load_instance(path)
    assert loaded == inst


def test_malformed_tariff_length_names_station():
    doc = instance_to_json(small_instance())
    doc["stations"][1]["tariff"]["charge_price_per_kwh"] = [0.1, 0.2]
    with pytest.raises(ParseError, match="station 1"):
        instance_from_json(doc)


def test_unknown_key_rejected():
    doc = instance_to_json(small_instance())
    doc["unexpected"] = 1
    with pytest.raises(ParseError, match="unknown keys"):
        instance_from_json(doc)
    doc2 = instance_to_json(small_instance())
    doc2["orders"][0]["surge"] = 2.0
    with pytest.raises(ParseError, match="orders\\[0\\]"):
        instance_from_json(doc2)


def test_missing_key_rejected():
    doc = instance_to_json(small_instance())
    del doc["ev"]["capacity_kwh"]
    with pytest.raises(ParseError, match="capacity_kwh"):
        instance_from_json(doc)


def test_schedule_round_trip(tmp_path):
    sched = Schedule((Serve(3), Charge(0, 10, 12), Discharge(1, 40, 41)))
    path = tmp_path / "sched.json"
    save_schedule(sched, path)
    assert load_schedule(path) == sched
    doc = schedule_to_json(sched)
    assert doc["actions"][0] == {"type": "serve", "order": 3}
    assert doc["actions"][1]["type"] == "charge"


def test_schedule_bad_action_type():
    with pytest.raises(ParseError, match="unknown action type"):
        schedule_from_json({"actions": [{"type": "park"}]})


def test_schedule_bad_slot_interval():
    with pytest.raises(ParseError, match="slot interval"):
        schedule_from_json({"actions": [{"type": "charge", "station": 0, "slot_begin": 5, "slot_end": 5}]})


def test_floats_survive_serialization(tmp_path):
    inst = small_instance()
    path = tmp_path / "inst.json"
    save_instance(inst, path)
    doc = json.loads(path.read_text())
    # repr-based JSON floats round-trip exactly (>= 9 significant digits).
    assert doc["orders"][0]["fare"] == inst.orders[0].fare
    assert doc["stations"][0]["tariff"]["charge_price_per_kwh"][0] == inst.stations[0].tariff.charge_price[0]
