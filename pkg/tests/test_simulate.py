"""Simulator semantics: feasibility rules, trace bookkeeping, error taxonomy."""

from __future__ import annotations

import json
import math

import pytest

from v2groute.model import Charge, Discharge, Horizon, Location, Schedule, Serve
from v2groute.simulate import (
    ARRIVED_AFTER_SLOT,
    BATTERY_OVERFLOW,
    BATTERY_UNDERFLOW,
    DUPLICATE_ORDER,
    FINAL_SOC_SHORTFALL,
    OUTSIDE_WORKING_HOURS,
    WINDOW_VIOLATED,
    Infeasibility,
    InfeasibleScheduleError,
    Trace,
    profit,
    profit_split,
    simulate,
)

from helpers import grid_station, micro_instance, point_at_km, simple_order

HOME = Location(-37.81, 144.96)


def _hav_km(a: Location, b: Location) -> float:
    """Test-local haversine, kept separate from the package implementation."""
    r = 6371.0088
    la1, lo1, la2, lo2 = map(math.radians, (a.lat, a.lon, b.lat, b.lon))
    s = math.sin((la2 - la1) / 2) ** 2 + math.cos(la1) * math.cos(la2) * math.sin((lo2 - lo1) / 2) ** 2
    return 2 * r * math.asin(math.sqrt(s))


def test_empty_schedule_feasible_profit_zero():
    inst = micro_instance(initial_soc=10.0, final_soc_min=5.0)
    trace = simulate(Schedule(), inst)
    assert isinstance(trace, Trace)
    assert trace.steps == ()
    assert trace.terminal_battery_kwh == pytest.approx(10.0)
    assert profit(Schedule(), inst) == 0.0


def test_unreachable_window_rejected():
    # A home charge pins departure to 9:30; the 40-km pickup then misses its window.
    far = point_at_km(HOME, 40.0)
    o = simple_order(0, far, HOME, window=(540, 560), service_min=15.0, distance=5.0)
    inst = micro_instance(slot_minutes=30, orders=(o,), initial_soc=50.0)
    home_src = inst.context().home_source
    out = simulate(Schedule((Charge(home_src.id, 18, 19), Serve(0))), inst)
    assert isinstance(out, Infeasibility)
    assert out.kind == WINDOW_VIOLATED
    assert out.order_id == 0


def test_two_orders_one_charge_hand_trace():
    """Battery and clock recomputed action by action with local arithmetic."""
    p1, d1 = point_at_km(HOME, 4.0), point_at_km(HOME, 8.0)
    p2, d2 = point_at_km(HOME, 10.0), point_at_km(HOME, 5.0)
    o1 = simple_order(0, p1, d1, fare=22.0, distance=6.0, service_min=20.0, window=(560, 700))
    o2 = simple_order(1, p2, d2, fare=30.0, distance=7.0, service_min=25.0, window=(600, 860))
    st_loc = point_at_km(HOME, 6.0)
    st = grid_station(0, st_loc, Horizon(30), power=50.0)
    inst = micro_instance(
        slot_minutes=30,
        orders=(o1, o2),
        grid_stations=(st,),
        initial_soc=20.0,
        final_soc_min=5.0,
    )
    schedule = Schedule((Serve(0), Charge(0, 22, 24), Serve(1)))
    trace = simulate(schedule, inst)
    assert isinstance(trace, Trace), str(trace)

    gamma, detour, speed = 0.175, 1.3, 40.0
    # Leg 1: home -> o1 pickup, wait for the window, serve.
    d_in = _hav_km(HOME, p1) * detour
    arr1 = d_in / speed * 60.0
    start1 = max(arr1, 560.0)
    b_in1 = 20.0 - gamma * d_in
    b_out1 = b_in1 - gamma * 6.0
    s1 = trace.steps[0]
    assert s1.arrival_min == pytest.approx(arr1, abs=1e-9)
    assert s1.depart_min == pytest.approx(start1 + 20.0, abs=1e-9)
    assert s1.battery_in_kwh == pytest.approx(b_in1, abs=1e-9)
    assert s1.battery_out_kwh == pytest.approx(b_out1, abs=1e-9)
    assert s1.money_delta == 22.0

    # Leg 2: dropoff -> station, charge slots [22, 24) = 11:00-12:00 at 50 kW.
    d_st = _hav_km(d1, st_loc) * detour
    arr2 = s1.depart_min + d_st / speed * 60.0
    assert arr2 <= 22 * 30.0
    b_in2 = b_out1 - gamma * d_st
    e_slot = 50.0 * 30.0 / 60.0
    s2 = trace.steps[1]
    assert s2.arrival_min == pytest.approx(arr2, abs=1e-9)
    assert s2.depart_min == pytest.approx(24 * 30.0)
    assert s2.battery_in_kwh == pytest.approx(b_in2, abs=1e-9)
    assert s2.battery_out_kwh == pytest.approx(b_in2 + 2 * e_slot, abs=1e-9)
    assert s2.money_delta == pytest.approx(-2 * 0.30 * e_slot, abs=1e-9)

    # Leg 3: station -> o2 pickup; then terminal leg back home.
    d_p2 = _hav_km(st_loc, p2) * detour
    arr3 = s2.depart_min + d_p2 / speed * 60.0
    start3 = max(arr3, 600.0)
    b_in3 = s2.battery_out_kwh - gamma * d_p2
    s3 = trace.steps[2]
    assert s3.arrival_min == pytest.approx(arr3, abs=1e-9)
    assert s3.depart_min == pytest.approx(start3 + 25.0, abs=1e-9)
    assert s3.battery_out_kwh == pytest.approx(b_in3 - gamma * 7.0, abs=1e-9)

    d_home = _hav_km(d2, HOME) * detour
    assert trace.terminal_battery_kwh == pytest.approx(s3.battery_out_kwh - gamma * d_home, abs=1e-9)
    assert trace.total_money == pytest.approx(22.0 + 30.0 - 2 * 0.30 * e_slot, abs=1e-9)
    assert profit(schedule, inst) == pytest.approx(trace.total_money, abs=1e-12)


def test_home_discharge_two_slots_fit_peak():
    # 2 slots x 0.117 $/kWh x 1.75 kWh = 0.4095 (7 kW at 15-minute slots).
    inst = micro_instance(slot_minutes=15, home_discharge_price=0.117, initial_soc=70.0)
    home_dst = inst.context().home_destination
    schedule = Schedule((Discharge(home_dst.id, 64, 66),))
    assert profit(schedule, inst) == pytest.approx(0.4095, abs=1e-9)


def test_duplicate_order_rejected():
    o = simple_order(0, point_at_km(HOME, 2.0), point_at_km(HOME, 4.0), distance=3.0, service_min=10.0)
    inst = micro_instance(orders=(o,))
    out = simulate(Schedule((Serve(0), Serve(0))), inst)
    assert isinstance(out, Infeasibility) and out.kind == DUPLICATE_ORDER and out.order_id == 0


def test_battery_underflow_on_travel():
    far = point_at_km(HOME, 100.0)
    o = simple_order(0, far, HOME, distance=130.0, service_min=200.0, window=(540, 1020))
    inst = micro_instance(orders=(o,), initial_soc=5.0)
    out = simulate(Schedule((Serve(0),)), inst)
    assert isinstance(out, Infeasibility) and out.kind == BATTERY_UNDERFLOW
    assert out.action_index == 0


def test_battery_overflow_on_charge():
    inst = micro_instance(slot_minutes=30, initial_soc=69.0)
    home_src = inst.context().home_source
    out = simulate(Schedule((Charge(home_src.id, 0, 2),)), inst)  # +7 kWh onto 69/70
    assert isinstance(out, Infeasibility) and out.kind == BATTERY_OVERFLOW


def test_arrived_after_slot():
    st = grid_station(0, point_at_km(HOME, 40.0), Horizon(30))
    inst = micro_instance(slot_minutes=30, grid_stations=(st,), initial_soc=30.0)
    home_src = inst.context().home_source
    # Home charge ends 10:00; the station is over an hour away, slot 20 starts 10:00.
    out = simulate(Schedule((Charge(home_src.id, 18, 20), Charge(0, 20, 21))), inst)
    assert isinstance(out, Infeasibility) and out.kind == ARRIVED_AFTER_SLOT


def test_grid_station_outside_working_hours():
    st = grid_station(0, point_at_km(HOME, 2.0), Horizon(30))
    inst = micro_instance(slot_minutes=30, grid_stations=(st,), work_start=540, work_end=1020)
    out = simulate(Schedule((Charge(0, 10, 12),)), inst)  # 5:00-6:00, before work
    assert isinstance(out, Infeasibility) and out.kind == OUTSIDE_WORKING_HOURS
    # The same slots at a home station are allowed (relaxed hours), modulo capacity.
    inst2 = micro_instance(slot_minutes=30, initial_soc=10.0)
    home_src = inst2.context().home_source
    assert isinstance(simulate(Schedule((Charge(home_src.id, 10, 12),)), inst2), Trace)


def test_serve_completion_after_work_end():
    o = simple_order(
        0, point_at_km(HOME, 2.0), point_at_km(HOME, 4.0), distance=3.0, service_min=90.0, window=(960, 1440)
    )
    inst = micro_instance(orders=(o,), work_end=1020)
    out = simulate(Schedule((Serve(0),)), inst)
    assert isinstance(out, Infeasibility) and out.kind == OUTSIDE_WORKING_HOURS


def test_final_soc_shortfall():
    inst = micro_instance(slot_minutes=30, initial_soc=20.0, final_soc_min=19.0)
    home_src = inst.context().home_source
    out = simulate(Schedule((Discharge(home_src.id, 0, 2),)), inst)
    assert isinstance(out, Infeasibility) and out.kind == FINAL_SOC_SHORTFALL


def test_profit_raises_on_infeasible():
    inst = micro_instance(initial_soc=20.0, final_soc_min=19.0)
    home_src = inst.context().home_source
    with pytest.raises(InfeasibleScheduleError):
        profit(Schedule((Discharge(home_src.id, 0, 2),)), inst)


def test_simulate_deterministic_bit_for_bit():
    p1, d1 = point_at_km(HOME, 4.0), point_at_km(HOME, 8.0)
    o = simple_order(0, p1, d1, distance=6.0, service_min=20.0, window=(560, 700))
    inst = micro_instance(slot_minutes=30, orders=(o,), initial_soc=30.0)
    sched = Schedule((Serve(0),))
    a = simulate(sched, inst)
    b = simulate(sched, inst)
    assert json.dumps(a.to_json()) == json.dumps(b.to_json())


def test_prefix_arrivals_unchanged_when_removing_a_serve():
    p1, d1 = point_at_km(HOME, 4.0), point_at_km(HOME, 8.0)
    p2, d2 = point_at_km(HOME, 10.0), point_at_km(HOME, 5.0)
    o1 = simple_order(0, p1, d1, distance=6.0, service_min=20.0, window=(560, 700))
    o2 = simple_order(1, p2, d2, distance=7.0, service_min=25.0, window=(600, 860))
    o3 = simple_order(2, point_at_km(HOME, 3.0), HOME, distance=4.0, service_min=12.0, window=(700, 1000))
    inst = micro_instance(slot_minutes=30, orders=(o1, o2, o3), initial_soc=40.0)
    full = Schedule((Serve(0), Serve(1), Serve(2)))
    t_full = simulate(full, inst)
    assert isinstance(t_full, Trace)
    reduced = Schedule((Serve(0), Serve(2)))
    t_red = simulate(reduced, inst)
    assert isinstance(t_red, Trace)
    # Actions before the removal point keep their arrival/departure times.
    assert t_red.steps[0] == t_full.steps[0]


def test_profit_split_decomposition():
    inst = micro_instance(slot_minutes=30, initial_soc=70.0, home_discharge_price=0.117)
    home_dst = inst.context().home_destination
    sched = Schedule((Discharge(home_dst.id, 32, 34),))
    total, order_part, v2g_part = profit_split(sched, inst)
    assert order_part == 0.0
    assert total == pytest.approx(v2g_part)
    assert v2g_part > 0
