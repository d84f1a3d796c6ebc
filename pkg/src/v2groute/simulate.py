"""Schedule simulator: the executable form of the routing/battery/tariff rules.

`simulate` walks an action sequence from the source and either produces a
`Trace` (proof of feasibility with per-action timing, battery, and money) or
an `Infeasibility` naming the first violated rule.

Timing semantics:
  - The walk starts at the source at minute 0 of the day with the initial SoC,
    so home-station slots before working hours are usable (the working-hours
    restriction applies to actions, not to sitting at home).
  - Waiting is free and allowed anywhere: pickups wait for the window opening
    and for work start; charging waits for the next usable slot boundary.
  - Serve actions must finish inside both the order window and working hours.
  - Charge/discharge occupies whole slots; the EV must arrive no later than
    the first slot's start. Grid-station slots must lie inside working hours;
    home-station slots may be anywhere in the day.
"""

from __future__ import annotations

from dataclasses import dataclass

from .metrics import travel
from .model import (
    BATTERY_TOL,
    Charge,
    Discharge,
    Instance,
    Schedule,
    Serve,
    TIME_EPS,
)

# Infeasibility kinds (the error taxonomy).
WINDOW_VIOLATED = "window_violated"
BATTERY_UNDERFLOW = "battery_underflow"
BATTERY_OVERFLOW = "battery_overflow"
ARRIVED_AFTER_SLOT = "arrived_after_slot"
OUTSIDE_WORKING_HOURS = "outside_working_hours"
FINAL_SOC_SHORTFALL = "final_soc_shortfall"
DUPLICATE_ORDER = "duplicate_order"


@dataclass(frozen=True, slots=True)
class Infeasibility:
    kind: str
    order_id: int | None = None
    action_index: int | None = None

    def __str__(self) -> str:
        bits = [self.kind]
        if self.order_id is not None:
            bits.append(f"order={self.order_id}")
        if self.action_index is not None:
            bits.append(f"action={self.action_index}")
        return " ".join(bits)


@dataclass(frozen=True, slots=True)
class ActionTrace:
    arrival_min: float
    depart_min: float
    battery_in_kwh: float
    battery_out_kwh: float
    money_delta: float


@dataclass(frozen=True)
class Trace:
    steps: tuple[ActionTrace, ...]
    terminal_arrival_min: float
    terminal_battery_kwh: float

    @property
    def total_money(self) -> float:
        return sum(s.money_delta for s in self.steps)

    def to_json(self) -> dict:
        return {
            "steps": [
                {
                    "arrival_min": s.arrival_min,
                    "depart_min": s.depart_min,
                    "battery_in_kwh": s.battery_in_kwh,
                    "battery_out_kwh": s.battery_out_kwh,
                    "money_delta": s.money_delta,
                }
                for s in self.steps
            ],
            "terminal_arrival_min": self.terminal_arrival_min,
            "terminal_battery_kwh": self.terminal_battery_kwh,
        }


class InfeasibleScheduleError(ValueError):
    def __init__(self, reason: Infeasibility):
        super().__init__(str(reason))
        self.reason = reason


def simulate(schedule: Schedule, inst: Instance) -> Trace | Infeasibility:
    """Walk the schedule; return a Trace if feasible, else the first violation."""
    return _walk(schedule.actions, inst, collect=True)


def is_feasible(schedule: Schedule, inst: Instance) -> bool:
    return not isinstance(_walk(schedule.actions, inst, collect=False), Infeasibility)


def evaluate(actions, inst: Instance) -> float | None:
    """Fast feasibility + profit check used on solver hot paths.

    Returns the total money of the walk, or None when infeasible.
    """
    out = _walk(actions, inst, collect=False)
    if isinstance(out, Infeasibility):
        return None
    return out


def profit(schedule: Schedule, inst: Instance) -> float:
    """Total money of a feasible schedule; raises if the schedule is not."""
    out = _walk(schedule.actions, inst, collect=False)
    if isinstance(out, Infeasibility):
        raise InfeasibleScheduleError(out)
    return out


def _walk(actions, inst: Instance, collect: bool):
    """Shared stepping core. Returns Trace (collect) / float money, or Infeasibility."""
    ctx = inst.context()
    ev = ctx.ev
    gamma = ev.efficiency_kwh_per_km
    cap = ev.capacity_kwh
    work_start = ctx.work_start
    work_end = ctx.work_end
    dm = float(ctx.slot_minutes)

    seen: set[int] = set()
    for a in actions:
        if isinstance(a, Serve):
            if a.order_id in seen:
                return Infeasibility(DUPLICATE_ORDER, order_id=a.order_id)
            seen.add(a.order_id)

    t = 0.0
    loc = inst.query.source
    b = ev.initial_soc_kwh
    money = 0.0
    steps: list[ActionTrace] = [] if collect else None

    for idx, a in enumerate(actions):
        if isinstance(a, Serve):
            o = ctx.orders_by_id[a.order_id]
            d_in, tt_in = travel(loc, o.pickup, inst)
            arrival = t + tt_in
            b_in = b - gamma * d_in
            if b_in < -BATTERY_TOL:
                return Infeasibility(BATTERY_UNDERFLOW, action_index=idx)
            start = max(arrival, o.window_start_min, work_start)
            done = start + o.service_time_min
            if start > o.window_end_min + TIME_EPS or done > o.window_end_min + TIME_EPS:
                return Infeasibility(WINDOW_VIOLATED, order_id=o.id)
            if done > work_end + TIME_EPS:
                return Infeasibility(OUTSIDE_WORKING_HOURS, action_index=idx)
            b_out = b_in - gamma * o.service_distance_km
            if b_out < -BATTERY_TOL:
                return Infeasibility(BATTERY_UNDERFLOW, action_index=idx)
            delta = o.fare
            if collect:
                steps.append(ActionTrace(arrival, done, b_in, b_out, delta))
            t, loc, b = done, o.dropoff, b_out
            money += delta
        else:
            st = ctx.stations_by_id[a.station_id]
            if a.slot_end > ctx.slot_count:
                raise ValueError(f"action {idx}: slot interval beyond the horizon")
            d_in, tt_in = travel(loc, st.location, inst)
            arrival = t + tt_in
            b_in = b - gamma * d_in
            if b_in < -BATTERY_TOL:
                return Infeasibility(BATTERY_UNDERFLOW, action_index=idx)
            start_min = a.slot_begin * dm
            if arrival > start_min + TIME_EPS:
                return Infeasibility(ARRIVED_AFTER_SLOT, action_index=idx)
            lo, hi = ctx.usable_range[st.id]
            if a.slot_begin < lo or a.slot_end > hi:
                return Infeasibility(OUTSIDE_WORKING_HOURS, action_index=idx)
            n = a.slot_end - a.slot_begin
            e = ctx.slot_energy[st.id]
            if isinstance(a, Charge):
                b_out = b_in + n * e
                if b_out > cap + BATTERY_TOL:
                    return Infeasibility(BATTERY_OVERFLOW, action_index=idx)
                delta = -ctx.charge_cost(st.id, a.slot_begin, a.slot_end)
            else:
                b_out = b_in - n * e
                if b_out < -BATTERY_TOL:
                    return Infeasibility(BATTERY_UNDERFLOW, action_index=idx)
                delta = ctx.discharge_revenue(st.id, a.slot_begin, a.slot_end)
            depart = a.slot_end * dm
            if collect:
                steps.append(ActionTrace(arrival, depart, b_in, b_out, delta))
            t, loc, b = depart, st.location, b_out
            money += delta

    d_fin, tt_fin = travel(loc, inst.query.destination, inst)
    terminal_arrival = t + tt_fin
    b_term = b - gamma * d_fin
    if b_term < -BATTERY_TOL:
        return Infeasibility(BATTERY_UNDERFLOW, action_index=len(actions))
    if b_term < ev.final_soc_min_kwh - BATTERY_TOL:
        return Infeasibility(FINAL_SOC_SHORTFALL)

    if collect:
        return Trace(tuple(steps), terminal_arrival, b_term)
    return money


def profit_split(schedule: Schedule, inst: Instance) -> tuple[float, float, float]:
    """(total, order_profit, v2g_profit) for a feasible schedule."""
    trace = simulate(schedule, inst)
    if isinstance(trace, Infeasibility):
        raise InfeasibleScheduleError(trace)
    order_part = 0.0
    v2g_part = 0.0
    for act, step in zip(schedule.actions, trace.steps):
        if isinstance(act, Serve):
            order_part += step.money_delta
        else:
            v2g_part += step.money_delta
    return order_part + v2g_part, order_part, v2g_part
