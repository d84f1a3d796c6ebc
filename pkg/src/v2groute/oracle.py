"""Pure-enumeration reference optimizer.

Exhaustive recursion over action sequences: every order subset in every
order, interleaved with single-direction contiguous charge/discharge blocks
(at most `revisits + 1` blocks per station) drawn from a bounded slot window.
No bounds, no dominance, no dynamic programming; infeasible prefixes are cut
because no extension can repair them. Deliberately a separate code path from
the exact solver so the two can act as oracles for each other.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

from .dp import CapExceeded, DpInfeasible
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
from .report import SolverReport
from .simulate import profit_split


@dataclass(frozen=True)
class BruteForceCaps:
    max_orders: int = 4
    max_slots: int = 16
    revisits: int = 2
    slot_window: tuple[int, int] | None = None


def brute_force_reference(
    inst: Instance,
    caps: BruteForceCaps = BruteForceCaps(),
    *,
    seed: int = 0,
    instance_id: str = "",
) -> SolverReport:
    t0 = time.perf_counter()
    ctx = inst.context()
    ev = ctx.ev
    gamma = ev.efficiency_kwh_per_km
    cap_kwh = ev.capacity_kwh
    dm = float(ctx.slot_minutes)

    orders = list(inst.orders)
    if len(orders) > caps.max_orders:
        raise CapExceeded(f"{len(orders)} orders exceed the cap {caps.max_orders}")
    window = caps.slot_window if caps.slot_window is not None else (0, ctx.slot_count)
    if window[1] - window[0] > caps.max_slots:
        raise CapExceeded(f"slot window span {window[1] - window[0]} exceeds the cap {caps.max_slots}")

    stations = list(inst.stations)
    ranges = []
    for s in stations:
        lo, hi = ctx.usable_range[s.id]
        ranges.append((max(lo, window[0]), min(hi, window[1])))
    max_blocks = caps.revisits + 1

    floors = [max(o.window_start_min, ctx.work_start) for o in orders]
    lstarts = [min(o.window_end_min, ctx.work_end) - o.service_time_min for o in orders]

    dest = inst.query.destination
    best_money = -math.inf
    best_actions: tuple | None = None

    actions: list = []
    blocks_used = [0] * len(stations)
    used = [False] * len(orders)

    def consider_close(t: float, loc, b: float, money: float) -> None:
        nonlocal best_money, best_actions
        d, _ = travel(loc, dest, inst)
        b2 = b - gamma * d
        if b2 < -BATTERY_TOL or b2 < ev.final_soc_min_kwh - BATTERY_TOL:
            return
        if money > best_money + 1e-12:
            best_money = money
            best_actions = tuple(actions)

    def rec(t: float, loc, b: float, money: float) -> None:
        consider_close(t, loc, b, money)
        for i, o in enumerate(orders):
            if used[i]:
                continue
            d1, t1 = travel(loc, o.pickup, inst)
            s = max(t + t1, floors[i])
            if s > lstarts[i] + TIME_EPS:
                continue
            b2 = b - gamma * (d1 + o.service_distance_km)
            if b2 < -BATTERY_TOL:
                continue
            used[i] = True
            actions.append(Serve(o.id))
            rec(s + o.service_time_min, o.dropoff, b2, money + o.fare)
            actions.pop()
            used[i] = False
        for si, st in enumerate(stations):
            if blocks_used[si] >= max_blocks:
                continue
            lo, hi = ranges[si]
            if lo >= hi:
                continue
            d1, t1 = travel(loc, st.location, inst)
            arrival = t + t1
            k0 = max(int(math.ceil(arrival / dm - TIME_EPS)), lo)
            if k0 >= hi:
                continue
            b_at = b - gamma * d1
            if b_at < -BATTERY_TOL:
                continue
            e = ctx.slot_energy[st.id]
            prev = actions[-1] if actions else None
            for i in range(k0, hi):
                for cls in (Charge, Discharge):
                    # Canonical form: an adjacent same-direction block at the
                    # same station is the same schedule as one longer block.
                    if (
                        isinstance(prev, cls)
                        and prev.station_id == st.id
                        and prev.slot_end == i
                    ):
                        continue
                    sign = 1.0 if cls is Charge else -1.0
                    prices = st.tariff.charge_price if cls is Charge else st.tariff.discharge_price
                    b2 = b_at
                    cost = 0.0
                    for j in range(i + 1, hi + 1):
                        b2 += sign * e
                        if cls is Charge:
                            if b2 > cap_kwh + BATTERY_TOL:
                                break
                            cost -= prices[j - 1] * e
                        else:
                            if b2 < -BATTERY_TOL:
                                break
                            cost += prices[j - 1] * e
                        blocks_used[si] += 1
                        actions.append(cls(st.id, i, j))
                        rec(j * dm, st.location, b2, money + cost)
                        actions.pop()
                        blocks_used[si] -= 1

    rec(0.0, inst.query.source, ev.initial_soc_kwh, 0.0)

    if best_actions is None:
        raise DpInfeasible("no feasible schedule (even the empty one failed)")
    schedule = Schedule(best_actions)
    total, order_part, v2g_part = profit_split(schedule, inst)
    wall = time.perf_counter() - t0
    return SolverReport(
        algo="brute_force",
        seed=seed,
        instance_id=instance_id,
        best_schedule=schedule,
        total_profit=total,
        order_profit=order_part,
        v2g_profit=v2g_part,
        convergence=[(wall, total)],
        wall_clock_s=wall,
        feasible=True,
    )
