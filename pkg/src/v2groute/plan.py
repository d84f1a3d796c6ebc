"""Mutable plan wrapper with per-position feasibility envelopes.

The heuristic solvers evaluate thousands of candidate insertions per second.
Re-simulating the whole schedule for each candidate would dominate runtime,
so `Plan` maintains, for every position p (a gap before action p; p == len
is the gap before the terminal leg), three envelopes derived by a backward
sweep:

  latest_arr[p]  latest arrival time at action p's entry point that keeps
                 the whole suffix time-feasible (waits absorb early arrivals,
                 so only lateness matters);
  min_b_in[p]    smallest battery at the entry point that keeps the suffix
                 above zero and the terminal SoC floor;
  max_b_in[p]    largest battery at the entry point that avoids overflowing
                 any downstream charge action.

A candidate insertion is feasible iff its own action checks pass and the
recomputed (arrival, battery) at position p stays inside these envelopes.
"""

from __future__ import annotations

import math

from .metrics import travel
from .model import (
    BATTERY_TOL,
    Charge,
    Discharge,
    Instance,
    Serve,
    TIME_EPS,
)

INF = math.inf


class Plan:
    """A feasible action list plus envelopes; recomputed after each mutation."""

    def __init__(self, actions, inst: Instance):
        self.inst = inst
        self.ctx = inst.context()
        self.actions = list(actions)
        self.recompute()

    # -- forward/backward sweeps ------------------------------------------

    def recompute(self) -> None:
        ctx = self.ctx
        inst = self.inst
        ev = ctx.ev
        gamma = ev.efficiency_kwh_per_km
        dm = float(ctx.slot_minutes)
        n = len(self.actions)

        dep = [0.0] * (n + 1)
        loc = [inst.query.source] * (n + 1)
        batt = [ev.initial_soc_kwh] * (n + 1)
        entry_loc = [None] * (n + 1)
        served: set[int] = set()

        t, at, b = 0.0, inst.query.source, ev.initial_soc_kwh
        for i, a in enumerate(self.actions):
            dep[i], loc[i], batt[i] = t, at, b
            if isinstance(a, Serve):
                o = ctx.orders_by_id[a.order_id]
                served.add(o.id)
                entry_loc[i] = o.pickup
                d1, t1 = travel(at, o.pickup, inst)
                start = max(t + t1, o.window_start_min, ctx.work_start)
                t = start + o.service_time_min
                b -= gamma * (d1 + o.service_distance_km)
                at = o.dropoff
            else:
                st = ctx.stations_by_id[a.station_id]
                entry_loc[i] = st.location
                d1, _ = travel(at, st.location, inst)
                b -= gamma * d1
                e = ctx.slot_energy[st.id] * (a.slot_end - a.slot_begin)
                b += e if isinstance(a, Charge) else -e
                t = a.slot_end * dm
                at = st.location
        dep[n], loc[n], batt[n] = t, at, b
        entry_loc[n] = inst.query.destination

        latest = [INF] * (n + 1)
        min_b = [0.0] * (n + 1)
        max_b = [INF] * (n + 1)
        min_b[n] = max(ev.final_soc_min_kwh, 0.0)
        for i in range(n - 1, -1, -1):
            a = self.actions[i]
            d_next, t_next = travel(
                (ctx.orders_by_id[a.order_id].dropoff if isinstance(a, Serve) else ctx.stations_by_id[a.station_id].location),
                entry_loc[i + 1],
                inst,
            )
            if isinstance(a, Serve):
                o = ctx.orders_by_id[a.order_id]
                floor = max(o.window_start_min, ctx.work_start)
                lstart = min(o.window_end_min, ctx.work_end) - o.service_time_min
                k = latest[i + 1] - o.service_time_min - t_next
                lim = min(lstart, k)
                latest[i] = lim if floor <= lim + TIME_EPS else -INF
                drain = gamma * (o.service_distance_km + d_next)
                min_b[i] = max(gamma * o.service_distance_km, min_b[i + 1] + drain)
                max_b[i] = max_b[i + 1] + drain if max_b[i + 1] < INF else INF
            else:
                st = ctx.stations_by_id[a.station_id]
                e = ctx.slot_energy[st.id] * (a.slot_end - a.slot_begin)
                ok_time = a.slot_end * dm + t_next <= latest[i + 1] + TIME_EPS
                latest[i] = a.slot_begin * dm if ok_time else -INF
                out_drain = gamma * d_next
                if isinstance(a, Charge):
                    min_b[i] = max(0.0, min_b[i + 1] + out_drain - e)
                    cap_room = ev.capacity_kwh - e
                    nxt = max_b[i + 1] + out_drain - e if max_b[i + 1] < INF else INF
                    max_b[i] = min(cap_room, nxt)
                else:
                    min_b[i] = max(e, min_b[i + 1] + out_drain + e)
                    max_b[i] = max_b[i + 1] + out_drain + e if max_b[i + 1] < INF else INF

        self.dep, self.loc, self.batt = dep, loc, batt
        self.entry_loc = entry_loc
        self.latest_arr, self.min_b_in, self.max_b_in = latest, min_b, max_b
        self.served = served

    # -- candidate checks ---------------------------------------------------

    def n_positions(self) -> int:
        return len(self.actions) + 1

    def battery_end(self) -> float:
        return self.batt[len(self.actions)]

    def required_battery_at(self, p: int) -> float:
        """Battery needed at position p's depart point to finish the suffix."""
        d, _ = travel(self.loc[p], self.entry_loc[p], self.inst)
        req = self.min_b_in[p] + self.ctx.ev.efficiency_kwh_per_km * d
        return max(req, 0.0)

    def serve_fits(self, p: int, order) -> bool:
        """O(1) feasibility of inserting Serve(order) at position p."""
        ctx = self.ctx
        gamma = ctx.ev.efficiency_kwh_per_km
        inst = self.inst
        d1, t1 = travel(self.loc[p], order.pickup, inst)
        arr = self.dep[p] + t1
        floor = max(order.window_start_min, ctx.work_start)
        start = max(arr, floor)
        if start + order.service_time_min > min(order.window_end_min, ctx.work_end) + TIME_EPS:
            return False
        y = self.batt[p] - gamma * d1
        y_out = y - gamma * order.service_distance_km
        if y_out < -BATTERY_TOL:
            return False
        d2, t2 = travel(order.dropoff, self.entry_loc[p], inst)
        if start + order.service_time_min + t2 > self.latest_arr[p] + TIME_EPS:
            return False
        b_next = y_out - gamma * d2
        if b_next < self.min_b_in[p] - BATTERY_TOL:
            return False
        if b_next > self.max_b_in[p] + BATTERY_TOL:
            return False
        return True

    def cd_slot_range(self, p: int, station_id: int, charging: bool):
        """Feasible (first_slot, n_min, n_max) for a C/D insertion at p.

        Returns None when no whole-slot action at this station fits. For a
        charge, n_min can exceed 1 when the detour itself forces topping up.
        """
        ctx = self.ctx
        inst = self.inst
        gamma = ctx.ev.efficiency_kwh_per_km
        dm = float(ctx.slot_minutes)
        st = ctx.stations_by_id[station_id]
        if self.latest_arr[p] == -INF:
            return None
        d1, t1 = travel(self.loc[p], st.location, inst)
        arrival = self.dep[p] + t1
        y = self.batt[p] - gamma * d1
        if y < -BATTERY_TOL:
            return None
        lo, hi = ctx.usable_range[station_id]
        k0 = max(int(math.ceil(arrival / dm - TIME_EPS)), lo)
        if k0 >= hi:
            return None
        d2, t2 = travel(st.location, self.entry_loc[p], inst)
        if self.latest_arr[p] < INF:
            n_time = int(math.floor((self.latest_arr[p] - t2) / dm + TIME_EPS)) - k0
        else:
            n_time = hi - k0
        n_max = min(hi - k0, n_time)
        if n_max < 1:
            return None
        e = ctx.slot_energy[station_id]
        if charging:
            room = ctx.ev.capacity_kwh - y
            n_cap = int(math.floor(room / e + BATTERY_TOL))
            up = self.max_b_in[p] + gamma * d2 - y
            if up < INF:
                n_cap = min(n_cap, int(math.floor(up / e + BATTERY_TOL)))
            need = self.min_b_in[p] + gamma * d2 - y
            n_min = max(1, int(math.ceil(need / e - BATTERY_TOL)))
            n_max = min(n_max, n_cap)
            if n_max < n_min:
                return None
            return k0, n_min, n_max
        else:
            give = min(y, y - gamma * d2 - self.min_b_in[p])
            n_cap = int(math.floor(give / e + BATTERY_TOL))
            n_max = min(n_max, n_cap)
            if n_max < 1:
                return None
            return k0, 1, n_max

    def cd_run_length_at(self, p: int) -> int:
        """Length of the C/D run a new station action at p would join."""
        run = 1
        i = p - 1
        while i >= 0 and not isinstance(self.actions[i], Serve):
            run += 1
            i -= 1
        i = p
        while i < len(self.actions) and not isinstance(self.actions[i], Serve):
            run += 1
            i += 1
        return run

    # -- mutation ------------------------------------------------------------

    def insert(self, p: int, action) -> None:
        self.actions.insert(p, action)
        self.recompute()
