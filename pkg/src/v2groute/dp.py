"""Optimal charge/discharge scheduling along a fixed visit sequence.

Given a route skeleton (orders in fixed sequence, station visits that may be
skipped), a label-setting dynamic program decides, slot by slot, whether the
EV idles, charges, or discharges at each visited station, and when it moves
on. Serve timing is forced by windows, so labels live at discrete points:
"completed k-th entry" nodes (continuous clock) and per-slot station-presence
nodes (clock on slot boundaries).

Labels carry the exact simulator arithmetic (time, battery, money), so any
reconstructed schedule passes `simulate` verbatim. Battery is additionally
bucketed on a resolution grid purely to merge near-identical labels; every
merge that discards a non-dominated label is counted into a reported profit
bound (`loss_bound`), which is zero whenever no lossy merge happened.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

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


class DpInfeasible(Exception):
    """The skeleton admits no feasible schedule."""


class CapExceeded(Exception):
    """A configured search-size guard tripped."""


@dataclass(frozen=True)
class RouteSkeleton:
    """Ordered visit list: ("order", id) and ("station", id) entries.

    `max_revisits` bounds charge/discharge blocks per station in the exact
    search; skeletons derived from heuristic schedules may carry more.
    """

    visits: tuple[tuple[str, int], ...]
    max_revisits: int = 2

    def __post_init__(self) -> None:
        orders = [v[1] for v in self.visits if v[0] == "order"]
        if len(set(orders)) != len(orders):
            raise ValueError("skeleton repeats an order")
        for kind, _ in self.visits:
            if kind not in ("order", "station"):
                raise ValueError(f"unknown skeleton entry kind {kind!r}")


def skeleton_of(schedule: Schedule, max_revisits: int = 2) -> RouteSkeleton:
    """Skeleton of an existing schedule; adjacent same-station actions merge
    into one visit (the DP re-decides the per-slot usage anyway)."""
    visits: list[tuple[str, int]] = []
    for a in schedule.actions:
        if isinstance(a, Serve):
            visits.append(("order", a.order_id))
        else:
            entry = ("station", a.station_id)
            if not (visits and visits[-1] == entry):
                visits.append(entry)
    return RouteSkeleton(tuple(visits), max_revisits)


@dataclass(frozen=True)
class DpConfig:
    battery_resolution: float = 0.05
    suboptimality_gap: float = 0.0
    max_states: int = 50_000_000
    slot_window: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        if self.battery_resolution <= 0:
            raise ValueError("battery resolution must be positive")
        if not (0.0 <= self.suboptimality_gap < 1.0):
            raise ValueError("suboptimality gap must lie in [0, 1)")


@dataclass
class DpResult:
    schedule: Schedule
    profit: float
    loss_bound: float
    labels: int


class _Label:
    __slots__ = ("t", "b", "money", "parent", "step")

    def __init__(self, t, b, money, parent, step):
        self.t = t
        self.b = b
        self.money = money
        self.parent = parent
        self.step = step


def optimize_route_schedule(inst: Instance, skel: RouteSkeleton, cfg: DpConfig = DpConfig()) -> Schedule:
    """Profit-maximal feasible schedule following the skeleton order.

    Serve actions follow the skeleton exactly; station entries may be skipped
    or assigned whole-slot charge/discharge usage. Raises DpInfeasible when
    no completion exists and CapExceeded past the state guard.
    """
    return optimize_route_schedule_detailed(inst, skel, cfg).schedule


def optimize_route_schedule_detailed(inst: Instance, skel: RouteSkeleton, cfg: DpConfig = DpConfig()) -> DpResult:
    ctx = inst.context()
    ev = ctx.ev
    gamma = ev.efficiency_kwh_per_km
    cap = ev.capacity_kwh
    dm = float(ctx.slot_minutes)
    res = cfg.battery_resolution
    coarse_time = cfg.suboptimality_gap > 0.0

    # Entry locations: index 0 is the source; entry i is visits[i-1].
    locs = [inst.query.source]
    for kind, ident in skel.visits:
        if kind == "order":
            locs.append(ctx.orders_by_id[ident].dropoff)
        else:
            locs.append(ctx.stations_by_id[ident].location)

    n_labels = 0
    lossy_merges = 0

    def t_key(t: float):
        if coarse_time:
            return int(math.ceil(t / dm - TIME_EPS))
        return t

    def push(store: dict, key, lab: _Label) -> None:
        nonlocal lossy_merges
        old = store.get(key)
        if old is None:
            store[key] = lab
            return
        if (lab.money, lab.b, -lab.t) > (old.money, old.b, -old.t):
            keep, drop = lab, old
        else:
            keep, drop = old, lab
        store[key] = keep
        if drop.b > keep.b + 1e-12 or drop.t < keep.t - 1e-9:
            lossy_merges += 1

    def make(t, b, money, parent, step) -> _Label:
        nonlocal n_labels
        n_labels += 1
        if n_labels > cfg.max_states:
            raise CapExceeded(f"label guard exceeded: {n_labels}")
        return _Label(t, b, money, parent, step)

    # cur: loc_idx -> {(t_key, bucket): label} for "prefix completed" states.
    start = make(0.0, ev.initial_soc_kwh, 0.0, None, None)
    cur: dict[int, dict] = {0: {(t_key(0.0), int(start.b / res)): start}}

    for j, (kind, ident) in enumerate(skel.visits, start=1):
        nxt: dict[int, dict] = {}
        if kind == "order":
            o = ctx.orders_by_id[ident]
            floor = max(o.window_start_min, ctx.work_start)
            lstart = min(o.window_end_min, ctx.work_end) - o.service_time_min
            for loc_idx, labels in cur.items():
                d1, t1 = travel(locs[loc_idx], o.pickup, inst)
                drain = gamma * (d1 + o.service_distance_km)
                for lab in labels.values():
                    s = max(lab.t + t1, floor)
                    if s > lstart + TIME_EPS:
                        continue
                    b2 = lab.b - drain
                    if b2 < -BATTERY_TOL:
                        continue
                    lab2 = make(s + o.service_time_min, b2, lab.money + o.fare, lab, ("serve", j))
                    push(nxt.setdefault(j, {}), (t_key(lab2.t), int(b2 / res)), lab2)
        else:
            st = ctx.stations_by_id[ident]
            lo, hi = ctx.usable_range[ident]
            if cfg.slot_window is not None:
                lo, hi = max(lo, cfg.slot_window[0]), min(hi, cfg.slot_window[1])
            e = ctx.slot_energy[ident]
            prices_c = st.tariff.charge_price
            prices_d = st.tariff.discharge_price
            # Skipping keeps every label as-is.
            for loc_idx, labels in cur.items():
                dst = nxt.setdefault(loc_idx, {})
                for key, lab in labels.items():
                    push(dst, key, lab)
            # Visiting: presence states keyed (run, bucket), advanced slot by slot.
            if lo < hi:
                arrivals: dict[int, dict] = {}
                for loc_idx, labels in cur.items():
                    d1, t1 = travel(locs[loc_idx], st.location, inst)
                    for lab in labels.values():
                        b2 = lab.b - gamma * d1
                        if b2 < -BATTERY_TOL:
                            continue
                        k0 = max(int(math.ceil((lab.t + t1) / dm - TIME_EPS)), lo)
                        if k0 >= hi:
                            continue
                        # Clock pins to the slot grid once present; equal-slot
                        # arrivals are interchangeable.
                        lab2 = make(k0 * dm, b2, lab.money, lab, ("arrive", j))
                        push(arrivals.setdefault(k0, {}), (0, int(b2 / res)), lab2)
                out = nxt.setdefault(j, {})
                presence: dict = {}
                for k in range(lo, hi):
                    if k in arrivals:
                        for key, lab in arrivals[k].items():
                            push(presence, key, lab)
                    stepped: dict = {}
                    price_c = prices_c[k]
                    price_d = prices_d[k]
                    for (run, bucket), lab in presence.items():
                        # Idle through slot k.
                        idle = make(lab.t, lab.b, lab.money, lab, ("idle", j, k))
                        push(stepped, (0, bucket), idle)
                        b_c = lab.b + e
                        if b_c <= cap + BATTERY_TOL:
                            ch = make(lab.t, b_c, lab.money - price_c * e, lab, ("charge", j, k))
                            push(stepped, (1, int(b_c / res)), ch)
                        b_d = lab.b - e
                        if b_d >= -BATTERY_TOL:
                            dis = make(lab.t, b_d, lab.money + price_d * e, lab, ("discharge", j, k))
                            push(stepped, (2, int(b_d / res)), dis)
                        if run != 0:
                            # Leave right after the block that ended at slot k-1.
                            leave = make(k * dm, lab.b, lab.money, lab, ("leave", j, k))
                            push(out, (t_key(leave.t), bucket), leave)
                    presence = stepped
                for (run, bucket), lab in presence.items():
                    if run != 0:
                        leave = make(hi * dm, lab.b, lab.money, lab, ("leave", j, hi))
                        push(out, (t_key(leave.t), bucket), leave)
                if not out:
                    del nxt[j]
        cur = {k: v for k, v in nxt.items() if v}
        if not cur:
            raise DpInfeasible("no feasible completion of the skeleton")

    # Terminal leg to the destination.
    best: _Label | None = None
    for loc_idx, labels in cur.items():
        d1, _ = travel(locs[loc_idx], inst.query.destination, inst)
        drain = gamma * d1
        for lab in labels.values():
            b2 = lab.b - drain
            if b2 < ev.final_soc_min_kwh - BATTERY_TOL or b2 < -BATTERY_TOL:
                continue
            if best is None or lab.money > best.money + 1e-12:
                best = lab
    if best is None:
        raise DpInfeasible("no battery-feasible completion of the skeleton")

    schedule = _reconstruct(best, skel)
    bound = lossy_merges * res * max(ctx.max_discharge_price, ctx.max_charge_price)
    return DpResult(schedule, best.money, bound, n_labels)


def _reconstruct(label: _Label, skel: RouteSkeleton) -> Schedule:
    steps = []
    lab = label
    while lab is not None:
        if lab.step is not None:
            steps.append(lab.step)
        lab = lab.parent
    steps.reverse()

    actions = []
    # Per-station-entry slot decisions become maximal same-direction blocks.
    open_dir: str | None = None
    open_entry = -1
    block_start = -1
    block_end = -1

    def flush():
        nonlocal open_dir
        if open_dir is None:
            return
        sid = skel.visits[open_entry - 1][1]
        cls = Charge if open_dir == "charge" else Discharge
        actions.append(cls(sid, block_start, block_end))
        open_dir = None

    for step in steps:
        kind = step[0]
        if kind == "serve":
            flush()
            actions.append(Serve(skel.visits[step[1] - 1][1]))
        elif kind in ("charge", "discharge"):
            _, entry, slot = step
            if open_dir == kind and open_entry == entry and slot == block_end:
                block_end = slot + 1
            else:
                flush()
                open_dir, open_entry = kind, entry
                block_start, block_end = slot, slot + 1
        elif kind in ("idle", "arrive", "leave"):
            flush()
    flush()
    return Schedule(tuple(actions))
