"""Desk-scale exact solver: best-first branch-and-bound over order sequences
interleaved with station charge/discharge blocks.

The search expands labels over (served-order set, current anchor, per-station
block counts). Station activity is grown slot by slot exactly like the
fixed-route optimizer, so the explored solution space is: any order subset in
any feasible sequence, plus up to `revisits + 1` single-direction contiguous
charge/discharge blocks per station, anywhere the clock allows. An admissible
profit bound (remaining completable fares plus an optimistic V2G term) drives
best-first expansion and pruning; with pruning disabled the same code
exhaustively enumerates the label space.

`brute_force_reference` in `oracle.py` enumerates the identical space by raw
recursion and is the acceptance oracle for this module.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass

from .dp import CapExceeded
from .metrics import travel
from .model import (
    BATTERY_TOL,
    Charge,
    Discharge,
    GRID_STATION,
    Instance,
    Schedule,
    Serve,
    TIME_EPS,
)
from .report import SolverReport
from .simulate import profit_split

_IDLE, _CHG, _DIS = 0, 1, 2


@dataclass(frozen=True)
class SolveCaps:
    max_orders: int = 8
    max_grid_stations: int = 3
    revisits: int = 2
    slot_window: tuple[int, int] | None = None
    max_labels: int = 50_000_000


class _Label:
    __slots__ = ("mask", "anchor", "slot", "run", "counts", "t", "b", "money", "parent", "step", "live")

    def __init__(self, mask, anchor, slot, run, counts, t, b, money, parent, step):
        self.mask = mask
        self.anchor = anchor  # -1 source, order index, or ~station: ("s", idx) handled via slot >= 0
        self.slot = slot  # -1 when not at a station presence
        self.run = run
        self.counts = counts
        self.t = t
        self.b = b
        self.money = money
        self.parent = parent
        self.step = step
        self.live = True


def solve_exact(
    inst: Instance,
    caps: SolveCaps = SolveCaps(),
    *,
    prune: bool = True,
    seed: int = 0,
    instance_id: str = "",
) -> SolverReport:
    """Optimal schedule within the configured block/revisit caps."""
    t0 = time.perf_counter()
    ctx = inst.context()
    orders = list(inst.orders)
    n_grid = sum(1 for s in inst.stations if s.kind == GRID_STATION)
    if len(orders) > caps.max_orders:
        raise CapExceeded(f"{len(orders)} orders exceed the cap {caps.max_orders}")
    if n_grid > caps.max_grid_stations:
        raise CapExceeded(f"{n_grid} grid stations exceed the cap {caps.max_grid_stations}")

    ev = ctx.ev
    gamma = ev.efficiency_kwh_per_km
    cap_kwh = ev.capacity_kwh
    dm = float(ctx.slot_minutes)
    stations = list(inst.stations)
    s_index = {s.id: i for i, s in enumerate(stations)}
    max_blocks = caps.revisits + 1

    ranges = {}
    for s in stations:
        lo, hi = ctx.usable_range[s.id]
        if caps.slot_window is not None:
            lo, hi = max(lo, caps.slot_window[0]), min(hi, caps.slot_window[1])
        ranges[s.id] = (lo, hi)

    latest_start = {}
    floors = {}
    for i, o in enumerate(orders):
        floors[i] = max(o.window_start_min, ctx.work_start)
        latest_start[i] = min(o.window_end_min, ctx.work_end) - o.service_time_min

    # Admissible V2G bound: selling the current surplus at the best price, plus
    # any buy-low/sell-high spread the tariffs actually admit.
    max_d = ctx.max_discharge_price
    min_c = min(p for s in stations for p in s.tariff.charge_price)
    spread = max(0.0, max_d - min_c)
    e_max = max(ctx.slot_energy[s.id] for s in stations)
    slot_hi_all = max(hi for lo, hi in ranges.values())

    def ub(label: _Label) -> float:
        rest = 0.0
        t = label.t
        for i, o in enumerate(orders):
            if not (label.mask >> i) & 1 and latest_start[i] >= t - TIME_EPS:
                rest += o.fare
        v2g = max_d * max(label.b - ev.final_soc_min_kwh, 0.0)
        if spread > 0.0:
            k = int(math.ceil(t / dm - TIME_EPS))
            v2g += spread * e_max * max(slot_hi_all - k, 0)
        return rest + v2g

    # Anchor locations: -1 source, order index = its dropoff, 1000+i = station i.
    _anchor_loc = {-1: inst.query.source}
    for i, o in enumerate(orders):
        _anchor_loc[i] = o.dropoff
    for i, s in enumerate(stations):
        _anchor_loc[1000 + i] = s.location

    n_labels = 0

    def make(mask, anchor, slot, run, counts, t, b, money, parent, step) -> _Label:
        nonlocal n_labels
        n_labels += 1
        if n_labels > caps.max_labels:
            raise CapExceeded(f"label guard exceeded: {n_labels}")
        return _Label(mask, anchor, slot, run, counts, t, b, money, parent, step)

    store: dict = {}
    heap: list = []
    counter = 0
    best_final: _Label | None = None
    lossy = 0

    def offer(label: _Label, node_key, label_key) -> None:
        nonlocal counter, lossy
        node = store.setdefault(node_key, {})
        old = node.get(label_key)
        if old is not None:
            if (old.money, old.b, -old.t) >= (label.money, label.b, -label.t):
                return
            old.live = False
            if old.b > label.b + 1e-12 or old.t < label.t - 1e-9:
                lossy += 1
        node[label_key] = label
        prio = label.money + ub(label) if prune else 0.0
        counter += 1
        heapq.heappush(heap, (-prio, counter, label))

    res_bucket = 1e-6  # exact labels; the bucket only collapses float-identical states

    def bkey(t: float, b: float):
        return (t, int(b / res_bucket))

    start = make(0, -1, -1, _IDLE, (0,) * len(stations), 0.0, ev.initial_soc_kwh, 0.0, None, None)
    offer(start, (0, -1, start.counts), bkey(start.t, start.b))

    def expand(label: _Label) -> None:
        nonlocal best_final
        here = _anchor_loc[label.anchor]
        if label.slot < 0:
            # Completed state: close the route, serve an order, or enter a station.
            d_fin, tt_fin = travel(here, inst.query.destination, inst)
            b_fin = label.b - gamma * d_fin
            if b_fin >= ev.final_soc_min_kwh - BATTERY_TOL and b_fin >= -BATTERY_TOL:
                if best_final is None or label.money > best_final.money + 1e-12:
                    fin = make(label.mask, label.anchor, -1, _IDLE, label.counts,
                               label.t + tt_fin, b_fin, label.money, label, ("finish",))
                    best_final = fin
            for i, o in enumerate(orders):
                if (label.mask >> i) & 1:
                    continue
                d1, t1 = travel(here, o.pickup, inst)
                s = max(label.t + t1, floors[i])
                if s > latest_start[i] + TIME_EPS:
                    continue
                b2 = label.b - gamma * (d1 + o.service_distance_km)
                if b2 < -BATTERY_TOL:
                    continue
                nl = make(label.mask | (1 << i), i, -1, _IDLE, label.counts,
                          s + o.service_time_min, b2, label.money + o.fare, label, ("serve", i))
                offer(nl, (nl.mask, nl.anchor, nl.counts), bkey(nl.t, nl.b))
            for si, s in enumerate(stations):
                lo, hi = ranges[s.id]
                if lo >= hi or label.counts[si] >= max_blocks:
                    continue
                d1, t1 = travel(here, s.location, inst)
                k0 = max(int(math.ceil((label.t + t1) / dm - TIME_EPS)), lo)
                if k0 >= hi:
                    continue
                b2 = label.b - gamma * d1
                if b2 < -BATTERY_TOL:
                    continue
                nl = make(label.mask, 1000 + si, k0, _IDLE, label.counts,
                          k0 * dm, b2, label.money, label, ("arrive", si))
                offer(nl, (nl.mask, nl.anchor, nl.counts, nl.slot, nl.run), (int(nl.b / res_bucket),))
        else:
            si = label.anchor - 1000
            s = stations[si]
            lo, hi = ranges[s.id]
            k = label.slot
            if label.run != _IDLE:
                nl = make(label.mask, label.anchor, -1, _IDLE, label.counts,
                          k * dm, label.b, label.money, label, ("leave", si))
                offer(nl, (nl.mask, nl.anchor, nl.counts), bkey(nl.t, nl.b))
            if k >= hi:
                return
            e = ctx.slot_energy[s.id]
            idle = make(label.mask, label.anchor, k + 1, _IDLE, label.counts,
                        (k + 1) * dm, label.b, label.money, label, ("idle", si, k))
            offer(idle, (idle.mask, idle.anchor, idle.counts, idle.slot, idle.run), (int(idle.b / res_bucket),))
            b_c = label.b + e
            if b_c <= cap_kwh + BATTERY_TOL:
                counts = label.counts
                ok = True
                if label.run != _CHG:
                    if counts[si] >= max_blocks:
                        ok = False
                    else:
                        counts = counts[:si] + (counts[si] + 1,) + counts[si + 1 :]
                if ok:
                    ch = make(label.mask, label.anchor, k + 1, _CHG, counts,
                              (k + 1) * dm, b_c, label.money - s.tariff.charge_price[k] * e,
                              label, ("charge", si, k))
                    offer(ch, (ch.mask, ch.anchor, ch.counts, ch.slot, ch.run), (int(ch.b / res_bucket),))
            b_d = label.b - e
            if b_d >= -BATTERY_TOL:
                counts = label.counts
                ok = True
                if label.run != _DIS:
                    if counts[si] >= max_blocks:
                        ok = False
                    else:
                        counts = counts[:si] + (counts[si] + 1,) + counts[si + 1 :]
                if ok:
                    dis = make(label.mask, label.anchor, k + 1, _DIS, counts,
                               (k + 1) * dm, b_d, label.money + s.tariff.discharge_price[k] * e,
                               label, ("discharge", si, k))
                    offer(dis, (dis.mask, dis.anchor, dis.counts, dis.slot, dis.run), (int(dis.b / res_bucket),))

    while heap:
        neg_prio, _, label = heapq.heappop(heap)
        if not label.live:
            continue
        if prune and best_final is not None and -neg_prio <= best_final.money + 1e-12:
            break
        expand(label)

    if best_final is None:
        raise CapExceeded("no feasible schedule found (even the empty one failed)")

    schedule = _reconstruct(best_final, orders, stations)
    total, order_part, v2g_part = profit_split(schedule, inst)
    bound = lossy * res_bucket * max(ctx.max_discharge_price, ctx.max_charge_price, 1.0)
    return SolverReport(
        algo="exact",
        seed=seed,
        instance_id=instance_id,
        best_schedule=schedule,
        total_profit=total,
        order_profit=order_part,
        v2g_profit=v2g_part,
        convergence=[(time.perf_counter() - t0, total)],
        wall_clock_s=time.perf_counter() - t0,
        feasible=True,
        dp_bound=bound,
    )


def _reconstruct(final: _Label, orders, stations) -> Schedule:
    steps = []
    lab = final
    while lab is not None:
        if lab.step is not None:
            steps.append(lab.step)
        lab = lab.parent
    steps.reverse()

    actions = []
    open_dir = None
    open_station = -1
    b0 = e0 = -1

    def flush():
        nonlocal open_dir
        if open_dir is None:
            return
        cls = Charge if open_dir == "charge" else Discharge
        actions.append(cls(stations[open_station].id, b0, e0))
        open_dir = None

    for step in steps:
        kind = step[0]
        if kind == "serve":
            flush()
            actions.append(Serve(orders[step[1]].id))
        elif kind in ("charge", "discharge"):
            _, si, k = step
            if open_dir == kind and open_station == si and k == e0:
                e0 = k + 1
            else:
                flush()
                open_dir, open_station = kind, si
                b0, e0 = k, k + 1
        else:  # arrive / idle / leave / finish
            flush()
    flush()
    return Schedule(tuple(actions))
