"""Domain model: locations, orders, stations, tariffs, EV profile, schedules.

All types are immutable after construction; solvers share instances freely
across threads/processes. Validation happens at construction time so that
every object in the system is known-good.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

DAY_MINUTES = 1440

# Comparison tolerances used across the whole package.
MONEY_TOL = 1e-6
BATTERY_TOL = 1e-6
TIME_EPS = 1e-9

GRID_STATION = "grid_station"
HOME_SOURCE = "home_source"
HOME_DESTINATION = "home_destination"
STATION_KINDS = (GRID_STATION, HOME_SOURCE, HOME_DESTINATION)


class ModelError(ValueError):
    """Raised when a domain object violates one of its invariants."""


@dataclass(frozen=True, slots=True)
class Location:
    lat: float
    lon: float

    def __post_init__(self) -> None:
        if not (-90.0 <= self.lat <= 90.0):
            raise ModelError(f"latitude out of range: {self.lat}")
        if not (-180.0 <= self.lon <= 180.0):
            raise ModelError(f"longitude out of range: {self.lon}")


@dataclass(frozen=True, slots=True)
class Horizon:
    """One 24-hour day split into equal slots of `slot_minutes` each."""

    slot_minutes: int

    def __post_init__(self) -> None:
        if self.slot_minutes <= 0 or DAY_MINUTES % self.slot_minutes != 0:
            raise ModelError(f"slot_minutes must divide {DAY_MINUTES}: {self.slot_minutes}")

    @property
    def slot_count(self) -> int:
        return DAY_MINUTES // self.slot_minutes


@dataclass(frozen=True, slots=True)
class Order:
    """A ride/delivery request; the service leg has its own stored distance/time."""

    id: int
    pickup: Location
    dropoff: Location
    fare: float
    service_distance_km: float
    service_time_min: float
    window_start_min: float
    window_end_min: float

    def __post_init__(self) -> None:
        if self.window_start_min >= self.window_end_min:
            raise ModelError(f"order {self.id}: window start must precede window end")
        if self.fare < 0:
            raise ModelError(f"order {self.id}: negative fare")
        if self.service_distance_km < 0:
            raise ModelError(f"order {self.id}: negative service distance")
        if self.service_distance_km > 0 and self.service_time_min <= 0:
            raise ModelError(f"order {self.id}: service time must be positive")
        if self.window_start_min + self.service_time_min > self.window_end_min:
            raise ModelError(f"order {self.id}: not completable inside its own window")


@dataclass(frozen=True, slots=True)
class Tariff:
    """Piecewise-constant buy/sell prices, one entry per horizon slot ($/kWh)."""

    charge_price: tuple[float, ...]
    discharge_price: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.charge_price) != len(self.discharge_price):
            raise ModelError("tariff arrays must have equal length")
        if any(p < 0 for p in self.charge_price) or any(p < 0 for p in self.discharge_price):
            raise ModelError("tariff prices must be non-negative")


@dataclass(frozen=True, slots=True)
class Station:
    id: int
    location: Location
    power_kw: float
    tariff: Tariff
    kind: str

    def __post_init__(self) -> None:
        if self.power_kw <= 0:
            raise ModelError(f"station {self.id}: power must be positive")
        if self.kind not in STATION_KINDS:
            raise ModelError(f"station {self.id}: unknown kind {self.kind!r}")

    @property
    def is_home(self) -> bool:
        return self.kind != GRID_STATION


@dataclass(frozen=True, slots=True)
class EvProfile:
    capacity_kwh: float
    efficiency_kwh_per_km: float
    initial_soc_kwh: float
    final_soc_min_kwh: float

    def __post_init__(self) -> None:
        if self.capacity_kwh <= 0:
            raise ModelError("battery capacity must be positive")
        if self.efficiency_kwh_per_km <= 0:
            raise ModelError("driving efficiency must be positive")
        if not (0.0 <= self.initial_soc_kwh <= self.capacity_kwh):
            raise ModelError("initial SoC outside [0, capacity]")
        if not (0.0 <= self.final_soc_min_kwh <= self.capacity_kwh):
            raise ModelError("final SoC floor outside [0, capacity]")


@dataclass(frozen=True, slots=True)
class Query:
    """Driver-side problem data: endpoints, working hours, and the EV."""

    source: Location
    destination: Location
    work_start_min: float
    work_end_min: float
    ev: EvProfile

    def __post_init__(self) -> None:
        if not (0 <= self.work_start_min < self.work_end_min <= DAY_MINUTES):
            raise ModelError("working hours must satisfy 0 <= start < end <= 1440")


@dataclass(frozen=True, slots=True)
class FareParams:
    """Ride fare structure; `driver_share` is what remains after platform fees."""

    base: float = 2.75
    per_km: float = 1.49
    per_min: float = 0.39
    driver_share: float = 0.7


# ---------------------------------------------------------------------------
# Schedule actions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Serve:
    """Serve one order; its timing is forced by the window and the simulator."""

    order_id: int


@dataclass(frozen=True, slots=True)
class Charge:
    """Buy energy at a station over whole slots [slot_begin, slot_end)."""

    station_id: int
    slot_begin: int
    slot_end: int

    def __post_init__(self) -> None:
        if not (0 <= self.slot_begin < self.slot_end):
            raise ModelError(f"bad slot interval [{self.slot_begin}, {self.slot_end})")


@dataclass(frozen=True, slots=True)
class Discharge:
    """Sell energy back at a station over whole slots [slot_begin, slot_end)."""

    station_id: int
    slot_begin: int
    slot_end: int

    def __post_init__(self) -> None:
        if not (0 <= self.slot_begin < self.slot_end):
            raise ModelError(f"bad slot interval [{self.slot_begin}, {self.slot_end})")


Action = Serve | Charge | Discharge


@dataclass(frozen=True)
class Schedule:
    """Ordered action sequence, implicitly bracketed by source departure and
    destination arrival."""

    actions: tuple[Action, ...] = ()

    def __len__(self) -> int:
        return len(self.actions)

    def served_orders(self) -> list[int]:
        return [a.order_id for a in self.actions if isinstance(a, Serve)]

    @staticmethod
    def of(actions) -> "Schedule":
        return Schedule(tuple(actions))


EMPTY_SCHEDULE = Schedule()


# ---------------------------------------------------------------------------
# Instance
# ---------------------------------------------------------------------------


def _locations_equal(a: Location, b: Location, tol: float = 1e-9) -> bool:
    return abs(a.lat - b.lat) <= tol and abs(a.lon - b.lon) <= tol


@dataclass(frozen=True)
class Instance:
    """Immutable problem description shared by every solver."""

    horizon: Horizon
    orders: tuple[Order, ...]
    stations: tuple[Station, ...]
    query: Query
    avg_speed_kmh: float = 40.0
    detour_factor: float = 1.3

    def __post_init__(self) -> None:
        if self.avg_speed_kmh <= 0:
            raise ModelError("average speed must be positive")
        if self.detour_factor < 1.0:
            raise ModelError("detour factor must be >= 1")
        n = self.horizon.slot_count
        for st in self.stations:
            if len(st.tariff.charge_price) != n:
                raise ModelError(f"station {st.id}: tariff length != slot count {n}")
        ids = [o.id for o in self.orders]
        if len(set(ids)) != len(ids):
            raise ModelError("duplicate order ids")
        sids = [s.id for s in self.stations]
        if len(set(sids)) != len(sids):
            raise ModelError("duplicate station ids")
        homes_src = [s for s in self.stations if s.kind == HOME_SOURCE]
        homes_dst = [s for s in self.stations if s.kind == HOME_DESTINATION]
        if len(homes_src) != 1 or len(homes_dst) != 1:
            raise ModelError("instance needs exactly one home_source and one home_destination station")
        if not _locations_equal(homes_src[0].location, self.query.source):
            raise ModelError("home_source station must be co-located with the query source")
        if not _locations_equal(homes_dst[0].location, self.query.destination):
            raise ModelError("home_destination station must be co-located with the query destination")
        ws, we = self.query.work_start_min, self.query.work_end_min
        for o in self.orders:
            if o.window_end_min < ws or o.window_start_min > we:
                raise ModelError(f"order {o.id}: window does not intersect working hours")

    def context(self) -> "InstanceContext":
        """Lazily built per-instance lookup tables (cached on the instance)."""
        ctx = getattr(self, "_ctx", None)
        if ctx is None:
            ctx = InstanceContext(self)
            object.__setattr__(self, "_ctx", ctx)
        return ctx


class InstanceContext:
    """Derived lookups for one instance: indexes, price prefix sums, usable
    slot ranges, and a lazily filled point-to-point travel cache."""

    def __init__(self, inst: Instance) -> None:
        self.inst = inst
        self.orders_by_id = {o.id: o for o in inst.orders}
        self.stations_by_id = {s.id: s for s in inst.stations}
        h = inst.horizon
        self.slot_minutes = h.slot_minutes
        self.slot_count = h.slot_count
        q = inst.query
        self.work_start = q.work_start_min
        self.work_end = q.work_end_min
        self.ev = q.ev
        dm = float(h.slot_minutes)
        # First slot fully inside working hours / last usable slot-end for grid stations.
        self.grid_lo_slot = int(math.ceil(q.work_start_min / dm - TIME_EPS))
        self.grid_hi_slot = int(math.floor(q.work_end_min / dm + TIME_EPS))
        # Per-station: energy moved per slot, usable slot range, price prefix sums.
        self.slot_energy = {}
        self.usable_range = {}
        self.charge_prefix = {}
        self.discharge_prefix = {}
        for s in inst.stations:
            self.slot_energy[s.id] = s.power_kw * h.slot_minutes / 60.0
            if s.is_home:
                self.usable_range[s.id] = (0, self.slot_count)
            else:
                self.usable_range[s.id] = (self.grid_lo_slot, self.grid_hi_slot)
            self.charge_prefix[s.id] = _prefix(s.tariff.charge_price)
            self.discharge_prefix[s.id] = _prefix(s.tariff.discharge_price)
        all_charge = [p for s in inst.stations for p in s.tariff.charge_price]
        self.max_charge_price = max(all_charge) if all_charge else 0.0
        all_discharge = [p for s in inst.stations for p in s.tariff.discharge_price]
        self.max_discharge_price = max(all_discharge) if all_discharge else 0.0
        # Per-slot maximum charge price across stations (worst-profit scoring).
        self.max_charge_by_slot = [
            max(s.tariff.charge_price[k] for s in inst.stations) for k in range(self.slot_count)
        ]
        self.pe_factor = self.ev.efficiency_kwh_per_km * self.max_charge_price
        self.home_source = next(s for s in inst.stations if s.kind == HOME_SOURCE)
        self.home_destination = next(s for s in inst.stations if s.kind == HOME_DESTINATION)
        self._travel_cache: dict[tuple[Location, Location], tuple[float, float]] = {}
        self._shaw_scale: float | None = None

    def charge_cost(self, station_id: int, slot_begin: int, slot_end: int) -> float:
        """Money spent charging over [slot_begin, slot_end) at the station."""
        pre = self.charge_prefix[station_id]
        return (pre[slot_end] - pre[slot_begin]) * self.slot_energy[station_id]

    def discharge_revenue(self, station_id: int, slot_begin: int, slot_end: int) -> float:
        pre = self.discharge_prefix[station_id]
        return (pre[slot_end] - pre[slot_begin]) * self.slot_energy[station_id]

    def shaw_distance_scale(self) -> float:
        """Max pairwise distance over order endpoints; normalizes Shaw terms."""
        if self._shaw_scale is None:
            from .metrics import travel  # local import to avoid a cycle

            pts = [o.pickup for o in self.inst.orders] + [o.dropoff for o in self.inst.orders]
            best = 0.0
            for i in range(len(pts)):
                for j in range(i + 1, len(pts)):
                    d, _ = travel(pts[i], pts[j], self.inst)
                    if d > best:
                        best = d
            self._shaw_scale = best if best > 0 else 1.0
        return self._shaw_scale


def _prefix(values) -> list[float]:
    out = [0.0]
    acc = 0.0
    for v in values:
        acc += v
        out.append(acc)
    return out
