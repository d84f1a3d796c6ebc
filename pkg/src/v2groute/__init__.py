"""Profit-maximizing day planner for a single commercial EV with V2G."""

from .model import (
    Action,
    Charge,
    Discharge,
    EvProfile,
    FareParams,
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
from .simulate import (
    Infeasibility,
    InfeasibleScheduleError,
    Trace,
    is_feasible,
    profit,
    profit_split,
    simulate,
)

__all__ = [
    "Action",
    "Charge",
    "Discharge",
    "EvProfile",
    "FareParams",
    "Horizon",
    "Infeasibility",
    "InfeasibleScheduleError",
    "Instance",
    "Location",
    "ModelError",
    "Order",
    "Query",
    "Schedule",
    "Serve",
    "Station",
    "Tariff",
    "Trace",
    "is_feasible",
    "profit",
    "profit_split",
    "simulate",
]
