"""Solver run reports: best schedule, profit decomposition, convergence."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .io import schedule_from_json, schedule_to_json
from .model import MONEY_TOL, Schedule


@dataclass
class SolverReport:
    algo: str
    seed: int
    instance_id: str
    best_schedule: Schedule
    total_profit: float
    order_profit: float
    v2g_profit: float
    convergence: list[tuple[float, float]] = field(default_factory=list)
    wall_clock_s: float = 0.0
    feasible: bool = True
    dp_bound: float = 0.0

    def __post_init__(self) -> None:
        if abs(self.total_profit - (self.order_profit + self.v2g_profit)) > MONEY_TOL:
            raise ValueError("profit decomposition does not add up")
        profits = [p for _, p in self.convergence]
        if any(b < a - MONEY_TOL for a, b in zip(profits, profits[1:])):
            raise ValueError("convergence series must be non-decreasing")

    def to_json(self) -> dict:
        return {
            "algo": self.algo,
            "seed": self.seed,
            "instance_id": self.instance_id,
            "best_schedule": schedule_to_json(self.best_schedule),
            "total_profit": self.total_profit,
            "order_profit": self.order_profit,
            "v2g_profit": self.v2g_profit,
            "convergence": [[t, p] for t, p in self.convergence],
            "wall_clock_s": self.wall_clock_s,
            "feasible": self.feasible,
            "dp_bound": self.dp_bound,
        }

    @staticmethod
    def from_json(doc: dict) -> "SolverReport":
        return SolverReport(
            algo=doc["algo"],
            seed=doc["seed"],
            instance_id=doc["instance_id"],
            best_schedule=schedule_from_json(doc["best_schedule"]),
            total_profit=doc["total_profit"],
            order_profit=doc["order_profit"],
            v2g_profit=doc["v2g_profit"],
            convergence=[(t, p) for t, p in doc["convergence"]],
            wall_clock_s=doc["wall_clock_s"],
            feasible=doc["feasible"],
            dp_bound=doc.get("dp_bound", 0.0),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")

    @staticmethod
    def load(path) -> "SolverReport":
        return SolverReport.from_json(json.loads(Path(path).read_text()))


def emit_convergence(report: SolverReport) -> str:
    """Two-column CSV (elapsed_s, profit) of the report's convergence series."""
    lines = ["elapsed_s,profit"]
    for t, p in sorted(report.convergence):
        lines.append(f"{t!r},{p!r}")
    return "\n".join(lines) + "\n"
