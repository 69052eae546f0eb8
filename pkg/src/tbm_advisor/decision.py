"""Operating-parameter decision engine.

Scans the (penetration, RPM) grid, predicts machine response per cell with
whatever model is supplied, keeps the cells that respect the machine's rated
limits and the critical-penetration rule, and ranks the survivors by
excavation cost per metre.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from . import physics as physics_mod
from .errors import InvalidInputError
from .validation import as_matrix, require_finite, require_positive

INF = float("inf")


def _as_floats(doc: dict, owner: str) -> dict:
    out = {}
    for k, v in doc.items():
        try:
            out[k] = float(v)
        except (TypeError, ValueError):
            raise InvalidInputError(f"{owner} field {k} must be a number, got {v!r}")
    return out


@dataclass(frozen=True)
class RatedLimits:
    """Machine ratings and the fraction of thrust/torque the advisor may use.

    Belt capacity is a hard volumetric ceiling, so no safety factor applies.
    """

    thrust_rated: float = 30000.0  # kN
    torque_rated: float = 3780.0  # kN*m
    belt_rated: float = 600.0  # m3/h
    safety_factor_thrust: float = 0.4
    safety_factor_torque: float = 0.4

    def __post_init__(self):
        require_positive(
            thrust_rated=self.thrust_rated,
            torque_rated=self.torque_rated,
            belt_rated=self.belt_rated,
        )
        for name in ("safety_factor_thrust", "safety_factor_torque"):
            v = getattr(self, name)
            require_finite(**{name: v})
            if not 0.0 < v <= 1.0:
                raise InvalidInputError(f"{name} must be inside (0, 1], got {v}")

    @property
    def thrust_cap(self) -> float:
        return self.safety_factor_thrust * self.thrust_rated

    @property
    def torque_cap(self) -> float:
        return self.safety_factor_torque * self.torque_rated

    def to_dict(self) -> dict:
        return {
            "thrust_rated": self.thrust_rated,
            "torque_rated": self.torque_rated,
            "belt_rated": self.belt_rated,
            "safety_factor_thrust": self.safety_factor_thrust,
            "safety_factor_torque": self.safety_factor_torque,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RatedLimits":
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidInputError(f"unknown limit keys: {sorted(unknown)}")
        return cls(**_as_floats(doc, "limits"))


@dataclass(frozen=True)
class CostModel:
    """Per-metre excavation cost parameters.

    c1 is the daily operating cost, c2 the cost of one cutter change; both
    ship as placeholders to be overridden per project.  L is the horizon
    length in m, A the excavated cross-section in m2.
    """

    c1: float = 20000.0
    c2: float = 15000.0
    L: float = 1.0
    A: float = math.pi * 9.0
    utilization: float = 0.5
    hours_per_day: float = 24.0

    def __post_init__(self):
        require_positive(
            c1=self.c1, c2=self.c2, L=self.L, A=self.A,
            hours_per_day=self.hours_per_day,
        )
        require_finite(utilization=self.utilization)
        if not 0.0 < self.utilization <= 1.0:
            raise InvalidInputError(
                f"utilization must be inside (0, 1], got {self.utilization}"
            )

    def to_dict(self) -> dict:
        return {
            "c1": self.c1, "c2": self.c2, "L": self.L, "A": self.A,
            "utilization": self.utilization, "hours_per_day": self.hours_per_day,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CostModel":
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidInputError(f"unknown cost keys: {sorted(unknown)}")
        return cls(**_as_floats(doc, "cost"))


@dataclass(frozen=True)
class GridSpec:
    """Inclusive scan grid over RPM and penetration (mm/r)."""

    rpm_min: float = 0.0
    rpm_max: float = 10.0
    rpm_step: float = 0.1
    p_min: float = 0.0
    p_max: float = 16.0
    p_step: float = 1.0

    def __post_init__(self):
        require_finite(
            rpm_min=self.rpm_min, rpm_max=self.rpm_max, rpm_step=self.rpm_step,
            p_min=self.p_min, p_max=self.p_max, p_step=self.p_step,
        )
        if self.rpm_step <= 0 or self.p_step <= 0:
            raise InvalidInputError("grid steps must be > 0")
        if self.rpm_max < self.rpm_min or self.p_max < self.p_min:
            raise InvalidInputError("grid max must be >= min")

    @staticmethod
    def _axis(lo: float, hi: float, step: float) -> np.ndarray:
        # Values are rounded so accumulated binary drift (0.30000000000000004)
        # never leaks into grids, documents or tie-breaking.
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return np.round(lo + step * np.arange(count), 10)

    def rpm_values(self) -> np.ndarray:
        return self._axis(self.rpm_min, self.rpm_max, self.rpm_step)

    def p_values(self) -> np.ndarray:
        return self._axis(self.p_min, self.p_max, self.p_step)

    def to_dict(self) -> dict:
        return {
            "rpm_min": self.rpm_min, "rpm_max": self.rpm_max, "rpm_step": self.rpm_step,
            "p_min": self.p_min, "p_max": self.p_max, "p_step": self.p_step,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "GridSpec":
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidInputError(f"unknown grid keys: {sorted(unknown)}")
        return cls(**_as_floats(doc, "grid"))


CONTEXT_FIELDS = ("ucs", "rqd", "cai", "d_avg", "ci", "peak_acc", "main_freq")


@dataclass(frozen=True)
class DecisionContext:
    """Ground conditions the advisor is asked about: rock mass, muck
    indices from the latest sieve round, and cutterhead vibration levels."""

    ucs: float
    rqd: float
    cai: float
    d_avg: float
    ci: float
    peak_acc: float
    main_freq: float

    def __post_init__(self):
        require_finite(**{f: getattr(self, f) for f in CONTEXT_FIELDS})

    def to_dict(self) -> dict:
        return {f: getattr(self, f) for f in CONTEXT_FIELDS}

    @classmethod
    def from_dict(cls, doc: dict) -> "DecisionContext":
        missing = set(CONTEXT_FIELDS) - set(doc)
        if missing:
            raise InvalidInputError(f"context is missing fields: {sorted(missing)}")
        unknown = set(doc) - set(CONTEXT_FIELDS)
        if unknown:
            raise InvalidInputError(f"unknown context fields: {sorted(unknown)}")
        return cls(**_as_floats({f: doc[f] for f in CONTEXT_FIELDS}, "context"))

    def feature_matrix(self, p: np.ndarray, rpm: np.ndarray) -> np.ndarray:
        n = len(p)
        cols = [p, rpm] + [np.full(n, getattr(self, f)) for f in CONTEXT_FIELDS]
        return np.column_stack(cols)


def penetration_rate(p: float, rpm: float) -> float:
    """Advance speed in mm/min."""
    require_finite(p=p, rpm=rpm)
    return float(p) * float(rpm)


@dataclass(frozen=True)
class CostBreakdown:
    c_s: float  # boring time cost per metre
    c_c: float  # cutter consumption cost per metre
    c_t: float  # total per metre


def total_cost(pr: float, hf: float, cm: CostModel) -> CostBreakdown:
    """Cost per metre at advance rate pr (mm/min) and cutter life hf (m3/cutter).

    A standstill (pr = 0) or a dead cutter model (hf = 0) yields the
    infinite-cost sentinel rather than an error, so grid scans can simply
    skip such cells.
    """
    require_finite(pr=pr, hf=hf)
    pr_m_per_h = pr * 0.06
    c_s = (
        cm.c1 * cm.L / (cm.utilization * cm.hours_per_day * pr_m_per_h)
        if pr > 0.0
        else INF
    )
    c_c = cm.c2 * cm.L * cm.A / hf if hf > 0.0 else INF
    return CostBreakdown(c_s=c_s, c_c=c_c, c_t=c_s + c_c)


@dataclass
class RegionGrid:
    """Predictions and constraint masks over every grid cell.

    Cells are indexed rpm-major: index = i_rpm * len(p_values) + i_p.
    """

    rpm_values: np.ndarray
    p_values: np.ndarray
    rpm: np.ndarray
    p: np.ndarray
    th: np.ndarray
    tor: np.ndarray
    hf: np.ndarray
    pb: np.ndarray
    thrust_ok: np.ndarray
    torque_ok: np.ndarray
    belt_ok: np.ndarray
    cp_ok: np.ndarray
    feasible: np.ndarray
    p_min_mm: float

    @property
    def n_cells(self) -> int:
        return len(self.rpm)


def feasible_region(model, rules: physics_mod.PhysicsRules, ctx: DecisionContext,
                    limits: RatedLimits | None = None,
                    grid: GridSpec | None = None) -> RegionGrid:
    """Evaluate the model over the grid and apply all four constraints."""
    limits = RatedLimits() if limits is None else limits
    grid = GridSpec() if grid is None else grid
    rpm_values = grid.rpm_values()
    p_values = grid.p_values()
    rpm = np.repeat(rpm_values, len(p_values))
    p = np.tile(p_values, len(rpm_values))
    X = ctx.feature_matrix(p, rpm)
    pred = as_matrix(model.predict(X), 4, "predictions")
    hf, th, tor, pb = pred[:, 0], pred[:, 1], pred[:, 2], pred[:, 3]
    p_min = physics_mod.critical_penetration(
        rules.cp, ctx.ucs, rules.layout.nominal_spacing_mm
    )
    thrust_ok = th <= limits.thrust_cap
    torque_ok = tor <= limits.torque_cap
    belt_ok = pb <= limits.belt_rated
    cp_ok = p >= p_min
    return RegionGrid(
        rpm_values=rpm_values, p_values=p_values, rpm=rpm, p=p,
        th=th, tor=tor, hf=hf, pb=pb,
        thrust_ok=thrust_ok, torque_ok=torque_ok, belt_ok=belt_ok, cp_ok=cp_ok,
        feasible=thrust_ok & torque_ok & belt_ok & cp_ok,
        p_min_mm=p_min,
    )


@dataclass
class DecisionResult:
    status: str  # "optimal" | "infeasible"
    p: float | None
    rpm: float | None
    predicted: dict | None
    pr: float | None
    cost: CostBreakdown | None
    feasible_count: int
    eliminated: dict
    region: RegionGrid
    costs: np.ndarray  # c_t per cell, inf where the sentinel applies

    def to_document(self, include_grid: bool = True) -> dict:
        def num(x):
            return float(x) if math.isfinite(x) else None

        doc = {
            "status": self.status,
            "optimum": (
                {"p": self.p, "rpm": self.rpm} if self.status == "optimal" else None
            ),
            "predicted": self.predicted,
            "pr": self.pr,
            "cost": (
                {"c_s": self.cost.c_s, "c_c": self.cost.c_c, "c_t": self.cost.c_t}
                if self.cost is not None
                else None
            ),
            "feasible_count": self.feasible_count,
            "eliminated": dict(self.eliminated),
            "p_min_mm": self.region.p_min_mm,
        }
        if include_grid:
            g = self.region
            doc["grid"] = {
                "rpm": [float(v) for v in g.rpm_values],
                "p": [float(v) for v in g.p_values],
                "cells": [
                    {
                        "rpm": float(g.rpm[i]),
                        "p": float(g.p[i]),
                        "th": float(g.th[i]),
                        "tor": float(g.tor[i]),
                        "hf": float(g.hf[i]),
                        "pb": float(g.pb[i]),
                        "feasible": bool(g.feasible[i]),
                        "mask": {
                            "thrust": bool(g.thrust_ok[i]),
                            "torque": bool(g.torque_ok[i]),
                            "belt": bool(g.belt_ok[i]),
                            "cp": bool(g.cp_ok[i]),
                        },
                        "cost": num(self.costs[i]),
                    }
                    for i in range(g.n_cells)
                ],
            }
        return doc


def optimize(model, rules: physics_mod.PhysicsRules, ctx: DecisionContext,
             limits: RatedLimits | None = None,
             cost_model: CostModel | None = None,
             grid: GridSpec | None = None) -> DecisionResult:
    """Cheapest feasible operating point; ties go to lower RPM, then lower p."""
    cost_model = CostModel() if cost_model is None else cost_model
    region = feasible_region(model, rules, ctx, limits, grid)
    pr = region.p * region.rpm
    pr_m_per_h = pr * 0.06
    with np.errstate(divide="ignore"):
        c_s = np.where(
            pr > 0.0,
            cost_model.c1 * cost_model.L
            / (cost_model.utilization * cost_model.hours_per_day * np.maximum(pr_m_per_h, 1e-300)),
            INF,
        )
        c_c = np.where(
            region.hf > 0.0,
            cost_model.c2 * cost_model.L * cost_model.A / np.where(region.hf > 0.0, region.hf, 1.0),
            INF,
        )
    costs = c_s + c_c
    eliminated = {
        "thrust": int((~region.thrust_ok).sum()),
        "torque": int((~region.torque_ok).sum()),
        "belt": int((~region.belt_ok).sum()),
        "cp": int((~region.cp_ok).sum()),
    }
    feasible_count = int(region.feasible.sum())
    ranked = np.where(region.feasible, costs, INF)
    best = int(np.argmin(ranked))  # first minimum = lowest rpm, then lowest p
    if not math.isfinite(ranked[best]):
        return DecisionResult(
            status="infeasible", p=None, rpm=None, predicted=None, pr=None,
            cost=None, feasible_count=feasible_count, eliminated=eliminated,
            region=region, costs=costs,
        )
    return DecisionResult(
        status="optimal",
        p=float(region.p[best]),
        rpm=float(region.rpm[best]),
        predicted={
            "th": float(region.th[best]),
            "tor": float(region.tor[best]),
            "hf": float(region.hf[best]),
            "pb": float(region.pb[best]),
        },
        pr=float(pr[best]),
        cost=CostBreakdown(
            c_s=float(c_s[best]), c_c=float(c_c[best]), c_t=float(costs[best])
        ),
        feasible_count=feasible_count,
        eliminated=eliminated,
        region=region,
        costs=costs,
    )


def dumps_document(doc: dict) -> str:
    """Canonical JSON used by both the CLI and the HTTP service, so the two
    routes produce byte-identical documents."""
    return json.dumps(doc, separators=(",", ":"), allow_nan=False)


def optimize_document(model, rules, ctx: DecisionContext,
                      limits: RatedLimits | None = None,
                      cost_model: CostModel | None = None,
                      grid: GridSpec | None = None,
                      include_grid: bool = True,
                      model_digest: str | None = None) -> dict:
    """One optimization run rendered as the wire/file document.

    Both the CLI and the HTTP service call this, which keeps their outputs
    byte-identical for identical inputs.
    """
    res = optimize(model, rules, ctx, limits, cost_model, grid)
    doc = res.to_document(include_grid=include_grid)
    if model_digest is not None:
        doc["model_digest"] = model_digest
    return doc


REGION_CSV_HEADER = ["rpm", "p", "th", "tor", "hf", "pb", "feasible", "cost"]


def write_region_csv(result: DecisionResult, path) -> None:
    g = result.region
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REGION_CSV_HEADER)
        for i in range(g.n_cells):
            cost = result.costs[i]
            writer.writerow(
                [
                    repr(float(g.rpm[i])),
                    repr(float(g.p[i])),
                    repr(float(g.th[i])),
                    repr(float(g.tor[i])),
                    repr(float(g.hf[i])),
                    repr(float(g.pb[i])),
                    1 if g.feasible[i] else 0,
                    repr(float(cost)) if math.isfinite(cost) else "inf",
                ]
            )
