"""Field-study arithmetic and the rock-parameter deduction study.

Two jobs: length-weighted comparisons between operator-driven and
model-advised tunnel sections, and a sweep of the decision engine over a
grid of rock-mass parameters with box-plot summaries per level.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import datagen, decision, physics as physics_mod
from .errors import InvalidInputError
from .validation import require_finite, require_positive

METHODS = ("operator", "model")
METRICS = ("pr", "hf", "cost")


@dataclass(frozen=True)
class SectionRecord:
    """One contiguous tunnel section driven under a single control method."""

    id: str
    start_m: float
    end_m: float
    method: str
    pr: float  # mm/min
    hf: float  # m3 per cutter
    cost: float  # currency per metre

    def __post_init__(self):
        require_finite(start_m=self.start_m, end_m=self.end_m)
        if self.end_m <= self.start_m:
            raise InvalidInputError(
                f"section {self.id}: end chainage must exceed start"
            )
        if self.method not in METHODS:
            raise InvalidInputError(
                f"section {self.id}: method must be one of {METHODS}, got {self.method!r}"
            )
        require_positive(pr=self.pr, hf=self.hf, cost=self.cost)

    @property
    def length_m(self) -> float:
        return self.end_m - self.start_m


def weighted_average(sections, metric: str) -> float:
    """Length-weighted mean of one metric across sections."""
    if metric not in METRICS:
        raise InvalidInputError(f"metric must be one of {METRICS}, got {metric!r}")
    if not sections:
        raise InvalidInputError("no sections given")
    total = sum(s.length_m for s in sections)
    return sum(s.length_m * getattr(s, metric) for s in sections) / total


@dataclass(frozen=True)
class ComparisonReport:
    metric: str
    model_avg: float
    operator_avg: float
    relative_change_pct: float

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "model_avg": self.model_avg,
            "operator_avg": self.operator_avg,
            "relative_change_pct": self.relative_change_pct,
        }


def compare_methods(sections, metric: str = "pr") -> ComparisonReport:
    """Relative change of the model-advised sections over the operator ones."""
    model = [s for s in sections if s.method == "model"]
    operator = [s for s in sections if s.method == "operator"]
    if not model or not operator:
        raise InvalidInputError("need at least one section per method")
    m = weighted_average(model, metric)
    o = weighted_average(operator, metric)
    return ComparisonReport(
        metric=metric, model_avg=m, operator_avg=o,
        relative_change_pct=(m - o) / o * 100.0,
    )


SECTIONS_CSV_HEADER = ["id", "start_m", "end_m", "method", "pr", "hf", "cost"]


def read_sections_csv(path) -> list:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SECTIONS_CSV_HEADER:
            raise InvalidInputError(
                f"bad sections header: expected {SECTIONS_CSV_HEADER}, got {header}"
            )
        out = []
        for ln, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 7:
                raise InvalidInputError(f"line {ln}: expected 7 fields")
            try:
                out.append(
                    SectionRecord(
                        id=row[0], start_m=float(row[1]), end_m=float(row[2]),
                        method=row[3], pr=float(row[4]), hf=float(row[5]),
                        cost=float(row[6]),
                    )
                )
            except ValueError as exc:
                raise InvalidInputError(f"line {ln}: {exc}") from exc
    return out


# ---------------------------------------------------------------------------
# Box-plot statistics


@dataclass(frozen=True)
class BoxStats:
    """Five-number summary plus the mean; quartiles use linear interpolation
    between closest ranks (the numpy default)."""

    min: float
    q1: float
    median: float
    q3: float
    max: float
    mean: float

    def __post_init__(self):
        if not self.min <= self.q1 <= self.median <= self.q3 <= self.max:
            raise InvalidInputError("box statistics out of order")

    @classmethod
    def from_values(cls, values) -> "BoxStats":
        arr = np.asarray(values, dtype=float)
        if arr.size == 0:
            raise InvalidInputError("no values to summarize")
        if not np.isfinite(arr).all():
            raise InvalidInputError("values must be finite")
        q1, med, q3 = np.percentile(arr, [25.0, 50.0, 75.0], method="linear")
        return cls(
            min=float(arr.min()), q1=float(q1), median=float(med),
            q3=float(q3), max=float(arr.max()), mean=float(arr.mean()),
        )

    def to_dict(self) -> dict:
        return {
            "min": self.min, "q1": self.q1, "median": self.median,
            "q3": self.q3, "max": self.max, "mean": self.mean,
        }


# ---------------------------------------------------------------------------
# Deduction study


def _levels(name, values) -> tuple:
    vals = tuple(float(v) for v in values)
    if not vals:
        raise InvalidInputError(f"{name} levels must be non-empty")
    for v in vals:
        require_finite(**{name: v})
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise InvalidInputError(f"{name} levels must be strictly increasing")
    return vals


@dataclass(frozen=True)
class DeductionGrid:
    """Rock-parameter levels swept by the deduction study."""

    ucs_levels: tuple = (50.0, 100.0, 150.0, 200.0, 250.0, 300.0)
    rqd_levels: tuple = (20.0, 40.0, 60.0, 80.0, 100.0)
    cai_levels: tuple = (2.0, 3.0, 4.0, 5.0)

    def __post_init__(self):
        object.__setattr__(self, "ucs_levels", _levels("ucs", self.ucs_levels))
        object.__setattr__(self, "rqd_levels", _levels("rqd", self.rqd_levels))
        object.__setattr__(self, "cai_levels", _levels("cai", self.cai_levels))

    @property
    def size(self) -> int:
        return len(self.ucs_levels) * len(self.rqd_levels) * len(self.cai_levels)

    @classmethod
    def from_dict(cls, doc: dict) -> "DeductionGrid":
        unknown = set(doc) - {"ucs", "rqd", "cai"}
        if unknown:
            raise InvalidInputError(f"unknown grid keys: {sorted(unknown)}")
        kw = {}
        for key, field_name in (("ucs", "ucs_levels"), ("rqd", "rqd_levels"),
                                ("cai", "cai_levels")):
            if key in doc:
                kw[field_name] = tuple(doc[key])
        return cls(**kw)


def default_baseline() -> dict:
    """Mid-range muck and vibration features, held fixed while rock
    parameters vary."""
    out = {}
    for key in ("d_avg", "ci", "peak_acc", "main_freq"):
        lo, hi = datagen.DEFAULT_RANGES[key]
        out[key] = (lo + hi) / 2.0
    return out


@dataclass(frozen=True)
class DeductionRow:
    ucs: float
    rqd: float
    cai: float
    status: str
    p_opt: float | None
    rpm_opt: float | None
    cost: float | None


@dataclass
class DeductionStudy:
    rows: list
    stats: dict  # parameter -> level -> group summary
    infeasible_count: int

    def stats_to_dict(self) -> dict:
        out = {}
        for param, groups in self.stats.items():
            out[param] = {
                repr(level): {
                    "count": g["count"],
                    "infeasible": g["infeasible"],
                    "p": g["p"].to_dict() if g["p"] is not None else None,
                    "rpm": g["rpm"].to_dict() if g["rpm"] is not None else None,
                }
                for level, g in groups.items()
            }
        return out


def _group(rows, key) -> dict:
    groups = {}
    for row in rows:
        groups.setdefault(getattr(row, key), []).append(row)
    out = {}
    for level in sorted(groups):
        feasible = [r for r in groups[level] if r.status == "optimal"]
        out[level] = {
            "count": len(feasible),
            "infeasible": len(groups[level]) - len(feasible),
            "p": BoxStats.from_values([r.p_opt for r in feasible]) if feasible else None,
            "rpm": BoxStats.from_values([r.rpm_opt for r in feasible]) if feasible else None,
        }
    return out


def deduction_study(model, rules: physics_mod.PhysicsRules,
                    dgrid: DeductionGrid | None = None,
                    baseline: dict | None = None,
                    limits=None, cost_model=None, grid=None) -> DeductionStudy:
    """Optimize every rock-parameter combination and summarize per level.

    Infeasible combinations stay in the row table but are excluded from the
    box statistics; their count is reported instead.
    """
    dgrid = DeductionGrid() if dgrid is None else dgrid
    baseline = default_baseline() if baseline is None else dict(baseline)
    missing = {"d_avg", "ci", "peak_acc", "main_freq"} - set(baseline)
    if missing:
        raise InvalidInputError(f"baseline is missing fields: {sorted(missing)}")
    rows = []
    for ucs in dgrid.ucs_levels:
        for rqd in dgrid.rqd_levels:
            for cai in dgrid.cai_levels:
                ctx = decision.DecisionContext(ucs=ucs, rqd=rqd, cai=cai, **baseline)
                res = decision.optimize(model, rules, ctx, limits, cost_model, grid)
                rows.append(
                    DeductionRow(
                        ucs=ucs, rqd=rqd, cai=cai, status=res.status,
                        p_opt=res.p, rpm_opt=res.rpm,
                        cost=res.cost.c_t if res.cost is not None else None,
                    )
                )
    stats = {key: _group(rows, key) for key in ("ucs", "rqd", "cai")}
    return DeductionStudy(
        rows=rows,
        stats=stats,
        infeasible_count=sum(1 for r in rows if r.status != "optimal"),
    )


STUDY_CSV_HEADER = ["ucs", "rqd", "cai", "status", "p_opt", "rpm_opt", "cost"]


def write_study_csv(study: DeductionStudy, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(STUDY_CSV_HEADER)
        for r in study.rows:
            writer.writerow(
                [
                    repr(r.ucs), repr(r.rqd), repr(r.cai), r.status,
                    "" if r.p_opt is None else repr(r.p_opt),
                    "" if r.rpm_opt is None else repr(r.rpm_opt),
                    "" if r.cost is None else repr(r.cost),
                ]
            )
