"""Muck characterization from sieve analyses and particle measurements.

Percentile sizes come from log-linear interpolation of the cumulative
passing curve over the sieve openings; the coarseness index is the sum of
cumulative retained percentages taken coarsest-first.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

from .errors import InvalidInputError
from .validation import require_finite

#: Square sieve openings in mm, coarsest first.
DEFAULT_SIEVE_OPENINGS = (63.0, 37.5, 19.0, 9.5, 4.75, 2.36)

#: Zingg-style axis ratio threshold separating the shape classes.
GEOMETRY_THRESHOLD = 2.0 / 3.0


class GeometryClass(str, Enum):
    CUBIC = "cubic"
    FLAT = "flat"
    ELONGATED = "elongated"
    FLAT_ELONGATED = "flat_elongated"


@dataclass(frozen=True)
class SieveAnalysis:
    """Residue masses (g) on a sieve stack, coarsest opening first, plus the pan."""

    openings_mm: tuple = DEFAULT_SIEVE_OPENINGS
    residues_g: tuple = ()
    pan_g: float = 0.0

    def __post_init__(self):
        openings = tuple(float(o) for o in self.openings_mm)
        residues = tuple(float(r) for r in self.residues_g)
        object.__setattr__(self, "openings_mm", openings)
        object.__setattr__(self, "residues_g", residues)
        if len(openings) != len(residues):
            raise InvalidInputError(
                f"{len(openings)} openings but {len(residues)} residue masses"
            )
        if len(openings) == 0:
            raise InvalidInputError("need at least one sieve")
        for o in openings:
            require_finite(opening=o)
            if o <= 0:
                raise InvalidInputError("sieve openings must be > 0")
        if any(b >= a for a, b in zip(openings, openings[1:])):
            raise InvalidInputError("sieve openings must be strictly decreasing")
        for r in residues:
            require_finite(residue=r)
            if r < 0:
                raise InvalidInputError("residue masses must be >= 0")
        require_finite(pan_g=self.pan_g)
        if self.pan_g < 0:
            raise InvalidInputError("pan mass must be >= 0")
        if self.total_g <= 0:
            raise InvalidInputError("total sample mass must be > 0")

    @property
    def total_g(self) -> float:
        return sum(self.residues_g) + self.pan_g

    def passing_curve(self):
        """(openings ascending, cumulative passing fraction at each opening)."""
        total = self.total_g
        openings = list(reversed(self.openings_mm))
        residues = list(reversed(self.residues_g))
        passing = []
        retained_above = sum(residues)  # everything caught on some sieve
        acc = 0.0
        for r in residues:
            passing.append((total - (retained_above - acc)) / total)
            acc += r
        # sanity: last entry is 1 - residue on the coarsest sieve / total
        return openings, passing


class SievePercentile(NamedTuple):
    size_mm: float
    clamped: bool


def sieve_percentile(analysis: SieveAnalysis, q: float) -> SievePercentile:
    """Particle size (mm) below which a mass fraction q of the sample falls.

    Interpolates linearly in log(opening) between bracketing sieves.  When q
    falls outside the tabulated curve the result clamps to the finest or
    coarsest opening and the clamped flag is set.
    """
    require_finite(q=q)
    if not 0.0 < q < 1.0:
        raise InvalidInputError(f"q must be inside (0, 1), got {q}")
    openings, passing = analysis.passing_curve()
    if q < passing[0]:
        return SievePercentile(openings[0], True)
    if q > passing[-1]:
        return SievePercentile(openings[-1], True)
    j = next(i for i, f in enumerate(passing) if f >= q)
    if passing[j] == q:
        return SievePercentile(openings[j], False)
    o_lo, o_hi = openings[j - 1], openings[j]
    f_lo, f_hi = passing[j - 1], passing[j]
    t = (q - f_lo) / (f_hi - f_lo)
    size = math.exp(math.log(o_lo) + t * (math.log(o_hi) - math.log(o_lo)))
    return SievePercentile(size, False)


def average_particle_size(analysis: SieveAnalysis) -> float:
    """Mean of the 16th, 50th and 84th percentile sizes, mm."""
    sizes = [sieve_percentile(analysis, q).size_mm for q in (0.16, 0.50, 0.84)]
    return sum(sizes) / 3.0


def coarseness_index(analysis: SieveAnalysis) -> float:
    """Sum over sieves (coarsest first) of cumulative retained percent.

    Scale-invariant in the masses; bounded by 100 * number of sieves.
    """
    total = analysis.total_g
    acc = 0.0
    ci = 0.0
    for r in analysis.residues_g:
        acc += r
        ci += 100.0 * acc / total
    return ci


@dataclass(frozen=True)
class ParticleDims:
    """Longest, intermediate and shortest orthogonal axes of a particle, mm."""

    a_mm: float
    b_mm: float
    c_mm: float

    def __post_init__(self):
        require_finite(a_mm=self.a_mm, b_mm=self.b_mm, c_mm=self.c_mm)
        if not self.a_mm >= self.b_mm >= self.c_mm > 0:
            raise InvalidInputError(
                f"axes must satisfy a >= b >= c > 0, got {self.a_mm}, {self.b_mm}, {self.c_mm}"
            )


def classify_geometry(dims: ParticleDims, threshold: float = GEOMETRY_THRESHOLD) -> GeometryClass:
    """Shape class from the axis ratios b/a and c/b against a single threshold."""
    flatness = dims.b_mm / dims.a_mm
    elongation = dims.c_mm / dims.b_mm
    if flatness > threshold and elongation > threshold:
        return GeometryClass.CUBIC
    if flatness > threshold:
        return GeometryClass.FLAT
    if elongation > threshold:
        return GeometryClass.ELONGATED
    return GeometryClass.FLAT_ELONGATED


@dataclass(frozen=True)
class MuckIndices:
    d_avg: float
    ci: float
    geometry: GeometryClass | None = None


def muck_indices(analysis: SieveAnalysis, dims: ParticleDims | None = None) -> MuckIndices:
    return MuckIndices(
        d_avg=average_particle_size(analysis),
        ci=coarseness_index(analysis),
        geometry=classify_geometry(dims) if dims is not None else None,
    )


# ---------------------------------------------------------------------------
# CSV input


def read_sieve_csv(path) -> SieveAnalysis:
    """Rows `opening_mm,residue_g` coarsest first, then a final `pan,<mass>` row."""
    openings, residues, pan = [], [], None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["opening_mm", "residue_g"]:
            raise InvalidInputError("sieve CSV must start with header opening_mm,residue_g")
        for i, row in enumerate(reader):
            if not row or not row[0].strip():
                continue
            key = row[0].strip()
            try:
                value = float(row[1])
            except (IndexError, ValueError) as exc:
                raise InvalidInputError(f"bad sieve CSV row {i + 2}: {row}") from exc
            if key == "pan":
                pan = value
            else:
                openings.append(float(key))
                residues.append(value)
    if pan is None:
        raise InvalidInputError("sieve CSV must end with a pan,<mass> row")
    return SieveAnalysis(openings_mm=tuple(openings), residues_g=tuple(residues), pan_g=pan)


def read_particle_dims_csv(path) -> list:
    dims = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"a_mm", "b_mm", "c_mm"} - set(reader.fieldnames or [])
        if missing:
            raise InvalidInputError(f"particle CSV is missing columns: {sorted(missing)}")
        for i, row in enumerate(reader):
            try:
                dims.append(
                    ParticleDims(
                        a_mm=float(row["a_mm"]),
                        b_mm=float(row["b_mm"]),
                        c_mm=float(row["c_mm"]),
                    )
                )
            except ValueError as exc:
                raise InvalidInputError(f"bad particle CSV row {i + 2}: {exc}") from exc
    return dims
