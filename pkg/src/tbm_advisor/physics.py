"""Rock-breaking physics: cutter force polynomials, cutterhead aggregation,
critical penetration, and least-squares fitting of all three from cutting tests.

Forces are per-cutter in kN.  The default coefficients were fitted over
UCS 50-300 MPa and penetration 1-9 mm/r on a 38-cutter, 6 m diameter head.
"""
from __future__ import annotations

import csv
import hashlib
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, FitError, FittedDomainWarning, InvalidInputError
from .validation import require_finite

# Default per-cutter force coefficients, ordered c_uu, c_up, c_pp, c_u, c_p, c_0.
FN_COEFFS = (-1.5e-3, 0.26, -0.74, 0.79, 0.6, 2.72)
FR_COEFFS = (-1.44e-4, 0.05, -0.12, 0.01, 0.13, -1.8)

# Critical-penetration line: s / p_min = CP_A * UCS + CP_B  (s, p in mm).
CP_A = -0.0359
CP_B = 21.1

FITTED_UCS_RANGE = (50.0, 300.0)  # MPa
FITTED_P_RANGE = (1.0, 9.0)  # mm/r

CUTTER_COUNT = 38
CUTTER_SPACING_MM = 78.0  # uniform radial spacing filling the 3 m head radius

# Pivot threshold for the normal-equations solve, applied after column
# equilibration so the magnitude is meaningful regardless of unit scale.
PIVOT_TOL = 1e-10


@dataclass(frozen=True)
class ForcePolynomial:
    """Bivariate quadratic force law q(UCS, p), value in kN.

    q = c_uu*UCS^2 + c_up*UCS*p + c_pp*p^2 + c_u*UCS + c_p*p + c_0
    """

    c_uu: float
    c_up: float
    c_pp: float
    c_u: float
    c_p: float
    c_0: float
    ucs_range: tuple = FITTED_UCS_RANGE
    p_range: tuple = FITTED_P_RANGE

    def __post_init__(self):
        for name in ("c_uu", "c_up", "c_pp", "c_u", "c_p", "c_0"):
            require_finite(**{name: getattr(self, name)})
        for name in ("ucs_range", "p_range"):
            lo, hi = getattr(self, name)
            require_finite(**{name + "_lo": lo, name + "_hi": hi})
            if not lo < hi:
                raise InvalidInputError(f"{name} must satisfy lo < hi, got ({lo}, {hi})")

    def coeffs(self) -> tuple:
        return (self.c_uu, self.c_up, self.c_pp, self.c_u, self.c_p, self.c_0)

    def evaluate(self, ucs, p):
        """Raw polynomial value; accepts scalars or arrays."""
        ucs = np.asarray(ucs, dtype=float)
        p = np.asarray(p, dtype=float)
        out = (
            self.c_uu * ucs * ucs
            + self.c_up * ucs * p
            + self.c_pp * p * p
            + self.c_u * ucs
            + self.c_p * p
            + self.c_0
        )
        return float(out) if out.ndim == 0 else out

    def in_domain(self, ucs, p) -> bool:
        return (
            self.ucs_range[0] <= ucs <= self.ucs_range[1]
            and self.p_range[0] <= p <= self.p_range[1]
        )


@dataclass(frozen=True)
class CpRule:
    """Critical penetration p_min(UCS, s) = s / (a*UCS + b), all lengths in mm."""

    a: float
    b: float
    ucs_domain_max: float = FITTED_UCS_RANGE[1]

    def __post_init__(self):
        require_finite(a=self.a, b=self.b, ucs_domain_max=self.ucs_domain_max)
        if self.ucs_domain_max <= 0:
            raise InvalidInputError("ucs_domain_max must be > 0")
        # The denominator is linear in UCS, so positivity at both endpoints
        # guarantees positivity on the whole declared domain.
        if self.b <= 0 or self.a * self.ucs_domain_max + self.b <= 0:
            raise InvalidInputError(
                "critical-penetration denominator must stay positive on "
                f"[0, {self.ucs_domain_max}]"
            )

    def denominator(self, ucs):
        return self.a * np.asarray(ucs, dtype=float) + self.b


@dataclass(frozen=True)
class CutterLayout:
    """Disc cutter installation radii (m, strictly increasing) and nominal spacing (mm)."""

    radii_m: tuple
    nominal_spacing_mm: float = CUTTER_SPACING_MM

    def __post_init__(self):
        require_finite(nominal_spacing_mm=self.nominal_spacing_mm)
        if self.nominal_spacing_mm <= 0:
            raise InvalidInputError("nominal_spacing_mm must be > 0")
        radii = tuple(float(r) for r in self.radii_m)
        object.__setattr__(self, "radii_m", radii)
        for r in radii:
            require_finite(radius=r)
            if r <= 0:
                raise InvalidInputError("cutter radii must be > 0")
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise InvalidInputError("cutter radii must be strictly increasing")

    @property
    def count(self) -> int:
        return len(self.radii_m)

    @property
    def radius_sum_m(self) -> float:
        return float(sum(self.radii_m))


@dataclass(frozen=True)
class PhysicsRules:
    """Bundle of the three physical rules plus the cutterhead layout."""

    fn: ForcePolynomial
    fr: ForcePolynomial
    cp: CpRule
    layout: CutterLayout


def default_layout() -> CutterLayout:
    radii = tuple(i * CUTTER_SPACING_MM / 1000.0 for i in range(1, CUTTER_COUNT + 1))
    return CutterLayout(radii_m=radii, nominal_spacing_mm=CUTTER_SPACING_MM)


def default_rules() -> PhysicsRules:
    return PhysicsRules(
        fn=ForcePolynomial(*FN_COEFFS),
        fr=ForcePolynomial(*FR_COEFFS),
        cp=CpRule(a=CP_A, b=CP_B),
        layout=default_layout(),
    )


def _force(poly: ForcePolynomial, ucs: float, p: float, label: str) -> float:
    require_finite(ucs=ucs, p=p)
    if not poly.in_domain(ucs, p):
        warnings.warn(
            f"{label} evaluated outside its fitted (ucs, p) range; "
            "returning the raw polynomial value",
            FittedDomainWarning,
            stacklevel=3,
        )
    return poly.evaluate(float(ucs), float(p))


def normal_force(rules: PhysicsRules, ucs: float, p: float) -> float:
    """Per-cutter normal force F_N in kN."""
    return _force(rules.fn, ucs, p, "normal force")


def rolling_force(rules: PhysicsRules, ucs: float, p: float) -> float:
    """Per-cutter rolling force F_R in kN."""
    return _force(rules.fr, ucs, p, "rolling force")


def cutterhead_thrust(rules: PhysicsRules, ucs: float, p: float, layout=None) -> float:
    """Total thrust demand in kN: cutter count times per-cutter normal force."""
    layout = rules.layout if layout is None else layout
    if layout.count == 0:
        return 0.0
    return layout.count * normal_force(rules, ucs, p)


def cutterhead_torque(rules: PhysicsRules, ucs: float, p: float, layout=None) -> float:
    """Total torque demand in kN*m: per-cutter rolling force times the radius sum."""
    layout = rules.layout if layout is None else layout
    if layout.count == 0:
        return 0.0
    return rolling_force(rules, ucs, p) * layout.radius_sum_m


def critical_penetration(cp: CpRule, ucs: float, s: float) -> float:
    """Smallest penetration (mm/r) at which chips form between grooves of spacing s (mm)."""
    require_finite(ucs=ucs, s=s)
    if s <= 0:
        raise InvalidInputError(f"cutter spacing must be > 0, got {s}")
    denom = cp.a * float(ucs) + cp.b
    if denom <= 0:
        raise DomainError(
            f"critical-penetration denominator is {denom:.6g} at ucs={ucs}; "
            "rule not applicable there"
        )
    return float(s) / denom


# ---------------------------------------------------------------------------
# Fitting from linear cutting tests


@dataclass(frozen=True)
class CuttingSample:
    """One cutting test: rock UCS (MPa), penetration p (mm/r), spacing s (mm),
    measured per-cutter forces (kN) and whether chips formed between grooves."""

    ucs: float
    p: float
    s: float
    f_n: float
    f_r: float
    fragments_formed: bool

    def __post_init__(self):
        require_finite(ucs=self.ucs, p=self.p, s=self.s, f_n=self.f_n, f_r=self.f_r)
        if self.ucs <= 0 or self.p <= 0 or self.s <= 0:
            raise InvalidInputError("ucs, p and s must all be > 0")


@dataclass(frozen=True)
class FitReport:
    n_samples: int
    rmse: float
    max_abs_residual: float


def _solve_least_squares(A: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Normal-equations solve with column equilibration and partial pivoting.

    Raises FitError when a pivot falls below PIVOT_TOL, which signals a
    rank-deficient design (e.g. all samples at a single point).
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    scale = np.sqrt((A * A).sum(axis=0))
    scale[scale == 0.0] = 1.0
    As = A / scale
    m = As.T @ As
    rhs = As.T @ y
    k = m.shape[0]
    aug = np.hstack([m, rhs.reshape(-1, 1)])
    for col in range(k):
        pivot_row = col + int(np.argmax(np.abs(aug[col:, col])))
        if abs(aug[pivot_row, col]) < PIVOT_TOL:
            raise FitError(
                f"design matrix is rank-deficient (pivot {aug[pivot_row, col]:.3g} "
                f"below {PIVOT_TOL:g} in column {col})"
            )
        if pivot_row != col:
            aug[[col, pivot_row]] = aug[[pivot_row, col]]
        aug[col] = aug[col] / aug[col, col]
        for row in range(k):
            if row != col:
                aug[row] -= aug[row, col] * aug[col]
    return aug[:, -1] / scale


def fit_force_polynomial(samples, target: str = "normal"):
    """Ordinary least squares for the six-term force law.

    Parameters
    ----------
    samples : sequence of CuttingSample
    target : "normal" fits F_N, "rolling" fits F_R.

    Returns
    -------
    (ForcePolynomial, FitReport)
    """
    samples = list(samples)
    if target not in ("normal", "rolling"):
        raise InvalidInputError(f"target must be 'normal' or 'rolling', got {target!r}")
    if len(samples) < 6:
        raise FitError(f"need at least 6 samples to fit 6 coefficients, got {len(samples)}")
    ucs = np.array([s.ucs for s in samples])
    p = np.array([s.p for s in samples])
    y = np.array([s.f_n if target == "normal" else s.f_r for s in samples])
    A = np.column_stack([ucs * ucs, ucs * p, p * p, ucs, p, np.ones_like(ucs)])
    coeffs = _solve_least_squares(A, y)
    poly = ForcePolynomial(
        *coeffs,
        ucs_range=(float(ucs.min()), float(ucs.max())),
        p_range=(float(p.min()), float(p.max())),
    )
    resid = A @ coeffs - y
    report = FitReport(
        n_samples=len(samples),
        rmse=float(np.sqrt(np.mean(resid * resid))),
        max_abs_residual=float(np.max(np.abs(resid))),
    )
    return poly, report


def fit_cp_rule(samples) -> CpRule:
    """Fit the critical-penetration line from chip-formation labels.

    For every (ucs, s) group the boundary penetration is the smallest p at
    which fragments formed; the critical ratio s/p at that boundary is then
    regressed linearly on UCS.  Needs boundaries at two or more distinct
    UCS levels.
    """
    groups: dict = {}
    for sample in samples:
        groups.setdefault((sample.ucs, sample.s), []).append(sample)
    points = []
    for (ucs, s), members in sorted(groups.items()):
        formed = [m.p for m in members if m.fragments_formed]
        if not formed:
            continue
        points.append((ucs, s / min(formed)))
    levels = {round(u, 12) for u, _ in points}
    if len(levels) < 2:
        raise FitError(
            f"need chip-formation boundaries at >= 2 distinct UCS levels, got {len(levels)}"
        )
    ucs_arr = np.array([u for u, _ in points])
    ratio = np.array([r for _, r in points])
    A = np.column_stack([ucs_arr, np.ones_like(ucs_arr)])
    a, b = _solve_least_squares(A, ratio)
    return CpRule(a=float(a), b=float(b), ucs_domain_max=float(ucs_arr.max()))


# ---------------------------------------------------------------------------
# Serialization

CUTTING_CSV_HEADER = ["ucs_mpa", "p_mm", "s_mm", "fn_kn", "fr_kn", "fragments"]


def read_cutting_csv(path) -> list:
    samples = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(CUTTING_CSV_HEADER) - set(reader.fieldnames or [])
        if missing:
            raise InvalidInputError(f"cutting CSV is missing columns: {sorted(missing)}")
        for i, row in enumerate(reader):
            try:
                samples.append(
                    CuttingSample(
                        ucs=float(row["ucs_mpa"]),
                        p=float(row["p_mm"]),
                        s=float(row["s_mm"]),
                        f_n=float(row["fn_kn"]),
                        f_r=float(row["fr_kn"]),
                        fragments_formed=row["fragments"].strip() in ("1", "true", "True"),
                    )
                )
            except ValueError as exc:
                raise InvalidInputError(f"bad cutting CSV row {i + 2}: {exc}") from exc
    return samples


def write_cutting_csv(samples, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CUTTING_CSV_HEADER)
        for s in samples:
            writer.writerow(
                [s.ucs, s.p, s.s, s.f_n, s.f_r, 1 if s.fragments_formed else 0]
            )


def rules_to_dict(rules: PhysicsRules) -> dict:
    return {
        "fn_coeffs": list(rules.fn.coeffs()),
        "fr_coeffs": list(rules.fr.coeffs()),
        "cp": {"a": rules.cp.a, "b": rules.cp.b, "ucs_domain_max": rules.cp.ucs_domain_max},
        "layout": {
            "radii_m": list(rules.layout.radii_m),
            "nominal_spacing_mm": rules.layout.nominal_spacing_mm,
        },
    }


def rules_from_dict(doc: dict) -> PhysicsRules:
    try:
        fn = ForcePolynomial(*[float(c) for c in doc["fn_coeffs"]])
        fr = ForcePolynomial(*[float(c) for c in doc["fr_coeffs"]])
        cp = CpRule(
            a=float(doc["cp"]["a"]),
            b=float(doc["cp"]["b"]),
            ucs_domain_max=float(doc["cp"]["ucs_domain_max"]),
        )
        layout = CutterLayout(
            radii_m=tuple(float(r) for r in doc["layout"]["radii_m"]),
            nominal_spacing_mm=float(doc["layout"]["nominal_spacing_mm"]),
        )
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"physics configuration is malformed: {exc}") from exc
    return PhysicsRules(fn=fn, fr=fr, cp=cp, layout=layout)


def rules_digest(rules: PhysicsRules) -> str:
    """SHA-256 over the canonical JSON form; independent of file formatting."""
    canonical = json.dumps(rules_to_dict(rules), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def save_rules(rules: PhysicsRules, path) -> None:
    Path(path).write_text(json.dumps(rules_to_dict(rules), indent=2) + "\n")


def load_rules(path) -> PhysicsRules:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read physics configuration {path}: {exc}") from exc
    return rules_from_dict(doc)
