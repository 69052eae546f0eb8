"""Synthetic field-record generator for exercising the mapping and the
decision engine.

Targets follow the physical rules where one exists (thrust, torque); cutter
life and belt volume use documented synthetic ground truths whose outputs
span the bands observed on the reference drive.  All draws come from one
seeded generator in a fixed order, so a given seed always reproduces the
same dataset byte for byte.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
import numpy as np

from . import physics
from .errors import InvalidInputError
from .validation import require_finite

FEATURE_NAMES = ("p", "rpm", "ucs", "rqd", "cai", "d_avg", "ci", "peak_acc", "main_freq")
TARGET_NAMES = ("hf", "th", "tor", "pb")  # internal target order
CSV_COLUMNS = FEATURE_NAMES + ("th", "tor", "hf", "pb")

#: Feature ranges observed on the reference drive (units as in FEATURE_NAMES docs).
DEFAULT_RANGES = {
    "p": (7.0, 15.0),
    "rpm": (4.5, 6.7),
    "ucs": (30.3, 129.3),
    "rqd": (11.0, 79.4),
    "cai": (1.9, 4.5),
    "d_avg": (8.86, 27.69),
    "ci": (306.0, 478.0),
    "peak_acc": (1.60, 2.85),
    "main_freq": (110.8, 116.2),
}

# Synthetic cutter-life ground truth: exponential decay in rock strength,
# abrasivity and wear path length, scaled to span roughly 170-1120 m3/cutter
# over the default ranges.
HF_SCALE = 2941.0
HF_UCS_COEF = 2.0
HF_CAI_COEF = 1.5
HF_WEAR_COEF = 1.0

# Synthetic belt-volume ground truth: advance volume times bulking and a
# pickup gain, centred near the observed belt average.
CROSS_SECTION_M2 = math.pi * 9.0  # 6 m diameter head
BULKING_FACTOR = 1.6
BELT_GAIN = 3.2


@dataclass
class GenConfig:
    sample_count: int = 306
    seed: int = 0
    noise_rel: float = 0.05
    outlier_rate: float = 0.0
    outlier_scale: float | None = None  # defaults to 3x noise_rel
    ranges: dict = field(default_factory=lambda: dict(DEFAULT_RANGES))

    def __post_init__(self):
        if int(self.sample_count) != self.sample_count or self.sample_count < 0:
            raise InvalidInputError("sample_count must be a non-negative integer")
        self.sample_count = int(self.sample_count)
        self.seed = int(self.seed)
        require_finite(noise_rel=self.noise_rel, outlier_rate=self.outlier_rate)
        if self.noise_rel < 0:
            raise InvalidInputError("noise_rel must be >= 0")
        if not 0.0 <= self.outlier_rate <= 1.0:
            raise InvalidInputError("outlier_rate must be inside [0, 1]")
        if self.outlier_scale is None:
            self.outlier_scale = 3.0 * self.noise_rel
        require_finite(outlier_scale=self.outlier_scale)
        if self.outlier_scale < 0:
            raise InvalidInputError("outlier_scale must be >= 0")
        unknown = set(self.ranges) - set(FEATURE_NAMES)
        if unknown:
            raise InvalidInputError(f"unknown feature ranges: {sorted(unknown)}")
        merged = dict(DEFAULT_RANGES)
        merged.update(self.ranges)
        for name, (lo, hi) in merged.items():
            require_finite(**{name + "_lo": lo, name + "_hi": hi})
            if lo > hi:
                raise InvalidInputError(f"range for {name} has lo > hi: ({lo}, {hi})")
        self.ranges = merged

    @classmethod
    def from_dict(cls, doc: dict) -> "GenConfig":
        known = {"sample_count", "seed", "noise_rel", "outlier_rate", "outlier_scale", "ranges"}
        unknown = set(doc) - known
        if unknown:
            raise InvalidInputError(f"unknown generator config keys: {sorted(unknown)}")
        ranges = {k: tuple(v) for k, v in doc.get("ranges", {}).items()}
        return cls(
            sample_count=doc.get("sample_count", 306),
            seed=doc.get("seed", 0),
            noise_rel=doc.get("noise_rel", 0.05),
            outlier_rate=doc.get("outlier_rate", 0.0),
            outlier_scale=doc.get("outlier_scale"),
            ranges=ranges,
        )


@dataclass(frozen=True)
class FieldSample:
    """One excavation record: operating point, rock mass, muck and vibration
    observations, and the four measured responses."""

    p: float
    rpm: float
    ucs: float
    rqd: float
    cai: float
    d_avg: float
    ci: float
    peak_acc: float
    main_freq: float
    th: float
    tor: float
    hf: float
    pb: float
    is_outlier: bool = False  # generator bookkeeping, not persisted

    def features(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in FEATURE_NAMES])

    def targets(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in TARGET_NAMES])


def true_targets(p, rpm, ucs, cai, rules: physics.PhysicsRules):
    """Noise-free target values (hf, th, tor, pb) for arrays of inputs."""
    p = np.asarray(p, dtype=float)
    rpm = np.asarray(rpm, dtype=float)
    ucs = np.asarray(ucs, dtype=float)
    cai = np.asarray(cai, dtype=float)
    th = np.maximum(rules.layout.count * rules.fn.evaluate(ucs, p), 0.0)
    tor = np.maximum(rules.fr.evaluate(ucs, p) * rules.layout.radius_sum_m, 0.0)
    wear = p * rpm
    hf = HF_SCALE * np.exp(
        -HF_UCS_COEF * ucs / 300.0 - HF_CAI_COEF * cai / 5.0 - HF_WEAR_COEF * wear / 160.0
    )
    pb = BELT_GAIN * BULKING_FACTOR * CROSS_SECTION_M2 * 0.06 * p * rpm
    return hf, th, tor, pb


def generate_dataset(config: GenConfig, rules: physics.PhysicsRules | None = None) -> list:
    """Draw a synthetic dataset.  Deterministic for a given config and seed."""
    rules = physics.default_rules() if rules is None else rules
    n = config.sample_count
    rng = np.random.default_rng(config.seed)
    r = config.ranges

    cols = {}
    for name in ("p", "rpm", "ucs", "rqd", "cai", "d_avg", "ci"):
        lo, hi = r[name]
        cols[name] = rng.uniform(lo, hi, size=n)

    # Vibration responds to the ground: stronger rock shakes harder, heavy
    # jointing (low RQD) adds impact content, more intact rock rings higher.
    def unit(name, values):
        lo, hi = r[name]
        span = hi - lo
        return (values - lo) / span if span > 0 else np.zeros_like(values)

    u = unit("ucs", cols["ucs"])
    q = unit("rqd", cols["rqd"])
    mix_acc = np.clip(0.6 * u + 0.4 * (1.0 - q) + 0.08 * rng.standard_normal(n), 0.0, 1.0)
    mix_freq = np.clip(0.5 * u + 0.5 * q + 0.08 * rng.standard_normal(n), 0.0, 1.0)
    lo, hi = r["peak_acc"]
    cols["peak_acc"] = lo + (hi - lo) * mix_acc
    lo, hi = r["main_freq"]
    cols["main_freq"] = lo + (hi - lo) * mix_freq

    hf, th, tor, pb = true_targets(cols["p"], cols["rpm"], cols["ucs"], cols["cai"], rules)
    noise = rng.standard_normal((n, 4))
    targets = np.column_stack([hf, th, tor, pb])
    targets = np.maximum(targets * (1.0 + config.noise_rel * noise), 0.0)

    samples = [
        FieldSample(
            **{name: float(cols[name][i]) for name in FEATURE_NAMES},
            hf=float(targets[i, 0]),
            th=float(targets[i, 1]),
            tor=float(targets[i, 2]),
            pb=float(targets[i, 3]),
        )
        for i in range(n)
    ]
    if config.outlier_rate > 0.0:
        samples = contaminate(
            samples, config.outlier_rate, config.outlier_scale, seed=config.seed + 1
        )
    return samples


def contaminate(dataset, outlier_rate: float, outlier_scale: float, seed: int) -> list:
    """Return a copy with floor(rate * n) samples multiplied by abnormal factors.

    Flagged samples get each target scaled by (1 + outlier_scale * z) with
    standard-normal z, floored to keep targets non-negative.  The input list
    is left untouched.
    """
    require_finite(outlier_rate=outlier_rate, outlier_scale=outlier_scale)
    if not 0.0 <= outlier_rate <= 1.0:
        raise InvalidInputError("outlier_rate must be inside [0, 1]")
    if outlier_scale < 0:
        raise InvalidInputError("outlier_scale must be >= 0")
    n = len(dataset)
    count = int(outlier_rate * n)
    out = list(dataset)
    if count == 0:
        return out
    rng = np.random.default_rng(seed)
    chosen = rng.choice(n, size=count, replace=False)
    for idx in sorted(int(i) for i in chosen):
        s = out[idx]
        factors = np.maximum(1.0 + outlier_scale * rng.standard_normal(4), 0.05)
        out[idx] = replace(
            s,
            hf=s.hf * float(factors[0]),
            th=s.th * float(factors[1]),
            tor=s.tor * float(factors[2]),
            pb=s.pb * float(factors[3]),
            is_outlier=True,
        )
    return out


def dataset_arrays(dataset):
    """(X, Y) float64 arrays in FEATURE_NAMES / TARGET_NAMES order."""
    X = np.array([s.features() for s in dataset], dtype=float).reshape(len(dataset), 9)
    Y = np.array([s.targets() for s in dataset], dtype=float).reshape(len(dataset), 4)
    return X, Y


def write_dataset_csv(dataset, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for s in dataset:
            writer.writerow([repr(float(getattr(s, c))) for c in CSV_COLUMNS])


def read_dataset_csv(path) -> list:
    samples = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_COLUMNS) - set(reader.fieldnames or [])
        if missing:
            raise InvalidInputError(f"dataset CSV is missing columns: {sorted(missing)}")
        for i, row in enumerate(reader):
            try:
                values = {c: float(row[c]) for c in CSV_COLUMNS}
            except ValueError as exc:
                raise InvalidInputError(f"bad dataset CSV row {i + 2}: {exc}") from exc
            if not all(math.isfinite(v) for v in values.values()):
                raise InvalidInputError(f"non-finite value in dataset CSV row {i + 2}")
            samples.append(FieldSample(**values))
    return samples
