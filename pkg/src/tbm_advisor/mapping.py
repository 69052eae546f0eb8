"""Learned mapping from the operating point plus rock, muck and vibration
observations (9 inputs) to machine response (cutter life, thrust, torque,
belt volume).

The network is a plain two-hidden-layer ReLU MLP trained by mini-batch
gradient descent with momentum on min-max normalized data.  The loss keeps
the model honest against the rock-breaking physics in two ways: thrust and
torque targets are pulled toward the force-law predictions (mu2, mu3), and
samples operating below the critical penetration, where the force law says
chips cannot form between grooves, are down-weighted (mu1).
"""
from __future__ import annotations

import hashlib
import json
import time
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from . import physics as physics_mod
from .datagen import FEATURE_NAMES, TARGET_NAMES, dataset_arrays
from .errors import DegenerateFeatureWarning, DomainError, InvalidInputError
from .validation import as_matrix, require_finite

P_IDX = FEATURE_NAMES.index("p")
UCS_IDX = FEATURE_NAMES.index("ucs")
HF_IDX = TARGET_NAMES.index("hf")
TH_IDX = TARGET_NAMES.index("th")
TOR_IDX = TARGET_NAMES.index("tor")
PB_IDX = TARGET_NAMES.index("pb")

MODEL_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Hyperparams:
    h1: int = 1024
    h2: int = 1024
    alpha: float = 0.001
    lam: float = 1e-5  # L2 penalty, serialized as "lambda"
    mu1: float = 0.2
    mu2: float = 0.1
    mu3: float = 0.2
    epochs: int = 2000
    batch_size: int = 32
    momentum: float = 0.9
    seed: int = 0

    def __post_init__(self):
        for name in ("h1", "h2", "epochs", "batch_size", "seed"):
            v = getattr(self, name)
            if int(v) != v:
                raise InvalidInputError(f"{name} must be an integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.h1 < 1 or self.h2 < 1:
            raise InvalidInputError("hidden widths must be >= 1")
        if self.epochs < 0:
            raise InvalidInputError("epochs must be >= 0")
        if self.batch_size < 1:
            raise InvalidInputError("batch_size must be >= 1")
        require_finite(
            alpha=self.alpha, lam=self.lam, mu1=self.mu1, mu2=self.mu2,
            mu3=self.mu3, momentum=self.momentum,
        )
        if self.alpha <= 0:
            raise InvalidInputError("learning rate alpha must be > 0")
        if self.lam < 0:
            raise InvalidInputError("lambda must be >= 0")
        for name in ("mu1", "mu2", "mu3"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidInputError(f"{name} must be inside [0, 1], got {v}")
        if not 0.0 <= self.momentum < 1.0:
            raise InvalidInputError("momentum must be inside [0, 1)")

    def to_dict(self) -> dict:
        return {
            "h1": self.h1, "h2": self.h2, "alpha": self.alpha, "lambda": self.lam,
            "mu1": self.mu1, "mu2": self.mu2, "mu3": self.mu3,
            "epochs": self.epochs, "batch_size": self.batch_size,
            "momentum": self.momentum, "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Hyperparams":
        doc = dict(doc)
        if "lambda" in doc:
            doc["lam"] = doc.pop("lambda")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise InvalidInputError(f"unknown hyperparameter keys: {sorted(unknown)}")
        return cls(**doc)


@dataclass
class MappingModel:
    """Trained network plus the normalization stats it was fitted with.

    Weight matrices are (fan_in, fan_out); inputs and targets are mapped to
    [-1, 1] by per-column min-max, so a zero-weight network predicts each
    target's midpoint.
    """

    weights: list
    biases: list
    feature_min: np.ndarray
    feature_max: np.ndarray
    target_min: np.ndarray
    target_max: np.ndarray
    hyperparams: Hyperparams
    physics_digest: str = ""

    def __post_init__(self):
        if len(self.weights) != 3 or len(self.biases) != 3:
            raise InvalidInputError("expected exactly 3 layers")
        dims = [9, self.hyperparams.h1, self.hyperparams.h2, 4]
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (dims[i], dims[i + 1]) or b.shape != (dims[i + 1],):
                raise InvalidInputError(
                    f"layer {i} has shape {w.shape}/{b.shape}, expected "
                    f"({dims[i]}, {dims[i + 1]})/({dims[i + 1]},)"
                )
        for arr in (self.feature_min, self.feature_max, self.target_min, self.target_max):
            if not np.all(np.isfinite(arr)):
                raise InvalidInputError("normalization stats must be finite")
        if np.any(self.feature_min >= self.feature_max) or np.any(
            self.target_min >= self.target_max
        ):
            raise InvalidInputError("normalization stats need min < max per column")

    def normalize_features(self, X: np.ndarray) -> np.ndarray:
        span = self.feature_max - self.feature_min
        return 2.0 * (X - self.feature_min) / span - 1.0

    def normalize_targets(self, Y: np.ndarray) -> np.ndarray:
        span = self.target_max - self.target_min
        return 2.0 * (Y - self.target_min) / span - 1.0

    def denormalize_targets(self, Yn: np.ndarray) -> np.ndarray:
        span = self.target_max - self.target_min
        return (Yn + 1.0) / 2.0 * span + self.target_min

    def forward_normalized(self, Xn: np.ndarray) -> np.ndarray:
        out, _ = _forward_cached(self.weights, self.biases, Xn)
        return out

    def predict(self, X) -> np.ndarray:
        """Predict (hf, th, tor, pb); accepts one feature vector or a matrix."""
        single = np.asarray(X).ndim == 1
        Xm = as_matrix(X, 9, "X")
        out = self.denormalize_targets(self.forward_normalized(self.normalize_features(Xm)))
        return out[0] if single else out


def _forward_cached(weights, biases, Xn):
    z1 = Xn @ weights[0] + biases[0]
    a1 = np.maximum(z1, 0.0)
    z2 = a1 @ weights[1] + biases[1]
    a2 = np.maximum(z2, 0.0)
    out = a2 @ weights[2] + biases[2]
    return out, (z1, a1, z2, a2)


def _physics_anchor(rules: physics_mod.PhysicsRules, X: np.ndarray):
    """Force-law thrust and torque for each row of X (raw units)."""
    p = X[:, P_IDX]
    ucs = X[:, UCS_IDX]
    th_p = rules.layout.count * rules.fn.evaluate(ucs, p)
    tor_p = rules.fr.evaluate(ucs, p) * rules.layout.radius_sum_m
    return np.asarray(th_p, dtype=float), np.asarray(tor_p, dtype=float)


def sample_weights(rules: physics_mod.PhysicsRules, X: np.ndarray, hp: Hyperparams) -> np.ndarray:
    """mu1 for rows operating below the critical penetration, 1 otherwise."""
    p = X[:, P_IDX]
    ucs = X[:, UCS_IDX]
    denom = rules.cp.denominator(ucs)
    bad = np.where(denom <= 0)[0]
    if bad.size:
        raise DomainError(
            f"critical-penetration denominator non-positive at sample {bad[0]} "
            f"(ucs={ucs[bad[0]]})"
        )
    p_min = rules.layout.nominal_spacing_mm / denom
    return np.where(p < p_min, hp.mu1, 1.0)


def blended_targets_normalized(
    model: MappingModel, X: np.ndarray, Y: np.ndarray,
    rules: physics_mod.PhysicsRules, hp: Hyperparams,
) -> np.ndarray:
    """Measured targets pulled toward the physics anchor, in normalized space."""
    Yn = model.normalize_targets(Y)
    th_p, tor_p = _physics_anchor(rules, X)
    span = model.target_max - model.target_min
    thp_n = 2.0 * (th_p - model.target_min[TH_IDX]) / span[TH_IDX] - 1.0
    torp_n = 2.0 * (tor_p - model.target_min[TOR_IDX]) / span[TOR_IDX] - 1.0
    T = Yn.copy()
    T[:, TH_IDX] = (1.0 - hp.mu2) * Yn[:, TH_IDX] + hp.mu2 * thp_n
    T[:, TOR_IDX] = (1.0 - hp.mu3) * Yn[:, TOR_IDX] + hp.mu3 * torp_n
    return T


@dataclass
class LossBreakdown:
    total: float
    data_term: float
    reg_term: float
    sample_weights: np.ndarray
    per_sample: np.ndarray  # w_i * sum_k squared error, before the 1/(4n)
    blended_normalized: np.ndarray


def _loss_core(weights, out_n, Tn, w, lam):
    n = out_n.shape[0]
    err = out_n - Tn
    per_sample = w * (err * err).sum(axis=1)
    data = float(per_sample.sum() / (4.0 * n))
    reg = float(lam * sum(float((W * W).sum()) for W in weights))
    return data, reg, err, per_sample


def loss(model: MappingModel, X, Y, rules: physics_mod.PhysicsRules, hp: Hyperparams) -> LossBreakdown:
    """Physics-informed training loss on a batch, with per-sample diagnostics."""
    X = as_matrix(X, 9, "X")
    Y = as_matrix(Y, 4, "Y")
    if X.shape[0] != Y.shape[0]:
        raise InvalidInputError("X and Y row counts differ")
    if X.shape[0] == 0:
        raise InvalidInputError("batch is empty")
    Xn = model.normalize_features(X)
    Tn = blended_targets_normalized(model, X, Y, rules, hp)
    w = sample_weights(rules, X, hp)
    out_n = model.forward_normalized(Xn)
    data, reg, _, per_sample = _loss_core(model.weights, out_n, Tn, w, hp.lam)
    return LossBreakdown(
        total=data + reg, data_term=data, reg_term=reg,
        sample_weights=w, per_sample=per_sample, blended_normalized=Tn,
    )


def _backward(weights, Xn, cache, err, w, lam):
    n = Xn.shape[0]
    z1, a1, z2, a2 = cache
    g_out = (w[:, None] * err) / (2.0 * n)
    gw2 = a2.T @ g_out + 2.0 * lam * weights[2]
    gb2 = g_out.sum(axis=0)
    d2 = (g_out @ weights[2].T) * (z2 > 0.0)
    gw1 = a1.T @ d2 + 2.0 * lam * weights[1]
    gb1 = d2.sum(axis=0)
    d1 = (d2 @ weights[1].T) * (z1 > 0.0)
    gw0 = Xn.T @ d1 + 2.0 * lam * weights[0]
    gb0 = d1.sum(axis=0)
    return [gw0, gw1, gw2], [gb0, gb1, gb2]


def loss_gradient(model: MappingModel, X, Y, rules, hp):
    """Gradients of loss() w.r.t. every weight matrix and bias vector."""
    X = as_matrix(X, 9, "X")
    Y = as_matrix(Y, 4, "Y")
    Xn = model.normalize_features(X)
    Tn = blended_targets_normalized(model, X, Y, rules, hp)
    w = sample_weights(rules, X, hp)
    out_n, cache = _forward_cached(model.weights, model.biases, Xn)
    err = out_n - Tn
    return _backward(model.weights, Xn, cache, err, w, hp.lam)


# ---------------------------------------------------------------------------
# Training


def _fit_normalization(X, Y):
    def stats(arr, what):
        lo = arr.min(axis=0).astype(float)
        hi = arr.max(axis=0).astype(float)
        flat = np.where(hi <= lo)[0]
        if flat.size:
            warnings.warn(
                f"{what} column(s) {flat.tolist()} constant on the training "
                "split; scale defaults to 1",
                DegenerateFeatureWarning,
                stacklevel=3,
            )
            hi = hi.copy()
            hi[flat] = lo[flat] + 1.0
        return lo, hi
    fmin, fmax = stats(X, "feature")
    tmin, tmax = stats(Y, "target")
    return fmin, fmax, tmin, tmax


def _init_params(hp: Hyperparams, rng: np.random.Generator):
    dims = [9, hp.h1, hp.h2, 4]
    weights, biases = [], []
    for fan_in, fan_out in zip(dims, dims[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def _fit_arrays(X, Y, hp: Hyperparams, rules: physics_mod.PhysicsRules, rng=None):
    """Core trainer on pre-split arrays; returns (model, per-epoch losses)."""
    X = as_matrix(X, 9, "X")
    Y = as_matrix(Y, 4, "Y")
    n = X.shape[0]
    if n == 0:
        raise InvalidInputError("training set is empty")
    if X.shape[0] != Y.shape[0]:
        raise InvalidInputError("X and Y row counts differ")
    rng = np.random.default_rng(hp.seed) if rng is None else rng
    fmin, fmax, tmin, tmax = _fit_normalization(X, Y)
    weights, biases = _init_params(hp, rng)
    model = MappingModel(
        weights=weights, biases=biases,
        feature_min=fmin, feature_max=fmax, target_min=tmin, target_max=tmax,
        hyperparams=hp, physics_digest=physics_mod.rules_digest(rules),
    )
    # Blended targets and sample weights depend only on the data and the
    # physics, so compute them once up front.
    Xn = model.normalize_features(X)
    Tn = blended_targets_normalized(model, X, Y, rules, hp)
    w = sample_weights(rules, X, hp)

    vel_w = [np.zeros_like(W) for W in weights]
    vel_b = [np.zeros_like(b) for b in biases]
    epoch_losses = []
    for _ in range(hp.epochs):
        order = rng.permutation(n)
        batch_losses = []
        for start in range(0, n, hp.batch_size):
            idx = order[start : start + hp.batch_size]
            out_n, cache = _forward_cached(weights, biases, Xn[idx])
            data, reg, err, _ = _loss_core(weights, out_n, Tn[idx], w[idx], hp.lam)
            gws, gbs = _backward(weights, Xn[idx], cache, err, w[idx], hp.lam)
            for k in range(3):
                vel_w[k] = hp.momentum * vel_w[k] - hp.alpha * gws[k]
                vel_b[k] = hp.momentum * vel_b[k] - hp.alpha * gbs[k]
                weights[k] += vel_w[k]
                biases[k] += vel_b[k]
            batch_losses.append(data + reg)
        epoch_losses.append(float(np.mean(batch_losses)))
    return model, epoch_losses


@dataclass
class Metrics:
    mape: dict
    r2: dict
    aggregate_mape: float

    def to_dict(self) -> dict:
        return {"mape": dict(self.mape), "r2": dict(self.r2),
                "aggregate_mape": self.aggregate_mape}


@dataclass
class TrainingReport:
    epoch_losses: list
    metrics: Metrics | None
    seed: int
    wall_time_s: float
    train_count: int
    test_count: int

    def to_dict(self) -> dict:
        return {
            "epoch_losses": list(self.epoch_losses),
            "metrics": self.metrics.to_dict() if self.metrics else None,
            "seed": self.seed,
            "wall_time_s": self.wall_time_s,
            "train_count": self.train_count,
            "test_count": self.test_count,
        }


def default_split(n: int):
    """256/50 on the reference dataset size, otherwise a 5/6 ratio."""
    if n == 306:
        return 256, 50
    train = max(1, (5 * n) // 6)
    return train, n - train


def train(dataset, hp: Hyperparams, rules=None, train_count=None, test_count=None):
    """Shuffle-split, fit, and evaluate on the held-out part.

    Returns (MappingModel, TrainingReport).  Deterministic for a given seed.
    """
    rules = physics_mod.default_rules() if rules is None else rules
    X, Y = dataset if isinstance(dataset, tuple) else dataset_arrays(dataset)
    n = X.shape[0]
    if train_count is None and test_count is None:
        train_count, test_count = default_split(n)
    elif train_count is None or test_count is None:
        raise InvalidInputError("give both train_count and test_count or neither")
    if train_count < 1 or test_count < 0 or train_count + test_count > n:
        raise InvalidInputError(
            f"bad split {train_count}/{test_count} for {n} samples"
        )
    started = time.perf_counter()
    rng = np.random.default_rng(hp.seed)
    perm = rng.permutation(n)
    tr = perm[:train_count]
    te = perm[train_count : train_count + test_count]
    model, epoch_losses = _fit_arrays(X[tr], Y[tr], hp, rules, rng=rng)
    metrics = evaluate(model, (X[te], Y[te])) if test_count > 0 else None
    report = TrainingReport(
        epoch_losses=epoch_losses,
        metrics=metrics,
        seed=hp.seed,
        wall_time_s=time.perf_counter() - started,
        train_count=int(train_count),
        test_count=int(test_count),
    )
    return model, report


def evaluate(model, dataset) -> Metrics:
    """Per-target MAPE (%) and R^2 plus the aggregate MAPE across targets."""
    X, Y = dataset if isinstance(dataset, tuple) else dataset_arrays(dataset)
    X = as_matrix(X, 9, "X")
    Y = as_matrix(Y, 4, "Y")
    if X.shape[0] == 0:
        raise InvalidInputError("evaluation set is empty")
    pred = model.predict(X)
    mape, r2 = {}, {}
    for k, name in enumerate(TARGET_NAMES):
        actual = Y[:, k]
        zeros = np.where(actual == 0.0)[0]
        if zeros.size:
            raise InvalidInputError(
                f"MAPE undefined: target {name} is 0 at row {zeros[0]}"
            )
        mape[name] = float(100.0 * np.mean(np.abs(pred[:, k] - actual) / np.abs(actual)))
        sse = float(((pred[:, k] - actual) ** 2).sum())
        sst = float(((actual - actual.mean()) ** 2).sum())
        if sst == 0.0:
            r2[name] = 1.0 if sse == 0.0 else float("-inf")
        else:
            r2[name] = 1.0 - sse / sst
    return Metrics(mape=mape, r2=r2, aggregate_mape=float(np.mean(list(mape.values()))))


# ---------------------------------------------------------------------------
# Hyperparameter search

DEFAULT_SEARCH_SPACE = {
    "h1": (256, 512, 1024),
    "h2": (256, 512, 1024),
    "alpha": (0.001, 0.002, 0.003, 0.004, 0.005),
    "lam": (1e-6, 1e-5, 1e-4),
    "mu1": tuple(round(0.1 * i, 1) for i in range(1, 10)),
    "mu2": tuple(round(0.1 * i, 1) for i in range(1, 10)),
    "mu3": tuple(round(0.1 * i, 1) for i in range(1, 10)),
}


@dataclass(frozen=True)
class SearchTrial:
    hp: Hyperparams
    aggregate_mape: float


def hyperparameter_search(
    dataset, search_space=None, rules=None, budget=30, base=None,
    train_count=None, test_count=None,
):
    """Coordinate descent over each axis of the search space.

    Starts from the default configuration, sweeps one hyperparameter at a
    time holding the rest at the incumbent values, and keeps the candidate
    with the lowest validation aggregate MAPE.  Ties prefer the smaller
    network (h1 + h2), then the smaller lambda.  Stops scheduling new
    trainings once `budget` have run; repeated configurations reuse their
    cached score.  Returns (best_hp, best_model, leaderboard).
    """
    if budget < 1:
        raise InvalidInputError("budget must be >= 1")
    space = DEFAULT_SEARCH_SPACE if search_space is None else search_space
    for axis in space:
        if axis not in Hyperparams.__dataclass_fields__:
            raise InvalidInputError(f"unknown search axis {axis!r}")
    rules = physics_mod.default_rules() if rules is None else rules
    base = Hyperparams() if base is None else base

    cache: dict = {}
    leaderboard: list = []
    trainings = 0
    best = None  # (rank tuple, hp, model)

    def rank(mape: float, hp: Hyperparams):
        return (mape, hp.h1 + hp.h2, hp.lam)

    def run(hp: Hyperparams):
        nonlocal trainings, best
        key = tuple(getattr(hp, f) for f in Hyperparams.__dataclass_fields__)
        if key in cache:
            leaderboard.append(SearchTrial(hp=hp, aggregate_mape=cache[key]))
            return True
        if trainings >= budget:
            return False
        model, report = train(dataset, hp, rules, train_count, test_count)
        trainings += 1
        score = report.metrics.aggregate_mape
        cache[key] = score
        leaderboard.append(SearchTrial(hp=hp, aggregate_mape=score))
        if best is None or rank(score, hp) < best[0]:
            best = (rank(score, hp), hp, model)
        return True

    run(base)
    for axis, values in space.items():
        axis_base = best[1]
        for value in values:
            if not run(replace(axis_base, **{axis: value})):
                return best[1], best[2], leaderboard
    return best[1], best[2], leaderboard


# ---------------------------------------------------------------------------
# Estimator wrapper


class DualDrivenRegressor(BaseEstimator, RegressorMixin):
    """Physics-constrained multi-output regressor with the usual fit/predict
    surface, so it drops into pipelines and cross-validation tooling.

    Parameters mirror Hyperparams; `physics` takes a PhysicsRules bundle and
    defaults to the built-in rules.
    """

    def __init__(self, physics=None, h1=1024, h2=1024, alpha=0.001, lam=1e-5,
                 mu1=0.2, mu2=0.1, mu3=0.2, epochs=2000, batch_size=32,
                 momentum=0.9, seed=0):
        self.physics = physics
        self.h1 = h1
        self.h2 = h2
        self.alpha = alpha
        self.lam = lam
        self.mu1 = mu1
        self.mu2 = mu2
        self.mu3 = mu3
        self.epochs = epochs
        self.batch_size = batch_size
        self.momentum = momentum
        self.seed = seed

    def _hyperparams(self) -> Hyperparams:
        return Hyperparams(
            h1=self.h1, h2=self.h2, alpha=self.alpha, lam=self.lam,
            mu1=self.mu1, mu2=self.mu2, mu3=self.mu3, epochs=self.epochs,
            batch_size=self.batch_size, momentum=self.momentum, seed=self.seed,
        )

    def fit(self, X, y):
        rules = self.physics if self.physics is not None else physics_mod.default_rules()
        X = as_matrix(X, 9, "X")
        y = as_matrix(y, 4, "y")
        if X.shape[0] != y.shape[0]:
            raise InvalidInputError("X and y row counts differ")
        self.model_, self.loss_curve_ = _fit_arrays(X, y, self._hyperparams(), rules)
        self.n_features_in_ = 9
        return self

    def predict(self, X):
        if not hasattr(self, "model_"):
            raise InvalidInputError("estimator is not fitted yet; call fit first")
        return self.model_.predict(X)


class PhysicsOnlyModel:
    """Drop-in `predict` that answers straight from the physical rules.

    Thrust and torque come from the force law; cutter life is a constant and
    belt volume a constant (zero by default).  Useful as a baseline and in
    fixtures where no trained network is wanted.
    """

    def __init__(self, rules=None, hf_value=500.0, pb_value=0.0):
        self.rules = physics_mod.default_rules() if rules is None else rules
        require_finite(hf_value=hf_value, pb_value=pb_value)
        self.hf_value = float(hf_value)
        self.pb_value = float(pb_value)

    def predict(self, X):
        single = np.asarray(X).ndim == 1
        Xm = as_matrix(X, 9, "X")
        th, tor = _physics_anchor(self.rules, Xm)
        out = np.column_stack(
            [np.full(len(Xm), self.hf_value), th, tor, np.full(len(Xm), self.pb_value)]
        )
        return out[0] if single else out


# ---------------------------------------------------------------------------
# Persistence


def model_to_dict(model: MappingModel) -> dict:
    return {
        "schema_version": MODEL_SCHEMA_VERSION,
        "dims": {"in": 9, "h1": model.hyperparams.h1, "h2": model.hyperparams.h2, "out": 4},
        "activation": "relu",
        "layers": [
            {"weights": w.tolist(), "biases": b.tolist()}
            for w, b in zip(model.weights, model.biases)
        ],
        "feature_min": model.feature_min.tolist(),
        "feature_max": model.feature_max.tolist(),
        "target_min": model.target_min.tolist(),
        "target_max": model.target_max.tolist(),
        "hyperparams": model.hyperparams.to_dict(),
        "physics_digest": model.physics_digest,
    }


def model_from_dict(doc: dict) -> MappingModel:
    try:
        if doc["schema_version"] != MODEL_SCHEMA_VERSION:
            raise InvalidInputError(
                f"unsupported model schema_version {doc['schema_version']}"
            )
        if doc["activation"] != "relu":
            raise InvalidInputError(f"unsupported activation {doc['activation']!r}")
        hp = Hyperparams.from_dict(doc["hyperparams"])
        model = MappingModel(
            weights=[np.array(l["weights"], dtype=float) for l in doc["layers"]],
            biases=[np.array(l["biases"], dtype=float) for l in doc["layers"]],
            feature_min=np.array(doc["feature_min"], dtype=float),
            feature_max=np.array(doc["feature_max"], dtype=float),
            target_min=np.array(doc["target_min"], dtype=float),
            target_max=np.array(doc["target_max"], dtype=float),
            hyperparams=hp,
            physics_digest=doc.get("physics_digest", ""),
        )
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"model file is malformed: {exc}") from exc
    dims = doc["dims"]
    if [dims["in"], dims["h1"], dims["h2"], dims["out"]] != [9, hp.h1, hp.h2, 4]:
        raise InvalidInputError("model dims do not match the stored hyperparams")
    return model


def _canonical_model_json(model: MappingModel) -> str:
    return json.dumps(model_to_dict(model), sort_keys=True, separators=(",", ":"))


def model_digest(model: MappingModel) -> str:
    return hashlib.sha256(_canonical_model_json(model).encode()).hexdigest()


def save_model(model: MappingModel, path) -> None:
    Path(path).write_text(_canonical_model_json(model) + "\n")


def load_model(path) -> MappingModel:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read model file {path}: {exc}") from exc
    return model_from_dict(doc)
