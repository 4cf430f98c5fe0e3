"""Feature attribution and correlation analysis.

Shapley values are estimated model-agnostically by permutation sampling
(exact subset enumeration available for small dimensionality); the value
function is the predicted probability of the instance's argmax class.
Pearson correlation against matched host-speech features comes with a
seeded random-pairing baseline.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import combinations
from math import factorial

import numpy as np
from scipy.special import betainc

from .classify import TrainedModel, predict_proba

PROMINENCE_CUTOFF = 0.04
SIGNIFICANCE_ALPHA = 0.05

DIM_TYPES = ("Energy", "Frequency", "Temporal", "Spectral")

# fixed name -> type assignments for the prominent handcrafted dimensions
_EXPLICIT_DIM_TYPES = {
    "loudness_sma3_amean": "Energy",
    "F0semitoneFrom27.5Hz_sma3nz_percentile50.0": "Frequency",
    "loudness_sma3_meanRisingSlope": "Energy",
    "logRelF0-H1-A3_sma3nz_stddevNorm": "Frequency",
    "loudnessPeaksPerSec": "Temporal",
    "F0semitoneFrom27.5Hz_sma3nz_percentile80.0": "Frequency",
    "hammarbergIndexV_sma3nz_stddevNorm": "Spectral",
    "slopeV0-500_sma3nz_amean": "Temporal",
    "loudness_sma3_percentile80.0": "Energy",
    "slopeV500-1500_sma3nz_stddevNorm": "Temporal",
}


class ExplainError(Exception):
    pass


@dataclass(frozen=True)
class ShapRow:
    feature_name: str
    mean_abs_shap: float
    dim_type: str
    prominent: bool


@dataclass(frozen=True)
class PearsonRow:
    feature_name: str
    r_host: float
    p_host: float
    r_random: float
    p_random: float
    significant: bool


def dim_type_of(name: str) -> str:
    """Category of a feature dimension (Energy/Frequency/Temporal/Spectral)."""
    if name in _EXPLICIT_DIM_TYPES:
        return _EXPLICIT_DIM_TYPES[name]
    base = name.removesuffix("_left").removesuffix("_right")
    if base in _EXPLICIT_DIM_TYPES:
        return _EXPLICIT_DIM_TYPES[base]
    if base.startswith("loudnessPeaksPerSec") or "Segment" in base:
        return "Temporal"
    if base.startswith("loudness"):
        return "Energy"
    if base.startswith("F0") or base.startswith("logRelF0"):
        return "Frequency"
    return "Spectral"


def _value_fn(model):
    """Turn a model or callable into a batched scalar value function factory."""
    if isinstance(model, TrainedModel):
        def fn(rows, target):
            return predict_proba(model, rows)[:, target]

        def target_of(x):
            return int(np.argmax(predict_proba(model, x[None, :])[0]))

        return fn, target_of
    # plain callable returning a scalar (or vector) per row
    def fn(rows, target):
        return np.array([float(np.asarray(model(r)).ravel()[0]) for r in rows])

    return fn, lambda x: 0


def shapley_values(
    model,
    background: np.ndarray,
    x: np.ndarray,
    n_permutations: int = 200,
    seed: int = 0,
    exhaustive: bool = False,
) -> np.ndarray:
    """Per-feature attribution of the model's argmax-class probability at x.

    Monte-Carlo mode averages marginal contributions over sampled feature
    orderings, each grounded in one sampled background row.  Exhaustive mode
    enumerates all feature subsets against the whole background (d <= 16).
    """
    background = np.atleast_2d(np.asarray(background, dtype=float))
    x = np.asarray(x, dtype=float).ravel()
    d = len(x)
    if background.shape[1] != d:
        raise ExplainError("background/instance dimension mismatch")
    if len(background) == 0:
        raise ExplainError("empty background")
    fn, target_of = _value_fn(model)
    target = target_of(x)

    if exhaustive:
        if d > 16:
            raise ExplainError(f"exhaustive mode limited to d <= 16, got {d}")
        # v(S) = mean over background rows of f(x on S, background elsewhere)
        values = {}
        subsets = [s for r in range(d + 1) for s in combinations(range(d), r)]
        rows = []
        for s in subsets:
            z = background.copy()
            z[:, list(s)] = x[list(s)]
            rows.append(z)
        evals = fn(np.concatenate(rows), target)
        nb = len(background)
        for i, s in enumerate(subsets):
            values[s] = float(evals[i * nb:(i + 1) * nb].mean())
        phi = np.zeros(d)
        for s in subsets:
            in_s = set(s)
            for i in range(d):
                if i in in_s:
                    continue
                w = factorial(len(s)) * factorial(d - len(s) - 1) / factorial(d)
                phi[i] += w * (values[tuple(sorted(in_s | {i}))] - values[s])
        return phi

    if n_permutations < 1:
        raise ExplainError("n_permutations must be >= 1")
    rng = np.random.default_rng(seed)
    rows = np.empty((n_permutations * (d + 1), d))
    orders = np.empty((n_permutations, d), dtype=np.int64)
    for p in range(n_permutations):
        b = background[rng.integers(len(background))]
        order = rng.permutation(d)
        orders[p] = order
        z = b.copy()
        rows[p * (d + 1)] = z
        for step, i in enumerate(order):
            z = z.copy()
            z[i] = x[i]
            rows[p * (d + 1) + step + 1] = z
    evals = fn(rows, target)
    phi = np.zeros(d)
    for p in range(n_permutations):
        seg = evals[p * (d + 1):(p + 1) * (d + 1)]
        phi[orders[p]] += np.diff(seg)
    return phi / n_permutations


def efficiency_check(model, background, x, attributions) -> float:
    """Residual of the efficiency axiom: |sum(phi) - (f(x) - mean f(bg))|."""
    background = np.atleast_2d(np.asarray(background, dtype=float))
    x = np.asarray(x, dtype=float).ravel()
    fn, target_of = _value_fn(model)
    target = target_of(x)
    fx = float(fn(x[None, :], target)[0])
    fbg = float(fn(background, target).mean())
    return abs(float(np.sum(attributions)) - (fx - fbg))


def mean_abs_shap(
    model,
    X: np.ndarray,
    feature_names,
    sample_size: int | None = None,
    seed: int = 0,
    n_permutations: int = 200,
    cutoff: float = PROMINENCE_CUTOFF,
    background_size: int = 32,
) -> list[ShapRow]:
    """Mean |Shapley value| per feature over sampled rows, sorted descending.

    Features above the cutoff are flagged prominent.
    """
    X = np.asarray(X, dtype=float)
    n, d = X.shape
    if len(feature_names) != d:
        raise ExplainError("feature_names length mismatch")
    sample_size = min(sample_size or n, n)
    rng = np.random.default_rng(seed)
    sample_idx = np.sort(rng.choice(n, size=sample_size, replace=False))
    bg_idx = np.sort(rng.choice(n, size=min(background_size, n), replace=False))
    background = X[bg_idx]
    total = np.zeros(d)
    for pos, i in enumerate(sample_idx):
        phi = shapley_values(
            model, background, X[i], n_permutations=n_permutations,
            seed=seed + 1000003 * (pos + 1),
        )
        total += np.abs(phi)
    mean_abs = total / sample_size
    order = np.argsort(-mean_abs, kind="stable")
    return [
        ShapRow(
            feature_name=feature_names[i],
            mean_abs_shap=float(mean_abs[i]),
            dim_type=dim_type_of(feature_names[i]),
            prominent=bool(mean_abs[i] > cutoff),
        )
        for i in order
    ]


def pearson(x, y) -> tuple[float, float]:
    """Pearson r and the two-tailed p-value from Student's t with n-2 dof."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    if len(y) != n:
        raise ExplainError("length mismatch")
    if n < 3:
        raise ExplainError("need at least 3 observations")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = np.sqrt(np.dot(xc, xc))
    sy = np.sqrt(np.dot(yc, yc))
    if sx == 0.0 or sy == 0.0:
        raise ExplainError("zero variance")
    r = float(np.dot(xc, yc) / (sx * sy))
    r = max(-1.0, min(1.0, r))
    df = n - 2
    if abs(r) == 1.0:
        return r, 0.0
    t2 = r * r * df / (1.0 - r * r)
    p = float(betainc(df / 2.0, 0.5, df / (df + t2)))
    return r, p


def correlate_pairs(
    records,
    dog_features: dict,
    host_features: dict,
    feature_names,
    seed: int = 0,
    alpha: float = SIGNIFICANCE_ALPHA,
) -> list[PearsonRow]:
    """Correlate dog-clip features with same-video host-speech features.

    Host features are averaged per source video.  The random baseline repeats
    the computation after a seeded permutation of the per-video host rows.
    """
    name_idx = None
    host_by_video: dict[str, list[np.ndarray]] = {}
    for rec in records:
        if rec.kind != "host_speech" or rec.id not in host_features:
            continue
        fv = host_features[rec.id]
        host_by_video.setdefault(rec.source_video_id, []).append(np.asarray(fv.values))
        name_idx = name_idx or {n: i for i, n in enumerate(fv.names)}
    host_mean = {vid: np.mean(rows, axis=0) for vid, rows in host_by_video.items()}

    dog_rows, host_rows = [], []
    unmatched = set()
    for rec in records:
        if rec.kind != "dog_vocal" or rec.id not in dog_features:
            continue
        if rec.source_video_id in host_mean:
            dog_rows.append(np.asarray(dog_features[rec.id].values))
            host_rows.append(host_mean[rec.source_video_id])
        else:
            unmatched.add(rec.source_video_id)
    if not dog_rows:
        raise ExplainError(
            "no dog clips with matching host speech; unmatched videos: "
            + ", ".join(sorted(unmatched))
        )
    dog_mat = np.stack(dog_rows)
    host_mat = np.stack(host_rows)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(host_mat))

    out = []
    for name in feature_names:
        if name_idx is None or name not in name_idx:
            raise ExplainError(f"unknown feature dimension {name!r}")
        i = name_idx[name]
        r_host, p_host = pearson(dog_mat[:, i], host_mat[:, i])
        r_rand, p_rand = pearson(dog_mat[:, i], host_mat[perm, i])
        out.append(
            PearsonRow(
                feature_name=name,
                r_host=r_host,
                p_host=p_host,
                r_random=r_rand,
                p_random=p_rand,
                significant=bool(p_host < alpha),
            )
        )
    return out


def write_attribution_csv(path, rows: list[ShapRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature_name", "dim_type", "mean_abs_shap", "prominent"])
        for row in rows:
            writer.writerow(
                [row.feature_name, row.dim_type, f"{row.mean_abs_shap:.4f}",
                 str(row.prominent).lower()]
            )


def write_correlation_csv(path, rows: list[PearsonRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["feature_name", "r_host", "p_host", "r_random", "p_random", "significant"]
        )
        for row in rows:
            writer.writerow(
                [
                    row.feature_name,
                    f"{row.r_host:.3f}",
                    f"{row.p_host:.2e}",
                    f"{row.r_random:.3f}",
                    f"{row.p_random:.2e}",
                    str(row.significant).lower(),
                ]
            )
