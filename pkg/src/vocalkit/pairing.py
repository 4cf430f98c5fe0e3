"""Context-matched pair construction.

Two clips share a context when they have the same scene, the same location
and activity vectors with cosine similarity at or above the threshold
(default 0.95).  Ordered pairs of context-matched clips get one of four
labels from the two clips' language environments.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

SCENES = ("Alone", "Bath", "Eat", "Fight", "Play", "Run", "Stranger", "Walk")
LANG_ENVS = ("En", "Ja")
ACTIVITY_DIM = 768
DEFAULT_COS_THRESHOLD = 0.95


class PairingError(Exception):
    pass


class PairClass(Enum):
    EnEn = 0
    JaJa = 1
    EnJa = 2
    JaEn = 3

    @staticmethod
    def from_lang_envs(left: str, right: str) -> "PairClass":
        return PairClass[f"{left}{right}"]


@dataclass(frozen=True)
class Context:
    scene: str
    location: str
    activity: np.ndarray  # 768-dim

    def __post_init__(self):
        if self.scene not in SCENES:
            raise PairingError(f"unknown scene {self.scene!r}")
        if self.activity.shape != (ACTIVITY_DIM,):
            raise PairingError(
                f"activity must have {ACTIVITY_DIM} entries, got {self.activity.shape}"
            )
        if not np.all(np.isfinite(self.activity)):
            raise PairingError("non-finite activity vector")


@dataclass(frozen=True)
class ClipRecord:
    id: str
    kind: str  # "dog_vocal" | "host_speech"
    lang_env: str  # "En" | "Ja"
    audio_path: str
    start_s: float
    end_s: float
    context: Context | None = None
    source_video_id: str = ""
    syllable_count: int | None = None

    def __post_init__(self):
        if self.kind not in ("dog_vocal", "host_speech"):
            raise PairingError(f"unknown clip kind {self.kind!r} for {self.id!r}")
        if self.lang_env not in LANG_ENVS:
            raise PairingError(f"unknown lang_env {self.lang_env!r} for {self.id!r}")
        if self.end_s <= self.start_s:
            raise PairingError(f"end_s must exceed start_s for {self.id!r}")
        if self.kind == "dog_vocal" and self.context is None:
            raise PairingError(f"dog_vocal record {self.id!r} lacks a context")

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class ClipPair:
    left: str
    right: str
    label: PairClass

    def __post_init__(self):
        if self.left == self.right:
            raise PairingError(f"self-pair {self.left!r}")


def context_match(a: Context, b: Context, cos_threshold: float = DEFAULT_COS_THRESHOLD) -> bool:
    """True iff scenes and locations match and activity cosine >= threshold."""
    if a.scene != b.scene or a.location != b.location:
        return False
    na = np.linalg.norm(a.activity)
    nb = np.linalg.norm(b.activity)
    if na == 0.0 or nb == 0.0:
        raise PairingError("zero-norm activity vector; cosine undefined")
    cos = float(np.dot(a.activity, b.activity) / (na * nb))
    return cos >= cos_threshold


def enumerate_pairs(
    records: list[ClipRecord],
    cos_threshold: float = DEFAULT_COS_THRESHOLD,
) -> dict[PairClass, list[ClipPair]]:
    """All ordered context-matched pairs, grouped by class.

    Pairs within each class are sorted by (left, right) id so the result is
    independent of input order.
    """
    by_class: dict[PairClass, list[ClipPair]] = {c: [] for c in PairClass}
    groups: dict[tuple, list[ClipRecord]] = {}
    for rec in records:
        if rec.kind != "dog_vocal":
            raise PairingError(f"pairing expects dog_vocal records, got {rec.kind!r}")
        groups.setdefault((rec.context.scene, rec.context.location), []).append(rec)
    for members in groups.values():
        members = sorted(members, key=lambda r: r.id)
        acts = np.stack([m.context.activity for m in members])
        norms = np.linalg.norm(acts, axis=1)
        if np.any(norms == 0.0):
            raise PairingError("zero-norm activity vector; cosine undefined")
        cos = (acts / norms[:, None]) @ (acts / norms[:, None]).T
        n = len(members)
        for i in range(n):
            for j in range(n):
                if i == j or cos[i, j] < cos_threshold:
                    continue
                label = PairClass.from_lang_envs(members[i].lang_env, members[j].lang_env)
                by_class[label].append(ClipPair(members[i].id, members[j].id, label))
    for c in PairClass:
        by_class[c].sort(key=lambda p: (p.left, p.right))
    return by_class


def build_pairs(
    records: list[ClipRecord],
    per_class_quota: int,
    seed: int,
    cos_threshold: float = DEFAULT_COS_THRESHOLD,
) -> list[ClipPair]:
    """Sample up to per_class_quota context-matched pairs per class.

    Sampling is without replacement with a seeded generator; a class with no
    eligible pairs simply contributes nothing.  The returned list is ordered
    by (class, left, right).
    """
    by_class = enumerate_pairs(records, cos_threshold)
    rng = np.random.default_rng(seed)
    out: list[ClipPair] = []
    for c in PairClass:
        candidates = by_class[c]
        if len(candidates) > per_class_quota:
            idx = rng.choice(len(candidates), size=per_class_quota, replace=False)
            candidates = [candidates[i] for i in sorted(idx)]
        out.extend(candidates)
    return out


def pair_dataset(pairs: list[ClipPair], features: dict, set_id: str):
    """Assemble the labeled design matrix for a pair list.

    features maps clip id -> FeatureVector of the given set.  Rows follow the
    canonical (left, right) order; labels are PairClass indices.

    Returns (X, y, names, ordered_pairs).
    """
    from .features import compare_feature_set

    ordered = sorted(pairs, key=lambda p: (p.left, p.right))
    rows, labels = [], []
    names = None
    for p in ordered:
        for cid in (p.left, p.right):
            if cid not in features:
                raise PairingError(f"missing feature row for clip {cid!r}")
            if features[cid].set_id != set_id:
                raise PairingError(
                    f"feature set mismatch for clip {cid!r}: "
                    f"{features[cid].set_id} != {set_id}"
                )
        pair_names, values = compare_feature_set(features[p.left], features[p.right])
        names = names or pair_names
        rows.append(values)
        labels.append(p.label.value)
    dim = len(names) if names else 0
    X = np.stack(rows) if rows else np.empty((0, dim))
    y = np.array(labels, dtype=np.int64)
    return X, y, names, ordered
