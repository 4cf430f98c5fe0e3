"""Named feature vectors and the fixed dimensionality registry."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FEATURE_SET_DIMS = {
    "filterbank24": 24,
    "mfcc13": 13,
    "plp13": 13,
    "gemaps_lite": 36,
}


class FeatureError(Exception):
    pass


@dataclass(frozen=True)
class FeatureVector:
    set_id: str
    names: tuple
    values: np.ndarray
    clip_id: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.set_id not in FEATURE_SET_DIMS:
            raise FeatureError(f"unknown feature set {self.set_id!r}")
        expected = FEATURE_SET_DIMS[self.set_id]
        if len(self.names) != expected or len(self.values) != expected:
            raise FeatureError(
                f"{self.set_id} expects {expected} dims, got "
                f"{len(self.names)} names / {len(self.values)} values"
            )
        if not np.all(np.isfinite(self.values)):
            raise FeatureError(f"non-finite values in {self.set_id} for {self.clip_id!r}")


def compare_feature_set(a: FeatureVector, b: FeatureVector):
    """Concatenate two same-set vectors into one pair row [a || b].

    Returns (names, values) with names suffixed _left / _right.
    """
    if a.set_id != b.set_id:
        raise FeatureError(f"set mismatch: {a.set_id} vs {b.set_id}")
    names = tuple(f"{n}_left" for n in a.names) + tuple(f"{n}_right" for n in b.names)
    values = np.concatenate([a.values, b.values])
    return names, values
