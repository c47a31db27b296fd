"""Synthetic PL preference data with order-randomising noise."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import numpy.typing as npt

from .core import (
    FloatArray,
    IntArray,
    Preference,
    PreferenceDataset,
    as_scores,
    sample_preference,
    scores_to_ranking,
)


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a synthetic dataset.

    ``length`` is either a fixed preference length or an inclusive
    ``(low, high)`` range drawn uniformly per preference.  Without an explicit
    ``theta_truth`` each item score is drawn from Gamma(shape=2, rate=1).
    """

    n_items: int
    n_prefs: int
    length: int | tuple[int, int] = 2
    theta_truth: Sequence[float] | None = None
    noise_fraction: float = 0.0
    seed: int = 0
    fresh_subsets: bool = False

    def __post_init__(self) -> None:
        lo, hi = self.length_range
        if not 2 <= lo <= hi:
            raise ValueError(f"invalid preference length {self.length}")
        if hi > self.n_items:
            raise ValueError(
                f"preference length {hi} exceeds the number of items {self.n_items}")
        if self.n_prefs < 1:
            raise ValueError("n_prefs must be positive")
        if not 0.0 <= self.noise_fraction <= 1.0:
            raise ValueError("noise_fraction must lie in [0, 1]")
        if self.theta_truth is not None and len(self.theta_truth) != self.n_items:
            raise ValueError("theta_truth length must equal n_items")

    @property
    def length_range(self) -> tuple[int, int]:
        if isinstance(self.length, (tuple, list)):
            lo, hi = self.length
            return int(lo), int(hi)
        return int(self.length), int(self.length)


def _streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    data_seq, noise_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(data_seq), np.random.default_rng(noise_seq)


def generate(spec: SynthSpec) -> tuple[PreferenceDataset, IntArray, FloatArray]:
    """Draw a dataset, its ground-truth ranking and the true scores.

    Clean preferences and noise use separate random streams derived from
    ``spec.seed``, so the clean part does not depend on ``noise_fraction``.
    """
    rng, noise_rng = _streams(spec.seed)
    m = spec.n_items
    if spec.theta_truth is None:
        theta = rng.gamma(2.0, 1.0, size=m)
    else:
        theta = as_scores(spec.theta_truth).copy()
    lo, hi = spec.length_range
    prefs = []
    for _ in range(spec.n_prefs):
        k = int(rng.integers(lo, hi + 1))
        subset = rng.choice(m, size=k, replace=False)
        prefs.append(sample_preference(theta, subset, k, rng))
    ds = PreferenceDataset(tuple(prefs), tuple(f"i{j}" for j in range(m)))
    if spec.noise_fraction > 0:
        ds = _inject(ds, spec.noise_fraction, noise_rng, spec.fresh_subsets)
    return ds, scores_to_ranking(theta), theta


def inject_noise(ds: PreferenceDataset, fraction: float, seed: int | np.random.Generator,
                 fresh_subsets: bool = False) -> PreferenceDataset:
    """Replace ``round(fraction * N)`` preferences with randomly ordered ones.

    By default a replacement keeps the item subset and shuffles its order; the
    shuffle is redrawn until it differs from the original, so every chosen
    preference really changes.  With ``fresh_subsets`` the replacement is a
    uniformly random ordered subset of the same length.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return _inject(ds, fraction, rng, fresh_subsets)


def noisy_indices(n_prefs: int, fraction: float, rng: np.random.Generator) -> IntArray:
    count = int(round(fraction * n_prefs))
    return np.sort(rng.choice(n_prefs, size=count, replace=False))


def _inject(ds: PreferenceDataset, fraction: float, rng: np.random.Generator,
            fresh_subsets: bool) -> PreferenceDataset:
    prefs = list(ds.preferences)
    for n in noisy_indices(ds.n_prefs, fraction, rng):
        old = prefs[n].items
        while True:
            if fresh_subsets:
                new = tuple(rng.choice(ds.n_items, size=len(old), replace=False).tolist())
            else:
                new = tuple(rng.permutation(np.asarray(old)).tolist())
            if new != old:
                break
        prefs[n] = Preference(new)
    return PreferenceDataset(tuple(prefs), ds.item_ids)
