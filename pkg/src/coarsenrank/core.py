"""Preference data types, the Plackett-Luce model and Kendall's tau.

Items are represented by consecutive integers ``0 .. M-1``.  A preference is
an ordered tuple of distinct items, most preferred first, so ``(2, 0, 4)``
reads "2 is preferred to 0, which is preferred to 4".
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import numpy.typing as npt

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]


class DomainError(ValueError):
    """A numerical quantity left the domain where the model is defined."""

    def __init__(self, message: str, item: int | None = None) -> None:
        super().__init__(message)
        self.item = item


@dataclass(frozen=True)
class Preference:
    items: tuple[int, ...]

    def __post_init__(self) -> None:
        items = tuple(int(i) for i in self.items)
        object.__setattr__(self, "items", items)
        if len(items) < 2:
            raise ValueError(f"a preference needs at least 2 items, got {items}")
        if len(set(items)) != len(items):
            raise ValueError(f"duplicate item in preference {items}")
        if min(items) < 0:
            raise ValueError(f"negative item index in preference {items}")

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __str__(self) -> str:
        return ">".join(map(str, self.items))


@dataclass(frozen=True)
class _Block:
    """All preferences of one length, stacked as an ``(n_k, k)`` array."""

    rows: IntArray
    items: IntArray


@dataclass(frozen=True)
class PreferenceDataset:
    """An immutable collection of preferences over ``len(item_ids)`` items."""

    preferences: tuple[Preference, ...]
    item_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        prefs = tuple(p if isinstance(p, Preference) else Preference(tuple(p))
                      for p in self.preferences)
        ids = tuple(str(i) for i in self.item_ids)
        object.__setattr__(self, "preferences", prefs)
        object.__setattr__(self, "item_ids", ids)
        if len(set(ids)) != len(ids):
            raise ValueError("item ids must be unique")
        m = len(ids)
        for n, pref in enumerate(prefs):
            if max(pref.items) >= m:
                raise ValueError(
                    f"preference {n} references item {max(pref.items)} "
                    f"but only {m} items exist")

    @classmethod
    def from_lists(cls, preferences: Iterable[Sequence[int]],
                   n_items: int | None = None,
                   item_ids: Sequence[str] | None = None) -> "PreferenceDataset":
        """Build a dataset from plain index sequences.

        When neither ``n_items`` nor ``item_ids`` is given, the item count is
        one more than the largest index seen; IDs default to ``str(index)``.
        """
        prefs = tuple(Preference(tuple(p)) for p in preferences)
        if item_ids is None:
            if n_items is None:
                n_items = 1 + max((max(p.items) for p in prefs), default=-1)
            item_ids = [str(i) for i in range(n_items)]
        return cls(prefs, tuple(item_ids))

    @property
    def n_prefs(self) -> int:
        return len(self.preferences)

    @property
    def n_items(self) -> int:
        return len(self.item_ids)

    def __len__(self) -> int:
        return len(self.preferences)

    @cached_property
    def index_of(self) -> dict[str, int]:
        return {item_id: i for i, item_id in enumerate(self.item_ids)}

    @cached_property
    def blocks(self) -> tuple[_Block, ...]:
        # Preferences grouped by length, ascending; rows keep dataset order.
        by_len: dict[int, list[int]] = {}
        for n, pref in enumerate(self.preferences):
            by_len.setdefault(len(pref), []).append(n)
        out = []
        for k in sorted(by_len):
            rows = np.asarray(by_len[k], dtype=np.int64)
            items = np.asarray([self.preferences[n].items for n in by_len[k]],
                               dtype=np.int64).reshape(len(rows), k)
            out.append(_Block(rows, items))
        return tuple(out)

    @cached_property
    def win_counts(self) -> FloatArray:
        """Number of times each item occupies a non-last position."""
        counts = np.zeros(self.n_items)
        for block in self.blocks:
            counts += np.bincount(block.items[:, :-1].ravel(),
                                  minlength=self.n_items)
        return counts

    def relabel(self, perm: Sequence[int]) -> "PreferenceDataset":
        """Return a copy in which item ``m`` is renamed ``perm[m]``."""
        perm = [int(p) for p in perm]
        if sorted(perm) != list(range(self.n_items)):
            raise ValueError("perm must be a permutation of the item indices")
        ids = [""] * self.n_items
        for old, new in enumerate(perm):
            ids[new] = self.item_ids[old]
        prefs = [[perm[i] for i in p.items] for p in self.preferences]
        return PreferenceDataset.from_lists(prefs, item_ids=ids)


def as_scores(theta: npt.ArrayLike) -> FloatArray:
    """Validate and convert an item-score vector to float64."""
    arr = np.asarray(theta, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("scores must be a non-empty 1-d vector")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0) or not np.any(arr > 0):
        raise DomainError("scores must be finite, non-negative and not all zero")
    return arr


def _items_of(pref: Preference | Sequence[int]) -> tuple[int, ...]:
    return pref.items if isinstance(pref, Preference) else Preference(tuple(pref)).items


def pl_log_probability(pref: Preference | Sequence[int], theta: npt.ArrayLike) -> float:
    """Log-probability of one preference under the Plackett-Luce model.

    Each stage contributes ``log theta[winner] - log(sum of remaining)``; the
    remaining-mass sums are built in one backward pass over the preference.

    Raises:
        DomainError: if any item in the preference has score zero.
    """
    items = _items_of(pref)
    theta = np.asarray(theta, dtype=np.float64)
    if max(items) >= theta.size:
        raise ValueError(f"preference {items} references items beyond {theta.size}")
    tail = float(theta[items[-1]])
    if not tail > 0:
        raise DomainError(f"item {items[-1]} has score {tail}", item=items[-1])
    logp = 0.0
    for item in reversed(items[:-1]):
        t = float(theta[item])
        if not t > 0:
            raise DomainError(f"item {item} has score {t}", item=item)
        tail += t
        logp += math.log(t) - math.log(tail)
    return logp


def _check_positive(ds: PreferenceDataset, theta: FloatArray) -> None:
    for block in ds.blocks:
        vals = theta[block.items]
        bad = ~(vals > 0)
        if bad.any():
            item = int(block.items[bad][0])
            raise DomainError(f"item {item} has score {theta[item]}", item=item)


def suffix_sums(values: FloatArray) -> FloatArray:
    """Backward cumulative sums along the last axis."""
    return np.cumsum(values[..., ::-1], axis=-1)[..., ::-1]


def preference_log_probabilities(ds: PreferenceDataset, theta: npt.ArrayLike) -> FloatArray:
    """Per-preference PL log-probabilities, in dataset order."""
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (ds.n_items,):
        raise ValueError(f"expected {ds.n_items} scores, got shape {theta.shape}")
    _check_positive(ds, theta)
    out = np.empty(ds.n_prefs)
    for block in ds.blocks:
        vals = theta[block.items]
        eta = suffix_sums(vals)[:, :-1]
        out[block.rows] = (np.log(vals[:, :-1]) - np.log(eta)).sum(axis=1)
    return out


def dataset_log_likelihood(ds: PreferenceDataset, theta: npt.ArrayLike) -> float:
    """Sum of PL log-probabilities over all preferences."""
    return math.fsum(preference_log_probabilities(ds, theta))


def sample_preference(theta: npt.ArrayLike, subset: Iterable[int], k: int,
                      rng: np.random.Generator) -> Preference:
    """Draw a length-``k`` PL preference over ``subset``.

    Items are drawn without replacement with probability proportional to the
    remaining scores.  This uses the Gumbel-max construction: ordering the
    perturbed keys ``log theta + Gumbel`` gives exactly the sequential PL law.
    """
    subset = np.fromiter(subset, dtype=np.int64)
    if subset.size == 0:
        raise ValueError("subset is empty")
    if not 1 <= k <= subset.size:
        raise ValueError(f"k={k} must lie in [1, {subset.size}]")
    if len(np.unique(subset)) != subset.size:
        raise ValueError("subset contains duplicate items")
    w = np.asarray(theta, dtype=np.float64)[subset]
    if not np.all(w > 0):
        raise DomainError("scores must be positive on the subset")
    keys = np.log(w) + rng.gumbel(size=subset.size)
    order = np.argsort(-keys, kind="stable")[:k]
    return Preference(tuple(subset[order].tolist()))


def scores_to_ranking(theta: npt.ArrayLike) -> IntArray:
    """Items by descending score; ties go to the smaller index."""
    theta = np.asarray(theta, dtype=np.float64)
    return np.argsort(-theta, kind="stable").astype(np.int64)


def kendall_tau(a: Sequence[int], b: Sequence[int]) -> float:
    """Fraction of item pairs ordered the same way by two total orders.

    Returns 1 for identical rankings and 0 for a full reversal.
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    m = a.size
    if a.ndim != 1 or b.shape != a.shape:
        raise ValueError("rankings must be 1-d and of equal length")
    if m < 2:
        raise ValueError("kendall_tau needs at least 2 items")
    if not (np.array_equal(np.sort(a), np.arange(m))
            and np.array_equal(np.sort(b), np.arange(m))):
        raise ValueError("rankings must be permutations of the same item set")
    pos_a = np.empty(m, dtype=np.int64)
    pos_b = np.empty(m, dtype=np.int64)
    pos_a[a] = np.arange(m)
    pos_b[b] = np.arange(m)
    i, j = np.triu_indices(m, k=1)
    agree = np.count_nonzero(
        np.sign(pos_a[i] - pos_a[j]) == np.sign(pos_b[i] - pos_b[j]))
    return agree / (m * (m - 1) / 2)
