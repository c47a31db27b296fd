"""Closed-form EM for coarsened Plackett-Luce rank aggregation.

Each PL normalisation term ``eta`` (the score mass still in play at a stage of
a preference) gets an auxiliary Gamma(1, eta) variable.  Conditioned on the
auxiliaries the tempered posterior factorises over items, so every iteration
is an E-step (expected auxiliaries), a closed-form M-step and a C-step that
rescales the scores to a fixed total.  Setting ``alpha = inf`` gives the
ordinary PL-EM fit.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
import numpy.typing as npt
from scipy.special import gammaln

from .core import (
    DomainError,
    FloatArray,
    PreferenceDataset,
    dataset_log_likelihood,
    suffix_sums,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CoarsenConfig:
    """Hyperparameters of a CoarsenRank fit.

    Attributes:
        alpha: rate of the exponential prior on the tolerated divergence;
            ``math.inf`` turns the fit into plain PL-EM.
        prior_shape, prior_rate: Gamma prior on each item score, either a
            scalar or one value per item.
        iterations: number of EM sweeps.
        calibration: target total score after each C-step, or ``"auto"``
            for half the number of preferences.
        score_floor: lower bound applied to scores after the M-step.
        calibrate: run the C-step; disabling it exposes the raw EM ascent.
        tol: optional early exit once the largest relative score change
            drops below this value.
    """

    alpha: float = math.inf
    prior_shape: float | Sequence[float] = 1.0
    prior_rate: float | Sequence[float] = 2.0
    iterations: int = 15
    calibration: float | Literal["auto"] = "auto"
    score_floor: float = 1e-12
    calibrate: bool = True
    tol: float | None = None

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if int(self.iterations) != self.iterations or self.iterations < 1:
            raise ValueError(f"iterations must be a positive integer, got {self.iterations}")
        if self.calibration != "auto" and not (
                isinstance(self.calibration, (int, float)) and self.calibration > 0):
            raise ValueError(f"calibration must be positive or 'auto', got {self.calibration!r}")
        if self.score_floor < 0:
            raise ValueError("score_floor must be non-negative")
        if np.any(np.asarray(self.prior_rate, dtype=float) <= 0):
            raise ValueError("prior_rate must be positive")
        if np.any(np.asarray(self.prior_shape, dtype=float) < 1):
            raise ValueError("prior_shape must be at least 1")

    def resolve_calibration(self, n_prefs: int) -> float:
        return n_prefs / 2 if self.calibration == "auto" else float(self.calibration)

    def prior(self, n_items: int) -> tuple[FloatArray, FloatArray]:
        return _prior_arrays((self.prior_shape, self.prior_rate), n_items)


def _prior_arrays(prior, n_items: int) -> tuple[FloatArray, FloatArray]:
    shape, rate = prior
    shape = np.broadcast_to(np.asarray(shape, dtype=np.float64), (n_items,)).copy()
    rate = np.broadcast_to(np.asarray(rate, dtype=np.float64), (n_items,)).copy()
    return shape, rate


@dataclass(frozen=True)
class AuxiliaryExpectations:
    """Expected auxiliary values, one ``(n_k, k-1)`` array per length block.

    Blocks line up with ``PreferenceDataset.blocks``; row ``r`` of block ``b``
    belongs to preference ``ds.blocks[b].rows[r]``.
    """

    blocks: tuple[FloatArray, ...]

    def for_preference(self, ds: PreferenceDataset, n: int) -> FloatArray:
        for block, values in zip(ds.blocks, self.blocks):
            hit = np.flatnonzero(block.rows == n)
            if hit.size:
                return values[hit[0]]
        raise IndexError(n)


@dataclass(frozen=True)
class FitResult:
    theta: FloatArray
    objective_trace: FloatArray
    tau_n: float
    iterations_run: int
    calibration: float = field(default=math.nan)


def compute_tau(n: int, alpha: float) -> float:
    """Likelihood tempering weight ``alpha / (alpha + n)``; 1 when alpha is inf."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if math.isinf(alpha):
        return 1.0
    return alpha / (alpha + n)


def stage_masses(ds: PreferenceDataset, theta: FloatArray) -> tuple[FloatArray, ...]:
    """Per-block ``(n_k, k-1)`` arrays of remaining score mass at each stage."""
    return tuple(suffix_sums(theta[block.items])[:, :-1] for block in ds.blocks)


def e_step(ds: PreferenceDataset, theta: npt.ArrayLike) -> AuxiliaryExpectations:
    theta = np.asarray(theta, dtype=np.float64)
    out = []
    for eta in stage_masses(ds, theta):
        if not np.all(eta > 0):
            raise DomainError("zero remaining score mass in a preference")
        out.append(1.0 / eta)
    return AuxiliaryExpectations(tuple(out))


def exposure_sums(ds: PreferenceDataset, aux_blocks: Sequence[FloatArray]) -> FloatArray:
    """For each item, sum the auxiliaries of every stage at which it is still in play.

    An item at position ``j`` of a length-``k`` preference is in play for
    stages ``0 .. min(j, k-2)``, so its contribution is a prefix sum.
    """
    totals = np.zeros(ds.n_items)
    for block, aux in zip(ds.blocks, aux_blocks):
        cover = np.cumsum(aux, axis=1)
        cover = np.concatenate([cover, cover[:, -1:]], axis=1)
        totals += np.bincount(block.items.ravel(), weights=cover.ravel(),
                              minlength=ds.n_items)
    return totals


def m_step(ds: PreferenceDataset, aux: AuxiliaryExpectations, tau: float,
           config: CoarsenConfig) -> FloatArray:
    shape, rate = config.prior(ds.n_items)
    numer = tau * ds.win_counts + shape - 1.0
    denom = tau * exposure_sums(ds, aux.blocks) + rate
    if not np.all(denom > 0):
        raise RuntimeError("non-positive M-step denominator")
    return np.maximum(numer / denom, config.score_floor)


def c_step(theta: npt.ArrayLike, total: float) -> FloatArray:
    """Rescale scores so they sum to ``total``."""
    theta = np.asarray(theta, dtype=np.float64)
    s = math.fsum(theta)
    if not s > 0:
        raise DomainError("cannot calibrate an all-zero score vector")
    return total * theta / s


def log_prior(theta: FloatArray, shape: FloatArray, rate: FloatArray) -> float:
    """Log density of independent Gamma(shape, rate) priors."""
    with np.errstate(divide="ignore"):
        log_theta = np.where(shape == 1.0, 0.0, np.log(theta))
    terms = ((shape - 1.0) * log_theta - rate * theta
             + shape * np.log(rate) - gammaln(shape))
    return math.fsum(terms)


def coarsened_objective(ds: PreferenceDataset, theta: npt.ArrayLike, tau: float,
                        prior) -> float:
    """Log prior plus ``tau`` times the PL log-likelihood."""
    theta = np.asarray(theta, dtype=np.float64)
    shape, rate = _prior_arrays(prior, ds.n_items)
    return log_prior(theta, shape, rate) + tau * dataset_log_likelihood(ds, theta)


def _check_fittable(ds: PreferenceDataset) -> None:
    if ds.n_prefs < 1:
        raise ValueError("cannot fit an empty dataset")
    if ds.n_items < 2:
        raise ValueError("need at least 2 items")


def _run(ds: PreferenceDataset, config: CoarsenConfig, tau: float) -> FitResult:
    _check_fittable(ds)
    total = config.resolve_calibration(ds.n_prefs)
    prior = config.prior(ds.n_items)
    theta = np.full(ds.n_items, total / ds.n_items)
    trace = []
    for t in range(config.iterations):
        try:
            aux = e_step(ds, theta)
            new = m_step(ds, aux, tau, config)
            trace.append(coarsened_objective(ds, new, tau, prior))
            if config.calibrate:
                new = c_step(new, total)
        except DomainError as exc:
            raise DomainError(f"iteration {t + 1}: {exc}", item=exc.item) from exc
        change = np.max(np.abs(new - theta) / theta)
        theta = new
        if config.tol is not None and change < config.tol:
            logger.debug("converged after %d iterations", t + 1)
            break
    return FitResult(theta=theta, objective_trace=np.asarray(trace), tau_n=tau,
                     iterations_run=len(trace), calibration=total)


def fit(ds: PreferenceDataset, config: CoarsenConfig | None = None) -> FitResult:
    """Fit item scores by CoarsenRank EM.

    Starts from uniform scores ``C / M`` and runs ``config.iterations`` rounds
    of E-step, M-step and C-step.  ``objective_trace`` holds the tempered log
    posterior right after each M-step, i.e. before rescaling.
    """
    config = config or CoarsenConfig()
    _check_fittable(ds)
    return _run(ds, config, compute_tau(ds.n_prefs, config.alpha))


def fit_pl_em(ds: PreferenceDataset, config: CoarsenConfig | None = None) -> FitResult:
    """Plain PL-EM: the same iteration with the likelihood weight fixed at 1.

    ``config.alpha`` is ignored.
    """
    return _run(ds, config or CoarsenConfig(), 1.0)
