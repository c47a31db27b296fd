"""Gibbs sampling of the coarsened posterior and the DIC diagnostic for alpha."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .core import DomainError, FloatArray, PreferenceDataset, preference_log_probabilities
from .em import _prior_arrays, compute_tau, exposure_sums, stage_masses

# Shape floor for the "paper" conditional, whose shape can reach zero.
PAPER_SHAPE_FLOOR = 1e-6
_TINY = np.finfo(np.float64).tiny


class SamplerError(RuntimeError):
    def __init__(self, message: str, sweep: int) -> None:
        super().__init__(message)
        self.sweep = sweep

    def __str__(self) -> str:
        return f"sweep {self.sweep}: {self.args[0]}"


@dataclass(frozen=True)
class GibbsConfig:
    """Sampler settings.

    ``conditional_mode="conjugate"`` draws scores from Gamma(a + tau*W, ...),
    the exact conjugate update.  ``"paper"`` uses shape ``tau*W + a - 1``
    (floored at ``PAPER_SHAPE_FLOOR``), which is the M-step numerator.
    """

    samples: int = 50
    burn_in: int = 50
    seed: int = 0
    conditional_mode: Literal["paper", "conjugate"] = "conjugate"

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise ValueError("samples must be at least 1")
        if self.burn_in < 0:
            raise ValueError("burn_in must be non-negative")
        if self.conditional_mode not in ("paper", "conjugate"):
            raise ValueError(f"unknown conditional_mode {self.conditional_mode!r}")


@dataclass(frozen=True)
class PosteriorSamples:
    draws: FloatArray  # (samples, n_items)
    seed: int
    alpha: float = math.inf

    @property
    def mean(self) -> FloatArray:
        return self.draws.mean(axis=0)


@dataclass(frozen=True)
class DicPoint:
    alpha: float
    f: float
    g: float
    dic: float


def sample_auxiliaries(ds: PreferenceDataset, theta: FloatArray,
                       rng: np.random.Generator) -> list[FloatArray]:
    """Draw every auxiliary from Gamma(1, eta), blocks aligned with ``ds.blocks``."""
    out = []
    for eta in stage_masses(ds, theta):
        if not np.all(np.isfinite(eta) & (eta > 0)):
            raise DomainError("invalid auxiliary rate")
        out.append(rng.standard_exponential(eta.shape) / eta)
    return out


def gibbs_run(ds: PreferenceDataset, alpha: float, prior=(1.0, 2.0),
              gc: GibbsConfig | None = None) -> PosteriorSamples:
    """Alternate auxiliary and score draws; keep ``gc.samples`` post-burn-in sweeps.

    Auxiliaries are drawn as ``Exp(eta)`` given the current scores; scores are
    then drawn from their Gamma full conditionals given those sampled
    auxiliaries.  The chain starts at the prior mean.
    """
    gc = gc or GibbsConfig()
    if ds.n_items < 2 or ds.n_prefs < 1:
        raise ValueError("need at least 2 items and 1 preference")
    shape0, rate0 = _prior_arrays(prior, ds.n_items)
    tau = compute_tau(ds.n_prefs, alpha)
    if gc.conditional_mode == "conjugate":
        shape = shape0 + tau * ds.win_counts
    else:
        shape = np.maximum(tau * ds.win_counts + shape0 - 1.0, PAPER_SHAPE_FLOOR)
    rng = np.random.default_rng(gc.seed)
    theta = shape0 / rate0
    draws = np.empty((gc.samples, ds.n_items))
    for sweep in range(gc.burn_in + gc.samples):
        try:
            xi = sample_auxiliaries(ds, theta, rng)
        except DomainError as exc:
            raise SamplerError(str(exc), sweep) from exc
        rate = tau * exposure_sums(ds, xi) + rate0
        if not np.all(np.isfinite(rate) & (rate > 0)):
            raise SamplerError("invalid score rate", sweep)
        theta = np.maximum(rng.standard_gamma(shape) / rate, _TINY)
        if sweep >= gc.burn_in:
            draws[sweep - gc.burn_in] = theta
    return PosteriorSamples(draws=draws, seed=gc.seed, alpha=alpha)


def dic_from_samples(ds: PreferenceDataset, samples: PosteriorSamples) -> DicPoint:
    """DIC from posterior draws.

    ``f`` is the mean log-likelihood over the draws, ``g`` the log-likelihood
    at the posterior mean minus ``f``, and ``dic = g - f``.
    """
    logliks = []
    for s, theta in enumerate(samples.draws):
        ll = math.fsum(preference_log_probabilities(ds, theta))
        if not math.isfinite(ll):
            raise DomainError(f"sample {s} has non-finite log-likelihood")
        logliks.append(ll)
    f = math.fsum(logliks) / len(logliks)
    at_mean = math.fsum(preference_log_probabilities(ds, samples.mean))
    g = at_mean - f
    dic_value = g - f
    if not all(map(math.isfinite, (f, g, dic_value))):
        raise DomainError("non-finite DIC components")
    return DicPoint(alpha=samples.alpha, f=f, g=g, dic=dic_value)


def dic(ds: PreferenceDataset, alpha: float, prior=(1.0, 2.0),
        gc: GibbsConfig | None = None) -> DicPoint:
    return dic_from_samples(ds, gibbs_run(ds, alpha, prior, gc))


def diagnose(ds: PreferenceDataset, alpha_grid: Sequence[float], prior=(1.0, 2.0),
             gc: GibbsConfig | None = None) -> tuple[list[DicPoint], float]:
    """Evaluate DIC along an ascending alpha grid and pick the minimiser.

    Grid point ``i`` runs its own chain seeded with ``gc.seed + i``.  Ties go
    to the smaller alpha.
    """
    gc = gc or GibbsConfig()
    grid = [float(a) for a in alpha_grid]
    if not grid:
        raise ValueError("alpha grid is empty")
    if any(not a > 0 for a in grid):
        raise ValueError("alpha values must be positive")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("alpha grid must be strictly ascending")
    points = []
    for i, alpha in enumerate(grid):
        chain = GibbsConfig(samples=gc.samples, burn_in=gc.burn_in, seed=gc.seed + i,
                            conditional_mode=gc.conditional_mode)
        try:
            points.append(dic(ds, alpha, prior, chain))
        except DomainError as exc:
            raise DomainError(f"alpha={alpha}: {exc}") from exc
        except SamplerError as exc:
            raise SamplerError(f"alpha={alpha}: {exc.args[0]}", exc.sweep) from exc
    best = min(range(len(points)), key=lambda i: (points[i].dic, i))
    return points, points[best].alpha
