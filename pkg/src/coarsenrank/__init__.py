"""Robust rank aggregation with coarsened Plackett-Luce posteriors."""

from .core import (
    DomainError,
    Preference,
    PreferenceDataset,
    dataset_log_likelihood,
    kendall_tau,
    pl_log_probability,
    sample_preference,
    scores_to_ranking,
)
from .em import CoarsenConfig, FitResult, c_step, compute_tau, e_step, fit, fit_pl_em, m_step
from .gibbs import DicPoint, GibbsConfig, PosteriorSamples, diagnose, dic, gibbs_run
from .synth import SynthSpec, generate, inject_noise

__version__ = "0.1.0"
