"""Empirical Bayes thresholding for sparse sequences and wavelet denoising."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    MixtureFit,
    Rule,
    SequenceResult,
    ebthresh_sequence,
    estimate_weight,
    estimate_weight_scale,
    posterior_mean,
    posterior_median,
    threshold_from_weight,
    weight_from_threshold,
)
from .denoise import DenoiseConfig, DenoiseResult, denoise  # noqa: E402
from .priors import Gaussian, Laplace, QuasiCauchy, make_prior  # noqa: E402

__all__ = [
    "MixtureFit", "Rule", "SequenceResult", "ebthresh_sequence", "estimate_weight",
    "estimate_weight_scale", "posterior_mean", "posterior_median", "threshold_from_weight",
    "weight_from_threshold", "DenoiseConfig", "DenoiseResult", "denoise",
    "Gaussian", "Laplace", "QuasiCauchy", "make_prior",
]
