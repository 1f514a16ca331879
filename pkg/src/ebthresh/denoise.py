"""Level-by-level empirical Bayes wavelet denoising.

At each processed level j the detail coefficients are put on the noise
scale, Z = d / sigma_j, a mixture prior is fitted by marginal maximum
likelihood, and the coefficients are replaced by sigma_j * eta(Z). The
scaling coefficients are kept as observed. With the translation-invariant
transform one fit is shared by every time origin: all 2^J coefficients of
a level enter a single as-if-independent likelihood, and the estimate is
the average-basis reconstruction.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np

from . import classic
from .core import MixtureFit, Rule, fit_sequence, shrink_with_fit, hard, soft
from .priors import Laplace, Prior
from .wavelets import (
    Pyramid,
    TIPyramid,
    dwt_periodic,
    idwt_periodic,
    mad_sigma,
    ti_dwt,
    ti_idwt_average_basis,
)

PER_LEVEL_MIN_COEFFS = 32

BASELINES = {
    # name: (number of finest levels processed, rule)
    "sure4": (4, Rule.SOFT),
    "sure6": (6, Rule.SOFT),
    "universal6": (6, Rule.SOFT),
    "fdr": (None, Rule.HARD),
}


class Transform(str, Enum):
    DECIMATED = "dwt"
    TRANSLATION_INVARIANT = "ti"


class SdPolicy(str, Enum):
    GLOBAL = "global"
    PER_LEVEL = "per-level"


@dataclass(frozen=True)
class DenoiseConfig:
    prior: Prior = field(default_factory=Laplace)
    rule: Rule = Rule.MEDIAN
    estimate_scale: bool = False
    transform: Transform = Transform.TRANSLATION_INVARIANT
    wavelet: str = "sym8"
    coarsest_level: int = 4
    sd_policy: SdPolicy = SdPolicy.GLOBAL
    A: float = 0.0
    cap: bool = True
    baseline: Optional[str] = None
    q: float = 0.05
    sigma: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "rule", Rule(self.rule))
        object.__setattr__(self, "transform", Transform(self.transform))
        object.__setattr__(self, "sd_policy", SdPolicy(self.sd_policy))
        if self.coarsest_level < 3:
            raise ValueError("coarsest level must be at least 3 (8 coefficients)")
        if self.A < 0:
            raise ValueError("threshold modification exponent must be nonnegative")
        if self.baseline is not None and self.baseline not in BASELINES:
            raise ValueError(f"unknown baseline {self.baseline!r}")
        if self.baseline == "fdr":
            classic.FdrParams(self.q)
        if self.sigma is not None and not self.sigma > 0:
            raise ValueError("sigma must be positive")

    @property
    def ti(self) -> bool:
        return self.transform is Transform.TRANSLATION_INVARIANT


@dataclass
class LevelFit:
    level: int
    sigma: float
    threshold_used: float
    weight_used: Optional[float] = None
    fit: Optional[MixtureFit] = None
    n: int = 0


@dataclass
class DenoiseResult:
    estimate: np.ndarray
    fits: List[LevelFit]


def processed_levels(J: int, config: DenoiseConfig) -> range:
    lo = config.coarsest_level
    if config.baseline is not None:
        count = BASELINES[config.baseline][0]
        if count is not None:
            lo = max(lo, J - count)
    return range(lo, J)


def noise_levels(pyr: Pyramid, config: DenoiseConfig) -> dict:
    """sigma_j for every detail level of the pyramid."""
    J = pyr.J
    if config.sigma is not None:
        return {j: float(config.sigma) for j in pyr.levels()}
    finest = mad_sigma(pyr.detail[J - 1])
    if config.sd_policy is SdPolicy.GLOBAL:
        return {j: finest for j in pyr.levels()}
    return {
        j: mad_sigma(pyr.detail[j]) if (1 << j) >= PER_LEVEL_MIN_COEFFS else finest
        for j in pyr.levels()
    }


def transform(signal, config: DenoiseConfig) -> Pyramid:
    if config.ti:
        return ti_dwt(signal, config.wavelet, config.coarsest_level)
    return dwt_periodic(signal, config.wavelet, config.coarsest_level)


def levelwise_fit(pyr: Pyramid, config: DenoiseConfig, sigmas: Optional[dict] = None) -> List[LevelFit]:
    """One fit per processed level; a TI level is fitted once over all origins."""
    if sigmas is None:
        sigmas = noise_levels(pyr, config)
    fits = []
    for j in processed_levels(pyr.J, config):
        z = pyr.detail[j] / sigmas[j]
        fits.append(_fit_level(j, z, sigmas[j], config, pyr.n))
    return fits


def _fit_level(j, z, sigma, config, n_signal):
    if config.baseline is None:
        fit = fit_sequence(z, config.prior, config.estimate_scale, config.cap)
        _, t, w = shrink_with_fit(np.empty(0), fit, config.rule, config.A, n=1 << j)
        return LevelFit(j, sigma, t, w, fit, z.size)
    if config.baseline.startswith("sure"):
        t = classic.sure_threshold(z).t_hat
    elif config.baseline == "universal6":
        t = classic.universal_threshold(n_signal)
    else:
        t = classic.fdr_threshold(z, classic.FdrParams(config.q))
    return LevelFit(j, sigma, t, n=z.size)


def shrink_level(z, lf: LevelFit, config: DenoiseConfig):
    if config.baseline is not None:
        rule = BASELINES[config.baseline][1]
        return soft(z, lf.threshold_used) if rule is Rule.SOFT else hard(z, lf.threshold_used)
    # the modification uses the 2^j coefficients of a decimated level
    est, _, _ = shrink_with_fit(z, lf.fit, config.rule, config.A, n=1 << lf.level)
    return est


def denoise(signal, config: DenoiseConfig = DenoiseConfig(),
            fits: Optional[Sequence[LevelFit]] = None) -> DenoiseResult:
    """Denoise a power-of-two length signal.

    ``fits`` lets callers reuse hyperparameters from an earlier call on the
    same data (for example posterior mean and median from one fit); only
    the Bayes fit is reused, the rule still comes from ``config``.
    """
    pyr = transform(signal, config)
    if fits is None:
        fits = levelwise_fit(pyr, config)
    out = pyr.copy()
    for lf in fits:
        z = pyr.detail[lf.level] / lf.sigma
        out.detail[lf.level] = lf.sigma * shrink_level(z, lf, config)
    est = ti_idwt_average_basis(out) if config.ti else idwt_periodic(out)
    return DenoiseResult(est, list(fits))
