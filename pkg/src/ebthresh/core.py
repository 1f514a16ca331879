"""Marginal maximum likelihood thresholding for a single sparse sequence."""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Union

import numpy as np
from scipy import optimize, special

from .priors import Gaussian, Laplace, Prior, beta_terms, posterior_weight, tail_f1
from .normal import log_phi

# Search box for jointly estimated slab scales.
LAPLACE_SCALE_BOUNDS = (0.04, 3.0)
GAUSSIAN_TAU_BOUNDS = (np.sqrt(2.0) / 3.0, np.sqrt(2.0) / 0.04)
DEFAULT_LAPLACE_SCALE = 0.5

_T_BRACKET = np.sqrt(2.0 * np.log(1e9)) + 2.0
_LATTICE = 50


class Rule(str, Enum):
    MEDIAN = "median"
    MEAN = "mean"
    HARD = "hard"
    SOFT = "soft"

    @property
    def is_thresholding(self) -> bool:
        return self is not Rule.MEAN


@dataclass(frozen=True)
class MixtureFit:
    w_hat: float
    threshold: float
    n: int
    prior: Prior
    a_hat: Optional[float] = None
    hit_lower_bound: bool = False
    hit_upper_bound: bool = False
    degenerate: bool = False
    loglik: float = float("nan")


@dataclass
class SequenceResult:
    estimates: np.ndarray
    fit: MixtureFit
    sigma: float
    threshold_used: float
    weight_used: float


def _as_data(data) -> np.ndarray:
    x = np.asarray(data, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empty sequence")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite entries in data")
    return x


def log_likelihood(prior: Prior, data, w: float) -> float:
    """l(w) = sum log{(1 - w) phi(z) + w g(z)}."""
    z = _as_data(data)
    return _loglik_from_ratio(z, prior.log_ratio(z), w)


def _loglik_from_ratio(z, log_r, w):
    return np.sum(log_phi(z)) + _mixture_term(log_r, w)


def _mixture_term(log_r, w):
    """sum log(1 - w + w r) over a 1-d log_r; w may be a vector of weights."""
    w = np.asarray(w, dtype=float)
    wb = w[..., None]
    big = log_r > 30.0
    r_m1 = np.expm1(np.where(big, 0.0, log_r))
    out = np.log1p(wb * r_m1)
    if np.any(big):
        with np.errstate(divide="ignore"):
            tail = np.logaddexp(np.log1p(-wb), np.log(wb) + log_r[big])
        out = np.broadcast_to(out, np.broadcast_shapes(out.shape, tail.shape[:-1] + out.shape[-1:])).copy()
        out[..., big] = tail
    return out.sum(axis=-1)


def score(prior: Prior, data, w: float) -> float:
    """Derivative of the marginal log-likelihood in w."""
    z = _as_data(data)
    return float(np.sum(beta_terms(prior.log_ratio(z), w)))


def weight_from_threshold(prior: Prior, t):
    """Prior weight whose posterior-median threshold is ``t``.

    Closed form: w = 1 / (1 + r(t) (2 F1(0|t) - 1)) with r = g / phi.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("threshold must be nonnegative")
    w = special.expit(-prior.log_threshold_odds(t))
    if np.any(w <= np.finfo(float).tiny):
        raise ValueError("weight underflow")
    return float(w) if w.ndim == 0 else w


def threshold_from_weight(prior: Prior, w: float) -> float:
    """t(w) = sup{z >= 0 : posterior median at z is zero}."""
    w = float(w)
    if w <= 0:
        raise ValueError("threshold infinite")
    if w >= 1:
        return 0.0
    target = np.log1p(-w) - np.log(w)
    lo, hi = 0.0, _T_BRACKET
    while prior.log_threshold_odds(hi) < target:
        lo, hi = hi, 2.0 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if prior.log_threshold_odds(mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            break
    return float(0.5 * (lo + hi))


def universal_weight(prior: Prior, n: int) -> float:
    """w_n with t(w_n) = sqrt(2 log n)."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return weight_from_threshold(prior, np.sqrt(2.0 * np.log(n)))


def _bisect_weight(log_r, lo, hi):
    # S is decreasing in w; search on log w.
    llo, lhi = np.log(lo), np.log(hi)
    for _ in range(200):
        mid = 0.5 * (llo + lhi)
        if np.sum(beta_terms(log_r, np.exp(mid))) > 0:
            llo = mid
        else:
            lhi = mid
        if lhi - llo < 1e-13:
            break
    return float(np.exp(0.5 * (llo + lhi)))


def _fit_weight(prior, z, log_r, cap):
    n = z.size
    if cap and n >= 2:
        w_lo = universal_weight(prior, n)
    else:
        w_lo = 1e-300 ** 0.5
    lower = upper = False
    if np.sum(beta_terms(log_r, w_lo)) <= 0:
        w, lower = w_lo, True
    elif np.sum(beta_terms(log_r, 1.0)) >= 0:
        w, upper = 1.0, True
    else:
        w = _bisect_weight(log_r, w_lo, 1.0)
    return w, lower, upper


def estimate_weight(prior: Prior, data, cap: bool = True) -> MixtureFit:
    """Marginal maximum likelihood weight for a fixed slab."""
    z = np.sort(np.abs(_as_data(data)))
    log_r = prior.log_ratio(z)
    w, lower, upper = _fit_weight(prior, z, log_r, cap)
    return MixtureFit(
        w_hat=w,
        threshold=threshold_from_weight(prior, w),
        n=z.size,
        prior=prior,
        hit_lower_bound=lower,
        hit_upper_bound=upper,
        loglik=float(_loglik_from_ratio(z, log_r, w)),
    )


def _family(family: str):
    if family == "laplace":
        return Laplace, LAPLACE_SCALE_BOUNDS
    if family == "gaussian":
        return Gaussian, GAUSSIAN_TAU_BOUNDS
    raise ValueError(f"scale estimation not available for {family!r}")


def estimate_weight_scale(data, family: str = "laplace", cap: bool = True) -> MixtureFit:
    """Joint maximum of l(w, scale) over [w_n(scale), 1] x scale bounds.

    The profile likelihood max_w l(w, scale) is exact for each scale (the
    score is monotone in w), so only the scale needs a numerical search:
    a 50 x 50 lattice picks the starting cell and a bounded Brent search in
    log(scale) refines it. The best point seen anywhere is returned, so the
    result never falls below the lattice maximum.
    """
    make, (s_lo, s_hi) = _family(family)
    z = np.sort(np.abs(_as_data(data)))
    n = z.size

    if not np.any(z):
        prior = make(DEFAULT_LAPLACE_SCALE) if family == "laplace" else make(1.0)
        fit = estimate_weight(prior, z, cap=cap)
        return replace(fit, a_hat=_scale_of(prior), degenerate=True)

    log_s = np.linspace(np.log(s_lo), np.log(s_hi), _LATTICE)
    u = np.linspace(0.0, 1.0, _LATTICE)
    best_ll, best_w, best_ls = -np.inf, None, None
    lattice_ll = np.empty(_LATTICE)
    for i, ls in enumerate(log_s):
        prior = make(float(np.exp(ls)))
        log_r = prior.log_ratio(z)
        w_lo = universal_weight(prior, n) if cap and n >= 2 else 1e-150
        ws = np.exp(np.log(w_lo) * (1.0 - u))
        ll = _mixture_term(log_r, ws)
        k = int(np.argmax(ll))
        lattice_ll[i] = ll[k]
        if ll[k] > best_ll:
            best_ll, best_w, best_ls = float(ll[k]), float(ws[k]), float(ls)

    cache = {}

    def profile(ls):
        ls = float(min(max(ls, log_s[0]), log_s[-1]))
        if ls not in cache:
            prior = make(float(np.exp(ls)))
            log_r = prior.log_ratio(z)
            w, _, _ = _fit_weight(prior, z, log_r, cap)
            cache[ls] = (float(_mixture_term(log_r, w)), w)
        return cache[ls]

    i = int(np.argmax(lattice_ll))
    lo, hi = log_s[max(i - 1, 0)], log_s[min(i + 1, _LATTICE - 1)]
    res = optimize.minimize_scalar(
        lambda ls: -profile(ls)[0], bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-6},
    )
    for ls in (res.x, log_s[i]):
        ll, w = profile(ls)
        if ll >= best_ll:
            best_ll, best_w, best_ls = ll, w, float(min(max(ls, log_s[0]), log_s[-1]))

    scale = float(np.exp(best_ls))
    prior = make(scale)
    w_lo = universal_weight(prior, n) if cap and n >= 2 else 0.0
    w = float(min(max(best_w, w_lo), 1.0))
    log_r = prior.log_ratio(z)
    return MixtureFit(
        w_hat=w,
        threshold=threshold_from_weight(prior, w),
        n=n,
        prior=prior,
        a_hat=scale,
        hit_lower_bound=bool(cap and w <= w_lo * (1 + 1e-9)),
        hit_upper_bound=w >= 1.0,
        loglik=float(_loglik_from_ratio(z, log_r, w)),
    )


def _scale_of(prior):
    if isinstance(prior, Laplace):
        return prior.a
    if isinstance(prior, Gaussian):
        return prior.tau
    return None


def posterior_median(prior: Prior, w: float, z):
    """Coordinatewise posterior median; zero exactly on |z| <= t(w)."""
    z = np.asarray(z, dtype=float)
    x = np.abs(z)
    out = np.zeros_like(x)
    if w <= 0:
        return out if out.ndim else float(out)
    t = threshold_from_weight(prior, w)
    act = x > t
    if np.any(act):
        xa = x[act]
        wp = posterior_weight(prior, w, xa)
        m = prior.median_nonneg(xa, wp)
        if m is None:
            m = _median_by_bisection(prior, xa, wp)
        out[act] = np.clip(m, 0.0, xa)
    out = np.sign(z) * out
    return out if out.ndim else float(out)


def _median_by_bisection(prior, x, wp):
    target = 1.0 / (2.0 * wp)
    lo = np.zeros_like(x)
    hi = x.copy()
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        above = prior._tail_f1_nonneg(mid, x) > target
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
        if np.all(hi - lo <= 1e-13 * np.maximum(hi, 1.0)):
            break
    return 0.5 * (lo + hi)


def posterior_mean(prior: Prior, w: float, z):
    z = np.asarray(z, dtype=float)
    out = posterior_weight(prior, w, z) * prior.mu1(z)
    return out if out.ndim else float(out)


def modified_threshold(t: Union[float, MixtureFit], A: float, n: int) -> float:
    """Inflate t to sqrt(2 (1 + A) log n) once t^2 exceeds 2 log n - 5 log log n."""
    if n < 3:
        raise ValueError("modified threshold needs n >= 3")
    if A < 0:
        raise ValueError("A must be nonnegative")
    if isinstance(t, MixtureFit):
        t = t.threshold
    logn = np.log(n)
    if t * t <= 2.0 * logn - 5.0 * np.log(logn):
        return float(t)
    return float(np.sqrt(2.0 * (1.0 + A) * logn))


def hard(z, t):
    z = np.asarray(z, dtype=float)
    return np.where(np.abs(z) > t, z, 0.0)


def soft(z, t):
    z = np.asarray(z, dtype=float)
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def apply_rule(rule: Union[Rule, str], prior: Prior, w: float, t: float, z):
    rule = Rule(rule)
    if rule is Rule.HARD:
        return hard(z, t)
    if rule is Rule.SOFT:
        return soft(z, t)
    if rule is Rule.MEDIAN:
        return posterior_median(prior, w, z)
    return posterior_mean(prior, w, z)


def _mad(x):
    from .wavelets import mad_sigma

    return mad_sigma(x)


def fit_sequence(
    z,
    prior: Prior,
    estimate_scale: bool = False,
    cap: bool = True,
) -> MixtureFit:
    if estimate_scale:
        if isinstance(prior, Laplace):
            return estimate_weight_scale(z, "laplace", cap)
        if isinstance(prior, Gaussian):
            return estimate_weight_scale(z, "gaussian", cap)
        raise ValueError(f"{type(prior).__name__} has no scale to estimate")
    return estimate_weight(prior, z, cap)


def shrink_with_fit(z, fit: MixtureFit, rule, A: float = 0.0, n: Optional[int] = None):
    """Apply ``rule`` at the fitted (optionally modified) threshold.

    Returns (estimates, threshold used, weight used). When the threshold is
    modified, Bayes rules switch to the weight whose threshold matches it.
    """
    t, w = fit.threshold, fit.w_hat
    if A > 0:
        t_mod = modified_threshold(t, A, fit.n if n is None else n)
        if t_mod != t:
            t, w = t_mod, weight_from_threshold(fit.prior, t_mod)
    return apply_rule(rule, fit.prior, w, t, z), t, w


def ebthresh_sequence(
    data,
    prior: Optional[Prior] = None,
    rule: Union[Rule, str] = Rule.MEDIAN,
    estimate_scale: bool = False,
    sd: Union[float, str] = 1.0,
    cap: bool = True,
    A: float = 0.0,
) -> SequenceResult:
    """Empirical Bayes estimate of a sparse mean vector observed in N(0, sd^2) noise."""
    x = _as_data(data)
    prior = Laplace(DEFAULT_LAPLACE_SCALE) if prior is None else prior
    if isinstance(sd, str):
        if sd != "estimate":
            raise ValueError(f"sd must be a number or 'estimate', got {sd!r}")
        if x.size < 8:
            raise ValueError("too few observations to estimate sd")
        sigma = _mad(x)
    else:
        sigma = float(sd)
        if not (np.isfinite(sigma) and sigma > 0):
            raise ValueError("sd must be positive")
    z = x / sigma
    fit = fit_sequence(z, prior, estimate_scale, cap)
    est, t, w = shrink_with_fit(z, fit, rule, A)
    return SequenceResult(estimates=sigma * est, fit=fit, sigma=sigma, threshold_used=t, weight_used=w)


def empirical_shrink_bound(prior: Prior, weights, z_max: float = 100.0, num: int = 2000) -> float:
    """sup over the grid of z - median(z; w) - t(w) for z in (t(w), z_max]."""
    worst = -np.inf
    for w in np.atleast_1d(weights):
        t = threshold_from_weight(prior, w)
        z = np.linspace(t, z_max, num)[1:]
        worst = max(worst, float(np.max(z - posterior_median(prior, w, z) - t)))
    return worst
