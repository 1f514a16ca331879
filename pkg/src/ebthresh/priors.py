"""Slab densities for the spike-and-slab prior and their posterior functionals.

Each prior describes the nonzero component gamma of

    f_prior(mu) = (1 - w) delta_0(mu) + w gamma(mu)

for a single observation Z ~ N(mu, 1). Everything the estimators need is
expressed through a handful of methods:

``log_ratio(z)``
    log(g(z) / phi(z)) where g = gamma * phi is the marginal density of the
    nonzero component. Working with the ratio keeps the weight algebra
    finite for |z| in the thousands.
``mu1(z)``
    mean of the posterior of mu given z and mu != 0.
``tail_f1(mu, z)``
    posterior upper tail P(mu' > mu | z, mu' != 0).
``log_threshold_odds(t)``
    log(g(t)/phi(t) * (2 F1(0 | t) - 1)), which gives the weight whose
    posterior-median threshold equals t in closed form.
"""

from dataclasses import dataclass
from typing import ClassVar, Union

import numpy as np
from scipy import special

from . import normal
from .normal import LOG_SQRT_2PI, log_mills_ratio, log_phi, mills_ratio

_SMALL_Z = 1e-3
_TAIL_SERIES_U = 35.0


@dataclass(frozen=True)
class Laplace:
    """Double exponential slab with inverse scale ``a``."""

    a: float = 0.5
    conforming: ClassVar[bool] = True
    name: ClassVar[str] = "laplace"

    def __post_init__(self):
        if not (np.isfinite(self.a) and self.a > 0):
            raise ValueError(f"Laplace scale must be positive, got {self.a}")

    def density(self, u):
        u = np.asarray(u, dtype=float)
        return 0.5 * self.a * np.exp(-self.a * np.abs(u))

    def _log_mills_pair(self, z):
        z = np.asarray(z, dtype=float)
        return log_mills_ratio(self.a - z), log_mills_ratio(self.a + z)

    def log_ratio(self, z):
        # g(z) = (a/2) phi(z) [M(a - z) + M(a + z)]
        lm, lp = self._log_mills_pair(z)
        return np.log(0.5 * self.a) + np.logaddexp(lm, lp)

    def mu1(self, z):
        z = np.asarray(z, dtype=float)
        lm, lp = self._log_mills_pair(z)
        return z - self.a * np.tanh(0.5 * (lm - lp))

    def _tail_f1_nonneg(self, mu, z):
        a = self.a
        lm, lp = self._log_mills_pair(z)
        log_s = np.logaddexp(lm, lp)
        out = mu * (z - a) - 0.5 * mu * mu + log_mills_ratio(mu - z + a) - log_s
        return np.minimum(np.exp(out), 1.0)

    def log_threshold_odds(self, t):
        t = np.asarray(t, dtype=float)
        lm, lp = self._log_mills_pair(t)
        with np.errstate(divide="ignore"):
            return np.log(0.5 * self.a) + lm + np.log(-np.expm1(lp - lm))

    def median_nonneg(self, z, wpost):
        """Posterior median for z >= 0 where it is known to be positive."""
        a = self.a
        lm, lp = self._log_mills_pair(z)
        q = np.exp(log_phi(z - a) + np.logaddexp(lm, lp) - np.log(2.0 * wpost))
        q = np.minimum(q, 1.0)
        return z - a - special.ndtri(q)


@dataclass(frozen=True)
class QuasiCauchy:
    """Scale mixture of normals with Cauchy-weight tails.

    mu | theta ~ N(0, 1/theta - 1) with theta ~ Beta(1/2, 1).
    """

    conforming: ClassVar[bool] = True
    name: ClassVar[str] = "cauchy"

    def density(self, u):
        u = np.abs(np.asarray(u, dtype=float))
        small = u <= _TAIL_SERIES_U
        us = np.where(small, u, 0.0)
        direct = 1.0 - us * mills_ratio(us)
        # 1 - u M(u) = u^-2 - 3 u^-4 + 15 u^-6 - 105 u^-8 + 945 u^-10 - ...
        ul = np.where(small, 1.0, u)
        v = 1.0 / (ul * ul)
        series = v * (1.0 + v * (-3.0 + v * (15.0 + v * (-105.0 + v * 945.0))))
        return np.exp(-LOG_SQRT_2PI) * np.where(small, direct, series)

    def log_ratio(self, z):
        z = np.abs(np.asarray(z, dtype=float))
        small = z < _SMALL_Z
        zs = np.where(small, 1.0, z)
        half_sq = 0.5 * zs * zs
        big = half_sq + np.log(-np.expm1(-half_sq)) - 2.0 * np.log(zs)
        z2 = z * z
        taylor = np.log(0.5 + z2 * (1 / 8 + z2 * (1 / 48 + z2 / 384)))
        return np.where(small, taylor, big)

    def marginal(self, z):
        z = np.asarray(z, dtype=float)
        small = np.abs(z) < _SMALL_Z
        zs = np.where(small, 1.0, z)
        direct = -np.expm1(-0.5 * zs * zs) / (zs * zs)
        z2 = z * z
        taylor = 0.5 + z2 * (-1 / 8 + z2 * (1 / 48 - z2 / 384))
        return np.exp(-LOG_SQRT_2PI) * np.where(small, taylor, direct)

    def mu1(self, z):
        z = np.asarray(z, dtype=float)
        small = np.abs(z) < _SMALL_Z
        zs = np.where(small, 1.0, z)
        direct = zs / -np.expm1(-0.5 * zs * zs) - 2.0 / zs
        taylor = z / 2 + z**3 / 24 - z**7 / 5760
        return np.where(small, taylor, direct)

    def _tail_f1_nonneg(self, mu, z):
        z = np.asarray(z, dtype=float)
        mu = np.asarray(mu, dtype=float)
        x = mu - z
        rest = -z + (mu * z - 1.0) * mills_ratio(mu)
        # Phibar(x) - z phi(x) + (mu z - 1) exp(mu z - z^2/2) Phibar(mu),
        # with exp(mu z - z^2/2) phi(mu) = phi(x).
        xp = np.maximum(x, 0.0)
        upper = normal.phi(xp) * (mills_ratio(xp) + rest)
        lower = normal.Phibar(x) + normal.phi(x) * rest
        num = np.where(x >= 0, upper, lower)
        small = np.abs(z) < _SMALL_Z
        zs = np.where(small, 1.0, z)
        out = num / -np.expm1(-0.5 * zs * zs)
        out = np.where(small, self._tail_f1_small_z(mu, z), out)
        return np.clip(out, 0.0, 1.0)

    def _tail_f1_small_z(self, mu, z):
        # Second order in z about the symmetric limit z = 0, for mu >= 0.
        # With p0(u) = 2 [phi(u) - |u| Phibar(|u|)] and A_k = E0[u^k 1{u > mu}],
        # F1(mu | z) = A0 + z A1 + z^2 (A2 - A0 E0[u^2]) / 2 + O(z^3), E0[u^2] = 1/2.
        m = np.asarray(mu, dtype=float)
        pb = normal.Phibar(m)
        ph = normal.phi(m)
        m2 = m * m
        a0 = (1.0 + m2) * pb - m * ph
        a1 = (2.0 / 3.0) * ((1.0 - m2) * ph + m * m2 * pb)
        a2 = 0.5 * ((1.0 + m2 * m2) * pb + m * (1.0 - m2) * ph)
        return a0 + z * a1 + 0.5 * z * z * (a2 - 0.5 * a0)

    def log_threshold_odds(self, t):
        t = np.asarray(t, dtype=float)
        # r(t) (2 F1(0|t) - 1) = exp(t^2/2) [erf(t/sqrt2) - 2 t phi(t)] / t^2
        small = t < 0.05
        ts = np.where(small, 1.0, t)
        bracket = special.erf(ts / np.sqrt(2.0)) - 2.0 * ts * normal.phi(ts)
        with np.errstate(divide="ignore"):
            direct = 0.5 * ts * ts + np.log(bracket) - 2.0 * np.log(ts)
            # series: sqrt(2/pi) (t^3/3 - t^5/10 + t^7/56) e^{t^2/2} / t^2
            t2 = t * t
            ser = np.sqrt(2.0 / np.pi) * t * (1 / 3 - t2 / 10 + t2 * t2 / 56)
            taylor = 0.5 * t2 + np.log(ser)
        return np.where(small, taylor, direct)

    def median_nonneg(self, z, wpost):
        return None


@dataclass(frozen=True)
class Gaussian:
    """Normal slab N(0, tau^2).

    Violates the bounded log-derivative tail condition, so the posterior
    median does not have bounded shrinkage. Kept for comparison.
    """

    tau: float = 1.0
    conforming: ClassVar[bool] = False
    name: ClassVar[str] = "gaussian"

    def __post_init__(self):
        if not (np.isfinite(self.tau) and self.tau > 0):
            raise ValueError(f"Gaussian tau must be positive, got {self.tau}")

    @property
    def shrink(self):
        return self.tau**2 / (1.0 + self.tau**2)

    def density(self, u):
        u = np.asarray(u, dtype=float)
        return np.exp(log_phi(u / self.tau)) / self.tau

    def log_ratio(self, z):
        z = np.asarray(z, dtype=float)
        return -0.5 * np.log1p(self.tau**2) + 0.5 * self.shrink * z * z

    def mu1(self, z):
        return self.shrink * np.asarray(z, dtype=float)

    def _tail_f1_nonneg(self, mu, z):
        lam = self.shrink
        return normal.Phibar((mu - lam * z) / np.sqrt(lam))

    def log_threshold_odds(self, t):
        t = np.asarray(t, dtype=float)
        lam = self.shrink
        with np.errstate(divide="ignore"):
            return self.log_ratio(t) + np.log(special.erf(np.sqrt(lam) * t / np.sqrt(2.0)))

    def median_nonneg(self, z, wpost):
        lam = self.shrink
        q = np.minimum(1.0 / (2.0 * wpost), 1.0)
        return lam * z - np.sqrt(lam) * special.ndtri(q)


Prior = Union[Laplace, QuasiCauchy, Gaussian]


def make_prior(name: str, scale: float | None = None) -> Prior:
    """Build a prior from its CLI name. ``scale`` is a (Laplace) or tau (Gaussian)."""
    name = name.lower()
    if name == "laplace":
        return Laplace(0.5 if scale is None else scale)
    if name in ("cauchy", "quasicauchy", "quasi-cauchy"):
        return QuasiCauchy()
    if name in ("gaussian", "normal"):
        return Gaussian(1.0 if scale is None else scale)
    raise ValueError(f"unknown prior {name!r}")


def gamma_density(prior: Prior, u):
    return prior.density(u)


def marginal_density(prior: Prior, z):
    """g(z) = (gamma * phi)(z)."""
    if isinstance(prior, QuasiCauchy):
        return prior.marginal(z)
    return np.exp(log_phi(z) + prior.log_ratio(z))


def mu1(prior: Prior, z):
    return prior.mu1(z)


def tail_f1(prior: Prior, mu, z):
    """P(mu' > mu | Z = z, mu' != 0).

    Negative ``mu`` is handled through 1 - F1(-mu | -z), which keeps the
    symmetry exact.
    """
    mu, z = np.broadcast_arrays(np.asarray(mu, dtype=float), np.asarray(z, dtype=float))
    neg = mu < 0
    out = prior._tail_f1_nonneg(np.abs(mu), np.where(neg, -z, z))
    out = np.where(neg, 1.0 - out, out)
    return out if out.ndim else float(out)


def posterior_weight(prior: Prior, w, z):
    """P(mu != 0 | Z = z) at prior weight w."""
    w = np.asarray(w, dtype=float)
    with np.errstate(divide="ignore"):
        logit = np.log(w) - np.log1p(-w) + prior.log_ratio(z)
    return special.expit(logit)


def beta_terms(log_r, w):
    """(g - phi) / ((1 - w) phi + w g) from precomputed log(g/phi)."""
    log_r = np.asarray(log_r, dtype=float)
    w = np.asarray(w, dtype=float)
    big = log_r > 0
    inv = np.exp(-np.where(big, log_r, 0.0))
    r = np.exp(np.where(big, 0.0, log_r))
    upper = -np.expm1(-np.where(big, log_r, 0.0)) / (w + (1.0 - w) * inv)
    lower = np.expm1(np.where(big, 0.0, log_r)) / (1.0 - w + w * r)
    return np.where(big, upper, lower)


def beta(prior: Prior, z, w):
    return beta_terms(prior.log_ratio(z), w)
