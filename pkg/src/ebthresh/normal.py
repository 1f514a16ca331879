"""Standard normal density, tails and Mills ratio, with log-space variants.

All functions accept scalars or arrays and broadcast like numpy ufuncs.
"""

import numpy as np
from scipy import special

LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)
_SQRT_HALF_PI = np.sqrt(0.5 * np.pi)
_SQRT2 = np.sqrt(2.0)


def phi(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x - LOG_SQRT_2PI)


def log_phi(x):
    x = np.asarray(x, dtype=float)
    return -0.5 * x * x - LOG_SQRT_2PI


def Phi(x):
    return special.ndtr(x)


def Phibar(x):
    """Upper tail 1 - Phi(x), accurate for large positive x."""
    return special.ndtr(-np.asarray(x, dtype=float))


def log_Phibar(x):
    return special.log_ndtr(-np.asarray(x, dtype=float))


def mills_ratio(x):
    """Phibar(x) / phi(x).

    Evaluated through the scaled complementary error function so that it
    stays finite and accurate far into the upper tail. Overflows to inf for
    x below about -37.5; use :func:`log_mills_ratio` there.
    """
    x = np.asarray(x, dtype=float)
    return _SQRT_HALF_PI * special.erfcx(x / _SQRT2)


def log_mills_ratio(x):
    """log(Phibar(x) / phi(x)), finite for every finite x."""
    x = np.asarray(x, dtype=float)
    pos = np.log(_SQRT_HALF_PI * special.erfcx(np.maximum(x, 0.0) / _SQRT2))
    neg = special.log_ndtr(-np.minimum(x, 0.0)) - log_phi(np.minimum(x, 0.0))
    return np.where(x >= 0, pos, neg)


def upper_quantile(p):
    """z(p): the point with upper-tail probability p."""
    return -special.ndtri(p)
