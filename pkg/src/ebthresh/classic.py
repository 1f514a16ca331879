"""Baseline threshold selectors for a sequence observed with unit noise."""

from dataclasses import dataclass

import numpy as np

from .normal import upper_quantile


@dataclass(frozen=True)
class FdrParams:
    q: float = 0.05

    def __post_init__(self):
        if not (0 < self.q <= 0.5):
            raise ValueError(f"FDR q must lie in (0, 1/2], got {self.q}")


@dataclass(frozen=True)
class SureResult:
    t_hat: float
    u_min: float


def universal_threshold(n: int) -> float:
    if n < 2:
        raise ValueError("n must be at least 2")
    return float(np.sqrt(2.0 * np.log(n)))


def sure_risk(z, t) -> np.ndarray:
    """Stein's unbiased estimate of the soft-thresholding risk at t."""
    z2 = np.asarray(z, dtype=float) ** 2
    t2 = np.atleast_1d(np.asarray(t, dtype=float)) ** 2
    u = z2.size + np.minimum(z2, t2[:, None]).sum(axis=1) - 2.0 * (z2 <= t2[:, None]).sum(axis=1)
    return u if np.ndim(t) else u[0]


def sure_threshold(z) -> SureResult:
    """Minimise the SURE criterion over [0, sqrt(2 log n)].

    The criterion rises between the breakpoints |z_k| and drops at each of
    them, so the minimum is attained on {0} U {|z_k| <= cap} U {cap}.
    """
    z = np.asarray(z, dtype=float).ravel()
    if z.size == 0:
        raise ValueError("empty sequence")
    n = z.size
    cap = np.sqrt(2.0 * np.log(n)) if n > 1 else 0.0
    a = np.sort(np.abs(z))
    cand = np.concatenate(([0.0], a[a <= cap], [cap]))
    a2 = a * a
    csum = np.concatenate(([0.0], np.cumsum(a2)))
    k = np.searchsorted(a, cand, side="right")
    u = n + csum[k] + (n - k) * cand * cand - 2.0 * k
    i = int(np.argmin(u))
    return SureResult(t_hat=float(cand[i]), u_min=float(u[i]))


def fdr_threshold(z, params: FdrParams = FdrParams()) -> float:
    """Largest order statistic crossing the boundary z(q/2 * k/n).

    If no order statistic crosses, the returned threshold exceeds max|z| so
    that every coefficient is set to zero.
    """
    z = np.asarray(z, dtype=float).ravel()
    if z.size == 0:
        raise ValueError("empty sequence")
    n = z.size
    a = np.sort(np.abs(z))[::-1]
    k = np.arange(1, n + 1)
    bound = upper_quantile(params.q / 2.0 * k / n)
    hits = np.nonzero(a >= bound)[0]
    if hits.size == 0:
        return float(a[0] + 1.0)
    return float(bound[hits[-1]])
