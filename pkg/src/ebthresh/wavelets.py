"""Periodic orthonormal wavelet transforms: decimated and translation invariant.

Filters are applied by circular correlation with the filter origin at index
0; the decimated transform keeps the even positions. The nondecimated
transform keeps every position, so at level j its plane interleaves the
decimated coefficients of all 2^(J-j) circular shifts of the signal.
"""

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Dict

import numpy as np

# Least asymmetric (symmlet) lowpass filters from the standard published
# tables, named by filter length as in the S literature ("s8" = 8 taps).
_SYMMLETS = {
    "sym8": [
        0.0322231006040427, -0.012603967262037833, -0.09921954357684722,
        0.29785779560527736, 0.8037387518059161, 0.49761866763201545,
        -0.02963552764599851, -0.07576571478927333,
    ],
    "sym16": [
        0.0018899503327594609, -0.0003029205147213668, -0.01495225833704823,
        0.003808752013890615, 0.049137179673607506, -0.027219029917056003,
        -0.05194583810770904, 0.3644418948353314, 0.7771857517005235,
        0.4813596512583722, -0.061273359067658524, -0.1432942383508097,
        0.007607487324917605, 0.03169508781149298, -0.0005421323317911481,
        -0.0033824159510061256,
    ],
}

MAD_CONSTANT = 0.6745


class DegenerateNoiseError(ValueError):
    pass


@dataclass(frozen=True)
class FilterBank:
    name: str
    lowpass: np.ndarray = field(repr=False)
    highpass: np.ndarray = field(repr=False)

    @classmethod
    def from_lowpass(cls, name, h):
        h = np.asarray(h, dtype=float)
        k = np.arange(h.size)
        g = (-1.0) ** k * h[::-1]
        return cls(name, h, g)

    def __len__(self):
        return self.lowpass.size


def _root_groups(p: int):
    """Roots in z of the degree p-1 binomial polynomial, as conjugate groups.

    Each root y of sum_k C(p-1+k, k) y^k (y = sin^2(w/2)) gives a reciprocal
    pair z, 1/z; the group holds the (inside, outside) pairs for y and its
    conjugate so that any choice per group yields a real filter.
    """
    coeffs = [comb(p - 1 + k, k) for k in range(p)]
    ys = list(np.roots(coeffs[::-1]))
    groups = []
    while ys:
        y = ys.pop(0)
        members = [y]
        if abs(y.imag) > 1e-10:
            j = int(np.argmin([abs(v - np.conj(y)) for v in ys]))
            members.append(ys.pop(j))
        pairs = []
        for v in members:
            c = 2.0 - 4.0 * v
            root = np.sqrt(c * c - 4.0 + 0j)
            z1, z2 = (c + root) / 2.0, (c - root) / 2.0
            pairs.append((z1, z2) if abs(z1) < 1.0 else (z2, z1))
        groups.append(pairs)
    return groups


def _from_roots(p, zs):
    h = np.array([1.0 + 0j])
    for z in zs:
        h = np.convolve(h, [1.0, -z])
    for _ in range(p):
        h = np.convolve(h, [1.0, 1.0])
    h = np.real(h)
    return h * np.sqrt(2.0) / h.sum()


def _daubechies(p: int) -> np.ndarray:
    """Extremal phase Daubechies lowpass filter with p vanishing moments.

    Spectral factorisation keeping every root inside the unit circle.
    """
    if p == 1:
        return np.array([1.0, 1.0]) / np.sqrt(2.0)
    return _from_roots(p, [pair[0] for g in _root_groups(p) for pair in g])


def _symmlet(name: str) -> np.ndarray:
    """Symmlet rebuilt by spectral factorisation at full precision.

    The published table only fixes which roots go inside the unit circle;
    the candidate closest to it is exactly orthonormal, unlike the rounded
    table itself.
    """
    ref = np.asarray(_SYMMLETS[name])
    p = ref.size // 2
    groups = _root_groups(p)
    best, best_err = None, np.inf
    for choice in itertools.product((0, 1), repeat=len(groups)):
        zs = [pair[c] for g, c in zip(groups, choice) for pair in g]
        h = _from_roots(p, zs)
        for cand in (h, h[::-1]):
            err = np.max(np.abs(cand - ref))
            if err < best_err:
                best, best_err = cand, err
    if best_err > 1e-10:
        raise RuntimeError(f"could not reproduce {name} from its roots")
    return best


FILTER_NAMES = ("haar",) + tuple(f"db{p}" for p in range(1, 11)) + tuple(_SYMMLETS)


@lru_cache(maxsize=None)
def get_filter(name: str) -> FilterBank:
    key = name.lower()
    if key == "haar":
        return FilterBank.from_lowpass("haar", _daubechies(1))
    if key in _SYMMLETS:
        return FilterBank.from_lowpass(key, _symmlet(key))
    if key.startswith("daub") and key[4:].isdigit():
        # "daubN" names the filter length N, as in the older S literature
        taps = int(key[4:])
        if taps % 2 or not 2 <= taps <= 20:
            raise ValueError(f"unknown wavelet {name!r}")
        key = f"db{taps // 2}"
    if key.startswith("db") and key[2:].isdigit() and 1 <= int(key[2:]) <= 10:
        return FilterBank.from_lowpass(key, _daubechies(int(key[2:])))
    raise ValueError(f"unknown wavelet {name!r}")


@dataclass
class Pyramid:
    detail: Dict[int, np.ndarray]
    scaling: np.ndarray
    n: int
    filter: FilterBank
    coarsest: int

    @property
    def J(self):
        return _log2(self.n)

    def levels(self):
        return range(self.coarsest, self.J)

    def flat(self) -> np.ndarray:
        return np.concatenate([self.scaling] + [self.detail[j] for j in self.levels()])

    def copy(self):
        return type(self)({j: d.copy() for j, d in self.detail.items()}, self.scaling.copy(),
                          self.n, self.filter, self.coarsest)


@dataclass
class TIPyramid(Pyramid):
    pass


def _log2(n: int) -> int:
    J = int(n).bit_length() - 1
    if n < 1 or 1 << J != n:
        raise ValueError(f"length must be a power of two, got {n}")
    return J


def _check(signal, coarsest):
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1:
        raise ValueError("signal must be one-dimensional")
    J = _log2(x.size)
    if not 0 <= coarsest < J:
        raise ValueError(f"coarsest level must satisfy 0 <= L < J = {J}, got {coarsest}")
    return x, J


def _correlate(c, f, step=1):
    # out[i] = sum_k f[k] c[(i + step*k) mod len(c)]
    out = np.zeros_like(c)
    for k, fk in enumerate(f):
        out += fk * np.roll(c, -step * k)
    return out


def _convolve(c, f, step=1):
    # out[i] = sum_k f[k] c[(i - step*k) mod len(c)]
    out = np.zeros_like(c)
    for k, fk in enumerate(f):
        out += fk * np.roll(c, step * k)
    return out


def _as_filter(wavelet):
    return wavelet if isinstance(wavelet, FilterBank) else get_filter(wavelet)


def dwt_periodic(signal, wavelet="sym8", coarsest: int = 0) -> Pyramid:
    fb = _as_filter(wavelet)
    x, J = _check(signal, coarsest)
    c = x.copy()
    detail = {}
    for j in range(J - 1, coarsest - 1, -1):
        detail[j] = _correlate(c, fb.highpass)[::2]
        c = _correlate(c, fb.lowpass)[::2]
    return Pyramid(detail, c, x.size, fb, coarsest)


def idwt_periodic(pyr: Pyramid) -> np.ndarray:
    fb = pyr.filter
    c = np.asarray(pyr.scaling, dtype=float)
    if c.size != 1 << pyr.coarsest:
        raise ValueError("scaling coefficients do not match the coarsest level")
    for j in range(pyr.coarsest, pyr.J):
        d = np.asarray(pyr.detail[j], dtype=float)
        if d.size != c.size:
            raise ValueError(f"level {j} has {d.size} coefficients, expected {c.size}")
        uc = np.zeros(2 * c.size)
        ud = np.zeros(2 * c.size)
        uc[::2] = c
        ud[::2] = d
        c = _convolve(uc, fb.lowpass) + _convolve(ud, fb.highpass)
    return c


def ti_dwt(signal, wavelet="sym8", coarsest: int = 0) -> TIPyramid:
    fb = _as_filter(wavelet)
    x, J = _check(signal, coarsest)
    c = x.copy()
    detail = {}
    for s, j in enumerate(range(J - 1, coarsest - 1, -1)):
        step = 1 << s
        detail[j] = _correlate(c, fb.highpass, step)
        c = _correlate(c, fb.lowpass, step)
    return TIPyramid(detail, c, x.size, fb, coarsest)


def ti_idwt_average_basis(pyr: TIPyramid) -> np.ndarray:
    """Mean over all 2^(J-L) time origins of the ordinary reconstruction."""
    fb = pyr.filter
    J = pyr.J
    c = np.asarray(pyr.scaling, dtype=float)
    if c.size != pyr.n:
        raise ValueError("scaling plane must have one coefficient per sample")
    for j in range(pyr.coarsest, J):
        d = np.asarray(pyr.detail[j], dtype=float)
        if d.size != pyr.n:
            raise ValueError(f"level {j} plane has {d.size} coefficients, expected {pyr.n}")
        step = 1 << (J - 1 - j)
        c = 0.5 * (_convolve(c, fb.lowpass, step) + _convolve(d, fb.highpass, step))
    return c


def ti_stride(pyr: TIPyramid, level: int, shift: int) -> np.ndarray:
    """Decimated level coefficients of the signal rotated left by ``shift``."""
    stride = 1 << (pyr.J - level)
    return pyr.detail[level][shift % stride::stride]


def mad_sigma(coeffs) -> float:
    """Median absolute value divided by 0.6745."""
    x = np.asarray(coeffs, dtype=float).ravel()
    if x.size < 2:
        raise ValueError("need at least two coefficients")
    s = float(np.median(np.abs(x))) / MAD_CONSTANT
    if not s > 0:
        raise DegenerateNoiseError("degenerate noise estimate")
    return s
