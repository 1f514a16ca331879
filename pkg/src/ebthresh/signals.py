"""The four standard inhomogeneous test functions, sampled at t_i = i/n."""

import numpy as np

_POS = np.array([0.1, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81])
_BLOCKS_HGT = np.array([4, -5, 3, -4, 5, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2])
_BUMPS_HGT = np.array([4, 5, 3, 4, 5, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2])
_BUMPS_WTH = np.array([0.005, 0.005, 0.006, 0.01, 0.01, 0.03, 0.01, 0.01, 0.005, 0.008, 0.005])

SIGNAL_NAMES = ("bumps", "blocks", "doppler", "heavisine")


def grid(n: int) -> np.ndarray:
    return np.arange(1, n + 1) / n


def blocks(t):
    t = np.asarray(t, dtype=float)
    # right-continuous steps, so a grid point on a jump does not split it in two
    return (_BLOCKS_HGT * (t[:, None] >= _POS)).sum(axis=1)


def bumps(t):
    t = np.asarray(t, dtype=float)
    return (_BUMPS_HGT * (1 + np.abs((t[:, None] - _POS) / _BUMPS_WTH)) ** -4).sum(axis=1)


def heavisine(t):
    t = np.asarray(t, dtype=float)
    return 4 * np.sin(4 * np.pi * t) - np.sign(t - 0.3) - np.sign(0.72 - t)


def doppler(t):
    t = np.asarray(t, dtype=float)
    return np.sqrt(t * (1 - t)) * np.sin(2 * np.pi * 1.05 / (t + 0.05))


_RAW = {"blocks": blocks, "bumps": bumps, "heavisine": heavisine, "doppler": doppler}


def raw_signal(name: str, n: int) -> np.ndarray:
    try:
        f = _RAW[name]
    except KeyError:
        raise ValueError(f"unknown test signal {name!r}") from None
    if n < 16:
        raise ValueError("test signals need n >= 16")
    return f(grid(n))


def test_function(name: str, n: int = 1024) -> np.ndarray:
    """Test signal rescaled to unit sample standard deviation."""
    f = raw_signal(name, n)
    return f / np.std(f, ddof=1)
test_function.__test__ = False
