"""Per-signal statistics: excess kurtosis, skewness, RMS, absolute difference."""
import numpy as np

from ..exceptions import ArgumentError


def _standardized(x, min_n, name):
    x = np.asarray(x, dtype=np.float64).ravel()
    n = x.size
    if n < min_n:
        raise ArgumentError(f"{name} needs at least {min_n} values, got {n}")
    d = x - x.mean()
    s = np.sqrt(np.sum(d * d) / (n - 1))
    if not s > 0:
        raise ArgumentError(f"{name} undefined for zero standard deviation")
    return n, d / s


def kurtosis(x):
    """Bias-corrected sample excess kurtosis (sample std with n-1)."""
    n, z = _standardized(x, 4, "kurtosis")
    head = n * (n + 1) / ((n - 1) * (n - 2) * (n - 3))
    tail = 3.0 * (n - 1) ** 2 / ((n - 2) * (n - 3))
    return float(head * np.sum(z ** 4) - tail)


def skewness(x):
    """Adjusted Fisher-Pearson sample skewness, ``n/((n-1)(n-2)) sum z^3``."""
    n, z = _standardized(x, 3, "skewness")
    return float(n / ((n - 1) * (n - 2)) * np.sum(z ** 3))


def rms(x):
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size == 0:
        raise ArgumentError("rms of an empty vector")
    return float(np.sqrt(np.mean(x * x)))


def abs_diff(x, y):
    """Sum of element-wise absolute differences."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size != y.size:
        raise ArgumentError(f"length mismatch: {x.size} vs {y.size}")
    if x.size == 0:
        raise ArgumentError("abs_diff of empty vectors")
    return float(np.sum(np.abs(x - y)))
