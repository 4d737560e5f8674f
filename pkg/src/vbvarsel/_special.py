"""Digamma and log-gamma for positive real arguments.

Both use upward recurrence to shift the argument to at least ``_SHIFT`` and
then the Bernoulli-number asymptotic series, which at that point is
accurate to ~1e-13 relative.  Non-positive arguments return NaN.
"""

import math

import numpy as np

_SHIFT = 6.0
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# B_2n / (2n), n = 1..7, for the digamma tail
_PSI_COEF = (1 / 12, -1 / 120, 1 / 252, -1 / 240, 1 / 132, -691 / 32760, 1 / 12)
# B_2n / (2n (2n - 1)), n = 1..7, for the Stirling tail
_LGAMMA_COEF = (1 / 12, -1 / 360, 1 / 1260, -1 / 1680, 1 / 1188, -691 / 360360, 1 / 156)


def _prepare(x):
    x = np.asarray(x, dtype=np.float64)
    bad = ~(x > 0)
    return x, np.where(bad, 1.0, x), bad


def digamma(x):
    """Logarithmic derivative of the gamma function, elementwise."""
    x_in, x, bad = _prepare(x)
    acc = np.zeros_like(x)
    x = x.copy()
    small = x < _SHIFT
    while np.any(small):
        acc -= np.where(small, 1.0 / x, 0.0)
        x = np.where(small, x + 1.0, x)
        small = x < _SHIFT
    inv2 = 1.0 / (x * x)
    tail = 0.0
    for coef in reversed(_PSI_COEF):
        tail = (tail + coef) * inv2
    out = np.log(x) - 0.5 / x - tail + acc
    out = np.where(bad, np.nan, out)
    return out[()] if x_in.ndim == 0 else out


def gammaln(x):
    """Natural log of the gamma function, elementwise."""
    x_in, x, bad = _prepare(x)
    prod = np.ones_like(x)
    x = x.copy()
    small = x < _SHIFT
    while np.any(small):
        prod = np.where(small, prod * x, prod)
        x = np.where(small, x + 1.0, x)
        small = x < _SHIFT
    inv = 1.0 / x
    inv2 = inv * inv
    tail = 0.0
    for coef in reversed(_LGAMMA_COEF):
        tail = tail * inv2 + coef
    tail *= inv
    out = (x - 0.5) * np.log(x) - x + _HALF_LOG_2PI + tail - np.log(prod)
    out = np.where(bad, np.nan, out)
    return out[()] if x_in.ndim == 0 else out
