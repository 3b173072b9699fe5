"""Deterministic fixture series shared by the golden-file generator and the
tests that consume the frozen oracle values.

These are plain numpy constructions on purpose: they must not depend on any
code under test.
"""

import numpy as np

# Diagnostic lags fixed per fixture so the frozen statistics are unambiguous.
LJUNG_BOX_LAG = 10
ARCH_LM_LAG = 5


def _rng(seed):
    return np.random.default_rng(seed)


def random_walk():
    steps = _rng(101).standard_normal(300)
    return 100.0 + np.cumsum(steps)


def ar1():
    e = _rng(202).standard_normal(400)
    y = np.empty(400)
    y[0] = e[0]
    for t in range(1, 400):
        y[t] = 0.7 * y[t - 1] + e[t]
    return y


def trending():
    noise = _rng(303).standard_normal(250)
    return 0.5 * np.arange(250) + 5.0 * noise


def heteroscedastic():
    g = _rng(404)
    z = g.standard_normal(500)
    y = np.empty(500)
    h = 1.0
    e_prev = 0.0
    for t in range(500):
        h = 0.2 + 0.3 * e_prev**2 + 0.5 * h
        e_prev = z[t] * np.sqrt(h)
        y[t] = e_prev
    return y


def noisy_sine():
    noise = _rng(505).standard_normal(350)
    return 50.0 + 2.0 * np.sin(0.3 * np.arange(350)) + 0.5 * noise


FIXTURES = {
    "random_walk": random_walk,
    "ar1": ar1,
    "trending": trending,
    "heteroscedastic": heteroscedastic,
    "noisy_sine": noisy_sine,
}


def adf_lag(n):
    """Fixed ADF lag rule shared with the implementation default."""
    return int(np.floor((n - 1) ** (1.0 / 3.0)))


def kpss_lag(n):
    """Fixed KPSS bandwidth rule shared with the implementation."""
    return int(np.floor(4.0 * (n / 100.0) ** 0.25))
