"""Compactly supported test functions for transform runs."""

import numpy as np

from .errors import ConfigError


def bump(center=0.0, width=1.0, support_radius=4.0):
    """Gaussian bump under a C^2 polynomial window.

    f(x) = exp(-((x-c)/width)^2) * (1 - u^2)^3 for u = (x-c)/radius
    inside |u| < 1, zero outside.  Returns (f, (lo, hi)).
    """
    if width <= 0 or support_radius <= 0:
        raise ConfigError("width and support_radius must be positive")

    def f(x):
        x = np.asarray(x, dtype=float)
        u = (x - center) / support_radius
        win = np.where(np.abs(u) < 1.0, (1.0 - u ** 2) ** 3, 0.0)
        return np.exp(-((x - center) / width) ** 2) * win

    return f, (center - support_radius, center + support_radius)


def indicator(lo, hi):
    """Sharp indicator of [lo, hi] (for step-function transform tests)."""
    if hi <= lo:
        raise ConfigError("need lo < hi")

    def f(x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= lo) & (x <= hi), 1.0, 0.0)

    return f, (lo, hi)


def make_profile(kind, center=0.0, width=1.0, support_radius=4.0):
    if kind == "bump":
        return bump(center, width, support_radius)
    if kind == "indicator":
        return indicator(center - width / 2.0, center + width / 2.0)
    raise ConfigError(f"unknown test function kind: {kind!r}")
