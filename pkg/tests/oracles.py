"""Independent numeric oracles used by the test suite.

These deliberately avoid the implementation's own code paths: the Marcum and
Gaussian-Q oracles integrate the defining integrals with scipy's adaptive
quadrature (plus arbitrary-precision mpmath spot checks), and the Bessel
oracle uses the cosine integral representation.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special


def marcum_q_quad(a: float, b: float) -> float:
    """Q(a, b) by adaptive quadrature of the (scaled) defining integral."""
    if b == 0.0:
        return 1.0
    if a == 0.0:
        return math.exp(-b * b / 2.0)

    def integrand(u):
        return u * np.exp(-((u - a) ** 2) / 2.0) * special.i0e(u * a)

    value, _ = integrate.quad(integrand, b, np.inf, epsabs=1e-13, epsrel=1e-12, limit=300)
    return min(max(value, 0.0), 1.0)


def marcum_q_mpmath(a: float, b: float, dps: int = 25) -> float:
    """Arbitrary-precision quadrature of the raw defining integral."""
    import mpmath as mp

    with mp.workdps(dps):
        if b == 0:
            return 1.0
        if a == 0:
            return float(mp.e ** (-mp.mpf(b) ** 2 / 2))
        f = lambda u: u * mp.exp(-(u * u + a * a) / 2) * mp.besseli(0, u * a)
        hi = max(a, b) + 40.0
        points = [b, max(a, b), hi] if a > b else [b, hi]
        return float(mp.quad(f, points))


def gaussian_q_quad(x: float) -> float:
    value, _ = integrate.quad(
        lambda u: math.exp(-u * u / 2.0) / math.sqrt(2.0 * math.pi),
        x, np.inf, epsabs=1e-14, epsrel=1e-13, limit=200,
    )
    return value


def bessel_i0_quad(x: float) -> float:
    """I0(x) via (1/pi) integral_0^pi exp(x cos t) dt (x below overflow)."""
    value, _ = integrate.quad(
        lambda t: math.exp(x * math.cos(t)) / math.pi, 0.0, math.pi,
        epsabs=1e-13, epsrel=1e-13, limit=200,
    )
    return value


def llr_mean_quad(var0: float, var1: float) -> float:
    """E_H0 of the scalar Gaussian log-likelihood ratio, by quadrature."""

    def integrand(x):
        llr = 0.5 * x * x * (1.0 / var0 - 1.0 / var1) + 0.5 * math.log(var0 / var1)
        return llr * math.exp(-x * x / (2.0 * var0)) / math.sqrt(2.0 * math.pi * var0)

    value, _ = integrate.quad(integrand, -np.inf, np.inf, epsabs=1e-12, limit=200)
    return value
