"""Detection-theory special functions: Gaussian Q, modified Bessel I0, Marcum Q.

The Marcum function here is the first-order one,

    Q(a, b) = int_b^inf du u exp(-(u^2 + a^2)/2) I0(u a),

the exceedance probability of a Rice envelope.  Two evaluation branches are
used: a windowed Poisson-mixture series for moderate arguments, and an
exponentially scaled Bessel series once a*b grows (the plain series would need
ever more terms and e^{-ab} headroom).  Both branches are validated against
direct quadrature of the defining integral.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as _sp

from .scenario import ScenarioError

#: Branch switch for marcum_q: windowed series below, scaled Bessel series above.
MARCUM_SERIES_LIMIT = 30.0


class DomainError(ScenarioError):
    """An argument lies outside a special function's domain."""


def gaussian_q(x):
    """Complementary standard normal CDF, Q(x) = P(Z > x)."""
    x = np.asarray(x, dtype=float)
    out = 0.5 * _sp.erfc(x / math.sqrt(2.0))
    return float(out) if out.ndim == 0 else out


def gaussian_q_inv(p):
    """Inverse of gaussian_q on (0, 1)."""
    arr = np.asarray(p, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise DomainError(f"gaussian_q_inv requires p in (0,1) (got {p!r})")
    out = -_sp.ndtri(arr)
    return float(out) if out.ndim == 0 else out


def _i0e_series(x: float) -> float:
    # Power series sum (x^2/4)^k / (k!)^2, then scale by e^{-x}; fine for x <= 20.
    t = x * x / 4.0
    term = 1.0
    acc = 1.0
    for k in range(1, 200):
        term *= t / (k * k)
        acc += term
        if term < 1e-18 * acc:
            break
    return acc * math.exp(-x)


def _i0e_asymptotic(x: float) -> float:
    # e^{-x} I0(x) ~ (2 pi x)^{-1/2} sum_k ((2k-1)!!)^2 / (k! (8x)^k); the terms
    # shrink until k ~ x, far past the ~1e-16 floor reached here for x > 20.
    acc = 1.0
    term = 1.0
    for k in range(1, 40):
        term *= (2 * k - 1) ** 2 / (8.0 * k * x)
        acc += term
        if term < 1e-18 * acc:
            break
    return acc / math.sqrt(2.0 * math.pi * x)


def bessel_i0e(x: float) -> float:
    """Exponentially scaled modified Bessel function, e^{-|x|} I0(x)."""
    ax = abs(float(x))
    return _i0e_series(ax) if ax <= 20.0 else _i0e_asymptotic(ax)


def bessel_i0(x: float) -> float:
    """Zeroth-order modified Bessel function of the first kind.

    Overflows to inf near |x| > 709, as the function itself does in doubles;
    use :func:`bessel_i0e` when a scaled value is needed.
    """
    ax = abs(float(x))
    if ax > 709.0:
        return math.inf
    return bessel_i0e(ax) * math.exp(ax)


def _marcum_window_series(a: float, b: float) -> float:
    # Q(a,b) = sum_k Pois(k; a^2/2) * P(Erlang_{k+1} > b^2/2).  The Poisson
    # weights are summed over a +/- 12 sigma window around their mode so the
    # same code covers a^2/2 from 0 to well past the e^{-745} underflow line.
    x = a * a / 2.0
    y = b * b / 2.0
    half_width = 12.0 * math.sqrt(x) + 25.0
    k_lo = max(0, int(math.floor(x - half_width)))
    k_hi = int(math.ceil(x + half_width))
    ks = np.arange(k_lo, k_hi + 1, dtype=float)
    log_pois = ks * math.log(x) - x - _sp.gammaln(ks + 1.0)
    weights = np.exp(log_pois)
    survival = _sp.gammaincc(ks + 1.0, y)
    return float(np.clip(np.sum(weights * survival), 0.0, 1.0))


def _marcum_bessel_scaled(a: float, b: float) -> float:
    # For b >= a:  Q = e^{-(a-b)^2/2} sum_{k>=0} (a/b)^k [e^{-ab} I_k(ab)]
    # For b <  a:  1 - Q = e^{-(a-b)^2/2} sum_{k>=1} (b/a)^k [e^{-ab} I_k(ab)]
    # The scaled Bessel factors decay like exp(-k^2/2ab), so the term count is
    # O(sqrt(ab)) even when the geometric ratio is close to one.
    z = a * b
    r = a / b if b >= a else b / a
    if r <= 0.95:
        n_terms = int(math.log(1e-18) / math.log(r)) + 10
    else:
        n_terms = int(math.sqrt(83.0 * z)) + 20
    ks = np.arange(0, n_terms + 1, dtype=float)
    scaled = np.exp(ks * math.log(r)) * _sp.ive(ks, z)
    prefactor = math.exp(-((a - b) ** 2) / 2.0)
    if b >= a:
        return float(np.clip(prefactor * np.sum(scaled), 0.0, 1.0))
    return float(np.clip(1.0 - prefactor * (np.sum(scaled) - scaled[0]), 0.0, 1.0))


def _marcum_q_scalar(a: float, b: float) -> float:
    if not (a >= 0.0 and b >= 0.0) or math.isnan(a) or math.isnan(b):
        raise DomainError(f"marcum_q requires a, b >= 0 (got a={a!r}, b={b!r})")
    if b == 0.0:
        return 1.0
    if a == 0.0:
        return math.exp(-b * b / 2.0)
    if a * b <= MARCUM_SERIES_LIMIT:
        return _marcum_window_series(a, b)
    return _marcum_bessel_scaled(a, b)


def marcum_q(a, b):
    """First-order Marcum Q function, broadcast over either argument."""
    if np.ndim(a) == 0 and np.ndim(b) == 0:
        return _marcum_q_scalar(float(a), float(b))
    a_arr, b_arr = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
    out = np.empty(a_arr.shape, dtype=float)
    for idx in np.ndindex(a_arr.shape):
        out[idx] = _marcum_q_scalar(float(a_arr[idx]), float(b_arr[idx]))
    return out
