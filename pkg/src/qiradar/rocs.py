"""Closed-form and saddle-point receiver operating characteristics.

Exact ROCs exist for the coherent-state radars (Rice envelope for heterodyne,
shifted Gaussian for homodyne) and, asymptotically, for the classical
correlated-noise radar via its maximal-ratio-combiner limit.  The mode-pair
radars and the photon-counting receiver get an exponentially tilted
saddle-point approximation built on the log moment-generating function mu(s)
of their log-likelihood ratio:

    P_F(s) ~= exp[mu(s) - s mu'(s) + s^2 mu''(s)/2] * Q(s sqrt(mu''(s)))
    P_M(s) ~= exp[mu(s) + (1-s) mu'(s) + (1-s)^2 mu''(s)/2] * Q((1-s) sqrt(mu''(s)))

Sweeping the tilt s traces the ROC; for a Gaussian log-likelihood ratio the
pair is exact at every real s, which is the accuracy anchor for the
near-Gaussian large-M regimes used here.  Tilts are allowed outside (0, 1)
whenever mu stays defined, since false-alarm targets deep below the s = 1
tilt (P_F below e^{-KL}) are otherwise unreachable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize
from scipy import special as _sp

from .gaussian_states import CovarianceForm, ModePairCovariance, covariance_pair, opa_output_stats
from .scenario import Radar, RadarScenario, ScenarioError, validate_scenario
from .special import DomainError, gaussian_q, gaussian_q_inv, marcum_q


class RocMethod(str, Enum):
    EXACT = "exact"
    SADDLEPOINT = "saddlepoint"
    ASYMPTOTIC = "asymptotic"  # maximal-ratio-combiner limit of the CCN radar
    MONTE_CARLO = "monte-carlo"


class SaddlePointError(RuntimeError):
    """The tilted approximation could not be applied; carries the trace."""

    def __init__(self, message: str, trace: Optional["SaddlePointTrace"] = None):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class RocCurve:
    radar: Radar
    method: RocMethod
    pf: np.ndarray
    pd: np.ndarray
    pm: np.ndarray  # miss probability, kept explicitly for deep-tail precision
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("pf", "pd", "pm"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def csv_rows(self):
        for pf, pd in zip(self.pf, self.pd):
            yield pf, pd, self.radar.value, self.method.value


@dataclass(frozen=True)
class SaddlePointTrace:
    s: np.ndarray
    mu: np.ndarray
    mu_dot: np.ndarray
    mu_ddot: np.ndarray
    pf: np.ndarray
    pm: np.ndarray

    def __post_init__(self):
        for name in ("s", "mu", "mu_dot", "mu_ddot", "pf", "pm"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def _pf_array(pf_grid) -> np.ndarray:
    pf = np.atleast_1d(np.asarray(pf_grid, dtype=float))
    if np.any(pf <= 0.0) or np.any(pf >= 1.0):
        raise ScenarioError("false-alarm grid must lie in (0, 1)")
    return pf


def cs_het_roc(scenario: RadarScenario, pf_grid) -> RocCurve:
    """Exact ROC of the coherent-state radar with heterodyne (envelope) reception.

    P_D = Q(sqrt(2 M kappa N_S / (N_B + 1)), sqrt(-2 ln P_F)) with Q the
    first-order Marcum function.
    """
    s = validate_scenario(scenario)
    pf = _pf_array(pf_grid)
    a = math.sqrt(2.0 * s.m_modes * s.kappa * s.n_s / (s.n_b + 1.0))
    b = np.sqrt(-2.0 * np.log(pf))
    pd = np.asarray(marcum_q(a, b), dtype=float)
    return RocCurve(
        Radar.CS_HET, RocMethod.EXACT, pf, pd, 1.0 - pd,
        parameters={"deflection": a},
    )


def cs_hom_roc(scenario: RadarScenario, pf_grid) -> RocCurve:
    """Exact ROC of the coherent-state radar with homodyne reception.

    P_D = Q(Q^{-1}(P_F) - d) with deflection d = sqrt(4 M kappa N_S / (2 N_B + 1)).
    """
    s = validate_scenario(scenario)
    pf = _pf_array(pf_grid)
    d = math.sqrt(4.0 * s.m_modes * s.kappa * s.n_s / (2.0 * s.n_b + 1.0))
    x = gaussian_q_inv(pf)
    pd = gaussian_q(x - d)
    pm = gaussian_q(d - x)
    return RocCurve(
        Radar.CS_HOM, RocMethod.EXACT, pf, np.asarray(pd), np.asarray(pm),
        parameters={"deflection": d},
    )


def ccn_asymptotic_roc(scenario: RadarScenario, pf_grid) -> RocCurve:
    """Asymptotic ROC of the classical correlated-noise radar.

    In the bright-idler, many-mode limit the optimal post-heterodyne processor
    is a maximal-ratio combiner and the ROC collapses to a Gaussian shift with
    deflection sqrt(2 M kappa N_S / (N_B + N_F)); the noise figure enters only
    through the return-path noise (valid for N_F << N_B).
    """
    s = validate_scenario(scenario)
    pf = _pf_array(pf_grid)
    d = math.sqrt(2.0 * s.m_modes * s.kappa * s.n_s / (s.n_b + s.n_f))
    x = gaussian_q_inv(pf)
    pd = gaussian_q(x - d)
    pm = gaussian_q(d - x)
    return RocCurve(
        Radar.CCN, RocMethod.ASYMPTOTIC, pf, np.asarray(pd), np.asarray(pm),
        parameters={"deflection": d},
    )


# ---------------------------------------------------------------------------
# Log moment-generating functions of the log-likelihood ratio under H0.
# mu(s) = ln E_0[exp(s LLR)] = ln integral p0^{1-s} p1^s; mu(0) = mu(1) = 0,
# and -min_s mu(s) is the Chernoff error exponent.
# ---------------------------------------------------------------------------


def mu_gaussian(cov_h0, cov_h1, m_modes: int, s: float) -> float:
    """mu(s) for M iid zero-mean Gaussian mode pairs.

    mu_1(s) = -1/2 [ (1-s) ln det S0 + s ln det S1 + ln det((1-s) S0^-1 + s S1^-1) ],
    scaled by ``m_modes``.  Defined wherever the tilted precision matrix stays
    positive definite, which covers an interval strictly larger than [0, 1].
    """
    s0 = cov_h0.matrix if isinstance(cov_h0, ModePairCovariance) else np.asarray(cov_h0, float)
    s1 = cov_h1.matrix if isinstance(cov_h1, ModePairCovariance) else np.asarray(cov_h1, float)
    return m_modes * _mu_gaussian_one(s0, s1, float(s))


def _mu_gaussian_one(s0: np.ndarray, s1: np.ndarray, s: float) -> float:
    sign0, logdet0 = np.linalg.slogdet(s0)
    sign1, logdet1 = np.linalg.slogdet(s1)
    if sign0 <= 0 or sign1 <= 0:
        raise DomainError("hypothesis covariances must be positive definite")
    tilted = (1.0 - s) * np.linalg.inv(s0) + s * np.linalg.inv(s1)
    sign_t, logdet_t = np.linalg.slogdet(tilted)
    if sign_t <= 0:
        raise DomainError(f"tilted precision matrix not positive definite at s={s:g}")
    return -0.5 * ((1.0 - s) * logdet0 + s * logdet1 + logdet_t)


def mu_geometric(n0: float, n1: float, m_modes: int, s: float) -> float:
    """mu(s) for M iid Bose-Einstein (geometric) photon counts.

    mu_1(s) = -ln[ (1+n0)^{1-s} (1+n1)^s - n0^{1-s} n1^s ], scaled by M.
    """
    if n0 < 0.0 or n1 < 0.0:
        raise ScenarioError("mean photon numbers must be nonnegative")
    denom = (1.0 + n0) ** (1.0 - s) * (1.0 + n1) ** s
    cross = n0 ** (1.0 - s) * n1**s if n0 > 0.0 and n1 > 0.0 else 0.0
    inner = denom - cross
    if inner <= 0.0:
        raise DomainError(f"geometric mu undefined at s={s:g}")
    return -m_modes * math.log(inner)


class _GaussianMu:
    """Total mu(s) for M iid Gaussian mode pairs, with exact trace-formula derivatives.

    With precisions P_j = S_j^-1 and A(s) = (1-s) P0 + s P1:

        mu'  = -M/2 [ ln det S1 - ln det S0 + tr(A^-1 B) ]
        mu'' = +M/2 tr(A^-1 B A^-1 B),  B = P1 - P0,

    the second form being a PSD quadratic, which is the convexity of mu made
    explicit.
    """

    def __init__(self, s0: np.ndarray, s1: np.ndarray, m_modes: int):
        self.s0 = np.asarray(s0, dtype=float)
        self.s1 = np.asarray(s1, dtype=float)
        self.m = float(m_modes)
        sign0, self._logdet0 = np.linalg.slogdet(self.s0)
        sign1, self._logdet1 = np.linalg.slogdet(self.s1)
        if sign0 <= 0 or sign1 <= 0:
            raise DomainError("hypothesis covariances must be positive definite")
        self._p0 = np.linalg.inv(self.s0)
        self._p1 = np.linalg.inv(self.s1)

    def _tilted(self, s: float) -> tuple[np.ndarray, float]:
        precision = (1.0 - s) * self._p0 + s * self._p1
        sign, logdet = np.linalg.slogdet(precision)
        if sign <= 0:
            raise DomainError(f"tilted precision matrix not positive definite at s={s:g}")
        return precision, logdet

    def __call__(self, s: float) -> float:
        _, logdet = self._tilted(s)
        return -0.5 * self.m * (
            (1.0 - s) * self._logdet0 + s * self._logdet1 + logdet
        )

    def derivatives(self, s: float) -> tuple[float, float, float]:
        tilted, logdet = self._tilted(s)
        inv = np.linalg.inv(tilted)
        b = self._p1 - self._p0
        inv_b = inv @ b
        val = -0.5 * self.m * ((1.0 - s) * self._logdet0 + s * self._logdet1 + logdet)
        first = -0.5 * self.m * (self._logdet1 - self._logdet0 + np.trace(inv_b))
        second = 0.5 * self.m * np.trace(inv_b @ inv_b)
        return val, float(first), float(second)


class _GeometricMu:
    """Total mu(s) for M iid Bose-Einstein counts, with exact derivatives."""

    def __init__(self, n0: float, n1: float, m_modes: int):
        if n0 <= 0.0 or n1 <= 0.0:
            raise DomainError("geometric mu derivatives need positive means")
        self.n0, self.n1, self.m = float(n0), float(n1), float(m_modes)
        self._a0, self._da = math.log1p(n0), math.log1p(n1) - math.log1p(n0)
        self._b0, self._db = math.log(n0), math.log(n1) - math.log(n0)

    def _parts(self, s: float) -> tuple[float, float]:
        return math.exp(self._a0 + s * self._da), math.exp(self._b0 + s * self._db)

    def __call__(self, s: float) -> float:
        big_a, big_b = self._parts(s)
        if big_a - big_b <= 0.0:
            raise DomainError(f"geometric mu undefined at s={s:g}")
        return -self.m * math.log(big_a - big_b)

    def derivatives(self, s: float) -> tuple[float, float, float]:
        big_a, big_b = self._parts(s)
        g = big_a - big_b
        if g <= 0.0:
            raise DomainError(f"geometric mu undefined at s={s:g}")
        g1 = self._da * big_a - self._db * big_b
        g2 = self._da**2 * big_a - self._db**2 * big_b
        val = -self.m * math.log(g)
        first = -self.m * g1 / g
        second = self.m * ((g1 / g) ** 2 - g2 / g)
        return val, first, second


def make_gaussian_mu(cov_h0, cov_h1, m_modes: int) -> _GaussianMu:
    """Bind covariances into a total mu(s) for the saddle-point sweep."""
    s0 = cov_h0.matrix if isinstance(cov_h0, ModePairCovariance) else np.asarray(cov_h0, float)
    s1 = cov_h1.matrix if isinstance(cov_h1, ModePairCovariance) else np.asarray(cov_h1, float)
    return _GaussianMu(s0, s1, m_modes)


def make_geometric_mu(n0: float, n1: float, m_modes: int) -> _GeometricMu:
    return _GeometricMu(n0, n1, m_modes)


#: Central-difference step used when mu carries no analytic derivatives.
MU_DERIVATIVE_STEP = 1e-4


def mu_derivatives(mu: Callable[[float], float], s: float) -> tuple[float, float, float]:
    """(mu, mu', mu'') at s.

    Factory-built mu objects expose exact derivatives; bare callables fall back
    to central differences with step 1e-4 (smaller steps drown the curvature
    signal, which scales as h^2, in rounding noise).  The stencil may poke past
    the unit interval, where these mu families remain defined; if an endpoint
    is outside mu's domain the step shrinks until the stencil fits.
    """
    if hasattr(mu, "derivatives"):
        return mu.derivatives(s)
    center = mu(s)
    h = MU_DERIVATIVE_STEP
    for _ in range(8):
        try:
            upper = mu(s + h)
            lower = mu(s - h)
            break
        except DomainError:
            h *= 0.5
    else:
        raise SaddlePointError(f"cannot place a derivative stencil at s = {s:g}")
    first = (upper - lower) / (2.0 * h)
    second = (upper - 2.0 * center + lower) / (h * h)
    return center, first, second


def chernoff_exponent(mu: Callable[[float], float]) -> tuple[float, float]:
    """(-min_s mu(s), argmin) over the unit tilt interval."""
    res = optimize.minimize_scalar(mu, bounds=(1e-9, 1.0 - 1e-9), method="bounded",
                                   options={"xatol": 1e-12})
    return -float(res.fun), float(res.x)


def saddlepoint_pfpm(mu: Callable[[float], float], s: float, variant: str = "q") -> tuple[float, float]:
    """Tilted threshold-crossing approximations at tilt s.

    ``variant="q"`` applies the Gaussian-Q corrected pair (exact for Gaussian
    statistics); ``variant="plain"`` is the leading-order saddle point
    exp[mu - s mu']/(|s| sqrt(2 pi mu'')), kept for comparing the two standard
    forms of the approximation.
    """
    val, dot, ddot = mu_derivatives(mu, s)
    if ddot <= 0.0:
        raise SaddlePointError(f"mu''(s) = {ddot:g} <= 0 at s = {s:g}")
    root = math.sqrt(ddot)
    if variant == "q":
        # Assembled in log space: the tilted prefactor alone can overflow even
        # though the product with the Gaussian tail is a probability.
        log_pf = val - s * dot + 0.5 * s * s * ddot + _sp.log_ndtr(-s * root)
        log_pm = (
            val + (1.0 - s) * dot + 0.5 * (1.0 - s) ** 2 * ddot
            + _sp.log_ndtr(-(1.0 - s) * root)
        )
        pf = math.exp(log_pf)
        pm = math.exp(log_pm)
    elif variant == "plain":
        pf = math.exp(val - s * dot) / (abs(s) * math.sqrt(2.0 * math.pi * ddot))
        pm = math.exp(val + (1.0 - s) * dot) / (abs(1.0 - s) * math.sqrt(2.0 * math.pi * ddot))
    else:
        raise ScenarioError(f"unknown saddle-point variant {variant!r}")
    return float(pf), float(pm)


#: Default tilt grid for diagnostics and the curve sweep.
DEFAULT_S_GRID = np.linspace(0.005, 0.995, 101)
#: Hard limits when hunting tilts outside the unit interval.
S_SEARCH_MIN, S_SEARCH_MAX = -2.0, 4.0


def _convexity_check(mu: Callable[[float], float], s_grid: np.ndarray) -> SaddlePointTrace:
    rows = []
    for s in s_grid:
        val, dot, ddot = mu_derivatives(mu, float(s))
        rows.append((float(s), val, dot, ddot))
    arr = np.asarray(rows)
    trace = SaddlePointTrace(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3],
                             np.full(len(arr), np.nan), np.full(len(arr), np.nan))
    # Allow curvature to dip only within finite-difference noise: a genuinely
    # nonconvex mu shows negative curvature comparable to its peak.
    threshold = -max(1e-9, 0.05 * float(np.max(arr[:, 3], initial=0.0)))
    if np.any(arr[:, 3] < threshold):
        raise SaddlePointError("mu is not convex on the tilt grid", trace)
    return trace


def _attach_pfpm(mu, trace: SaddlePointTrace, variant: str) -> SaddlePointTrace:
    pf, pm = [], []
    for s in trace.s:
        f, m = saddlepoint_pfpm(mu, float(s), variant)
        pf.append(f)
        pm.append(m)
    return SaddlePointTrace(trace.s, trace.mu, trace.mu_dot, trace.mu_ddot,
                            np.asarray(pf), np.asarray(pm))


def _solve_tilt(mu, target_pf: float, variant: str) -> float:
    """Find the tilt whose approximate P_F matches the target.

    log P_F(s) decreases monotonically in s; the bracket expands beyond (0, 1)
    when the target lies outside the unit-tilt reach, stopping at the domain
    boundary of mu.
    """
    log_target = math.log(target_pf)

    def objective(s: float) -> float:
        pf, _ = saddlepoint_pfpm(mu, s, variant)
        return math.log(max(pf, 1e-320)) - log_target

    lo, hi = 0.005, 0.995
    f_lo, f_hi = objective(lo), objective(hi)
    while f_lo < 0.0 and lo > S_SEARCH_MIN:
        lo = max(lo - 0.25, S_SEARCH_MIN)
        try:
            f_lo = objective(lo)
        except (DomainError, SaddlePointError):
            lo += 0.25
            break
    while f_hi > 0.0 and hi < S_SEARCH_MAX:
        new_hi = min(hi + 0.25, S_SEARCH_MAX)
        try:
            f_new = objective(new_hi)
        except (DomainError, SaddlePointError):
            break
        hi, f_hi = new_hi, f_new
    if f_lo < 0.0 or f_hi > 0.0:
        raise SaddlePointError(
            f"cannot reach P_F = {target_pf:g} within the usable tilt range"
        )
    return float(optimize.brentq(objective, lo, hi, xtol=1e-12, rtol=1e-14))


def saddlepoint_roc(
    mu: Callable[[float], float],
    pf_grid=None,
    s_grid: Optional[Sequence[float]] = None,
    variant: str = "q",
    radar: Radar = Radar.QCN,
    parameters: Optional[dict] = None,
) -> tuple[RocCurve, SaddlePointTrace]:
    """ROC from the tilted saddle-point approximation of one mu(s).

    The trace is always evaluated on ``s_grid`` (defaults to 101 points inside
    the unit interval) and convexity of mu is enforced there.  When ``pf_grid``
    is given, each false-alarm target gets its own solved tilt; otherwise the
    curve is the raw (P_F(s), P_M(s)) sweep of the grid.  Degenerate hypotheses
    (mu identically zero) return the chance line.
    """
    grid = np.asarray(s_grid, dtype=float) if s_grid is not None else DEFAULT_S_GRID
    mu_vals = np.array([mu(float(s)) for s in grid])
    # A total mu this small (identical hypotheses up to rounding, which scales
    # with the mode count) cannot support a tilted approximation; the operating
    # characteristic is the chance line.
    if np.max(np.abs(mu_vals)) < 1e-8:
        # Identical hypotheses: every threshold gives P_D = P_F.
        pf = _pf_array(pf_grid) if pf_grid is not None else np.linspace(0.01, 0.99, grid.size)
        trace = SaddlePointTrace(grid, mu_vals, np.zeros_like(grid), np.zeros_like(grid),
                                 np.full(grid.size, np.nan), np.full(grid.size, np.nan))
        curve = RocCurve(radar, RocMethod.SADDLEPOINT, pf, pf.copy(), 1.0 - pf,
                         parameters=dict(parameters or {}, degenerate=True))
        return curve, trace
    trace = _attach_pfpm(mu, _convexity_check(mu, grid), variant)
    if pf_grid is None:
        order = np.argsort(trace.pf)
        curve = RocCurve(radar, RocMethod.SADDLEPOINT, trace.pf[order],
                         1.0 - trace.pm[order], trace.pm[order],
                         parameters=dict(parameters or {}))
        return curve, trace
    pf = _pf_array(pf_grid)
    pm = np.empty_like(pf)
    for i, target in enumerate(pf):
        s_star = _solve_tilt(mu, float(target), variant)
        _, pm[i] = saddlepoint_pfpm(mu, s_star, variant)
    curve = RocCurve(radar, RocMethod.SADDLEPOINT, pf, 1.0 - pm, pm,
                     parameters=dict(parameters or {}, variant=variant))
    return curve, trace


def saddlepoint_roc_for_radar(
    scenario: RadarScenario, radar: Radar, pf_grid, variant: str = "q"
) -> tuple[RocCurve, SaddlePointTrace]:
    """Saddle-point ROC of one of the simulated radars at a scenario."""
    s = validate_scenario(scenario)
    radar = Radar(radar)
    if radar in (Radar.QCN, Radar.CCN):
        cov0, cov1 = covariance_pair(s, radar, CovarianceForm.TRANSFORMED)
        mu = make_gaussian_mu(cov0, cov1, s.m_modes)
    elif radar is Radar.QI_OPA:
        stats = opa_output_stats(s)
        mu = make_geometric_mu(stats.n0, stats.n1, s.m_modes)
    else:
        raise ScenarioError(f"no saddle-point model for radar {radar.value}")
    return saddlepoint_roc(mu, pf_grid=pf_grid, variant=variant, radar=radar)
