"""Closed-form error-probability bounds for the radar families.

Every bound here is for the symmetric binary decision (target equally likely
absent or present).  Upper bounds are Chernoff-type, exp(-E)/2 with a
nonnegative exponent E; the coherent-state lower bound is Bhattacharyya-type.
Bounds are evaluated even outside their intended asymptotic regimes so that
parameter sweeps never hole-punch; ``regime_valid`` flags the mismatch instead.
Exponent arithmetic is kept in log space, so ``log10_value`` stays finite even
when the probability itself underflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .scenario import (
    DEFAULT_STRICTNESS,
    RadarScenario,
    Regime,
    RegimeReport,
    ScenarioError,
    System,
    classify_regime,
)

_LN10 = math.log(10.0)
_LOG10_2 = math.log10(2.0)
_LOG10_4 = math.log10(4.0)


class Receiver(str, Enum):
    """Idler-joint receiver families whose exponents are quoted in the bounds."""

    SFG = "sfg"  # sum-frequency-generation (full-advantage) reception
    OPA = "opa"  # parametric-amplifier / phase-conjugate reception


@dataclass(frozen=True)
class BoundResult:
    name: str
    kind: str  # "upper" | "lower"
    exponent_per_mode: float
    total_exponent: float
    value: float  # probability in (0, 1/2]; 0.0 only on float underflow
    log10_value: float
    regime_valid: bool
    regime: Optional[RegimeReport] = None
    note: str = ""


def _upper(
    name: str,
    per_mode: float,
    total: float,
    regime_valid: bool = True,
    regime: Optional[RegimeReport] = None,
    note: str = "",
) -> BoundResult:
    value = math.exp(-total) / 2.0 if total < 700.0 else 0.0
    log10_value = -total / _LN10 - _LOG10_2
    return BoundResult(name, "upper", per_mode, total, value, log10_value, regime_valid, regime, note)


def _check_nonneg(**params: float) -> None:
    for key, val in params.items():
        if val < 0.0:
            raise ScenarioError(f"{key} must be nonnegative (got {val!r})")


def _ratio(num: float, den: float) -> float:
    """num/den with the zero-background convention: 0 if num is 0, inf otherwise."""
    if num == 0.0:
        return 0.0
    return num / den if den > 0.0 else math.inf


def _pulse_regime(
    system: System, kappa: float, n_b: float, m_modes: int, strictness: float
) -> RegimeReport:
    scenario = RadarScenario(kappa=kappa, n_b=n_b, m_modes=m_modes)
    return classify_regime(scenario, system, strictness)


def single_photon_bound(
    n_pulses: int,
    kappa: float,
    n_b: float,
    m_modes: int,
    regime: Regime,
    strictness: float = DEFAULT_STRICTNESS,
) -> BoundResult:
    """Error bound for N unentangled single-photon pulses.

    The good regime (kappa >> N_B) attains the shot-noise exponent N*kappa; the
    background-limited bad regime (kappa << N_B) drops to N*kappa^2/(8*N_B).
    The stated regime selects the formula; a mismatch with the classifier is
    flagged, not refused.
    """
    _check_nonneg(n_pulses=n_pulses, kappa=kappa, n_b=n_b)
    regime = Regime(regime)
    report = _pulse_regime(System.SP, kappa, n_b, m_modes, strictness)
    if regime is Regime.GOOD:
        per_pulse = kappa
    elif regime is Regime.BAD:
        per_pulse = _ratio(kappa**2, 8.0 * n_b)
    else:
        raise ScenarioError("regime must be good or bad for the pulse bounds")
    return _upper(
        "sp_ub", per_pulse, n_pulses * per_pulse,
        regime_valid=report.regime is regime, regime=report,
    )


def single_photon_qi_bound(
    n_pulses: int,
    kappa: float,
    n_b: float,
    m_modes: int,
    regime: Regime,
    strictness: float = DEFAULT_STRICTNESS,
) -> BoundResult:
    """Error bound for N entangled single-photon pulse pairs.

    Entanglement across M temporal modes dilutes the effective background to
    N_B/M: the bad regime shrinks to kappa << N_B/M and its exponent gains a
    factor of M over the unentangled bound.
    """
    _check_nonneg(n_pulses=n_pulses, kappa=kappa, n_b=n_b)
    regime = Regime(regime)
    report = _pulse_regime(System.QI_SP, kappa, n_b, m_modes, strictness)
    if regime is Regime.GOOD:
        per_pulse = kappa
    elif regime is Regime.BAD:
        per_pulse = _ratio(kappa**2 * m_modes, 8.0 * n_b)
    else:
        raise ScenarioError("regime must be good or bad for the pulse bounds")
    return _upper(
        "sp_qi_ub", per_pulse, n_pulses * per_pulse,
        regime_valid=report.regime is regime, regime=report,
    )


def unit_coherent_pulse_bound(n_pulses: int, kappa: float, n_b: float) -> BoundResult:
    """Chernoff bound for N coherent-state pulses of unit mean photon number.

    Valid for every 0 <= kappa <= 1 and N_B >= 0; at N_B = 0 it reduces to the
    shot-noise exponent N*kappa.
    """
    _check_nonneg(n_pulses=n_pulses, n_b=n_b)
    if not (0.0 <= kappa <= 1.0):
        raise ScenarioError(f"kappa out of [0,1] (got {kappa!r})")
    per_pulse = kappa * (math.sqrt(1.0 + n_b) - math.sqrt(n_b)) ** 2
    return _upper("cs_pulse_ub", per_pulse, n_pulses * per_pulse)


def _tan_regime(kappa, n_s, n_b, strictness) -> RegimeReport:
    scenario = RadarScenario(kappa=kappa, n_s=n_s, n_b=n_b)
    return classify_regime(scenario, System.CS, strictness)


def cs_chernoff_bound(
    m_modes: int, kappa: float, n_s: float, n_b: float,
    strictness: float = DEFAULT_STRICTNESS,
) -> BoundResult:
    """Chernoff bound for the M-mode coherent-state radar: exponent M*kappa*N_S/(4*N_B).

    The closed form holds in the weak-return, dim-signal, bright-background
    regime; outside it the value is still computed with regime_valid False.
    """
    per_mode = _ratio(kappa * n_s, 4.0 * n_b)
    report = _tan_regime(kappa, n_s, n_b, strictness)
    return _upper(
        "cs_ub", per_mode, m_modes * per_mode,
        regime_valid=report.regime is Regime.BAD, regime=report,
    )


def qi_chernoff_bound(
    m_modes: int, kappa: float, n_s: float, n_b: float,
    strictness: float = DEFAULT_STRICTNESS,
) -> BoundResult:
    """Chernoff bound for the M-mode TMSV radar: exponent M*kappa*N_S/N_B.

    Four times (6 dB) the coherent-state exponent for identical parameters,
    independent of M.
    """
    per_mode = _ratio(kappa * n_s, n_b)
    report = _tan_regime(kappa, n_s, n_b, strictness)
    return _upper(
        "qi_ub", per_mode, m_modes * per_mode,
        regime_valid=report.regime is Regime.BAD, regime=report,
    )


def opa_chernoff_bound(
    m_modes: int, kappa: float, n_s: float, n_b: float,
    strictness: float = DEFAULT_STRICTNESS,
) -> BoundResult:
    """Chernoff bound for TMSV with a parametric-amplifier receiver at optimal gain.

    Exponent M*kappa*N_S/(2*N_B): half the full quantum advantage (3 dB over
    the coherent-state radar).
    """
    per_mode = _ratio(kappa * n_s, 2.0 * n_b)
    report = _tan_regime(kappa, n_s, n_b, strictness)
    return _upper(
        "opa_ub", per_mode, m_modes * per_mode,
        regime_valid=report.regime is Regime.BAD, regime=report,
    )


def idler_loss_bound(
    m_modes: int, kappa: float, n_s: float, n_b: float,
    kappa_idler: float, receiver: Receiver,
    strictness: float = DEFAULT_STRICTNESS,
) -> BoundResult:
    """QI receiver bounds with lossy idler storage of transmissivity kappa_idler.

    The stored idler's loss multiplies the exponent directly, so 6 dB of loss
    erases the SFG receivers' advantage over the coherent-state radar and 3 dB
    suffices for the parametric-amplifier/phase-conjugate receivers.
    """
    if not (0.0 < kappa_idler <= 1.0):
        raise ScenarioError(f"kappa_idler out of (0,1] (got {kappa_idler!r})")
    receiver = Receiver(receiver)
    divisor = 1.0 if receiver is Receiver.SFG else 2.0
    per_mode = _ratio(kappa * kappa_idler * n_s, divisor * n_b)
    report = _tan_regime(kappa, n_s, n_b, strictness)
    cs = cs_chernoff_bound(m_modes, kappa, n_s, n_b, strictness)
    ratio = per_mode / cs.exponent_per_mode if cs.exponent_per_mode > 0.0 else math.nan
    note = f"exponent/cs_exponent = {ratio:.6g}"
    return _upper(
        f"{receiver.value}_idler_loss_ub", per_mode, m_modes * per_mode,
        regime_valid=report.regime is Regime.BAD, regime=report, note=note,
    )


def multibin_penalty_db(k_bins: int) -> float:
    """Performance loss, in dB per bin, of splitting the idler over K_B bins."""
    if k_bins < 1:
        raise ScenarioError(f"k_bins must be >= 1 (got {k_bins!r})")
    return 10.0 * math.log10(k_bins)


def mismatch_penalty(exponent: float, kappa_match: float) -> float:
    """Scale an error exponent by the temporal overlap factor kappa_match."""
    if not (0.0 < kappa_match <= 1.0):
        raise ScenarioError(f"kappa_match out of (0,1] (got {kappa_match!r})")
    return exponent * kappa_match


def apply_mismatch(bound: BoundResult, kappa_match: float) -> BoundResult:
    """An upper bound with its exponent reduced by the temporal-mismatch factor."""
    if bound.kind != "upper":
        raise ScenarioError("mismatch scaling applies to Chernoff-type upper bounds")
    return _upper(
        bound.name, mismatch_penalty(bound.exponent_per_mode, kappa_match),
        mismatch_penalty(bound.total_exponent, kappa_match),
        bound.regime_valid, bound.regime,
        note=f"kappa_match = {kappa_match:g}",
    )


def cs_bhattacharyya_lower_bound(
    m_modes: int, kappa: float, n_s: float, n_b: float,
    strictness: float = DEFAULT_STRICTNESS,
) -> BoundResult:
    """Bhattacharyya lower bound on the coherent-state radar's error probability.

    Pr(e) >= [1 - sqrt(1 - e^{-2B})]/2 with B = M*kappa*N_S*(sqrt(N_B+1)-sqrt(N_B))^2,
    the per-mode coherent-state exponent, whose Chernoff optimizer sits at the
    symmetric point for this displacement-discrimination problem.  Always loose:
    it never exceeds the matching Chernoff upper bound.
    """
    _check_nonneg(m_modes=m_modes, n_s=n_s, n_b=n_b)
    if not (0.0 <= kappa <= 1.0):
        raise ScenarioError(f"kappa out of [0,1] (got {kappa!r})")
    per_mode = kappa * n_s * (math.sqrt(n_b + 1.0) - math.sqrt(n_b)) ** 2
    total = m_modes * per_mode
    two_b = 2.0 * total
    if two_b < 700.0:
        # 1 - sqrt(1-x) rewritten as x/(1+sqrt(1-x)): immune to the
        # cancellation that otherwise destroys the value once x is tiny.
        x = math.exp(-two_b)
        value = 0.5 * x / (1.0 + math.sqrt(1.0 - x))
        log10_value = math.log10(value)
    else:
        value = 0.0
        log10_value = -two_b / _LN10 - _LOG10_4
    report = _tan_regime(kappa, n_s, n_b, strictness)
    return BoundResult(
        "cs_lb", "lower", per_mode, total, value, log10_value,
        regime_valid=report.regime is Regime.BAD, regime=report,
    )


def crossover_m(
    kappa: float, n_s: float, n_b: float, m_max: float = 1e12,
) -> Optional[int]:
    """Smallest M at which the TMSV upper bound drops below the CS lower bound.

    Bisection on the integer M axis after a geometric scan brackets the sign
    change of the log-value gap; returns None when no crossover exists up to
    ``m_max`` (e.g. at kappa = 0, where both curves are constant).
    """
    _check_nonneg(n_s=n_s, n_b=n_b)
    if not (0.0 <= kappa <= 1.0):
        raise ScenarioError(f"kappa out of [0,1] (got {kappa!r})")

    def gap(m: float) -> float:
        qi = qi_chernoff_bound(m, kappa, n_s, n_b)
        lb = cs_bhattacharyya_lower_bound(m, kappa, n_s, n_b)
        return qi.log10_value - lb.log10_value

    if kappa == 0.0 or n_s == 0.0 or n_b == 0.0:
        return None
    lo, hi = 1.0, 2.0
    if gap(lo) < 0.0:
        return 1
    while gap(hi) >= 0.0:
        lo, hi = hi, hi * 2.0
        if lo > m_max:
            return None
    lo_i, hi_i = int(lo), int(math.ceil(hi))
    while hi_i - lo_i > 1:
        mid = (lo_i + hi_i) // 2
        if gap(mid) >= 0.0:
            lo_i = mid
        else:
            hi_i = mid
    m_star = hi_i
    # The gap must change sign exactly at m_star and keep widening past it.
    if not (gap(m_star - 1) >= 0.0 > gap(m_star)):
        raise RuntimeError("crossover bisection lost its bracket")
    if not (gap(2 * m_star) < gap(m_star) and gap(4 * m_star) < gap(2 * m_star)):
        raise RuntimeError("bound gap is not locally monotone beyond the crossover")
    return m_star
