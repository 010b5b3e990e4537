"""Radar scenario parameters, validation, unit conversions, and regime classification.

All other modules consume a validated :class:`RadarScenario`.  Scenario values are
immutable after validation and safe to share across threads or processes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields, replace
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence

# CODATA constants, 5 significant figures.
SPEED_OF_LIGHT = 2.9979e8  # m/s
HBAR = 1.0546e-34  # J s

#: Default ratio demanded before an asymptotic inequality (x >> y) is
#: considered satisfied.  The regime conditions are never quantified more
#: precisely than "much greater/less than", so this is a configurable policy.
DEFAULT_STRICTNESS = 100.0


class ScenarioError(ValueError):
    """A scenario field is out of range or a scenario file is malformed."""


class System(str, Enum):
    """Radar families whose operating regimes can be classified."""

    SP = "sp"  # unentangled single-photon pulses
    QI_SP = "qi-sp"  # entangled single-photon pulse pairs
    CS = "cs"  # Gaussian coherent-state radar
    QI_TMSV = "qi-tmsv"  # Gaussian TMSV (SPDC) radar


class Regime(str, Enum):
    GOOD = "good"
    BAD = "bad"
    OUTSIDE = "outside"


class Radar(str, Enum):
    """Receiver architectures compared in the ROC study."""

    QCN = "qcn"  # SPDC source, pre-amplified heterodyne on return and idler
    CCN = "ccn"  # classical correlated-noise source, same detection
    CS_HET = "cs-het"  # coherent-state transmitter, heterodyne reception
    CS_HOM = "cs-hom"  # coherent-state transmitter, homodyne reception
    QI_OPA = "qi-opa"  # SPDC source, parametric-amplifier photon counting


class Hypothesis(str, Enum):
    H0 = "h0"  # target absent
    H1 = "h1"  # target present


@dataclass(frozen=True)
class RadarScenario:
    """Scalar parameters of one detection scenario.

    Brightnesses are mean photon numbers per temporal mode.  ``g_opa`` left as
    ``None`` selects the near-optimal low-gain choice ``1 + n_s/sqrt(n_b)``
    during validation.
    """

    kappa: float = 0.01  # roundtrip target transmissivity, in [0, 1]
    theta: float = 0.0  # target-return phase, radians in [0, 2*pi)
    n_s: float = 0.01  # signal brightness, > 0
    n_b: float = 20.0  # background brightness, >= 0
    n_i: float = 1e3  # correlated-noise idler brightness, > 0
    n_f: float = 1.0  # pre-amplified heterodyne noise figure, >= 1 (1 = quantum limited)
    g_a: float = 1.0  # pre-amplifier gain, >= 1
    m_modes: int = 2_000_000  # time-bandwidth product M = TW, >= 1
    n_pulses: int = 1  # pulse count for the single-photon systems, >= 1
    g_opa: Optional[float] = None  # parametric-amplifier gain, > 1
    kappa_idler: float = 1.0  # idler-storage transmissivity, in (0, 1]
    kappa_match: float = 1.0  # temporal overlap factor, in (0, 1]
    k_bins: int = 1  # simultaneously interrogated resolution bins, >= 1

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_FIELD_NAMES = tuple(f.name for f in fields(RadarScenario))
_INT_FIELDS = ("m_modes", "n_pulses", "k_bins")


def _fail(field: str, value, requirement: str):
    raise ScenarioError(f"{field} out of {requirement} (got {value!r})")


def _as_int(field: str, value) -> int:
    if isinstance(value, bool):
        _fail(field, value, "positive integer")
    if isinstance(value, float):
        if not value.is_integer():
            _fail(field, value, "positive integer")
        value = int(value)
    if not isinstance(value, int):
        _fail(field, value, "positive integer")
    return value


def validate_scenario(raw: RadarScenario) -> RadarScenario:
    """Check every field range and resolve defaults.

    Returns a new scenario with ``g_opa`` resolved.  Violations raise
    :class:`ScenarioError` naming the offending field; values are never
    silently clamped.  Idempotent: validating a validated scenario returns an
    equal scenario.
    """
    s = raw
    if not (0.0 <= s.kappa <= 1.0):
        _fail("kappa", s.kappa, "[0,1]")
    if not (0.0 <= s.theta < 2.0 * math.pi):
        _fail("theta", s.theta, "[0, 2*pi)")
    if not (s.n_s > 0.0):
        _fail("n_s", s.n_s, "(0, inf)")
    if not (s.n_b >= 0.0):
        _fail("n_b", s.n_b, "[0, inf)")
    if not (s.n_i > 0.0):
        _fail("n_i", s.n_i, "(0, inf)")
    if not (s.n_f >= 1.0):
        _fail("n_f", s.n_f, "[1, inf)")
    if not (s.g_a >= 1.0):
        _fail("g_a", s.g_a, "[1, inf)")
    m_modes = _as_int("m_modes", s.m_modes)
    if m_modes < 1:
        _fail("m_modes", s.m_modes, ">= 1")
    n_pulses = _as_int("n_pulses", s.n_pulses)
    if n_pulses < 1:
        _fail("n_pulses", s.n_pulses, ">= 1")
    k_bins = _as_int("k_bins", s.k_bins)
    if k_bins < 1:
        _fail("k_bins", s.k_bins, ">= 1")
    if not (0.0 < s.kappa_idler <= 1.0):
        _fail("kappa_idler", s.kappa_idler, "(0,1]")
    if not (0.0 < s.kappa_match <= 1.0):
        _fail("kappa_match", s.kappa_match, "(0,1]")
    g_opa = s.g_opa
    if g_opa is None:
        g_opa = 1.0 + (s.n_s / math.sqrt(s.n_b) if s.n_b > 0.0 else s.n_s)
    if not (g_opa > 1.0):
        _fail("g_opa", g_opa, "(1, inf)")
    return replace(
        s, g_opa=g_opa, m_modes=m_modes, n_pulses=n_pulses, k_bins=k_bins
    )


def load_scenario(path: Optional[str | Path] = None, overrides: Optional[dict] = None) -> RadarScenario:
    """Build a validated scenario from a JSON file plus override values.

    The JSON object's keys must exactly match :class:`RadarScenario` field
    names; unknown keys are an error (fail closed).  ``overrides`` (e.g. from
    CLI flags) take precedence over file values, which take precedence over
    defaults.
    """
    values: dict = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ScenarioError(f"cannot read scenario file {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ScenarioError(f"scenario file {path} must contain a JSON object")
        values.update(data)
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    unknown = sorted(set(values) - set(_FIELD_NAMES))
    if unknown:
        raise ScenarioError(f"unknown scenario keys: {', '.join(unknown)}")
    return validate_scenario(RadarScenario(**values))


@dataclass(frozen=True)
class RegimeCondition:
    """One asymptotic inequality, normalized so that it reads ratio >= threshold."""

    name: str
    ratio: float
    threshold: float
    satisfied: bool


@dataclass(frozen=True)
class RegimeReport:
    system: System
    regime: Regime
    strictness: float
    conditions_checked: tuple[RegimeCondition, ...]


def _cond(name: str, ratio: float, threshold: float) -> RegimeCondition:
    return RegimeCondition(name, ratio, threshold, ratio >= threshold)


def _safe_ratio(num: float, den: float) -> float:
    if den == 0.0:
        return math.inf if num > 0.0 else 0.0
    return num / den


def classify_regime(
    scenario: RadarScenario, system: System, strictness: float = DEFAULT_STRICTNESS
) -> RegimeReport:
    """Classify the operating regime of one radar family.

    A regime is declared only when its defining inequality holds with at least
    the given ratio; the classification is monotone in ``strictness``.  For the
    single-photon systems the low-flux condition (M*N_B << 1) is recorded but
    does not by itself flip the regime.  The Gaussian-state systems (CS and
    QI-TMSV) have a single intended operating regime (weak return, dim signal,
    bright background), reported as ``bad``; anything else is ``outside``.
    """
    if strictness <= 1.0:
        raise ScenarioError(f"strictness must exceed 1 (got {strictness!r})")
    s = validate_scenario(scenario)
    r = float(strictness)
    system = System(system)
    conds: list[RegimeCondition] = []

    if system in (System.SP, System.QI_SP):
        # Effective background brightness: N_B for SP, N_B/M for entangled pairs.
        eff_nb = s.n_b if system is System.SP else s.n_b / s.m_modes
        label = "n_b" if system is System.SP else "n_b/m"
        good = _cond(f"kappa/({label})", _safe_ratio(s.kappa, eff_nb), r)
        bad = _cond(f"({label})/kappa", _safe_ratio(eff_nb, s.kappa), r)
        conds += [good, bad]
        conds.append(_cond("1/(m*n_b)", _safe_ratio(1.0, s.m_modes * s.n_b), r))
        if good.satisfied:
            regime = Regime.GOOD
        elif bad.satisfied:
            regime = Regime.BAD
        else:
            regime = Regime.OUTSIDE
    else:
        conds.append(_cond("1/kappa", _safe_ratio(1.0, s.kappa), r))
        conds.append(_cond("1/n_s", _safe_ratio(1.0, s.n_s), r))
        conds.append(_cond("n_b", s.n_b, r))
        regime = Regime.BAD if all(c.satisfied for c in conds) else Regime.OUTSIDE

    return RegimeReport(system, regime, r, tuple(conds))


def db(x: float) -> float:
    """Express a positive power ratio in decibels."""
    if not (x > 0.0):
        raise ScenarioError(f"db() requires a positive ratio (got {x!r})")
    return 10.0 * math.log10(x)


def brightness_from_radiance(wavelength: float, spectral_radiance: float) -> float:
    """Background brightness per temporal mode from sky spectral radiance.

    ``wavelength`` in meters, ``spectral_radiance`` in W / (m^2 sr um); the
    result is the mean photon number per mode pi*1e6*lambda^3*N / (hbar*omega^2)
    with omega = 2*pi*c/lambda.  Linear in the radiance.
    """
    if not (wavelength > 0.0):
        raise ScenarioError(f"wavelength must be positive (got {wavelength!r})")
    if spectral_radiance < 0.0:
        raise ScenarioError(
            f"spectral_radiance must be nonnegative (got {spectral_radiance!r})"
        )
    omega = 2.0 * math.pi * SPEED_OF_LIGHT / wavelength
    return math.pi * 1e6 * wavelength**3 * spectral_radiance / (HBAR * omega**2)
