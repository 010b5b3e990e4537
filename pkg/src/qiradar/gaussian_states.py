"""Moment-level Gaussian-state models for the mode-pair radars.

Covers TMSV and coherent-state statistics, classicality limits on signal-idler
cross correlations, the return-mode composition a_R = sqrt(kappa) e^{j theta} a_S
+ sqrt(1-kappa) a_B, the heterodyne covariance matrices of the correlated-noise
radars, the parametric-amplifier receiver's output statistics, and the
photon-counting interferometer means.

Quadrature convention: Re(a) = (a + a^dag)/2, Im(a) = (a - a^dag)/2j, so a bare
field mode has vacuum variance 1/4 per quadrature.  Heterodyne records of a mode
of brightness N have per-quadrature variance (G_A/2)(N + N_F), where the noise
figure N_F >= 1 absorbs the measurement's added noise (N_F = 1 is the quantum
limit).  The absolute scale is irrelevant once the mode pairs are rescaled by
``transform_covariance``, which cancels G_A.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from scipy import special

from .scenario import Hypothesis, Radar, RadarScenario, ScenarioError, validate_scenario

#: Relative symmetry tolerance and PSD eigenvalue tolerance for constructed matrices.
SYMMETRY_RTOL = 1e-12
PSD_TRACE_TOL = 1e-10


class CovarianceForm(str, Enum):
    RAW = "raw"
    TRANSFORMED = "transformed"


class CovarianceError(ScenarioError):
    """A covariance construction or transformation was misused."""


@dataclass(frozen=True)
class ModePairCovariance:
    """4x4 quadrature covariance of one (return, idler) mode pair.

    Basis ordering is (Re a_R, Im a_R, Re a_I, Im a_I).  H0 matrices have
    exactly zero off-diagonal 2x2 blocks.
    """

    matrix: np.ndarray
    radar: Radar
    hypothesis: Hypothesis
    form: CovarianceForm
    scenario: RadarScenario

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (4, 4):
            raise CovarianceError(f"expected a 4x4 matrix, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def to_json(self, path: str | Path | None = None) -> str:
        """Export as JSON with the matrix as a row-major 4x4 array."""
        payload = json.dumps(
            {
                "radar": self.radar.value,
                "hypothesis": self.hypothesis.value,
                "form": self.form.value,
                "matrix": [[float(x) for x in row] for row in self.matrix],
            },
            indent=2,
        )
        if path is not None:
            Path(path).write_text(payload + "\n")
        return payload


@dataclass(frozen=True)
class CrossCorrReport:
    """Signal-idler cross correlations against their classicality limits."""

    phase_insensitive: complex  # <a_S^dag a_I>
    phase_sensitive: complex  # <a_S a_I>
    auto_s: float
    auto_i: float
    classical_ps_limit: float
    quantum_ps_limit: float
    is_classical: bool
    saturates_quantum: bool


@dataclass(frozen=True)
class ReturnModeMoments:
    """Conditional second moments of the returned mode and its idler pairing."""

    n_r_h0: float  # <a_R^dag a_R | H0> = N_B
    n_r_h1: float  # <a_R^dag a_R | H1> = kappa*N_S + N_B
    ps_cross_h0: complex  # <a_R a_I | H0>
    ps_cross_h1: complex  # <a_R a_I | H1> = e^{j theta} sqrt(kappa N_S (N_S+1))
    pi_cross_h0: complex  # <a_R^dag a_I | H0>
    pi_cross_h1: complex  # <a_R^dag a_I | H1>, identically zero


@dataclass(frozen=True)
class OpaStats:
    """Mean photon numbers at the parametric-amplifier receiver output."""

    n0: float  # per-mode mean, target absent
    n1: float  # per-mode mean, target present
    total_mean_h0: float  # M * n0
    total_mean_h1: float  # M * n1
    gain: float


@dataclass(frozen=True)
class InterferometerMeans:
    """Photon-counting means at the two ports of a 50-50 return/idler combiner."""

    h0_plus: float
    h0_minus: float
    h1_plus: float
    h1_minus: float


@dataclass(frozen=True)
class NumberDistribution:
    """Truncated photon-number probabilities with the discarded tail mass."""

    probabilities: np.ndarray  # p(n) for n = 0..n_max
    tail_mass: float

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    @property
    def mean(self) -> float:
        n = np.arange(self.probabilities.size)
        return float(np.sum(n * self.probabilities))


@dataclass(frozen=True)
class CcnComparison:
    advantage: bool
    threshold: float  # idler brightness above which CCN wins; inf at N_F = 1
    note: str = ""


def classical_ps_limit(auto_s: float, auto_i: float) -> float:
    """Largest |<a_S a_I>| any classical (P-representable) state allows."""
    if auto_s < 0.0 or auto_i < 0.0:
        raise ScenarioError("auto correlations must be nonnegative")
    return math.sqrt(auto_s * auto_i)


def quantum_ps_limit(auto_s: float, auto_i: float) -> float:
    """Largest |<a_S a_I>| quantum mechanics allows for zero-mean states."""
    if auto_s < 0.0 or auto_i < 0.0:
        raise ScenarioError("auto correlations must be nonnegative")
    return math.sqrt(max(auto_s, auto_i) * (min(auto_s, auto_i) + 1.0))


def tmsv_moments(n_s: float) -> CrossCorrReport:
    """Second moments of a two-mode squeezed vacuum of brightness ``n_s``.

    The TMSV has zero phase-insensitive cross correlation and phase-sensitive
    cross correlation sqrt(n_s*(n_s+1)), which exceeds the classical limit n_s
    for every n_s > 0 and saturates the quantum limit exactly.
    """
    if not (n_s > 0.0):
        raise ScenarioError(f"n_s must be positive (got {n_s!r})")
    ps = math.sqrt(n_s * (n_s + 1.0))
    climit = classical_ps_limit(n_s, n_s)
    qlimit = quantum_ps_limit(n_s, n_s)
    return CrossCorrReport(
        phase_insensitive=0.0 + 0.0j,
        phase_sensitive=complex(ps),
        auto_s=n_s,
        auto_i=n_s,
        classical_ps_limit=climit,
        quantum_ps_limit=qlimit,
        is_classical=ps <= climit * (1.0 + SYMMETRY_RTOL),
        saturates_quantum=abs(ps - qlimit) <= SYMMETRY_RTOL * qlimit,
    )


def return_mode_moments(scenario: RadarScenario) -> ReturnModeMoments:
    """Conditional moments of the returned mode for a TMSV transmitter."""
    s = validate_scenario(scenario)
    ps_h1 = (
        complex(math.cos(s.theta), math.sin(s.theta))
        * math.sqrt(s.kappa * s.n_s * (s.n_s + 1.0))
    )
    return ReturnModeMoments(
        n_r_h0=s.n_b,
        n_r_h1=s.kappa * s.n_s + s.n_b,
        ps_cross_h0=0.0 + 0.0j,
        ps_cross_h1=ps_h1,
        pi_cross_h0=0.0 + 0.0j,
        pi_cross_h1=0.0 + 0.0j,
    )


def _reflection(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [s, -c]])


def _rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def _assemble(return_block, cross, idler_block, prefactor) -> np.ndarray:
    top = np.hstack([return_block, cross])
    bottom = np.hstack([cross.T, idler_block])
    return prefactor * np.vstack([top, bottom])


def qcn_covariance(scenario: RadarScenario, hypothesis: Hypothesis) -> ModePairCovariance:
    """Raw heterodyne covariance of the quantum correlated-noise radar.

    Under H1 the cross block is sqrt(kappa*N_S*(N_S+1)) times the reflection
    matrix [[cos, sin], [sin, -cos]](theta); the phase-sensitive correlation
    shows up as a reflection because the idler is recorded unconjugated.
    """
    s = validate_scenario(scenario)
    hypothesis = Hypothesis(hypothesis)
    eye = np.eye(2)
    idler = (s.n_s + s.n_f) * eye
    if hypothesis is Hypothesis.H0:
        ret = (s.n_b + s.n_f) * eye
        cross = np.zeros((2, 2))
    else:
        n_r = s.kappa * s.n_s + s.n_b
        ret = (n_r + s.n_f) * eye
        cross = math.sqrt(s.kappa * s.n_s * (s.n_s + 1.0)) * _reflection(s.theta)
    matrix = _assemble(ret, cross, idler, s.g_a / 2.0)
    return ModePairCovariance(matrix, Radar.QCN, hypothesis, CovarianceForm.RAW, s)


def ccn_covariance(scenario: RadarScenario, hypothesis: Hypothesis) -> ModePairCovariance:
    """Raw heterodyne covariance of the classical correlated-noise radar.

    The classical source splits into a dim signal (brightness N_S) and a bright
    idler (N_I); the H1 cross block is sqrt(kappa*N_S*N_I) times a rotation.
    """
    s = validate_scenario(scenario)
    hypothesis = Hypothesis(hypothesis)
    eye = np.eye(2)
    idler = (s.n_i + s.n_f) * eye
    if hypothesis is Hypothesis.H0:
        ret = (s.n_b + s.n_f) * eye
        cross = np.zeros((2, 2))
    else:
        n_r = s.kappa * s.n_s + s.n_b
        ret = (n_r + s.n_f) * eye
        cross = math.sqrt(s.kappa * s.n_s * s.n_i) * _rotation(s.theta)
    matrix = _assemble(ret, cross, idler, s.g_a / 2.0)
    return ModePairCovariance(matrix, Radar.CCN, hypothesis, CovarianceForm.RAW, s)


def transform_covariance(cov: ModePairCovariance) -> ModePairCovariance:
    """Rescale one raw mode-pair covariance to its normalized form.

    QCN records are conjugated and divided by sqrt(N_S + 1); CCN records are
    divided by sqrt(N_I); both are divided by sqrt(G_A), which cancels the
    amplifier gain.  After the transformation the two radars differ only in
    their idler noise level, which makes their comparison transparent.  The
    transformation is applied as an explicit congruence on the quadratures, so
    its output can be cross-checked against the closed-form matrices.
    """
    if cov.form is not CovarianceForm.RAW:
        raise CovarianceError("transform_covariance expects a raw covariance")
    s = cov.scenario
    root_ga = math.sqrt(s.g_a)
    if cov.radar is Radar.QCN:
        # Conjugation flips the sign of Im(a_I).
        scale = 1.0 / (root_ga * math.sqrt(s.n_s + 1.0))
        t = np.diag([1.0 / root_ga, 1.0 / root_ga, scale, -scale])
    elif cov.radar is Radar.CCN:
        scale = 1.0 / (root_ga * math.sqrt(s.n_i))
        t = np.diag([1.0 / root_ga, 1.0 / root_ga, scale, scale])
    else:
        raise CovarianceError(f"no mode-pair transformation for radar {cov.radar}")
    matrix = t @ cov.matrix @ t.T
    return ModePairCovariance(matrix, cov.radar, cov.hypothesis, CovarianceForm.TRANSFORMED, s)


def covariance_pair(
    scenario: RadarScenario, radar: Radar, form: CovarianceForm = CovarianceForm.TRANSFORMED
) -> tuple[ModePairCovariance, ModePairCovariance]:
    """Convenience: the (H0, H1) covariance pair for one correlated-noise radar."""
    radar = Radar(radar)
    builder = {Radar.QCN: qcn_covariance, Radar.CCN: ccn_covariance}.get(radar)
    if builder is None:
        raise CovarianceError(f"no Gaussian mode-pair model for radar {radar}")
    pair = builder(scenario, Hypothesis.H0), builder(scenario, Hypothesis.H1)
    if CovarianceForm(form) is CovarianceForm.TRANSFORMED:
        pair = transform_covariance(pair[0]), transform_covariance(pair[1])
    return pair


def check_covariance(cov: ModePairCovariance) -> None:
    """Raise unless the matrix is symmetric and positive semidefinite."""
    m = cov.matrix
    scale = np.max(np.abs(m))
    if scale > 0 and np.max(np.abs(m - m.T)) > SYMMETRY_RTOL * scale:
        raise CovarianceError("covariance is not symmetric")
    min_eig = float(np.linalg.eigvalsh(m)[0])
    if min_eig < -PSD_TRACE_TOL * np.trace(m):
        raise CovarianceError(f"covariance is not PSD (min eigenvalue {min_eig:g})")


def ccn_beats_qcn(scenario: RadarScenario) -> CcnComparison:
    """Does the classical correlated-noise radar outperform the quantum one?

    With noisy detection (N_F > 1) the CCN radar's transformed idler is quieter
    than the QCN radar's once N_I > N_F*(N_S+1)/(N_F-1), all other second
    moments being identical.  At the quantum limit the two radars only become
    statistically identical as N_I -> inf, so the answer is False.
    """
    s = validate_scenario(scenario)
    if s.n_f == 1.0:
        return CcnComparison(
            advantage=False,
            threshold=math.inf,
            note="quantum-limited detection: identical statistics in the n_i -> inf limit",
        )
    threshold = s.n_f * (s.n_s + 1.0) / (s.n_f - 1.0)
    return CcnComparison(advantage=s.n_i > threshold, threshold=threshold)


def opa_output_stats(scenario: RadarScenario) -> OpaStats:
    """Mean output photon numbers of the parametric-amplifier receiver.

    The receiver feeds return and idler into a low-gain amplifier whose idler
    output is a_out = sqrt(G) a_I + sqrt(G-1) a_R^dag; the conjugation converts
    the phase-sensitive cross correlation into a photon-number mean shift:

        n_j = G*N_S + (G-1)*(<a_R a_R^dag>_Hj) + 2*sqrt(G*(G-1))*Re<a_R a_I>_Hj
    """
    s = validate_scenario(scenario)
    g = s.g_opa
    moments = return_mode_moments(s)
    n0 = g * s.n_s + (g - 1.0) * (moments.n_r_h0 + 1.0)
    n1 = (
        g * s.n_s
        + (g - 1.0) * (moments.n_r_h1 + 1.0)
        + 2.0 * math.sqrt(g * (g - 1.0)) * moments.ps_cross_h1.real
    )
    m = s.m_modes
    return OpaStats(n0=n0, n1=n1, total_mean_h0=m * n0, total_mean_h1=m * n1, gain=g)


def interferometer_means(scenario: RadarScenario) -> InterferometerMeans:
    """Photon-counting means after combining return and idler on a 50-50 splitter.

    The port means are (<|a_R|^2> +/- 2 Re<a_R^* a_I> + <|a_I|^2>)/2.  The TMSV
    source has zero phase-insensitive cross correlation under both hypotheses,
    so the two ports stay balanced and the measurement carries no target
    signature beyond the direct-detection energy difference.
    """
    s = validate_scenario(scenario)
    moments = return_mode_moments(s)
    h0 = (moments.n_r_h0 + s.n_s) / 2.0
    h1 = (moments.n_r_h1 + s.n_s) / 2.0
    return InterferometerMeans(h0_plus=h0, h0_minus=h0, h1_plus=h1, h1_minus=h1)


def tmsv_number_dist(n_s: float, n_max: int = 64) -> NumberDistribution:
    """Joint photon-number probabilities p(n, n) of a TMSV, truncated at n_max.

    The joint distribution is diagonal: p(n, n) = N_S^n / (N_S+1)^(n+1), a
    geometric law whose truncated tail mass is reported exactly.
    """
    if not (n_s > 0.0):
        raise ScenarioError(f"n_s must be positive (got {n_s!r})")
    if n_max < 0:
        raise ScenarioError(f"n_max must be nonnegative (got {n_max!r})")
    n = np.arange(n_max + 1)
    ratio = n_s / (n_s + 1.0)
    probs = ratio**n / (n_s + 1.0)
    tail = ratio ** (n_max + 1)
    return NumberDistribution(probs, float(tail))


def coherent_number_dist(n_s: float, n_max: int = 64) -> NumberDistribution:
    """Poisson photon-number probabilities of a coherent state of mean n_s."""
    if not (n_s > 0.0):
        raise ScenarioError(f"n_s must be positive (got {n_s!r})")
    if n_max < 0:
        raise ScenarioError(f"n_max must be nonnegative (got {n_max!r})")
    n = np.arange(n_max + 1)
    log_p = n * math.log(n_s) - n_s - special.gammaln(n + 1)
    probs = np.exp(log_p)
    tail = float(special.gammainc(n_max + 1, n_s))  # P(Pois(n_s) > n_max)
    return NumberDistribution(probs, tail)
