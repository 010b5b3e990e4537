"""Monte Carlo simulation of the radar decision statistics.

Each radar's per-trial decision statistic is simulated under both hypotheses
and thresholded at empirical quantiles to estimate ROCs.  Randomness comes
from counter-based Philox streams keyed by (seed, radar, hypothesis, block),
so results are bit-identical for any number of workers or any parallel
schedule: a block of trials always sees the same stream no matter where it
runs.

Two engines exist for the Gaussian mode-pair radars:

* ``spectral`` (default): the log-likelihood-ratio statistic of M iid mode
  pairs is a quadratic form in Gaussians, which diagonalizes into a fixed
  4-weight combination of independent chi-square(M) variables.  Sampling those
  4 variables per trial reproduces the statistic's distribution exactly at
  O(trials) cost instead of O(trials * M).
* ``modewise``: literal simulation, drawing all M mode pairs and summing
  per-mode log-likelihood ratios.  Kept as the direct route and cross-checked
  against the spectral engine in the tests.

The photon-counting receiver's total count over M modes is sampled exactly as
a negative binomial (the sum of M iid Bose-Einstein modes).  The coherent-state
radars reduce to their normalized sufficient statistics: a Rice envelope for
heterodyne and a unit-variance Gaussian shift for homodyne.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.linalg.lapack import dpstrf

from .gaussian_states import (
    CovarianceForm,
    ModePairCovariance,
    covariance_pair,
    opa_output_stats,
)
from .scenario import Hypothesis, Radar, RadarScenario, ScenarioError, validate_scenario

#: Largest trials * m_modes a single run may request without an explicit override.
DEFAULT_SAMPLE_BUDGET = 1_000_000_000
#: Environment variable consulted for the default budget only.
BUDGET_ENV_VAR = "QIRADAR_BUDGET"

#: Trials per reproducibility block.  Fixed: changing it changes the streams.
BLOCK_TRIALS = 8192

_RADAR_CODE = {
    Radar.QCN: 1,
    Radar.CCN: 2,
    Radar.CS_HET: 3,
    Radar.CS_HOM: 4,
    Radar.QI_OPA: 5,
}


class BudgetError(RuntimeError):
    """A run would exceed the configured sample budget."""


class FactorizationError(ScenarioError):
    """A covariance cannot be factored within the PSD tolerance."""


@dataclass(frozen=True)
class FadingModel:
    """Per-trial draw of the target return's amplitude and phase.

    ``rayleigh_uniform`` draws sqrt(kappa) Rayleigh (so kappa is exponential
    with mean ``mean_kappa``, clipped to the physical [0, 1] range) and theta
    uniform on [0, 2*pi), independently for every trial.
    """

    kind: str = "none"  # "none" | "rayleigh_uniform"
    mean_kappa: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "rayleigh_uniform"):
            raise ScenarioError(f"unknown fading kind {self.kind!r}")
        if self.kind == "rayleigh_uniform" and not (0.0 < self.mean_kappa < 1.0):
            raise ScenarioError(
                f"rayleigh fading needs mean_kappa in (0,1) (got {self.mean_kappa!r})"
            )

    @classmethod
    def none(cls) -> "FadingModel":
        return cls()

    @classmethod
    def rayleigh(cls, mean_kappa: float) -> "FadingModel":
        return cls("rayleigh_uniform", mean_kappa)


@dataclass(frozen=True)
class TrialBatch:
    radar: Radar
    hypothesis: Hypothesis
    statistics: np.ndarray
    m_modes: int
    trials: int
    seed: int
    fading: FadingModel
    engine: str
    scenario: RadarScenario

    def __post_init__(self):
        arr = np.asarray(self.statistics)
        arr.setflags(write=False)
        object.__setattr__(self, "statistics", arr)
        if arr.shape != (self.trials,):
            raise ScenarioError("statistics length must equal the trial count")

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            fh.write("trial,statistic\n")
            for i, value in enumerate(self.statistics):
                fh.write(f"{i},{float(value):.12g}\n")


@dataclass(frozen=True)
class RocEstimate:
    radar: Radar
    pf: np.ndarray
    pd: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    reliable: np.ndarray
    pf_achieved: np.ndarray
    trials: int
    method: str = "monte-carlo"

    def __post_init__(self):
        for name in ("pf", "pd", "ci_low", "ci_high", "reliable", "pf_achieved"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            fh.write("pf,pd,ci_low,ci_high,trials\n")
            for pf, pd, lo, hi in zip(self.pf, self.pd, self.ci_low, self.ci_high):
                fh.write(f"{pf:.12g},{pd:.12g},{lo:.12g},{hi:.12g},{self.trials}\n")


def default_budget() -> int:
    env = os.environ.get(BUDGET_ENV_VAR)
    if env is not None:
        try:
            return int(float(env))
        except ValueError as exc:
            raise ScenarioError(f"bad {BUDGET_ENV_VAR} value {env!r}") from exc
    return DEFAULT_SAMPLE_BUDGET


def _check_budget(trials: int, m_modes: int, budget: Optional[int]) -> None:
    limit = default_budget() if budget is None else int(budget)
    requested = trials * m_modes
    if requested > limit:
        raise BudgetError(
            f"run requests {requested:.3g} samples (trials*m_modes) "
            f"but the budget is {limit:.3g}; raise --budget to override"
        )


def _block_rng(seed: int, radar: Radar, hypothesis: Hypothesis, block: int) -> np.random.Generator:
    context = (_RADAR_CODE[radar] << 56) | (
        (1 if hypothesis is Hypothesis.H1 else 0) << 48
    ) | block
    key = (int(seed) << 64) | context
    return np.random.Generator(np.random.Philox(key=key))


def wilson_interval(successes: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        return 0.0, 1.0
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2.0 * n)) / denom
    half = (z / denom) * math.sqrt(phat * (1.0 - phat) / n + z * z / (4.0 * n * n))
    return max(0.0, center - half), min(1.0, center + half)


def _factor_psd(matrix: np.ndarray) -> np.ndarray:
    """Factor F with F F^T = matrix; pivoted Cholesky for semidefinite inputs."""
    matrix = np.asarray(matrix, dtype=float)
    trace = float(np.trace(matrix))
    min_eig = float(np.linalg.eigvalsh(matrix)[0]) if matrix.size else 0.0
    if min_eig < -1e-10 * max(trace, 1e-300):
        raise FactorizationError(
            f"matrix is not PSD within tolerance (min eigenvalue {min_eig:g})"
        )
    try:
        return np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError:
        pass
    c, piv, rank, info = dpstrf(matrix, lower=1)
    if info < 0:
        raise FactorizationError(f"pivoted Cholesky failed (info={info})")
    lower = np.tril(c)
    lower[:, rank:] = 0.0
    factor = np.zeros_like(lower)
    factor[piv - 1, :] = lower
    return factor


def sample_mode_pair(cov, rng: np.random.Generator, size: Optional[int] = None):
    """Zero-mean Gaussian quadrature draws with the given mode-pair covariance."""
    matrix = cov.matrix if isinstance(cov, ModePairCovariance) else np.asarray(cov, float)
    factor = _factor_psd(matrix)
    n = 1 if size is None else int(size)
    z = rng.standard_normal((n, matrix.shape[0]))
    out = z @ factor.T
    return out[0] if size is None else out


def llr_gaussian(x, cov_h0, cov_h1):
    """Log-likelihood ratio of zero-mean Gaussian hypotheses at sample(s) x.

    llr = 1/2 x^T (S0^-1 - S1^-1) x + 1/2 ln(det S0 / det S1), broadcast over
    leading axes of ``x``.
    """
    s0 = cov_h0.matrix if isinstance(cov_h0, ModePairCovariance) else np.asarray(cov_h0, float)
    s1 = cov_h1.matrix if isinstance(cov_h1, ModePairCovariance) else np.asarray(cov_h1, float)
    sign0, logdet0 = np.linalg.slogdet(s0)
    sign1, logdet1 = np.linalg.slogdet(s1)
    if sign0 <= 0 or sign1 <= 0:
        raise FactorizationError("hypothesis covariances must be positive definite")
    diff = np.linalg.inv(s0) - np.linalg.inv(s1)
    x = np.asarray(x, dtype=float)
    quad = np.einsum("...i,ij,...j->...", x, diff, x)
    return 0.5 * quad + 0.5 * (logdet0 - logdet1)


# ---------------------------------------------------------------------------
# Block workers.  Module-level so process pools can pickle them; each block is
# fully determined by its task tuple, independent of which worker runs it.
# ---------------------------------------------------------------------------


def _transformed_h1_batch(scenario: RadarScenario, radar: Radar, kappa: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Stacked transformed H1 covariances for per-trial (kappa, theta) draws."""
    s = scenario
    n = kappa.shape[0]
    if radar is Radar.QCN:
        idler = 1.0 + (s.n_f - 1.0) / (s.n_s + 1.0)
    else:
        idler = 1.0 + s.n_f / s.n_i
    out = np.zeros((n, 4, 4))
    ret = 0.5 * (kappa * s.n_s + s.n_b + s.n_f)
    out[:, 0, 0] = ret
    out[:, 1, 1] = ret
    out[:, 2, 2] = 0.5 * idler
    out[:, 3, 3] = 0.5 * idler
    c = 0.5 * np.sqrt(kappa * s.n_s)
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    out[:, 0, 2] = c * cos_t
    out[:, 0, 3] = -c * sin_t
    out[:, 1, 2] = c * sin_t
    out[:, 1, 3] = c * cos_t
    out[:, 2:, :2] = np.swapaxes(out[:, :2, 2:], 1, 2)
    return out


def _gaussian_block(task: tuple) -> np.ndarray:
    (scenario, radar, hypothesis, fading, engine, seed, block, n) = task
    rng = _block_rng(seed, radar, hypothesis, block)
    cov0, cov1 = covariance_pair(scenario, radar, CovarianceForm.TRANSFORMED)
    s0, s1 = cov0.matrix, cov1.matrix
    m = scenario.m_modes

    if fading.kind == "rayleigh_uniform":
        # Clairvoyant statistic: the per-trial (kappa, theta) draw parameterizes
        # the likelihood ratio under both hypotheses; only the H1 data use it.
        kappa = np.minimum(rng.exponential(fading.mean_kappa, n), 1.0)
        theta = rng.uniform(0.0, 2.0 * math.pi, n)
        s1_batch = _transformed_h1_batch(scenario, radar, kappa, theta)
        inv0 = np.linalg.inv(s0)
        inv1 = np.linalg.inv(s1_batch)
        logdet0 = np.linalg.slogdet(s0)[1]
        logdet1 = np.linalg.slogdet(s1_batch)[1]
        diff = inv0[None, :, :] - inv1
        const = 0.5 * m * (logdet0 - logdet1)
        sample_cov = s1_batch if hypothesis is Hypothesis.H1 else np.broadcast_to(s0, (n, 4, 4))
        if engine == "spectral":
            factor = np.linalg.cholesky(sample_cov)
            core = np.swapaxes(factor, 1, 2) @ diff @ factor
            lam = np.linalg.eigvalsh(0.5 * (core + np.swapaxes(core, 1, 2)))
            chi = rng.chisquare(m, size=(n, 4))
            return 0.5 * np.einsum("ni,ni->n", lam, chi) + const
        stats = np.empty(n)
        for i in range(n):
            x = sample_mode_pair(sample_cov[i], rng, size=m)
            quad = np.einsum("ki,ij,kj->", x, diff[i], x)
            stats[i] = 0.5 * quad + const[i]
        return stats

    inv0 = np.linalg.inv(s0)
    inv1 = np.linalg.inv(s1)
    diff = inv0 - inv1
    const = 0.5 * m * (np.linalg.slogdet(s0)[1] - np.linalg.slogdet(s1)[1])
    sample_cov = s1 if hypothesis is Hypothesis.H1 else s0
    if engine == "spectral":
        factor = np.linalg.cholesky(sample_cov)
        core = factor.T @ diff @ factor
        lam = np.linalg.eigvalsh(0.5 * (core + core.T))
        chi = rng.chisquare(m, size=(n, 4))
        return 0.5 * chi @ lam + const
    if engine != "modewise":
        raise ScenarioError(f"unknown engine {engine!r}")
    factor = _factor_psd(sample_cov)
    stats = np.zeros(n)
    # Sub-chunk the (trials, modes) plane to bound memory; the stream is
    # consumed in a fixed order so chunking cannot change the draws.
    max_rows = max(1, 4_000_000 // max(m, 1))
    for start in range(0, n, max_rows):
        stop = min(start + max_rows, n)
        z = rng.standard_normal((stop - start, m, 4))
        x = z @ factor.T
        stats[start:stop] = 0.5 * np.einsum("nki,ij,nkj->n", x, diff, x) + const
    return stats


def _opa_block(task: tuple) -> np.ndarray:
    (scenario, hypothesis, seed, block, n) = task
    rng = _block_rng(seed, Radar.QI_OPA, hypothesis, block)
    stats = opa_output_stats(scenario)
    mean = stats.n1 if hypothesis is Hypothesis.H1 else stats.n0
    # Sum of M iid Bose-Einstein modes of mean n is negative binomial.
    return rng.negative_binomial(scenario.m_modes, 1.0 / (1.0 + mean), n)


def _cs_block(task: tuple) -> np.ndarray:
    (scenario, radar, hypothesis, seed, block, n) = task
    rng = _block_rng(seed, radar, hypothesis, block)
    s = scenario
    present = hypothesis is Hypothesis.H1
    if radar is Radar.CS_HET:
        # Normalized matched-filter envelope: Rice(a, 1) vs Rayleigh.
        a = math.sqrt(2.0 * s.m_modes * s.kappa * s.n_s / (s.n_b + 1.0)) if present else 0.0
        in_phase = rng.standard_normal(n) + a
        quadrature = rng.standard_normal(n)
        return np.hypot(in_phase, quadrature)
    # Normalized homodyne statistic: unit-variance Gaussian shift.
    d = math.sqrt(4.0 * s.m_modes * s.kappa * s.n_s / (2.0 * s.n_b + 1.0)) if present else 0.0
    return rng.standard_normal(n) + d


def _run_blocks(worker, tasks: list, workers: int) -> np.ndarray:
    if workers <= 1 or len(tasks) <= 1:
        parts = [worker(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(worker, tasks))
    return np.concatenate(parts) if parts else np.empty(0)


def _block_layout(trials: int) -> list[tuple[int, int]]:
    return [
        (block, min(BLOCK_TRIALS, trials - block * BLOCK_TRIALS))
        for block in range((trials + BLOCK_TRIALS - 1) // BLOCK_TRIALS)
    ]


def run_trials_gaussian(
    scenario: RadarScenario,
    radar: Radar,
    hypothesis: Hypothesis,
    trials: int,
    seed: int,
    fading: Optional[FadingModel] = None,
    engine: str = "spectral",
    workers: int = 1,
    budget: Optional[int] = None,
) -> TrialBatch:
    """Per-trial log-likelihood-ratio statistics for the QCN or CCN radar.

    The statistic is the exact M-mode Gaussian log-likelihood ratio; see the
    module docstring for the two sampling engines.  Results depend only on
    (seed, scenario, radar, hypothesis, fading, engine, trials), never on the
    worker count.
    """
    s = validate_scenario(scenario)
    radar = Radar(radar)
    if radar not in (Radar.QCN, Radar.CCN):
        raise ScenarioError("run_trials_gaussian handles the qcn and ccn radars")
    if engine not in ("spectral", "modewise"):
        raise ScenarioError(f"unknown engine {engine!r}")
    hypothesis = Hypothesis(hypothesis)
    fading = fading or FadingModel.none()
    trials = int(trials)
    _check_budget(trials, s.m_modes, budget)
    tasks = [
        (s, radar, hypothesis, fading, engine, int(seed), block, n)
        for block, n in _block_layout(trials)
    ]
    stats = _run_blocks(_gaussian_block, tasks, workers)
    return TrialBatch(radar, hypothesis, stats, s.m_modes, trials, int(seed), fading, engine, s)


def run_trials_opa(
    scenario: RadarScenario,
    hypothesis: Hypothesis,
    trials: int,
    seed: int,
    workers: int = 1,
    budget: Optional[int] = None,
) -> TrialBatch:
    """Total photon counts of the parametric-amplifier receiver over M modes."""
    s = validate_scenario(scenario)
    hypothesis = Hypothesis(hypothesis)
    trials = int(trials)
    _check_budget(trials, s.m_modes, budget)
    tasks = [(s, hypothesis, int(seed), block, n) for block, n in _block_layout(trials)]
    stats = _run_blocks(_opa_block, tasks, workers)
    return TrialBatch(
        Radar.QI_OPA, hypothesis, stats, s.m_modes, trials, int(seed), FadingModel.none(), "counts", s
    )


def run_trials_cs(
    scenario: RadarScenario,
    radar: Radar,
    hypothesis: Hypothesis,
    trials: int,
    seed: int,
    workers: int = 1,
    budget: Optional[int] = None,
) -> TrialBatch:
    """Normalized sufficient statistics for the coherent-state radars."""
    s = validate_scenario(scenario)
    radar = Radar(radar)
    if radar not in (Radar.CS_HET, Radar.CS_HOM):
        raise ScenarioError("run_trials_cs handles the cs-het and cs-hom radars")
    hypothesis = Hypothesis(hypothesis)
    trials = int(trials)
    _check_budget(trials, s.m_modes, budget)
    tasks = [(s, radar, hypothesis, int(seed), block, n) for block, n in _block_layout(trials)]
    stats = _run_blocks(_cs_block, tasks, workers)
    return TrialBatch(
        radar, hypothesis, stats, s.m_modes, trials, int(seed), FadingModel.none(), "sufficient", s
    )


def run_trials(
    scenario: RadarScenario,
    radar: Radar,
    hypothesis: Hypothesis,
    trials: int,
    seed: int,
    fading: Optional[FadingModel] = None,
    workers: int = 1,
    budget: Optional[int] = None,
) -> TrialBatch:
    """Dispatch to the simulator for any of the five radars."""
    radar = Radar(radar)
    if radar in (Radar.QCN, Radar.CCN):
        return run_trials_gaussian(
            scenario, radar, hypothesis, trials, seed,
            fading=fading, workers=workers, budget=budget,
        )
    if fading is not None and fading.kind != "none":
        raise ScenarioError("fading is only modeled for the mode-pair radars")
    if radar is Radar.QI_OPA:
        return run_trials_opa(scenario, hypothesis, trials, seed, workers=workers, budget=budget)
    return run_trials_cs(scenario, radar, hypothesis, trials, seed, workers=workers, budget=budget)


def empirical_roc(
    batch_h0: TrialBatch,
    batch_h1: TrialBatch,
    pf_grid,
    z: float = 1.959963984540054,
) -> RocEstimate:
    """Threshold the H0 statistic at empirical quantiles of each target P_F.

    P_D is the H1 exceedance fraction with a Wilson interval at the given z.
    Targets below 1/trials cannot be calibrated from the H0 sample and are
    flagged unreliable.
    """
    if batch_h0.hypothesis is not Hypothesis.H0 or batch_h1.hypothesis is not Hypothesis.H1:
        raise ScenarioError("empirical_roc expects (H0 batch, H1 batch)")
    if batch_h0.radar is not batch_h1.radar or batch_h0.scenario != batch_h1.scenario:
        raise ScenarioError("batches must share a radar and scenario")
    pf = np.atleast_1d(np.asarray(pf_grid, dtype=float))
    if np.any(pf <= 0.0) or np.any(pf >= 1.0):
        raise ScenarioError("false-alarm grid must lie in (0, 1)")
    order = np.argsort(pf)
    pf = pf[order]
    h0 = np.asarray(batch_h0.statistics, dtype=float)
    h1 = np.asarray(batch_h1.statistics, dtype=float)
    n1 = h1.size
    thresholds = np.quantile(h0, 1.0 - pf)
    pd = np.empty_like(pf)
    lo = np.empty_like(pf)
    hi = np.empty_like(pf)
    achieved = np.empty_like(pf)
    for i, thr in enumerate(thresholds):
        hits = int(np.count_nonzero(h1 > thr))
        pd[i] = hits / n1
        lo[i], hi[i] = wilson_interval(hits, n1, z)
        achieved[i] = np.count_nonzero(h0 > thr) / h0.size
    reliable = pf >= 1.0 / max(h0.size, 1)
    return RocEstimate(batch_h0.radar, pf, pd, lo, hi, reliable, achieved, trials=n1)
