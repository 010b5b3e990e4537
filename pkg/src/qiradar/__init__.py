"""Detection-theory laboratory for quantum-illumination and correlated-noise radars.

The package models target detection with entangled (TMSV), classically
correlated, and coherent-state transmitters: closed-form error-probability
bounds, Gaussian mode-pair covariance models, exact and saddle-point receiver
operating characteristics, and reproducible Monte Carlo simulation of the
decision statistics.
"""

__version__ = "0.1.0"

from .bounds import (
    BoundResult,
    Receiver,
    apply_mismatch,
    crossover_m,
    cs_bhattacharyya_lower_bound,
    cs_chernoff_bound,
    idler_loss_bound,
    mismatch_penalty,
    multibin_penalty_db,
    opa_chernoff_bound,
    qi_chernoff_bound,
    single_photon_bound,
    single_photon_qi_bound,
    unit_coherent_pulse_bound,
)
from .gaussian_states import (
    CcnComparison,
    CovarianceForm,
    CrossCorrReport,
    InterferometerMeans,
    ModePairCovariance,
    NumberDistribution,
    OpaStats,
    ReturnModeMoments,
    ccn_beats_qcn,
    ccn_covariance,
    check_covariance,
    classical_ps_limit,
    coherent_number_dist,
    covariance_pair,
    interferometer_means,
    opa_output_stats,
    qcn_covariance,
    quantum_ps_limit,
    return_mode_moments,
    tmsv_moments,
    tmsv_number_dist,
    transform_covariance,
)
from .montecarlo import (
    BudgetError,
    FadingModel,
    RocEstimate,
    TrialBatch,
    empirical_roc,
    llr_gaussian,
    run_trials,
    run_trials_cs,
    run_trials_gaussian,
    run_trials_opa,
    sample_mode_pair,
    wilson_interval,
)
from .rocs import (
    RocCurve,
    RocMethod,
    SaddlePointError,
    SaddlePointTrace,
    ccn_asymptotic_roc,
    chernoff_exponent,
    cs_het_roc,
    cs_hom_roc,
    make_gaussian_mu,
    make_geometric_mu,
    mu_derivatives,
    mu_gaussian,
    mu_geometric,
    saddlepoint_pfpm,
    saddlepoint_roc,
    saddlepoint_roc_for_radar,
)
from .scenario import (
    Hypothesis,
    Radar,
    RadarScenario,
    Regime,
    RegimeReport,
    ScenarioError,
    System,
    brightness_from_radiance,
    classify_regime,
    db,
    load_scenario,
    validate_scenario,
)
from .special import (
    DomainError,
    bessel_i0,
    bessel_i0e,
    gaussian_q,
    gaussian_q_inv,
    marcum_q,
)
