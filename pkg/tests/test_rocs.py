import math

import numpy as np
import pytest

from qiradar import (
    Hypothesis,
    Radar,
    RadarScenario,
    SaddlePointError,
    ScenarioError,
    ccn_asymptotic_roc,
    chernoff_exponent,
    covariance_pair,
    cs_het_roc,
    cs_hom_roc,
    make_gaussian_mu,
    make_geometric_mu,
    mu_derivatives,
    mu_gaussian,
    mu_geometric,
    opa_output_stats,
    run_trials_gaussian,
    saddlepoint_pfpm,
    saddlepoint_roc,
    saddlepoint_roc_for_radar,
    validate_scenario,
)
from qiradar.special import gaussian_q, gaussian_q_inv

from .oracles import marcum_q_mpmath


class TestCsHetRoc:
    def test_headline_point(self, fig5_scenario):
        curve = cs_het_roc(fig5_scenario, [1e-2])
        # Oracle value of Q(sqrt(400/21), sqrt(-2 ln 0.01)) by quadrature.
        assert curve.pd[0] == pytest.approx(0.9289486269369, abs=1e-3)
        assert curve.pd[0] == pytest.approx(
            marcum_q_mpmath(math.sqrt(400.0 / 21.0), math.sqrt(-2.0 * math.log(1e-2))),
            abs=1e-9,
        )

    def test_chance_line_without_return(self):
        scenario = RadarScenario(kappa=0.0)
        pf = np.logspace(-6, -0.5, 12)
        curve = cs_het_roc(scenario, pf)
        np.testing.assert_allclose(curve.pd, pf, rtol=1e-12)

    def test_saturates_at_high_false_alarm(self, fig5_scenario):
        curve = cs_het_roc(fig5_scenario, [0.999])
        assert curve.pd[0] > 0.999

    def test_monotone_in_pf(self, fig5_scenario):
        curve = cs_het_roc(fig5_scenario, np.logspace(-7, -0.31, 40))
        assert np.all(np.diff(curve.pd) >= 0)


class TestCsHomRoc:
    def test_headline_point(self, fig5_scenario):
        curve = cs_hom_roc(fig5_scenario, [1e-2])
        assert curve.pd[0] == pytest.approx(0.9817320758043, abs=1e-9)

    def test_zero_deflection_chance_line(self):
        pf = np.logspace(-5, -0.5, 9)
        curve = cs_hom_roc(RadarScenario(kappa=0.0), pf)
        np.testing.assert_allclose(curve.pd, pf, rtol=1e-10)

    def test_monotone_in_modes(self):
        pds = [
            cs_hom_roc(RadarScenario(m_modes=m), [1e-2]).pd[0]
            for m in (10_000, 100_000, 1_000_000, 4_000_000)
        ]
        assert all(b > a for a, b in zip(pds, pds[1:]))


class TestCcnAsymptoticRoc:
    def test_headline_point(self, fig5_scenario):
        curve = ccn_asymptotic_roc(fig5_scenario, [1e-2])
        assert curve.pd[0] == pytest.approx(0.9792255301286, abs=1e-9)

    def test_deflections_nearly_match_homodyne(self, fig5_scenario):
        # Explains the overlap of the CS-Hom and CCN curves at bright background.
        het = ccn_asymptotic_roc(fig5_scenario, [1e-2]).parameters["deflection"]
        hom = cs_hom_roc(fig5_scenario, [1e-2]).parameters["deflection"]
        assert abs(het / hom - 1.0) < 0.025

    def test_chance_line(self):
        pf = np.logspace(-4, -0.5, 7)
        curve = ccn_asymptotic_roc(RadarScenario(kappa=0.0), pf)
        np.testing.assert_allclose(curve.pd, pf, rtol=1e-10)

    def test_noise_figure_enters_return_path(self):
        quiet = ccn_asymptotic_roc(RadarScenario(), [1e-2]).pd[0]
        noisy = ccn_asymptotic_roc(RadarScenario(n_f=3.0), [1e-2]).pd[0]
        assert noisy < quiet


class TestMuGaussian:
    def test_identical_hypotheses_vanish(self, fig5_scenario):
        cov0, _ = covariance_pair(fig5_scenario, Radar.QCN)
        for s in (0.1, 0.5, 0.9):
            assert mu_gaussian(cov0, cov0, 1000, s) == pytest.approx(0.0, abs=1e-12)

    def test_endpoints_vanish(self, fig5_scenario):
        cov0, cov1 = covariance_pair(fig5_scenario, Radar.QCN)
        for s in (0.0, 1.0):
            assert mu_gaussian(cov0, cov1, fig5_scenario.m_modes, s) == pytest.approx(
                0.0, abs=1e-9
            )

    def test_nonpositive_inside_unit_interval(self, fig5_scenario):
        cov0, cov1 = covariance_pair(fig5_scenario, Radar.QCN)
        mu = make_gaussian_mu(cov0, cov1, fig5_scenario.m_modes)
        for s in np.linspace(0.01, 0.99, 21):
            assert mu(float(s)) <= 1e-12

    def test_analytic_derivatives_match_differences(self, fig5_scenario):
        # Away from the symmetric point, where the finite differences are not
        # dominated by rounding noise in the heavily cancelling total mu.
        cov0, cov1 = covariance_pair(fig5_scenario, Radar.CCN)
        mu = make_gaussian_mu(cov0, cov1, fig5_scenario.m_modes)
        plain = lambda s: mu(s)  # hides the analytic fast path
        for s in (0.2, 0.8, 1.1):
            val_a, dot_a, ddot_a = mu.derivatives(s)
            val_n, dot_n, ddot_n = mu_derivatives(plain, s)
            assert val_a == pytest.approx(val_n, rel=1e-12)
            assert dot_a == pytest.approx(dot_n, rel=1e-4)
            assert ddot_a == pytest.approx(ddot_n, rel=1e-2)
        # At the near-symmetric tilt the derivative is tiny; agreement is
        # limited by the difference quotient's absolute noise floor.
        val_a, dot_a, _ = mu.derivatives(0.5)
        _, dot_n, _ = mu_derivatives(plain, 0.5)
        assert dot_a == pytest.approx(dot_n, abs=1e-4)

    def test_convexity_analytic(self, fig5_scenario):
        cov0, cov1 = covariance_pair(fig5_scenario, Radar.QCN)
        mu = make_gaussian_mu(cov0, cov1, fig5_scenario.m_modes)
        for s in np.linspace(0.01, 0.99, 33):
            assert mu.derivatives(float(s))[2] >= 0.0

    def test_headline_exponent_scale(self, fig5_scenario):
        # Heterodyne mode-pair detection runs at the coherent-state exponent
        # scale kappa*n_s/(4*(n_b+1)) per mode, not the full advantage.
        cov0, cov1 = covariance_pair(fig5_scenario, Radar.QCN)
        mu = make_gaussian_mu(cov0, cov1, 1)
        exponent, s_star = chernoff_exponent(mu)
        assert exponent == pytest.approx(1e-4 / (4.0 * 21.0), rel=1e-4)
        assert 0.45 < s_star < 0.55

    def test_against_monte_carlo_mgf(self, rng):
        # E_H0[exp(s*LLR)] estimated by simulation matches exp(mu(s)).
        scenario = validate_scenario(RadarScenario(kappa=0.1, n_s=0.1, m_modes=32))
        cov0, cov1 = covariance_pair(scenario, Radar.QCN)
        mu = make_gaussian_mu(cov0, cov1, 32)
        batch = run_trials_gaussian(scenario, Radar.QCN, Hypothesis.H0, 400_000, seed=5)
        llr = batch.statistics
        for s in (0.3, 0.5, 0.7):
            sample = np.exp(s * llr)
            est = float(np.mean(sample))
            se = float(np.std(sample) / math.sqrt(llr.size))
            assert abs(est - math.exp(mu(s))) < 6.0 * se

    def test_singular_covariance_rejected(self):
        with pytest.raises(ScenarioError):
            mu_gaussian(np.zeros((4, 4)), np.eye(4), 10, 0.5)


class TestMuGeometric:
    def test_equal_means_vanish(self):
        for s in (0.2, 0.5, 0.8):
            assert mu_geometric(0.4, 0.4, 100, s) == pytest.approx(0.0, abs=1e-12)

    def test_endpoints_vanish(self):
        for s in (0.0, 1.0):
            assert mu_geometric(0.3, 0.5, 1000, s) == pytest.approx(0.0, abs=1e-12)

    def test_headline_exponent_value(self, fig5_scenario):
        # Exact Chernoff exponent of the amplifier's photon-count statistics at
        # the stated gain; the idealized bright-background asymptote would be
        # kappa*n_s/(2*n_b) = 2.5e-6, a quarter larger than the true value here.
        stats = opa_output_stats(fig5_scenario)
        mu = make_geometric_mu(stats.n0, stats.n1, 1)
        exponent, _ = chernoff_exponent(mu)
        assert exponent == pytest.approx(1.8636480781e-6, rel=1e-6)

    def test_asymptote_recovered_in_regime(self):
        # The closed-form exponent emerges only deep in the dim-signal,
        # bright-background limit.
        scenario = validate_scenario(RadarScenario(kappa=0.01, n_s=1e-4, n_b=1e4))
        stats = opa_output_stats(scenario)
        mu = make_geometric_mu(stats.n0, stats.n1, 1)
        exponent, _ = chernoff_exponent(mu)
        target = 0.01 * 1e-4 / (2.0 * 1e4)
        assert exponent == pytest.approx(target, rel=0.03)

    def test_analytic_derivatives_match_differences(self, desk_scenario):
        stats = opa_output_stats(desk_scenario)
        mu = make_geometric_mu(stats.n0, stats.n1, desk_scenario.m_modes)
        plain = lambda s: mu(s)
        for s in (0.25, 0.5, 0.75):
            val_a, dot_a, ddot_a = mu.derivatives(s)
            val_n, dot_n, ddot_n = mu_derivatives(plain, s)
            assert val_a == pytest.approx(val_n, rel=1e-12)
            assert dot_a == pytest.approx(dot_n, rel=1e-6)
            assert ddot_a == pytest.approx(ddot_n, rel=1e-4)


class TestSaddlePoint:
    def test_exact_for_gaussian_shift(self):
        # For a Gaussian log-likelihood ratio the tilted pair is exact at every
        # tilt, reproducing P_F = Q(s d), P_M = Q((1-s) d).
        d = 4.417
        mu = lambda s: 0.5 * d * d * (s * s - s)
        pf_grid = np.logspace(-7, -0.31, 17)
        curve, _ = saddlepoint_roc(mu, pf_grid=pf_grid)
        expected_pm = gaussian_q(d - gaussian_q_inv(pf_grid))
        np.testing.assert_allclose(curve.pm, expected_pm, rtol=1e-6)

    def test_symmetric_tilt_balances_errors(self):
        mu = lambda s: 0.5 * 9.0 * (s * s - s)
        pf, pm = saddlepoint_pfpm(mu, 0.5)
        assert pf == pytest.approx(pm, rel=1e-9)

    def test_nonconvex_mu_rejected(self):
        mu = lambda s: s * (s - 1.0) * (s - 0.5)
        with pytest.raises(SaddlePointError) as err:
            saddlepoint_roc(mu, pf_grid=[1e-2])
        assert err.value.trace is not None

    def test_degenerate_hypotheses_fall_back_to_chance(self):
        scenario = RadarScenario(kappa=0.0)
        pf = np.logspace(-4, -0.5, 9)
        curve, _ = saddlepoint_roc_for_radar(scenario, Radar.QCN, pf)
        np.testing.assert_allclose(curve.pd, pf, rtol=1e-12)

    def test_trace_invariants(self, fig5_scenario):
        _, trace = saddlepoint_roc_for_radar(fig5_scenario, Radar.QCN, [1e-2])
        assert np.all(trace.mu <= 1e-9)
        assert np.all(trace.mu_ddot >= 0.0)
        assert np.all(np.diff(trace.pf) < 0.0)  # monotone in the tilt

    def test_variants_agree_to_leading_order(self, fig5_scenario):
        # The plain first-order form overshoots the tail-corrected one by the
        # Mills-ratio factor, which decays as the tilt deepens; both variants
        # stay exposed so the difference is measurable.
        cov0, cov1 = covariance_pair(fig5_scenario, Radar.QCN)
        mu = make_gaussian_mu(cov0, cov1, fig5_scenario.m_modes)
        ratios = []
        for s in (0.3, 0.5, 0.8):
            pf_q, pm_q = saddlepoint_pfpm(mu, s, variant="q")
            pf_p, pm_p = saddlepoint_pfpm(mu, s, variant="plain")
            assert pf_p >= pf_q and pm_p >= pm_q
            assert pf_p == pytest.approx(pf_q, rel=0.5)
            ratios.append(pf_p / pf_q)
        assert ratios[-1] < ratios[0]  # correction shrinks with deeper tilt
        assert ratios[-1] == pytest.approx(1.0, abs=0.15)

    def test_unknown_variant_rejected(self):
        mu = lambda s: 4.0 * (s * s - s)
        with pytest.raises(ScenarioError):
            saddlepoint_pfpm(mu, 0.5, variant="bogus")

    def test_bright_idler_collapses_radar_gap(self):
        scenario = RadarScenario(n_i=1e6)
        pf = np.logspace(-6, -0.31, 15)
        qcn, _ = saddlepoint_roc_for_radar(scenario, Radar.QCN, pf)
        ccn, _ = saddlepoint_roc_for_radar(scenario, Radar.CCN, pf)
        assert np.max(np.abs(qcn.pm - ccn.pm)) < 1e-3

    def test_deep_tail_requires_extended_tilt(self, fig5_scenario):
        # P_F = 1e-7 sits beyond the s = 1 tilt for the mode-pair radars; the
        # solver must keep going rather than stopping at the unit interval.
        curve, _ = saddlepoint_roc_for_radar(fig5_scenario, Radar.QCN, [1e-7])
        assert 0.5 < curve.pm[0] < 1.0

    def test_curve_monotone(self, fig5_scenario):
        pf = np.logspace(-7, -0.31, 30)
        curve, _ = saddlepoint_roc_for_radar(fig5_scenario, Radar.QI_OPA, pf)
        assert np.all(np.diff(curve.pd) >= 0)
        assert np.all(curve.pd >= curve.pf)


class TestSaddlePointVsSimulation:
    def test_desk_scale_mode_pair_miss_probability(self, desk_scenario, rng):
        # Saddle-point P_M at desk scale vs Monte Carlo at P_F = 1e-2.
        from qiradar import empirical_roc

        curve, _ = saddlepoint_roc_for_radar(desk_scenario, Radar.QCN, [1e-2])
        h0 = run_trials_gaussian(desk_scenario, Radar.QCN, Hypothesis.H0, 200_000, seed=8)
        h1 = run_trials_gaussian(desk_scenario, Radar.QCN, Hypothesis.H1, 200_000, seed=8)
        est = empirical_roc(h0, h1, [1e-2])
        assert (1.0 - est.pd[0]) == pytest.approx(curve.pm[0], rel=0.2)
