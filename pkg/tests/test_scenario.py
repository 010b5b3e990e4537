import json
import math

import numpy as np
import pytest

from qiradar import (
    RadarScenario,
    Regime,
    ScenarioError,
    System,
    brightness_from_radiance,
    classify_regime,
    db,
    load_scenario,
    validate_scenario,
)


class TestValidation:
    def test_defaults_are_valid(self):
        s = validate_scenario(RadarScenario())
        assert s.kappa == 0.01 and s.n_b == 20.0 and s.m_modes == 2_000_000

    def test_fig5_parameters_valid(self):
        s = validate_scenario(
            RadarScenario(kappa=0.01, n_s=0.01, n_b=20.0, m_modes=2_000_000)
        )
        assert s.n_i == 1e3 and s.n_f == 1.0

    def test_kappa_zero_boundary_is_valid(self):
        assert validate_scenario(RadarScenario(kappa=0.0)).kappa == 0.0

    def test_kappa_out_of_range(self):
        with pytest.raises(ScenarioError, match="kappa"):
            validate_scenario(RadarScenario(kappa=1.5))

    @pytest.mark.parametrize(
        "field,value",
        [
            ("theta", -0.1),
            ("theta", 2 * math.pi),
            ("n_s", 0.0),
            ("n_b", -1.0),
            ("n_i", 0.0),
            ("n_f", 0.5),
            ("g_a", 0.0),
            ("m_modes", 0),
            ("m_modes", 2.5),
            ("n_pulses", -3),
            ("g_opa", 1.0),
            ("kappa_idler", 0.0),
            ("kappa_idler", 1.2),
            ("kappa_match", 0.0),
            ("k_bins", 0),
        ],
    )
    def test_out_of_range_fields_raise(self, field, value):
        with pytest.raises(ScenarioError, match=field):
            validate_scenario(RadarScenario(**{field: value}))

    def test_validation_never_clamps(self):
        # The offending value must be reported, not silently adjusted.
        with pytest.raises(ScenarioError, match="1.5"):
            validate_scenario(RadarScenario(kappa=1.5))

    def test_idempotent(self):
        once = validate_scenario(RadarScenario())
        assert validate_scenario(once) == once

    def test_gain_default_resolution(self):
        s = validate_scenario(RadarScenario(n_s=0.01, n_b=20.0))
        assert s.g_opa == pytest.approx(1.0 + 0.01 / math.sqrt(20.0), rel=1e-15)

    def test_integral_floats_coerced(self):
        s = validate_scenario(RadarScenario(m_modes=2e6))
        assert s.m_modes == 2_000_000 and isinstance(s.m_modes, int)


class TestScenarioFile:
    def test_load_and_override(self, tmp_path):
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps({"kappa": 0.02, "n_s": 0.05}))
        s = load_scenario(path, {"n_s": 0.07})
        assert s.kappa == 0.02 and s.n_s == 0.07

    def test_unknown_key_fails_closed(self, tmp_path):
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps({"kappa": 0.02, "snr": 10}))
        with pytest.raises(ScenarioError, match="snr"):
            load_scenario(path)

    def test_none_overrides_ignored(self):
        s = load_scenario(None, {"kappa": None})
        assert s.kappa == 0.01


class TestBrightnessFromRadiance:
    def test_telecom_band_sky(self):
        # 1.55 um daytime sky radiance of 10 W/m^2 sr um -> ~1e-6 photons/mode.
        nb = brightness_from_radiance(1.55e-6, 10.0)
        assert nb == pytest.approx(7.5e-7, rel=0.05)
        assert 1e-7 < nb < 1e-5

    def test_zero_radiance(self):
        assert brightness_from_radiance(1.55e-6, 0.0) == 0.0

    def test_linear_in_radiance(self):
        base = brightness_from_radiance(1.55e-6, 10.0)
        assert brightness_from_radiance(1.55e-6, 70.0) == pytest.approx(7 * base, rel=1e-14)

    def test_nonpositive_wavelength(self):
        with pytest.raises(ScenarioError):
            brightness_from_radiance(0.0, 10.0)


class TestDb:
    def test_examples(self):
        assert db(4.0) == pytest.approx(6.0206, abs=1e-4)
        assert db(1.0) == 0.0
        assert db(1e6) == pytest.approx(60.0, rel=1e-12)

    def test_nonpositive(self):
        with pytest.raises(ScenarioError):
            db(0.0)


class TestRegimeClassification:
    def test_sp_bad_at_boundary_ratio(self):
        s = RadarScenario(kappa=1e-4, n_b=1e-2, m_modes=10)
        report = classify_regime(s, System.SP, strictness=100.0)
        assert report.regime is Regime.BAD

    def test_qi_good(self):
        s = RadarScenario(kappa=1.0, n_b=1e-8, m_modes=10)
        report = classify_regime(s, System.QI_SP, strictness=100.0)
        assert report.regime is Regime.GOOD

    def test_equal_kappa_background_outside(self):
        s = RadarScenario(kappa=0.01, n_b=0.01, m_modes=10)
        for r in (1.0001, 2.0, 100.0):
            assert classify_regime(s, System.SP, r).regime is Regime.OUTSIDE

    def test_low_flux_condition_recorded_not_gating(self):
        # M*N_B = 0.1 violates the low-flux condition at r=100, yet the kappa
        # inequality alone fixes the regime.
        s = RadarScenario(kappa=1e-4, n_b=1e-2, m_modes=10)
        report = classify_regime(s, System.SP, strictness=100.0)
        flux = [c for c in report.conditions_checked if "m*n_b" in c.name]
        assert len(flux) == 1 and not flux[0].satisfied
        assert report.regime is Regime.BAD

    def test_gaussian_regime_needs_bright_background(self):
        dim = RadarScenario(kappa=0.001, n_s=0.001, n_b=20.0)
        assert classify_regime(dim, System.CS, 100.0).regime is Regime.OUTSIDE
        bright = RadarScenario(kappa=0.001, n_s=0.001, n_b=500.0)
        assert classify_regime(bright, System.QI_TMSV, 100.0).regime is Regime.BAD

    def test_monotone_in_strictness(self, rng):
        # A regime declared at ratio r must also be declared at every r' < r.
        for _ in range(200):
            s = RadarScenario(
                kappa=float(10 ** rng.uniform(-6, 0)),
                n_s=float(10 ** rng.uniform(-4, 1)),
                n_b=float(10 ** rng.uniform(-8, 4)),
                m_modes=int(10 ** rng.uniform(0, 6)),
            )
            system = list(System)[int(rng.integers(len(System)))]
            r_hi = float(10 ** rng.uniform(0.5, 3))
            r_lo = 1.0 + (r_hi - 1.0) * float(rng.uniform(0.1, 0.9))
            hi = classify_regime(s, system, r_hi).regime
            lo = classify_regime(s, system, r_lo).regime
            if hi is not Regime.OUTSIDE:
                assert lo is hi

    def test_strictness_must_exceed_one(self):
        with pytest.raises(ScenarioError):
            classify_regime(RadarScenario(), System.SP, strictness=1.0)
