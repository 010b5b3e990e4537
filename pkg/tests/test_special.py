import math

import numpy as np
import pytest
from scipy import special as sp
from scipy import stats

from qiradar import DomainError, bessel_i0, bessel_i0e, gaussian_q, gaussian_q_inv, marcum_q

from .oracles import bessel_i0_quad, gaussian_q_quad, marcum_q_mpmath, marcum_q_quad


class TestGaussianQ:
    def test_symmetry_point(self):
        assert gaussian_q(0.0) == 0.5

    def test_symmetry_identity_on_grid(self):
        x = np.linspace(-6, 6, 121)
        np.testing.assert_allclose(gaussian_q(x) + gaussian_q(-x), 1.0, atol=1e-14)

    def test_matches_quadrature(self):
        for x in np.linspace(-8.0, 8.0, 33):
            assert gaussian_q(float(x)) == pytest.approx(gaussian_q_quad(float(x)), abs=1e-12)

    def test_inverse_value(self):
        assert gaussian_q_inv(0.01) == pytest.approx(2.3263479, abs=1e-6)

    def test_roundtrip(self):
        for p in (1e-12, 1e-7, 1e-3, 0.01, 0.3, 0.5, 0.77, 1 - 1e-9):
            assert abs(gaussian_q(gaussian_q_inv(p)) - p) <= 1e-12

    def test_inverse_domain(self):
        for bad in (0.0, 1.0, -0.1, 2.0):
            with pytest.raises(DomainError):
                gaussian_q_inv(bad)


class TestBesselI0:
    def test_small_argument_series(self):
        assert bessel_i0(0.0) == 1.0
        assert bessel_i0(2.0) == pytest.approx(sp.i0(2.0), rel=1e-14)

    def test_matches_integral_representation(self):
        for x in (0.1, 1.0, 5.0, 12.0, 19.5, 25.0, 80.0, 300.0):
            assert bessel_i0(x) == pytest.approx(bessel_i0_quad(x), rel=1e-11)

    def test_scaled_across_branch_seam(self):
        xs = np.concatenate([np.linspace(1e-3, 19.99, 60), np.linspace(20.01, 500, 60)])
        ours = np.array([bessel_i0e(float(x)) for x in xs])
        ref = sp.i0e(xs)
        np.testing.assert_allclose(ours, ref, rtol=1e-13)

    def test_even_function(self):
        assert bessel_i0(-3.0) == bessel_i0(3.0)

    def test_overflow_to_inf(self):
        assert math.isinf(bessel_i0(800.0))
        assert bessel_i0e(800.0) < 1.0


class TestMarcumQ:
    def test_full_range_threshold(self):
        assert marcum_q(3.7, 0.0) == 1.0

    def test_zero_signal_is_rayleigh_tail(self):
        for b in (0.1, 1.0, 3.0, 7.0):
            assert marcum_q(0.0, b) == math.exp(-b * b / 2.0)

    def test_reference_point(self):
        # Independent oracle value of the defining integral at (1, 1).
        assert marcum_q(1.0, 1.0) == pytest.approx(0.7328798037968203, abs=1e-9)

    def test_against_quadrature_grid(self, rng):
        for _ in range(150):
            a = float(rng.uniform(0.0, 12.0))
            b = float(rng.uniform(0.0, 12.0))
            assert marcum_q(a, b) == pytest.approx(marcum_q_quad(a, b), abs=1e-10)

    def test_against_arbitrary_precision_spots(self):
        spots = [(0.5, 0.5), (1.0, 1.0), (4.36, 3.03), (8.0, 9.0), (20.0, 19.0), (45.0, 47.0)]
        for a, b in spots:
            assert marcum_q(a, b) == pytest.approx(marcum_q_mpmath(a, b), abs=1e-10)

    def test_against_noncentral_chi_square(self):
        # Q(a, b) is the survival of a 2-dof noncentral chi-square at b^2.
        for a, b in [(1, 2), (5, 5), (30, 28), (100, 101), (0.3, 9), (9, 0.3)]:
            assert marcum_q(a, b) == pytest.approx(
                stats.ncx2.sf(b * b, 2, a * a), abs=2e-12
            )

    def test_branch_consistency(self):
        # Evaluate both computation branches at the same points near the seam.
        from qiradar.special import _marcum_bessel_scaled, _marcum_window_series

        for a in (0.7, 2.0, 5.4772, 9.0, 12.0):
            b = 30.0 / a
            assert _marcum_window_series(a, b) == pytest.approx(
                _marcum_bessel_scaled(a, b), abs=1e-12
            )

    def test_monotone_decreasing_in_threshold(self):
        b_grid = np.linspace(0.0, 12.0, 200)
        q = marcum_q(3.0, b_grid)
        assert np.all(np.diff(q) <= 1e-15)
        assert np.all((q >= 0.0) & (q <= 1.0))

    def test_equal_argument_identity(self):
        # Q(a, a) = (1 + e^{-a^2} I0(a^2)) / 2.
        for a in (0.5, 1.5, 4.0, 9.0):
            expected = 0.5 * (1.0 + sp.i0e(a * a))
            assert marcum_q(a, a) == pytest.approx(expected, abs=1e-12)

    def test_large_separation_saturates(self):
        assert marcum_q(50.0, 1.0) == pytest.approx(1.0, abs=1e-12)
        assert marcum_q(1.0, 50.0) == pytest.approx(0.0, abs=1e-12)

    def test_negative_arguments_rejected(self):
        with pytest.raises(DomainError):
            marcum_q(-1.0, 1.0)
        with pytest.raises(DomainError):
            marcum_q(1.0, -1.0)

    def test_broadcasting(self):
        out = marcum_q(2.0, np.array([0.5, 1.5, 2.5]))
        assert out.shape == (3,)
        assert np.all(np.diff(out) < 0)
