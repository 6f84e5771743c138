"""Kernel checks against independent oracles (mpmath/scipy quadrature,
hand Maclaurin sums, textbook identities)."""

import math

import mpmath as mp
import numpy as np
import pytest
import scipy.integrate as integrate
import scipy.special as sp

from orislink import specfun

mp.mp.dps = 40


def maclaurin_erf(x: float) -> float:
    # alternating Maclaurin series, summed to machine precision
    total = 0.0
    term = x
    k = 0
    while abs(term) > 1e-20 * max(abs(total), 1.0):
        total += term
        k += 1
        term = term * (-x * x) / k * (2 * k - 1) / (2 * k + 1)
    return 2.0 / math.sqrt(math.pi) * total


class TestErf:
    def test_origin(self):
        assert specfun.erf(0.0) == 0.0

    def test_limit(self):
        assert specfun.erf(40.0) == 1.0
        assert specfun.erf(-40.0) == -1.0

    def test_maclaurin_oracle_point(self):
        # frozen from the oracle below: maclaurin_erf(0.10444) = 0.1174208...
        assert specfun.erf(0.10444) == pytest.approx(0.11742, abs=1e-5)
        assert specfun.erf(0.10444) == pytest.approx(maclaurin_erf(0.10444), abs=1e-14)

    def test_odd(self):
        for x in (0.3, 1.7, 4.2):
            assert specfun.erf(-x) == -specfun.erf(x)

    def test_against_high_precision(self):
        for x in np.linspace(-6, 6, 121):
            assert specfun.erf(float(x)) == pytest.approx(float(mp.erf(x)), abs=1e-13)


class TestErfc:
    def test_zero(self):
        assert specfun.erfc(0.0) == 1.0

    def test_quadrature_oracle_at_one(self):
        oracle = float(2 / mp.sqrt(mp.pi) * mp.quad(lambda t: mp.e ** (-t * t), [1, mp.inf]))
        assert specfun.erfc(1.0) == pytest.approx(oracle, abs=1e-6)
        assert specfun.erfc(1.0) == pytest.approx(0.157299, abs=1e-6)

    def test_large_argument_positive(self):
        val = specfun.erfc(10.0)
        assert 0.0 < val < 1e-40

    def test_relative_accuracy_band(self):
        # acceptance criterion 3 runs the full [0, 6] band; spot-check here
        for x in (0.25, 0.999, 1.001, 2.0, 3.5, 5.0, 6.0):
            oracle = float(2 / mp.sqrt(mp.pi) * mp.quad(lambda t: mp.e ** (-t * t), [x, mp.inf]))
            assert abs(specfun.erfc(x) - oracle) / oracle < 1e-10

    def test_complement_identity(self):
        for x in np.linspace(-8, 8, 161):
            total = specfun.erf(float(x)) + specfun.erfc(float(x))
            assert abs(total - 1.0) <= specfun.DEFAULT_TOL.rel_tol

    def test_negative_reflection(self):
        assert specfun.erfc(-3.0) == pytest.approx(2.0 - specfun.erfc(3.0), abs=1e-15)

    def test_vector_matches_scalar(self):
        x = np.linspace(-7, 7, 301)
        vec = specfun.erfc(x)
        scl = np.array([specfun.erfc(float(v)) for v in x])
        assert np.max(np.abs(vec - scl)) < 1e-12


class TestLogErfc:
    def test_matches_direct_log_small(self):
        for x in (-4.0, -1.0, 0.0, 1.5, 2.5):
            assert specfun.log_erfc(x) == pytest.approx(math.log(specfun.erfc(x)), rel=1e-12)

    def test_far_beyond_underflow(self):
        # erfc(40) underflows to 0 in doubles; the log path keeps going
        for x in (30.0, 100.0, 500.0):
            oracle = float(mp.log(mp.erfc(x)))
            assert specfun.log_erfc(x) == pytest.approx(oracle, rel=1e-13)

    def test_vector_matches_scalar(self):
        x = np.linspace(-5, 60, 401)
        vec = specfun.log_erfc(x)
        scl = np.array([specfun.log_erfc(float(v)) for v in x])
        assert np.max(np.abs(vec - scl)) < 1e-10


class TestGaussQ:
    def test_half_at_zero(self):
        assert specfun.gauss_q(0.0) == 0.5

    def test_limit(self):
        assert specfun.gauss_q(-45.0) == pytest.approx(1.0, abs=1e-15)

    def test_unit_point(self):
        oracle = 0.5 * float(mp.erfc(1 / mp.sqrt(2)))
        assert specfun.gauss_q(1.0) == pytest.approx(oracle, abs=1e-12)
        assert specfun.gauss_q(1.0) == pytest.approx(0.158655, abs=1e-6)


class TestGamma:
    def test_half(self):
        assert specfun.gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)

    def test_factorial(self):
        assert specfun.gamma_fn(5.0) == 24.0

    def test_quadrature_oracle(self):
        x = 0.801
        oracle, err = integrate.quad(lambda t: t ** (x - 1) * math.exp(-t), 0, 50, limit=200)
        assert err < 1e-10
        assert specfun.gamma_fn(x) == pytest.approx(oracle, abs=1e-4)

    def test_recursion_property(self):
        for x in (0.3, 1.7, 6.4, 11.0):
            lhs = specfun.gamma_fn(x + 1.0)
            rhs = x * specfun.gamma_fn(x)
            assert lhs == pytest.approx(rhs, rel=specfun.DEFAULT_TOL.rel_tol * 10)

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            specfun.gamma_fn(0.0)
        with pytest.raises(ValueError):
            specfun.gamma_fn(-2.0)


class TestBessel:
    def test_at_zero(self):
        assert specfun.bessel_i(0, 0.0) == 1.0
        assert specfun.bessel_i(1, 0.0) == 0.0
        assert specfun.bessel_i(7, 0.0) == 0.0

    def test_series_oracle(self):
        # 50-term series with exact factorials
        oracle = sum((0.5) ** (2 * k) / (math.factorial(k) ** 2) for k in range(50))
        assert specfun.bessel_i(0, 1.0) == pytest.approx(oracle, abs=1e-12)
        assert specfun.bessel_i(0, 1.0) == pytest.approx(1.266066, abs=1e-6)

    def test_monotone_and_above_one(self):
        values = [specfun.bessel_i(0, x) for x in np.linspace(0.1, 20, 40)]
        assert all(v >= 1.0 for v in values)
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_overflow_signalled(self):
        with pytest.raises(OverflowError):
            specfun.bessel_i(0, 800.0)

    def test_scaled_matches_scipy(self):
        for order in (0, 1, 3):
            for x in (0.1, 1.0, 30.0, 300.0, 900.0):
                assert specfun.bessel_i_scaled(order, x) == pytest.approx(
                    float(sp.ive(order, x)), rel=1e-12
                )

    def test_scaled_consistent_with_unscaled(self):
        for x in (0.5, 5.0, 50.0):
            assert specfun.bessel_i_scaled(2, x) == pytest.approx(
                specfun.bessel_i(2, x) * math.exp(-x), rel=1e-11
            )


class TestMarcumQ1:
    def test_b_zero_gives_one(self):
        for a in (0.0, 0.5, 3.0, 12.0):
            assert specfun.marcum_q1(a, 0.0) == 1.0

    def test_a_zero_rayleigh_tail(self):
        for b in (0.1, 1.0, 4.0):
            assert specfun.marcum_q1(0.0, b) == pytest.approx(math.exp(-b * b / 2), rel=1e-14)

    def test_equal_arguments_identity(self):
        # Q1(a, a) = (1 + e^{-a^2} I0(a^2)) / 2
        for a in (0.5, 1.0, 2.0, 3.5):
            oracle = 0.5 * (1.0 + float(mp.exp(-a * a) * mp.besseli(0, a * a)))
            assert specfun.marcum_q1(a, a) == pytest.approx(oracle, abs=1e-13)
        assert specfun.marcum_q1(1.0, 1.0) == pytest.approx(0.7329, abs=1e-4)

    def test_rice_tail_quadrature(self):
        # small grid here; the acceptance suite runs the full 10x10 grid
        for a in (0.0, 1.5, 4.0, 8.0):
            for b in (0.3, 2.0, 6.0):
                val, err = integrate.quad(
                    lambda t: t * math.exp(-((t - a) ** 2) / 2.0) * sp.i0e(a * t),
                    b,
                    max(b, a) + 45.0,
                    limit=300,
                )
                assert err < 1e-10
                assert specfun.marcum_q1(a, b) == pytest.approx(val, abs=1e-8)

    def test_monotonicity_properties(self, rng):
        a = rng.uniform(0, 8, 60)
        b = np.sort(rng.uniform(0, 8, 60))
        q_b = specfun.marcum_q1(3.0, b)
        assert np.all(np.diff(q_b) <= 1e-15)
        q_a = specfun.marcum_q1(np.sort(a), 3.0)
        assert np.all(np.diff(q_a) >= -1e-15)

    def test_range(self, rng):
        a = rng.uniform(0, 15, 200)
        b = rng.uniform(0, 15, 200)
        q = specfun.marcum_q1(a, b)
        assert np.all((q >= 0.0) & (q <= 1.0))

    def test_vector_matches_scalar(self, rng):
        a = rng.uniform(0, 10, 300)
        b = rng.uniform(0, 10, 300)
        vec = specfun.marcum_q1(a, b)
        scl = np.array([specfun.marcum_q1(float(x), float(y)) for x, y in zip(a, b)])
        assert np.max(np.abs(vec - scl)) < 1e-14

    def test_extreme_separation(self):
        assert specfun.marcum_q1(50.0, 1.0) == 1.0
        assert specfun.marcum_q1(1.0, 50.0) == 0.0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            specfun.marcum_q1(-1.0, 2.0)


class TestEvalTolerance:
    def test_invalid(self):
        with pytest.raises(ValueError):
            specfun.EvalTolerance(rel_tol=0.0)
        with pytest.raises(ValueError):
            specfun.EvalTolerance(max_terms=0)

    def test_coarse_tolerance_still_sane(self):
        loose = specfun.EvalTolerance(rel_tol=1e-6, max_terms=80)
        assert specfun.bessel_i(0, 1.0, loose) == pytest.approx(1.266066, rel=1e-5)
