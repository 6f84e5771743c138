"""Rice hop statistics vs quadrature, sampling, and KS oracles."""

import math

import numpy as np
import pytest
from scipy import integrate, stats

from orislink import rf_channel as rf
from orislink.rf_channel import RfLink


def make_link(a=1.0, s2=0.5, nr2=1.0, pt=1.0) -> RfLink:
    return RfLink(a_peak=a, sigma_m_sq=s2, sigma_nr_sq=nr2, pt=pt)


class TestEnvelopePdf:
    def test_zero_at_origin(self):
        assert rf.envelope_pdf(make_link(), 0.0) == 0.0

    def test_rayleigh_reduction(self):
        link = make_link(a=0.0)
        for v in (0.2, 0.7, 1.5):
            expected = v / link.sigma_m_sq * math.exp(-v * v / (2 * link.sigma_m_sq))
            assert rf.envelope_pdf(link, v) == pytest.approx(expected, rel=1e-13)

    def test_normalisation(self):
        for a in (0.0, 1.0, 3.1623, 10.0):
            link = make_link(a=a)
            total, err = integrate.quad(
                lambda v: rf.envelope_pdf(link, v), 0.0, a + 14.0, limit=200
            )
            assert err < 1e-9
            assert total == pytest.approx(1.0, abs=1e-8)


class TestSnrPdf:
    def test_value_at_zero(self):
        link = make_link(a=2.0, s2=0.5, nr2=2.0, pt=4.0)
        expected = (
            link.sigma_nr_sq
            / (2 * link.pt * link.sigma_m_sq)
            * math.exp(-link.a_peak**2 / (2 * link.sigma_m_sq))
        )
        assert rf.snr_pdf(link, 0.0) == pytest.approx(expected, rel=1e-13)

    def test_normalisation(self):
        link = make_link(a=2.0, nr2=0.5, pt=2.0)
        hi = link.pt * (link.a_peak + 12.0) ** 2 / link.sigma_nr_sq
        total, err = integrate.quad(
            lambda g: rf.snr_pdf(link, g), 0.0, hi, limit=400,
            points=[link.pt * link.a_peak**2 / link.sigma_nr_sq],
        )
        assert total == pytest.approx(1.0, abs=1e-8)

    def test_quadrature_cdf_matches_closed_form(self):
        link = make_link(a=1.0, s2=0.5, nr2=1.0, pt=1.0)
        for x in (1.0, 10.0, 100.0):
            val, err = integrate.quad(lambda g: rf.snr_pdf(link, g), 0.0, x, limit=400)
            assert err < 1e-10
            assert val == pytest.approx(rf.snr_cdf(link, x), abs=1e-8)


class TestSnrCdf:
    def test_limits(self):
        link = make_link()
        assert rf.snr_cdf(link, 0.0) == 0.0
        assert rf.snr_cdf(link, 1e9) == pytest.approx(1.0, abs=1e-12)

    def test_rayleigh_reduction_exact(self):
        link = make_link(a=0.0, s2=0.7, nr2=0.3, pt=2.0)
        for x in (0.5, 3.0, 20.0):
            expected = 1.0 - math.exp(-link.sigma_nr_sq * x / (2 * link.sigma_m_sq * link.pt))
            assert rf.snr_cdf(link, x) == pytest.approx(expected, rel=1e-13)

    def test_monotone_on_random_parameters(self, rng):
        for _ in range(10):
            link = make_link(
                a=rng.uniform(0, 5),
                s2=rng.uniform(0.1, 2.0),
                nr2=rng.uniform(0.01, 2.0),
                pt=rng.uniform(0.1, 10.0),
            )
            xs = np.sort(rng.uniform(0, 50, 40))
            cdf = rf.snr_cdf(link, xs)
            assert np.all(np.diff(cdf) >= -1e-14)
            assert np.all((cdf >= 0) & (cdf <= 1))

    def test_monte_carlo_oracle_point(self, rng):
        link = make_link(a=1.0, s2=0.5, nr2=1.0, pt=1.0)
        n = 10_000_000
        nu = rf.sample_envelope(link, rng, n)
        gamma = link.pt * nu * nu / link.sigma_nr_sq
        p_hat = np.count_nonzero(gamma <= 1.0) / n
        p = rf.snr_cdf(link, 1.0)
        assert abs(p_hat - p) <= 3.0 * math.sqrt(p * (1 - p) / n)


class TestSampler:
    def test_noiseless_limit(self, rng):
        link = make_link(a=2.0, s2=1e-24)
        nu = rf.sample_envelope(link, rng, 1000)
        assert np.allclose(nu, 2.0, atol=1e-9)

    def test_second_moment(self, rng):
        link = make_link(a=3.1623, s2=0.5)
        nu = rf.sample_envelope(link, rng, 10_000_000)
        expected = link.a_peak**2 + 2 * link.sigma_m_sq
        assert np.mean(nu**2) == pytest.approx(expected, rel=0.01)

    def test_ks_against_cdf(self, rng):
        link = make_link(a=3.1623, s2=0.5)
        nu = rf.sample_envelope(link, rng, 1_000_000)
        s = math.sqrt(link.sigma_m_sq)

        def cdf(v):
            from orislink import specfun

            return 1.0 - specfun.marcum_q1(link.a_peak / s, np.asarray(v, dtype=float) / s)

        res = stats.kstest(nu, cdf)
        assert res.pvalue > 0.01

    def test_ks_on_random_parameter_pairs(self, rng):
        from orislink import specfun

        for _ in range(5):
            a = rng.uniform(0.0, 5.0)
            s2 = rng.uniform(0.2, 2.0)
            link = make_link(a=a, s2=s2)
            nu = rf.sample_envelope(link, rng, 200_000)
            s = math.sqrt(s2)
            res = stats.kstest(
                nu, lambda v: 1.0 - specfun.marcum_q1(a / s, np.asarray(v, dtype=float) / s)
            )
            assert res.pvalue > 0.01, (a, s2, res)


class TestFromParams:
    def test_fields(self, table1):
        link = RfLink.from_params(table1)
        assert link.a_peak == table1.a_peak
        assert link.pt == table1.pt
        assert link.sigma_nr_sq == table1.sigma_nr_sq
