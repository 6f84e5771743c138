"""Parameter validation, derived geometry, and the config file format."""

import math
import warnings

import mpmath as mp
import pytest

from orislink import params as P

mp.mp.dps = 40


def hp_geometry_oracle(phi, l_ro, l_ou, a):
    """High-precision scalar recomputation of the derived optics constants."""
    path = mp.mpf(phi) * (l_ro + l_ou)
    z = mp.sqrt(mp.pi / 2) * a / path
    erf_z = mp.erf(z)
    a0 = erf_z**2
    w_zeq_sq = path**2 * mp.sqrt(mp.pi) * erf_z / (2 * z * mp.e ** (-(z**2)))
    return float(path), float(z), float(a0), float(w_zeq_sq)


class TestDerive:
    def test_beam_radius_from_table_defaults(self, table1):
        geom = P.derive(table1)
        assert geom.w_z == pytest.approx(1.2, rel=0.01)

    def test_optics_constants_against_oracle(self, table1):
        w_z, z, a0, w_zeq_sq = hp_geometry_oracle(8e-3, 50.0, 100.0, 0.1)
        geom = P.derive(table1)
        assert geom.w_z == pytest.approx(w_z, rel=1e-12)
        assert geom.z_ratio == pytest.approx(0.10444, abs=1e-5)
        assert geom.z_ratio == pytest.approx(z, rel=1e-12)
        assert geom.a0 == pytest.approx(0.01380, abs=1e-4)
        assert geom.a0 == pytest.approx(a0, rel=1e-12)
        assert geom.w_zeq_sq == pytest.approx(1.451, abs=1e-3)
        assert geom.w_zeq_sq == pytest.approx(w_zeq_sq, rel=1e-12)

    def test_rho_variants(self, table1):
        w_zeq_sq = P.derive(table1).w_zeq_sq
        oracle_ref = w_zeq_sq / (4 * 25e-6 * 150**2 + 16 * 4e-6 * 50**2)
        oracle_sc = w_zeq_sq / (4 * 25e-6 * 150**2 + 16 * 4e-6 * 100**2)
        assert P.derive(table1).rho == pytest.approx(0.602, abs=2e-3)
        assert P.derive(table1).rho == pytest.approx(oracle_ref, rel=1e-12)
        sc = table1.replace(geometry_mode="self-consistent")
        assert P.derive(sc).rho == pytest.approx(0.502, abs=2e-3)
        assert P.derive(sc).rho == pytest.approx(oracle_sc, rel=1e-12)

    def test_rho_mode_ordering(self, rng, table1):
        # self-consistent <= reference whenever l_ou >= l_ro
        for _ in range(20):
            l_ro = rng.uniform(10, 100)
            l_ou = l_ro * rng.uniform(1.0, 4.0)
            p = table1.replace(l_ro=l_ro, l_ou=l_ou)
            assert (
                P.derive(p.replace(geometry_mode="self-consistent")).rho
                <= P.derive(p).rho + 1e-15
            )

    def test_path_loss_gain(self, table1):
        assert P.derive(table1).h_l == pytest.approx(10 ** (-0.0015), rel=1e-12)

    def test_sigma_x_is_quarter_rytov(self, table1):
        geom = P.derive(table1)
        assert geom.sigma_x_sq == geom.rytov_sq / 4.0

    def test_cn2_route_and_prefactor_crosscheck(self, table1):
        cn2 = 5e-14
        p = table1.replace(cn2=cn2, rytov_sq=None)
        geom = P.derive(p)
        path = p.l_ro + p.l_ou
        expected_rytov = 1.23 * cn2 * geom.wavenumber ** (7 / 6) * path ** (11 / 6)
        assert geom.rytov_sq == pytest.approx(expected_rytov, rel=1e-12)
        # the direct 0.30545 prefactor route must agree with 1.23/4 within 0.7%
        direct = 0.30545 * geom.wavenumber ** (7 / 6) * cn2 * path ** (11 / 6)
        assert abs(direct - geom.sigma_x_sq) / geom.sigma_x_sq < 0.007

    def test_deterministic_and_idempotent(self, table1):
        assert P.derive(table1) == P.derive(table1)

    def test_validity_warning(self, table1):
        with pytest.warns(P.ModelValidityWarning):
            P.derive(table1.replace(aperture_radius=0.5))


class TestValidate:
    def test_clean_for_defaults(self, table1):
        assert P.validate(table1) == []

    def test_beam_aperture_ratio_diagnostic(self, table1):
        diags = P.validate(table1.replace(aperture_radius=0.5))
        assert any("2.4" in d and "6" in d for d in diags)

    def test_strong_turbulence_diagnostic(self, table1):
        diags = P.validate(table1.replace(rytov_sq=2.0))
        assert any("Rytov" in d for d in diags)

    def test_negligible_pointing_diagnostic(self, table1):
        quiet = table1.replace(sigma_theta=1e-4, sigma_beta=1e-4)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            diags = P.validate(quiet)
        assert any("rho" in d for d in diags)

    def test_zero_multipath_hard_error(self):
        with pytest.raises(P.ParamsError):
            P.SystemParams(sigma_m_sq=0.0)

    def test_negative_quantities_hard_error(self):
        with pytest.raises(P.ParamsError):
            P.SystemParams(l_ro=-5.0)
        with pytest.raises(P.ParamsError):
            P.SystemParams(delta=0.0)
        with pytest.raises(P.ParamsError):
            P.SystemParams(mu_k=1.5)


class TestRiceParameterisation:
    def test_k_to_amplitude(self, table1):
        assert table1.a_peak == pytest.approx(math.sqrt(2 * 10 * 0.5), rel=1e-15)
        assert table1.rice_factor == pytest.approx(10.0, rel=1e-15)

    def test_amplitude_route(self):
        p = P.SystemParams(rice_a=2.0, rice_k=None)
        assert p.a_peak == 2.0
        assert p.rice_factor == pytest.approx(4.0, rel=1e-15)

    def test_exactly_one_of_pair(self):
        with pytest.raises(P.ParamsError):
            P.SystemParams(rice_a=2.0)  # rice_k still defaulted
        with pytest.raises(P.ParamsError):
            P.SystemParams(rice_k=None)

    def test_turbulence_pair(self):
        with pytest.raises(P.ParamsError):
            P.SystemParams(cn2=1e-14)  # rytov_sq still defaulted
        with pytest.raises(P.ParamsError):
            P.SystemParams(rytov_sq=None)


class TestConfig:
    def test_unit_suffixes(self):
        p = P.parse_config_text(
            "pt = 20 dBm\nsigma_theta = 5 mrad\nrice_k = 10 dB\nsigma_nr_sq = 1e-4 W\n"
        )
        assert p.pt == pytest.approx(0.1, rel=1e-12)
        assert p.sigma_theta == pytest.approx(5e-3, rel=1e-12)
        assert p.rice_k == pytest.approx(10.0, rel=1e-12)
        assert p.sigma_nr_sq == pytest.approx(1e-4, rel=1e-12)

    def test_comments_and_blanks(self):
        p = P.parse_config_text("# comment\n\npt = 0.5  # inline\n")
        assert p.pt == 0.5

    def test_unknown_key_is_hard_error(self):
        with pytest.raises(P.ConfigError):
            P.parse_config_text("voltage = 3\n")

    def test_duplicate_key(self):
        with pytest.raises(P.ConfigError):
            P.parse_config_text("pt = 1\npt = 2\n")

    def test_malformed_line(self):
        with pytest.raises(P.ConfigError):
            P.parse_config_text("pt 0.5\n")

    def test_bad_unit(self):
        with pytest.raises(P.ConfigError):
            P.parse_config_text("pt = 3 volts\n")

    def test_pair_displacement(self):
        p = P.parse_config_text("rice_a = 2.5\n")
        assert p.rice_a == 2.5 and p.rice_k is None
        p = P.parse_config_text("cn2 = 5e-14\n")
        assert p.cn2 == 5e-14 and p.rytov_sq is None

    def test_pair_conflict(self):
        with pytest.raises(P.ConfigError):
            P.parse_config_text("rice_a = 2.5\nrice_k = 4\n")

    def test_geometry_mode_values(self):
        assert P.parse_config_text("geometry_mode = self-consistent\n").geometry_mode == (
            "self-consistent"
        )
        with pytest.raises(P.ConfigError):
            P.parse_config_text("geometry_mode = sideways\n")

    def test_canonical_roundtrip(self, table1):
        text = P.canonical_config_text(table1)
        assert P.parse_config_text(text) == table1

    def test_digest_shape_and_sensitivity(self, table1):
        d = P.config_digest(table1)
        assert len(d) == 64 and d == d.lower()
        assert int(d, 16) >= 0
        assert P.config_digest(table1.replace(pt=0.2)) != d

    def test_load_config_file(self, tmp_path, table1):
        path = tmp_path / "link.cfg"
        path.write_text(P.canonical_config_text(table1), encoding="utf-8")
        assert P.load_config(path) == table1
