"""Rice-faded RF hop: envelope/SNR statistics and the envelope sampler.

The envelope model is normalised (independent of transmit power); power
re-enters only through the SNR map gamma = P_t nu^2 / sigma_nr^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .params import SystemParams

__all__ = ["RfLink", "envelope_pdf", "snr_pdf", "snr_cdf", "sample_envelope"]


@dataclass(frozen=True)
class RfLink:
    a_peak: float        # dominant-path amplitude peak A
    sigma_m_sq: float    # multipath power
    sigma_nr_sq: float   # relay noise variance, W
    pt: float            # transmit power, W

    def __post_init__(self) -> None:
        if not self.sigma_m_sq > 0:
            raise ValueError("sigma_m_sq must be > 0")
        if self.a_peak < 0:
            raise ValueError("a_peak must be >= 0")
        if not self.pt > 0:
            raise ValueError("pt must be > 0")

    @classmethod
    def from_params(cls, params: SystemParams) -> "RfLink":
        return cls(
            a_peak=params.a_peak,
            sigma_m_sq=params.sigma_m_sq,
            sigma_nr_sq=params.sigma_nr_sq,
            pt=params.pt,
        )


def envelope_pdf(link: RfLink, v):
    """Rice envelope density (v/s2) exp(-(v^2+A^2)/(2 s2)) I_0(v A / s2).

    Evaluated with the scaled Bessel function so large Rice factors do not
    overflow: the exponent collapses to -(v-A)^2 / (2 s2).
    """
    s2 = link.sigma_m_sq
    a = link.a_peak
    v_arr = np.asarray(v, dtype=float)
    out = np.where(
        v_arr < 0.0,
        0.0,
        (v_arr / s2)
        * np.exp(-((v_arr - a) ** 2) / (2.0 * s2))
        * specfun.bessel_i_scaled(0, v_arr * a / s2),
    )
    return float(out) if np.isscalar(v) or np.ndim(v) == 0 else out


def snr_pdf(link: RfLink, gamma):
    """Density of gamma = P_t nu^2 / sigma_nr^2 under the Rice envelope."""
    s2 = link.sigma_m_sq
    a = link.a_peak
    sn = math.sqrt(link.sigma_nr_sq)
    g = np.asarray(gamma, dtype=float)
    u = sn * np.sqrt(np.clip(g, 0.0, None) / link.pt)  # = sigma_nr sqrt(g/Pt)
    out = np.where(
        g < 0.0,
        0.0,
        (link.sigma_nr_sq / (2.0 * link.pt * s2))
        * np.exp(-((u - a) ** 2) / (2.0 * s2))
        * specfun.bessel_i_scaled(0, u * a / s2),
    )
    return float(out) if np.isscalar(gamma) or np.ndim(gamma) == 0 else out


def snr_cdf(link: RfLink, x):
    """P[gamma <= x] = 1 - Q1(A/sigma_m, (sigma_nr/sigma_m) sqrt(x/P_t))."""
    s = math.sqrt(link.sigma_m_sq)
    sn = math.sqrt(link.sigma_nr_sq)
    x_arr = np.asarray(x, dtype=float)
    b = (sn / s) * np.sqrt(np.clip(x_arr, 0.0, None) / link.pt)
    q = specfun.marcum_q1(link.a_peak / s, b)
    out = np.where(x_arr < 0.0, 0.0, 1.0 - q)
    return float(out) if np.isscalar(x) or np.ndim(x) == 0 else out


def sample_envelope(link: RfLink, rng: np.random.Generator, size=None):
    """Draw Rice envelopes nu = |A + sigma_m (g1 + i g2)| from two normals.

    Exact construction, independent of the Marcum-Q code path (which keeps
    the CDF tests honest).
    """
    s = math.sqrt(link.sigma_m_sq)
    g1 = rng.standard_normal(size)
    g2 = rng.standard_normal(size)
    return np.hypot(link.a_peak + s * g1, s * g2)
