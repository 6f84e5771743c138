"""Optical hop statistics: mirror-aware pointing error, log-normal
turbulence, the composite fading PDF/CDF, the optical SNR map, and samplers.

Composite fading decomposes as h = h_l * h_p * h_a (deterministic path loss,
pointing loss, turbulence).  The jitter angle seen at the receiving plane is
Rayleigh with per-axis variance

    s^2 = (1 + l_ro/l_ou)^2 sigma_theta^2 + 4 sigma_beta^2,

combining transmitter jitter with the angle-doubling mirror jitter.  The
log-normal turbulence gain is unit mean: ln h_a ~ N(-2 sigma_X^2,
4 sigma_X^2).  (The divergent sign variant of that exponent is examined in
:mod:`orislink.discrepancies`.)

Closed-form tail products exp(large) * erfc(large) are assembled in log
space via ``specfun.log_erfc``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .params import DerivedGeometry, SystemParams, derive

__all__ = [
    "FsoLink",
    "jitter_angle_pdf",
    "displacement",
    "pointing_loss",
    "pointing_loss_pdf",
    "turbulence_pdf",
    "fading_pdf",
    "fading_cdf",
    "optical_snr",
    "optical_snr_cdf",
    "fading_gain_for_snr",
    "sample_fading",
]

_SQRT8 = math.sqrt(8.0)


@dataclass(frozen=True)
class FsoLink:
    geometry: DerivedGeometry
    sigma_theta: float
    sigma_beta: float
    l_ro: float
    l_ou: float
    alpha_m: float
    mu_k: float
    delta: float
    pt: float
    sigma_nk_sq: float

    def __post_init__(self) -> None:
        for name in ("sigma_theta", "sigma_beta", "l_ro", "l_ou", "alpha_m",
                     "mu_k", "delta", "pt", "sigma_nk_sq"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")

    @classmethod
    def from_params(cls, params: SystemParams) -> "FsoLink":
        return cls(
            geometry=derive(params),
            sigma_theta=params.sigma_theta,
            sigma_beta=params.sigma_beta,
            l_ro=params.l_ro,
            l_ou=params.l_ou,
            alpha_m=params.alpha_m,
            mu_k=params.mu_k,
            delta=params.delta,
            pt=params.pt,
            sigma_nk_sq=params.sigma_nk_sq,
        )

    @property
    def jitter_sigma(self) -> float:
        """Per-axis std-dev s of the receiving-plane jitter angle."""
        return math.sqrt(
            (1.0 + self.l_ro / self.l_ou) ** 2 * self.sigma_theta**2
            + 4.0 * self.sigma_beta**2
        )

    @property
    def snr_gain(self) -> float:
        """gamma = snr_gain * h^2; snr_gain = 2 mu^2 alpha^2 delta^2 Pt^2 / sigma_nk^2."""
        amp = self.mu_k * self.alpha_m * self.delta * self.pt
        return 2.0 * amp * amp / self.sigma_nk_sq


def jitter_angle_pdf(link: FsoLink, theta_u):
    """Rayleigh density of the receiving-plane jitter angle."""
    s2 = link.jitter_sigma**2
    t = np.asarray(theta_u, dtype=float)
    out = np.where(t < 0.0, 0.0, (t / s2) * np.exp(-(t * t) / (2.0 * s2)))
    return float(out) if np.ndim(theta_u) == 0 else out


def displacement(link: FsoLink, theta_u):
    """Radial spot displacement R = theta_u * l_ou (small-angle tan)."""
    return theta_u * link.l_ou


def pointing_loss(link: FsoLink, r):
    """Collected-power fraction A0 exp(-2 r^2 / w_zeq^2) at radial offset r."""
    g = link.geometry
    r_arr = np.asarray(r, dtype=float)
    out = g.a0 * np.exp(-2.0 * r_arr * r_arr / g.w_zeq_sq)
    return float(out) if np.ndim(r) == 0 else out


def pointing_loss_pdf(link: FsoLink, hp):
    """Power-law density (rho/A0) (hp/A0)^(rho-1) on (0, A0); 0 outside."""
    g = link.geometry
    h = np.asarray(hp, dtype=float)
    inside = (h > 0.0) & (h < g.a0)
    ratio = np.where(inside, h / g.a0, 1.0)
    out = np.where(inside, (g.rho / g.a0) * ratio ** (g.rho - 1.0), 0.0)
    return float(out) if np.ndim(hp) == 0 else out


def turbulence_pdf(link: FsoLink, ha):
    """Unit-mean log-normal turbulence density."""
    sx2 = link.geometry.sigma_x_sq
    h = np.asarray(ha, dtype=float)
    pos = h > 0.0
    safe = np.where(pos, h, 1.0)
    log_h = np.log(safe)
    out = np.where(
        pos,
        np.exp(-((log_h + 2.0 * sx2) ** 2) / (8.0 * sx2))
        / (2.0 * safe * np.sqrt(2.0 * math.pi * sx2)),
        0.0,
    )
    return float(out) if np.ndim(ha) == 0 else out


def _log_u(link: FsoLink, h):
    """ln(h / (A0 h_l)) with -inf at h = 0."""
    g = link.geometry
    h_arr = np.asarray(h, dtype=float)
    with np.errstate(divide="ignore"):
        return np.log(h_arr) - math.log(g.a0 * g.h_l)


def fading_pdf(link: FsoLink, h):
    """Composite fading density of h = h_l h_p h_a.

    (rho / (2 (A0 h_l)^rho)) h^(rho-1)
      * erfc((ln(h/(A0 h_l)) + 2 sx2 + 4 rho sx2) / (2 sqrt2 sx))
      * exp(2 sx2 rho (1 + rho)),

    assembled in log space so the erfc*exp product cannot hit 0 * inf.
    """
    g = link.geometry
    rho, sx2 = g.rho, g.sigma_x_sq
    sx = math.sqrt(sx2)
    h_arr = np.asarray(h, dtype=float)
    pos = h_arr > 0.0
    safe = np.where(pos, h_arr, 1.0)
    log_u = _log_u(link, safe)
    arg = (log_u + 2.0 * sx2 + 4.0 * rho * sx2) / (2.0 * math.sqrt(2.0) * sx)
    log_pdf = (
        math.log(rho / 2.0)
        - rho * math.log(g.a0 * g.h_l)
        + (rho - 1.0) * np.log(safe)
        + specfun.log_erfc(np.asarray(arg))
        + 2.0 * sx2 * rho * (1.0 + rho)
    )
    out = np.where(pos, np.exp(log_pdf), 0.0)
    return float(out) if np.ndim(h) == 0 else out


def _cdf_from_log_u(link: FsoLink, log_u):
    g = link.geometry
    rho, sx2 = g.rho, g.sigma_x_sq
    sx = math.sqrt(sx2)
    log_u = np.asarray(log_u, dtype=float)
    arg1 = (log_u + 2.0 * sx2 + 4.0 * rho * sx2) / (_SQRT8 * sx)
    term1 = 0.5 * np.exp(
        rho * log_u
        + 2.0 * rho * sx2
        + 2.0 * rho * rho * sx2
        + specfun.log_erfc(np.asarray(arg1))
    )
    term2 = 0.5 * specfun.erfc((-log_u - 2.0 * sx2) / (_SQRT8 * sx))
    return np.clip(term1 + term2, 0.0, 1.0)


def fading_cdf(link: FsoLink, h):
    """Composite fading distribution P[h_total <= h]."""
    h_arr = np.asarray(h, dtype=float)
    pos = h_arr > 0.0
    safe = np.where(pos, h_arr, 1.0)
    out = np.where(pos, _cdf_from_log_u(link, _log_u(link, safe)), 0.0)
    return float(out) if np.ndim(h) == 0 else out


def optical_snr(link: FsoLink, h):
    """Instantaneous electrical SNR gamma = 2 mu^2 alpha^2 h^2 delta^2 Pt^2 / sigma_nk^2."""
    h_arr = np.asarray(h, dtype=float)
    out = link.snr_gain * h_arr * h_arr
    return float(out) if np.ndim(h) == 0 else out


def fading_gain_for_snr(link: FsoLink, gamma):
    """Invert the SNR map: the h at which optical_snr(h) equals gamma."""
    g_arr = np.asarray(gamma, dtype=float)
    sn = math.sqrt(link.sigma_nk_sq)
    out = sn * np.sqrt(np.clip(g_arr, 0.0, None) / 2.0) / (
        link.mu_k * link.alpha_m * link.delta * link.pt
    )
    return float(out) if np.ndim(gamma) == 0 else out


def optical_snr_cdf(link: FsoLink, gamma):
    """P[gamma_opt <= gamma], evaluated through eta = ln(gamma/2)/2 +
    ln(sigma_nk / (A0 Pt delta alpha mu h_l)).

    Algebraically identical to fading_cdf at the inverted gain; computed
    through its own arithmetic path so the change-of-variables identity is a
    real crosscheck.
    """
    g = link.geometry
    gamma_arr = np.asarray(gamma, dtype=float)
    pos = gamma_arr > 0.0
    safe = np.where(pos, gamma_arr, 1.0)
    sn = math.sqrt(link.sigma_nk_sq)
    eta = 0.5 * np.log(safe / 2.0) + math.log(
        sn / (g.a0 * link.pt * link.delta * link.alpha_m * link.mu_k * g.h_l)
    )
    out = np.where(pos, _cdf_from_log_u(link, eta), 0.0)
    return float(out) if np.ndim(gamma) == 0 else out


def sample_fading(link: FsoLink, rng: np.random.Generator, size=None):
    """Draw h = h_l * h_p * h_a through the analytic chain.

    theta_u is Rayleigh via two Gaussian axes (same primitive the physical
    engine uses), mapped through displacement and pointing loss, then
    multiplied by a unit-mean log-normal turbulence draw.
    """
    g = link.geometry
    s = link.jitter_sigma
    t1 = rng.standard_normal(size)
    t2 = rng.standard_normal(size)
    theta_u = s * np.hypot(t1, t2)
    hp = pointing_loss(link, displacement(link, theta_u))
    sx = math.sqrt(g.sigma_x_sq)
    ha = np.exp(rng.normal(-2.0 * g.sigma_x_sq, 2.0 * sx, size))
    return g.h_l * hp * ha
