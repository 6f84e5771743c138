"""End-to-end closed-form metrics for the decode-and-forward pair of hops.

Exact outage composes the per-hop SNR CDFs by inclusion-exclusion (either
hop below threshold interrupts the link).  The asymptotic family shares one
structure: an optical term scaling like Pt^(-rho) and an RF term scaling
like Pt^(-1); see ``tail_matched`` below for the optical coefficient.

``ber_exact_numeric`` is the slow reference: per-hop conditional BER
kappa*Q(sqrt(zeta*gamma)) integrated against the exact per-hop SNR
densities by adaptive quadrature, composed for decode-and-forward
(end-to-end bit error iff exactly one hop flips the bit).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import fso_channel, rf_channel, specfun
from .params import SystemParams
from .fso_channel import FsoLink
from .rf_channel import RfLink

__all__ = [
    "LinkPair",
    "NumericalError",
    "PerformanceCurve",
    "outage_exact",
    "outage_asymptotic",
    "snr_pdf_asymptotic",
    "ber_asymptotic",
    "ber_exact_numeric",
    "sweep",
]


class NumericalError(RuntimeError):
    """A numerical evaluation failed to reach its accuracy target."""


@dataclass(frozen=True)
class LinkPair:
    rf: RfLink
    fso: FsoLink

    def __post_init__(self) -> None:
        if not math.isclose(self.rf.pt, self.fso.pt, rel_tol=1e-12):
            raise ValueError("rf and fso links must share the same transmit power")

    @classmethod
    def from_params(cls, params: SystemParams) -> "LinkPair":
        return cls(rf=RfLink.from_params(params), fso=FsoLink.from_params(params))


@dataclass
class PerformanceCurve:
    """Sweep container: transmit-power axis plus named metric series.

    Asymptotic series may legitimately exceed 1 at low power; clamping (and
    marking) happens only when a CSV is emitted, never here.  Failed points
    are NaN with an explanatory entry in ``flags``.
    """

    axis_dbm: list[float]
    columns: dict[str, list[float]]
    gamma_th: float
    flags: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        for name, series in self.columns.items():
            if len(series) != len(self.axis_dbm):
                raise ValueError(f"series {name!r} length != axis length")


def outage_exact(pair: LinkPair, gamma_th: float) -> float:
    """P[outage] = F1 + F2 - F1 F2 with per-hop SNR CDFs at the threshold."""
    if not gamma_th > 0:
        raise ValueError("gamma_th must be > 0")
    f1 = rf_channel.snr_cdf(pair.rf, gamma_th)
    f2 = fso_channel.optical_snr_cdf(pair.fso, gamma_th)
    return f1 + f2 - f1 * f2


def _optical_tail_coeff(fso: FsoLink) -> float:
    """(sigma_nk / (A0 Pt delta alpha mu h_l))^rho * e^(2 rho sx2 + 2 rho^2 sx2)."""
    g = fso.geometry
    ratio = math.sqrt(fso.sigma_nk_sq) / (
        g.a0 * fso.pt * fso.delta * fso.alpha_m * fso.mu_k * g.h_l
    )
    return ratio**g.rho * math.exp(2.0 * g.rho * g.sigma_x_sq * (1.0 + g.rho))


def _rf_linear_coeff(rf: RfLink) -> float:
    """(A^4 + 4 sigma_m^4 - 2 A^2 sigma_m^2) sigma_nr^2 / (8 sigma_m^6 Pt)."""
    a2 = rf.a_peak**2
    s2 = rf.sigma_m_sq
    return (a2 * a2 + 4.0 * s2 * s2 - 2.0 * s2 * a2) * rf.sigma_nr_sq / (
        8.0 * s2**3 * rf.pt
    )


def outage_asymptotic(pair: LinkPair, gamma_th: float, tail_matched: bool = True) -> float:
    """High-power outage estimate; may exceed 1 at low power (asymptote only).

    ``tail_matched=True`` (default) uses the optical coefficient
    gamma_th^(rho/2) / 2^(rho/2) that matches the exact CDF's small-argument
    limit; ``False`` selects the halved-coefficient variant
    (2^(rho/2 + 1) denominator) documented in
    :func:`orislink.discrepancies.check_asymptotic_optical_coefficient`.
    """
    if not gamma_th > 0:
        raise ValueError("gamma_th must be > 0")
    rho = pair.fso.geometry.rho
    t_opt = gamma_th ** (rho / 2.0) / 2.0 ** (rho / 2.0 + 1.0) * _optical_tail_coeff(pair.fso)
    if tail_matched:
        t_opt *= 2.0
    return t_opt + _rf_linear_coeff(pair.rf) * gamma_th


def snr_pdf_asymptotic(pair: LinkPair, gamma: float, tail_matched: bool = True) -> float:
    """Leading-order end-to-end SNR density (derivative of the outage asymptote)."""
    if not gamma > 0:
        raise ValueError("gamma must be > 0")
    rho = pair.fso.geometry.rho
    t_opt = (
        rho
        * gamma ** (rho / 2.0 - 1.0)
        / 2.0 ** (rho / 2.0 + 2.0)
        * _optical_tail_coeff(pair.fso)
    )
    if tail_matched:
        t_opt *= 2.0
    return t_opt + _rf_linear_coeff(pair.rf)


def ber_asymptotic(pair: LinkPair, params: SystemParams, tail_matched: bool = True) -> float:
    """High-power average BER for conditional BER kappa*Q(sqrt(zeta*gamma))."""
    rho = pair.fso.geometry.rho
    kappa = params.mod_kappa
    zeta = params.mod_zeta
    t_opt = (
        kappa
        * specfun.gamma_fn((rho + 1.0) / 2.0)
        / (4.0 * math.sqrt(math.pi) * zeta ** (rho / 2.0))
        * _optical_tail_coeff(pair.fso)
    )
    if tail_matched:
        t_opt *= 2.0
    a2 = pair.rf.a_peak**2
    s2 = pair.rf.sigma_m_sq
    t_rf = (a2 * a2 + 4.0 * s2 * s2 - 2.0 * s2 * a2) * pair.rf.sigma_nr_sq * kappa / (
        16.0 * s2**3 * zeta * pair.rf.pt
    )
    return t_opt + t_rf


def _hop_ber_rf(pair: LinkPair, params: SystemParams, quad_points: int) -> float:
    """E[kappa_rf Q(sqrt(zeta_rf * gamma_rf))] over the Rice envelope."""
    rf = pair.rf
    kappa = params.rf_mod_kappa
    zeta = params.rf_mod_zeta
    c = math.sqrt(zeta * rf.pt) / math.sqrt(rf.sigma_nr_sq)
    s = math.sqrt(rf.sigma_m_sq)
    hi = rf.a_peak + 12.0 * s

    def integrand(v: float) -> float:
        return specfun.gauss_q(c * v) * rf_channel.envelope_pdf(rf, v)

    pts = [p for p in (rf.a_peak - 3 * s, rf.a_peak, rf.a_peak + 3 * s) if 0.0 < p < hi]
    val, err = integrate.quad(integrand, 0.0, hi, limit=quad_points, points=pts,
                              epsabs=1e-16, epsrel=1e-11)
    _check_quad(kappa * val, kappa * err, "rf hop BER")
    return kappa * val


def _hop_ber_fso(pair: LinkPair, params: SystemParams, quad_points: int) -> float:
    """E[kappa Q(sqrt(zeta * gamma_fso))] over the composite fading gain.

    Integrates in t = (h / (A0 h_l))^rho, which flattens the pointing-error
    power law so the adaptive rule converges for any rho > 0.
    """
    fso = pair.fso
    g = fso.geometry
    kappa = params.mod_kappa
    zeta = params.mod_zeta
    rho, sx2 = g.rho, g.sigma_x_sq
    sx = math.sqrt(sx2)
    scale = g.a0 * g.h_l
    e_c = math.exp(2.0 * sx2 * rho * (1.0 + rho))

    def integrand(t: float) -> float:
        if t <= 0.0:
            # t->0: gamma->0 so Q->1/2, and the erfc tail factor -> 1
            return kappa * 0.5 * e_c
        log_u = math.log(t) / rho
        h = scale * math.exp(log_u)
        q = specfun.gauss_q(math.sqrt(zeta * fso_channel.optical_snr(fso, h)))
        tail = 0.5 * math.exp(
            specfun.log_erfc((log_u + 2.0 * sx2 + 4.0 * rho * sx2) / (2.0 * math.sqrt(2.0) * sx))
        )
        return kappa * q * tail * e_c

    # t upper limit: h_a essentially never exceeds exp(-2 sx2 + 14 * 2 sx)
    t_hi = math.exp(rho * (28.0 * sx + 1.0))
    # interesting scale: gamma * zeta ~ 1
    h_star = fso_channel.fading_gain_for_snr(fso, 1.0 / zeta)
    t_star = (h_star / scale) ** rho if h_star > 0 else t_hi
    pts = [p for p in (min(t_star, t_hi * 0.5), 1.0) if 0.0 < p < t_hi]
    val, err = integrate.quad(
        integrand, 0.0, t_hi, limit=quad_points, points=sorted(set(pts)),
        epsabs=1e-16, epsrel=1e-11,
    )
    _check_quad(val, err, "fso hop BER")
    return val


def _check_quad(value: float, err_estimate: float, what: str) -> None:
    if not math.isfinite(value):
        raise NumericalError(f"{what}: quadrature returned {value!r}")
    if err_estimate > max(1e-13, 5e-6 * abs(value)):
        raise NumericalError(
            f"{what}: quadrature did not converge (value {value:.6g}, "
            f"error estimate {err_estimate:.2g})"
        )


def df_compose(p_first: float, p_second: float) -> float:
    """Decode-and-forward bit-error composition: wrong iff exactly one hop
    flips the bit."""
    return p_first + p_second - 2.0 * p_first * p_second


def ber_exact_numeric(pair: LinkPair, params: SystemParams, quad_points: int = 200) -> float:
    """Reference end-to-end BER: per-hop conditional BER integrated by
    adaptive quadrature, composed by :func:`df_compose`."""
    if quad_points < 64:
        raise ValueError("quad_points must be >= 64")
    p_rf = _hop_ber_rf(pair, params, quad_points)
    p_fso = _hop_ber_fso(pair, params, quad_points)
    return df_compose(p_rf, p_fso)


_SERIES = ("outage_exact", "outage_asymptotic", "ber_asymptotic", "ber_exact_numeric")


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    return 10.0 * math.log10(watts) + 30.0


def sweep(
    params: SystemParams,
    axis_dbm: list[float],
    gamma_th: float,
    quad_points: int = 200,
) -> PerformanceCurve:
    """Evaluate all closed-form series over a transmit-power axis (dBm).

    Per-point numerical failures become NaN gaps with a note in ``flags``,
    never silent zeros.
    """
    if len(axis_dbm) == 0:
        raise ValueError("axis must be nonempty")
    if any(b <= a for a, b in zip(axis_dbm, axis_dbm[1:])):
        raise ValueError("axis must be strictly increasing")
    columns: dict[str, list[float]] = {name: [] for name in _SERIES}
    flags: list[str] = []
    for dbm in axis_dbm:
        point = params.replace(pt=dbm_to_watts(dbm))
        pair = LinkPair.from_params(point)
        columns["outage_exact"].append(outage_exact(pair, gamma_th))
        columns["outage_asymptotic"].append(outage_asymptotic(pair, gamma_th))
        columns["ber_asymptotic"].append(ber_asymptotic(pair, point))
        try:
            columns["ber_exact_numeric"].append(ber_exact_numeric(pair, point, quad_points))
        except NumericalError as exc:
            columns["ber_exact_numeric"].append(math.nan)
            flags.append(f"ber_exact_numeric @ {dbm:g} dBm: {exc}")
    return PerformanceCurve(axis_dbm=list(axis_dbm), columns=columns,
                            gamma_th=gamma_th, flags=flags)
