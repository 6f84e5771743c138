"""System parameters, validation, and the derived link-geometry constants.

``SystemParams`` is the single source of truth for every physical symbol.
``derive`` turns it into the handful of geometric/turbulence constants the
closed forms need (beam radius, collected-power fraction, equivalent beam
width, pointing exponent, log-amplitude variance, path-loss gain).

The text config format is one ``key = value`` pair per line with ``#``
comments.  Keys are exactly the ``SystemParams`` field names; unknown keys
are hard errors.  Angles take an optional ``mrad`` suffix, powers take
``dBm`` or ``W``, and the Rice factor takes ``dB``; bare numbers are base
SI units (radians / watts / linear).
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
import warnings
from dataclasses import dataclass

from . import specfun

__all__ = [
    "GEOMETRY_MODES",
    "ConfigError",
    "DerivedGeometry",
    "ModelValidityWarning",
    "ParamsError",
    "SystemParams",
    "canonical_config_text",
    "config_digest",
    "derive",
    "load_config",
    "parse_config_text",
    "validate",
]

# Pointing-exponent variants: "reference" scales the mirror-jitter term of the
# rho denominator with the relay->mirror distance (16 sigma_beta^2 l_ro^2);
# "self-consistent" scales it with the mirror->user distance (l_ou^2), which
# is the variant that matches the jitter-angle statistics the samplers use.
GEOMETRY_MODES = ("reference", "self-consistent")


class ParamsError(ValueError):
    """Invalid physical parameter set."""


class ConfigError(ParamsError):
    """Malformed or inconsistent config file."""


class ModelValidityWarning(UserWarning):
    """A model approximation is being used outside its stated validity."""


@dataclass(frozen=True)
class SystemParams:
    """Every physical input of the link model (base SI units).

    Exactly one of ``rice_a``/``rice_k`` and exactly one of
    ``cn2``/``rytov_sq`` may be set; the other member of each pair must be
    ``None``.
    """

    pt: float = 0.1                    # transmit power, W
    rice_a: float | None = None        # main-signal amplitude peak (normalised)
    sigma_m_sq: float = 0.5            # multipath power (normalised)
    rice_k: float | None = 10.0        # Rice factor, linear
    sigma_nr_sq: float = 1e-4          # relay noise variance, W
    sigma_nk_sq: float = 1e-4          # user receiver noise variance, W
    delta: float = 0.8                 # optical power conversion coefficient
    alpha_m: float = 0.95              # mirror attenuation coefficient
    mu_k: float = 1.0                  # composite power allocation coefficient
    l_sr: float = 100.0                # base-station->relay distance, m (informational)
    l_ro: float = 50.0                 # relay->mirror distance, m
    l_ou: float = 100.0                # mirror->user distance, m
    sigma_theta: float = 5e-3          # transmitter jitter angle std-dev, rad
    sigma_beta: float = 2e-3           # mirror jitter angle std-dev, rad
    phi: float = 8e-3                  # beam divergence angle, rad
    aperture_radius: float = 0.1      # receiver aperture radius, m
    wavelength: float = 1550e-9        # optical wavelength, m
    cn2: float | None = None           # refraction-structure parameter, m^(-2/3)
    rytov_sq: float | None = 0.25      # Rytov variance (alternative to cn2)
    hl_per_km: float = 0.1             # optical path loss, dB/km
    mod_kappa: float = 1.0             # optical-hop BER prefactor kappa
    mod_zeta: float = 0.5              # optical-hop BER SNR scale zeta
    rf_mod_kappa: float = 1.0          # relay-decoding BER prefactor
    rf_mod_zeta: float = 2.0           # relay-decoding BER SNR scale
    geometry_mode: str = "reference"

    def __post_init__(self) -> None:
        positive = {
            "pt": self.pt,
            "sigma_m_sq": self.sigma_m_sq,
            "sigma_nr_sq": self.sigma_nr_sq,
            "sigma_nk_sq": self.sigma_nk_sq,
            "l_sr": self.l_sr,
            "l_ro": self.l_ro,
            "l_ou": self.l_ou,
            "sigma_theta": self.sigma_theta,
            "sigma_beta": self.sigma_beta,
            "phi": self.phi,
            "aperture_radius": self.aperture_radius,
            "wavelength": self.wavelength,
            "hl_per_km": self.hl_per_km,
            "mod_kappa": self.mod_kappa,
            "mod_zeta": self.mod_zeta,
            "rf_mod_kappa": self.rf_mod_kappa,
            "rf_mod_zeta": self.rf_mod_zeta,
        }
        for name, value in positive.items():
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ParamsError(f"{name} must be a positive finite number, got {value!r}")
        for name, value in (("delta", self.delta), ("alpha_m", self.alpha_m), ("mu_k", self.mu_k)):
            if not (0.0 < value <= 1.0):
                raise ParamsError(f"{name} must lie in (0, 1], got {value!r}")
        if (self.rice_a is None) == (self.rice_k is None):
            raise ParamsError("exactly one of rice_a / rice_k must be supplied")
        if self.rice_a is not None and self.rice_a < 0:
            raise ParamsError("rice_a must be >= 0")
        if self.rice_k is not None and self.rice_k < 0:
            raise ParamsError("rice_k must be >= 0")
        if (self.cn2 is None) == (self.rytov_sq is None):
            raise ParamsError("exactly one of cn2 / rytov_sq must be supplied")
        if self.cn2 is not None and not self.cn2 > 0:
            raise ParamsError("cn2 must be > 0")
        if self.rytov_sq is not None and not self.rytov_sq > 0:
            raise ParamsError("rytov_sq must be > 0")
        if self.geometry_mode not in GEOMETRY_MODES:
            raise ParamsError(
                f"geometry_mode must be one of {GEOMETRY_MODES}, got {self.geometry_mode!r}"
            )

    @property
    def a_peak(self) -> float:
        """Rice amplitude peak A (derived from K when K is the given knob)."""
        if self.rice_a is not None:
            return self.rice_a
        return math.sqrt(2.0 * self.rice_k * self.sigma_m_sq)

    @property
    def rice_factor(self) -> float:
        """Rice factor K = A^2 / (2 sigma_m^2), linear."""
        return self.a_peak**2 / (2.0 * self.sigma_m_sq)

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class DerivedGeometry:
    """Constants computed once from SystemParams and shared by all formulas."""

    w_z: float           # beam radius at the receiver, m
    z_ratio: float       # sqrt(pi/2) a / w_z
    a0: float            # maximum collected power fraction
    w_zeq_sq: float      # equivalent beam width squared, m^2
    rho: float           # pointing-error exponent
    sigma_x_sq: float    # log-amplitude variance
    rytov_sq: float      # Rytov variance
    h_l: float           # linear path-loss gain over l_ro + l_ou
    wavenumber: float    # 2 pi / lambda, rad/m


def derive(params: SystemParams) -> DerivedGeometry:
    """Compute the derived geometric and turbulence constants.

    Warns (does not fail) when the Gaussian collected-power approximation is
    outside its validity range w_z / a > 6.
    """
    path = params.l_ro + params.l_ou
    w_z = params.phi * path
    a = params.aperture_radius
    z = math.sqrt(math.pi / 2.0) * a / w_z
    erf_z = specfun.erf(z)
    a0 = erf_z * erf_z
    w_zeq_sq = w_z * w_z * (math.sqrt(math.pi) * erf_z) / (2.0 * z * math.exp(-z * z))

    if params.geometry_mode == "reference":
        jitter_arm = params.l_ro
    else:
        jitter_arm = params.l_ou
    denom = 4.0 * params.sigma_theta**2 * path**2 + 16.0 * params.sigma_beta**2 * jitter_arm**2
    rho = w_zeq_sq / denom

    wavenumber = 2.0 * math.pi / params.wavelength
    if params.cn2 is not None:
        rytov_sq = 1.23 * params.cn2 * wavenumber ** (7.0 / 6.0) * path ** (11.0 / 6.0)
    else:
        rytov_sq = params.rytov_sq
    sigma_x_sq = rytov_sq / 4.0

    h_l = 10.0 ** (-(params.hl_per_km * path / 1000.0) / 10.0)

    geom = DerivedGeometry(
        w_z=w_z,
        z_ratio=z,
        a0=a0,
        w_zeq_sq=w_zeq_sq,
        rho=rho,
        sigma_x_sq=sigma_x_sq,
        rytov_sq=rytov_sq,
        h_l=h_l,
        wavenumber=wavenumber,
    )
    for name, value in dataclasses.asdict(geom).items():
        if not math.isfinite(value):
            raise ParamsError(f"derived quantity {name} is not finite: {value!r}")
    if w_z / a <= 6.0:
        warnings.warn(
            f"beam/aperture ratio {w_z / a:.3g} <= 6; collected-power "
            "approximation degrades",
            ModelValidityWarning,
            stacklevel=2,
        )
    return geom


def validate(params: SystemParams) -> list[str]:
    """Return diagnostics for model-validity soft limits.

    Hard physical-parameter errors surface as ParamsError (raised either at
    construction or here); soft limits come back as warning strings.
    """
    diagnostics: list[str] = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ModelValidityWarning)
        geom = derive(params)
    ratio = geom.w_z / params.aperture_radius
    if ratio <= 6.0:
        diagnostics.append(
            f"beam/aperture ratio {ratio:.3g} <= 6: collected-power approximation degrades"
        )
    if geom.rho >= 20.0:
        diagnostics.append(
            f"pointing exponent rho = {geom.rho:.3g} >= 20: pointing error is negligible"
        )
    if geom.rytov_sq > 1.0:
        diagnostics.append(
            f"Rytov variance {geom.rytov_sq:.3g} > 1: weak-turbulence model stretched"
        )
    return diagnostics


# ----------------------------------------------------------------------
# Config file handling
# ----------------------------------------------------------------------

_FIELD_NAMES = tuple(f.name for f in dataclasses.fields(SystemParams))
_ANGLE_KEYS = frozenset({"sigma_theta", "sigma_beta", "phi"})
_POWER_KEYS = frozenset({"pt", "sigma_nr_sq", "sigma_nk_sq"})
_OPTIONAL_PAIRS = (("rice_a", "rice_k"), ("cn2", "rytov_sq"))


def _parse_number(key: str, raw: str, lineno: int) -> float:
    parts = raw.split()
    if len(parts) == 1:
        text, unit = parts[0], None
    elif len(parts) == 2:
        text, unit = parts
    else:
        raise ConfigError(f"line {lineno}: cannot parse value {raw!r} for {key}")
    try:
        value = float(text)
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: {key} value {text!r} is not a number") from exc
    if unit is None:
        return value
    if key in _ANGLE_KEYS:
        if unit == "mrad":
            return value * 1e-3
        if unit == "rad":
            return value
    elif key in _POWER_KEYS:
        if unit == "W":
            return value
        if unit == "dBm":
            return 10.0 ** ((value - 30.0) / 10.0)
    elif key == "rice_k" and unit == "dB":
        return 10.0 ** (value / 10.0)
    raise ConfigError(f"line {lineno}: unit {unit!r} not valid for key {key}")


def parse_config_text(text: str) -> SystemParams:
    """Build SystemParams from config text, applying defaults for absent keys."""
    overrides: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _FIELD_NAMES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in overrides:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not raw:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        if key == "geometry_mode":
            overrides[key] = raw
        else:
            overrides[key] = _parse_number(key, raw, lineno)

    # a configured member of an either/or pair displaces the default of the other
    for first, second in _OPTIONAL_PAIRS:
        if first in overrides and second not in overrides:
            overrides[second] = None
        elif second in overrides and first not in overrides:
            overrides[first] = None
        elif first in overrides and second in overrides:
            raise ConfigError(f"keys {first!r} and {second!r} are mutually exclusive")
    try:
        return SystemParams(**overrides)
    except ParamsError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> SystemParams:
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def canonical_config_text(params: SystemParams) -> str:
    """Normalised config rendering: every field, declared order, base units,
    shortest round-trip decimals, unset optionals omitted.  This is the text
    the config digest is taken over."""
    lines = []
    for name in _FIELD_NAMES:
        value = getattr(params, name)
        if value is None:
            continue
        rendered = value if isinstance(value, str) else repr(float(value))
        lines.append(f"{name} = {rendered}")
    return "\n".join(lines) + "\n"


def config_digest(params: SystemParams) -> str:
    """Lowercase hex SHA-256 of the canonicalised config text."""
    return hashlib.sha256(canonical_config_text(params).encode("utf-8")).hexdigest()
