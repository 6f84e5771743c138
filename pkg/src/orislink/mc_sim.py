"""Physical Monte Carlo engine for the dual-hop link.

A concrete 3D scene (relay, mirror surface, receiver plane) is built so the
unperturbed chief ray travels l_ro, reflects off the mirror by the law of
reflection, and hits the receiver centre after l_ou.  Each trial perturbs
the beam direction and the mirror normal with two-axis Gaussian tilts
(exact small rotations, unit norm preserved), intersects the jittered ray
with the jittered mirror plane, reflects d' = d - 2(d.n')n', intersects the
receiver plane, and converts the radial spot offset into a collected-power
fraction.  The RF hop draws a Rice envelope; OOK detection on the optical
hop is realised by an explicit noise draw against a genie midpoint
threshold.

Campaigns are deterministic for a fixed (seed, trials) regardless of worker
count: trials are split into fixed-size chunks of ``CHUNK_TRIALS`` and
chunk i draws from ``numpy.random.SeedSequence(seed, spawn_key=(i,))``;
aggregation is associative (integer counts).
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import fso_channel, rf_channel, specfun
from .params import SystemParams, config_digest, derive
from .fso_channel import FsoLink
from .rf_channel import RfLink

__all__ = [
    "CHUNK_TRIALS",
    "CampaignResult",
    "EmpiricalCdf",
    "SceneGeometry",
    "TrialOutcome",
    "build_scene",
    "empirical_cdf",
    "run_campaign",
    "run_trial",
    "sample_fso_geometry",
    "simulate_trials",
]

CHUNK_TRIALS = 250_000
_WILSON_Z = 2.5758293035489004  # two-sided 99%
MIN_TRIALS = 10_000


@dataclass(frozen=True)
class SceneGeometry:
    relay_position: np.ndarray
    oris_center: np.ndarray
    oris_nominal_normal: np.ndarray
    receiver_center: np.ndarray
    receiver_plane_normal: np.ndarray
    beam_direction: np.ndarray        # unit chief-ray direction relay -> mirror
    reflected_direction: np.ndarray   # unit chief-ray direction mirror -> receiver


@dataclass(frozen=True)
class TrialOutcome:
    gamma_rf: float
    gamma_fso: float
    rf_bit_error: bool
    fso_bit_error: bool
    displacement_r: float
    h_total: float


@dataclass(frozen=True)
class CampaignResult:
    metric: str
    estimate: float
    ci_low: float
    ci_high: float
    trials: int
    seed: int
    config_digest: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "metric": self.metric,
                "estimate": self.estimate,
                "ci_low": self.ci_low,
                "ci_high": self.ci_high,
                "trials": self.trials,
                "seed": self.seed,
                "config_digest": self.config_digest,
            }
        )


def build_scene(params: SystemParams, incidence_angle: float = math.pi / 4) -> SceneGeometry:
    """Place relay, mirror, and receiver for a given incidence angle.

    The chief ray runs along +x; the mirror normal lies in the xz-plane
    tilted by the incidence angle; the receiver centre sits l_ou along the
    reflected ray with its plane facing the beam.
    """
    if not (0.0 < incidence_angle < math.pi / 2):
        raise ValueError("incidence_angle must be in (0, pi/2)")
    if math.pi / 2 - incidence_angle < 1e-6:
        raise ValueError("grazing incidence rejected")
    relay = np.zeros(3)
    d = np.array([1.0, 0.0, 0.0])
    oris = relay + params.l_ro * d
    n = np.array([-math.cos(incidence_angle), 0.0, math.sin(incidence_angle)])
    r = d - 2.0 * np.dot(d, n) * n
    receiver = oris + params.l_ou * r
    return SceneGeometry(
        relay_position=relay,
        oris_center=oris,
        oris_nominal_normal=n,
        receiver_center=receiver,
        receiver_plane_normal=-r,
        beam_direction=d,
        reflected_direction=r,
    )


def _orthonormal_pair(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two unit vectors completing v to a right-handed orthonormal triple."""
    helper = np.array([0.0, 1.0, 0.0]) if abs(v[1]) < 0.9 else np.array([0.0, 0.0, 1.0])
    e1 = np.cross(helper, v)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(v, e1)
    return e1, e2


def _tilt(v: np.ndarray, e1: np.ndarray, e2: np.ndarray,
          t1: np.ndarray, t2: np.ndarray) -> np.ndarray:
    """Exact rotation of unit vector v by angles (t1, t2) about its
    transverse axes: v' = cos(a) v + sin(a) (t1 e1 + t2 e2)/a, a = |t|."""
    a = np.hypot(t1, t2)
    # sin(a)/a without the 0/0; np.sinc is sin(pi x)/(pi x)
    sinc = np.sinc(a / np.pi)
    return (
        np.cos(a)[:, None] * v[None, :]
        + sinc[:, None] * (t1[:, None] * e1[None, :] + t2[:, None] * e2[None, :])
    )


def sample_fso_geometry(
    scene: SceneGeometry,
    params: SystemParams,
    rng: np.random.Generator,
    size: int | None = None,
):
    """Jittered-ray trials through the mirror: radial offset R and the
    collected-power fraction hp.

    Rays that no longer hit the mirror front side (or travel away from the
    receiver plane) count as hp = 0 deep outages; they are never discarded.
    Returns scalars for ``size=None``, else arrays of length ``size``.
    """
    n_trials = 1 if size is None else int(size)
    geom = derive(params)
    d = scene.beam_direction
    n = scene.oris_nominal_normal
    b1, b2 = _orthonormal_pair(d)
    m1, m2 = _orthonormal_pair(n)

    t1 = params.sigma_theta * rng.standard_normal(n_trials)
    t2 = params.sigma_theta * rng.standard_normal(n_trials)
    v1 = params.sigma_beta * rng.standard_normal(n_trials)
    v2 = params.sigma_beta * rng.standard_normal(n_trials)

    d_j = _tilt(d, b1, b2, t1, t2)
    n_j = _tilt(n, m1, m2, v1, v2)

    # jittered ray (from relay) onto jittered mirror plane through oris_center
    dn = np.einsum("ij,ij->i", d_j, n_j)
    num = (scene.oris_center - scene.relay_position) @ n_j.T
    with np.errstate(divide="ignore", invalid="ignore"):
        t_hit = num / dn
    hits_mirror = (dn < 0.0) & (t_hit > 0.0)
    t_hit = np.where(hits_mirror, t_hit, 1.0)
    p_hit = scene.relay_position[None, :] + t_hit[:, None] * d_j

    refl = d_j - 2.0 * np.einsum("ij,ij->i", d_j, n_j)[:, None] * n_j

    m = scene.receiver_plane_normal
    rm = refl @ m
    num2 = (scene.receiver_center[None, :] - p_hit) @ m
    with np.errstate(divide="ignore", invalid="ignore"):
        s_hit = num2 / rm
    hits_receiver = hits_mirror & (rm < 0.0) & (s_hit > 0.0)
    s_hit = np.where(hits_receiver, s_hit, 1.0)
    q = p_hit + s_hit[:, None] * refl

    offset = q - scene.receiver_center[None, :]
    r_hit = np.linalg.norm(offset, axis=1)
    # misses land nowhere: infinite offset, zero collected power, never dropped
    r_off = np.where(hits_receiver, r_hit, np.inf)
    hp = np.where(hits_receiver, geom.a0 * np.exp(-2.0 * r_hit**2 / geom.w_zeq_sq), 0.0)
    if size is None:
        return float(r_off[0]), float(hp[0])
    return r_off, hp


@dataclass
class TrialBatch:
    """Vectorised trial records (arrays of one length)."""

    gamma_rf: np.ndarray
    gamma_fso: np.ndarray
    rf_bit_error: np.ndarray
    fso_bit_error: np.ndarray
    displacement_r: np.ndarray
    h_total: np.ndarray


def simulate_trials(
    scene: SceneGeometry,
    params: SystemParams,
    rng: np.random.Generator,
    n_trials: int,
    bits: np.ndarray | None = None,
) -> TrialBatch:
    """Run n_trials through both hops; the per-chunk kernel of campaigns.

    Draw order is fixed (RF envelope pair, RF flip uniform, beam tilts,
    mirror tilts, turbulence, OOK noise) so results depend only on the rng
    state, not on the requested metric.
    """
    rf = RfLink.from_params(params)
    fso = FsoLink.from_params(params)
    geom = fso.geometry

    nu = rf_channel.sample_envelope(rf, rng, n_trials)
    gamma_rf = params.pt * nu * nu / params.sigma_nr_sq
    u_rf = rng.random(n_trials)
    flip_prob = np.minimum(
        1.0, params.rf_mod_kappa * specfun.gauss_q(np.sqrt(params.rf_mod_zeta * gamma_rf))
    )
    rf_flip = u_rf < flip_prob

    r_off, hp = sample_fso_geometry(scene, params, rng, n_trials)
    sx = math.sqrt(geom.sigma_x_sq)
    ha = np.exp(rng.normal(-2.0 * geom.sigma_x_sq, 2.0 * sx, n_trials))
    h_total = geom.h_l * hp * ha
    gamma_fso = fso_channel.optical_snr(fso, h_total)

    if bits is None:
        bits = np.zeros(n_trials, dtype=bool)
    relay_bits = bits ^ rf_flip

    # OOK on the optical hop: y = alpha mu h s + n, s in {0, 2 Po},
    # genie threshold at alpha mu h Po
    p_o = params.delta * params.pt
    amp = params.alpha_m * params.mu_k * h_total
    noise = rng.normal(0.0, math.sqrt(params.sigma_nk_sq), n_trials)
    y = amp * (2.0 * p_o) * relay_bits + noise
    decided = y >= amp * p_o
    fso_flip = decided != relay_bits

    return TrialBatch(
        gamma_rf=gamma_rf,
        gamma_fso=gamma_fso,
        rf_bit_error=rf_flip,
        fso_bit_error=fso_flip,
        displacement_r=r_off,
        h_total=h_total,
    )


def run_trial(
    scene: SceneGeometry,
    params: SystemParams,
    rng: np.random.Generator,
    bit: int = 0,
) -> TrialOutcome:
    """Single-trial convenience wrapper around :func:`simulate_trials`."""
    if bit not in (0, 1):
        raise ValueError("bit must be 0 or 1")
    batch = simulate_trials(scene, params, rng, 1, bits=np.array([bool(bit)]))
    return TrialOutcome(
        gamma_rf=float(batch.gamma_rf[0]),
        gamma_fso=float(batch.gamma_fso[0]),
        rf_bit_error=bool(batch.rf_bit_error[0]),
        fso_bit_error=bool(batch.fso_bit_error[0]),
        displacement_r=float(batch.displacement_r[0]),
        h_total=float(batch.h_total[0]),
    )


def _chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def _campaign_chunk(
    scene: SceneGeometry,
    params: SystemParams,
    metric: str,
    gamma_th: float,
    seed: int,
    index: int,
    n_trials: int,
) -> int:
    rng = _chunk_rng(seed, index)
    if metric == "ber":
        bits = rng.random(n_trials) < 0.5
    else:
        bits = None
    batch = simulate_trials(scene, params, rng, n_trials, bits=bits)
    if metric == "outage":
        return int(np.count_nonzero((batch.gamma_rf < gamma_th) | (batch.gamma_fso < gamma_th)))
    # end-to-end bit error iff exactly one hop flips
    return int(np.count_nonzero(batch.rf_bit_error ^ batch.fso_bit_error))


def wilson_interval(successes: int, trials: int, z: float = _WILSON_Z) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    p_hat = successes / trials
    denom = 1.0 + z * z / trials
    centre = (p_hat + z * z / (2.0 * trials)) / denom
    half = (z / denom) * math.sqrt(p_hat * (1.0 - p_hat) / trials + z * z / (4.0 * trials**2))
    return max(0.0, centre - half), min(1.0, centre + half)


def run_campaign(
    scene: SceneGeometry,
    params: SystemParams,
    metric: str,
    gamma_th: float,
    trials: int,
    seed: int,
    workers: int = 1,
) -> CampaignResult:
    """Estimate outage probability or BER with a Wilson 99% interval.

    Bit-reproducible for a fixed (seed, trials) whatever ``workers`` is;
    see the module docstring for the per-chunk seed derivation.
    """
    if metric not in ("outage", "ber"):
        raise ValueError("metric must be 'outage' or 'ber'")
    if trials < MIN_TRIALS:
        raise ValueError(f"trials must be >= {MIN_TRIALS} for a meaningful interval")
    if metric == "outage" and not gamma_th > 0:
        raise ValueError("gamma_th must be > 0 for the outage metric")
    sizes = [CHUNK_TRIALS] * (trials // CHUNK_TRIALS)
    if trials % CHUNK_TRIALS:
        sizes.append(trials % CHUNK_TRIALS)

    def job(args):
        index, n = args
        return _campaign_chunk(scene, params, metric, gamma_th, seed, index, n)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(job, enumerate(sizes)))
    else:
        counts = [job(item) for item in enumerate(sizes)]
    hits = sum(counts)
    ci_low, ci_high = wilson_interval(hits, trials)
    return CampaignResult(
        metric=metric,
        estimate=hits / trials,
        ci_low=ci_low,
        ci_high=ci_high,
        trials=trials,
        seed=seed,
        config_digest=config_digest(params),
    )


class EmpiricalCdf:
    """Step CDF of a sample, plus a two-sided KS test against a reference."""

    def __init__(self, samples) -> None:
        samples = np.asarray(samples, dtype=float)
        if samples.size < 1_000:
            raise ValueError("need at least 1000 samples")
        self._sorted = np.sort(samples)

    def __call__(self, x):
        return np.searchsorted(self._sorted, x, side="right") / self._sorted.size

    @property
    def samples(self) -> np.ndarray:
        return self._sorted

    def ks_test(self, reference_cdf) -> tuple[float, float]:
        """Two-sided KS statistic and p-value against a callable CDF."""
        res = stats.kstest(self._sorted, reference_cdf)
        return float(res.statistic), float(res.pvalue)


def empirical_cdf(samples) -> EmpiricalCdf:
    return EmpiricalCdf(samples)
