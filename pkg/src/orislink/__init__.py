"""Dual-hop RF-to-FSO link performance toolkit.

Closed-form outage/BER analysis of a relayed link whose optical hop is
redirected by a jittering passive mirror surface, cross-validated against a
physically modelled Monte Carlo simulator.
"""

from .params import (
    ConfigError,
    DerivedGeometry,
    ParamsError,
    SystemParams,
    config_digest,
    derive,
    load_config,
    validate,
)
from .rf_channel import RfLink
from .fso_channel import FsoLink
from .performance import LinkPair, PerformanceCurve, sweep
from .mc_sim import CampaignResult, SceneGeometry, build_scene, run_campaign

__version__ = "0.1.0"

__all__ = [
    "CampaignResult",
    "ConfigError",
    "DerivedGeometry",
    "FsoLink",
    "LinkPair",
    "ParamsError",
    "PerformanceCurve",
    "RfLink",
    "SceneGeometry",
    "SystemParams",
    "build_scene",
    "config_digest",
    "derive",
    "load_config",
    "run_campaign",
    "sweep",
    "validate",
    "__version__",
]
