"""System-level simulator for satellite/terrestrial spectrum sharing in the
upper mid-band, with protection-threshold metrics, rule-based coordination
baselines, and a from-scratch policy-gradient controller."""

__version__ = "0.1.0"

from .geometry import (
    EarthModel,
    PassSnapshot,
    Position3D,
    generate_pass,
    offaxis_angle,
    satellite_position_at,
    slant_distance,
)
from .propagation import (
    NoiseModel,
    NtnLossTerms,
    UmaLinkGeometry,
    fspl_db,
    load_ntn_loss_table,
    ntn_pathloss_db,
    thermal_noise_dbm,
    uma_pathloss_db,
)

__all__ = [
    "EarthModel",
    "PassSnapshot",
    "Position3D",
    "generate_pass",
    "offaxis_angle",
    "satellite_position_at",
    "slant_distance",
    "NoiseModel",
    "NtnLossTerms",
    "UmaLinkGeometry",
    "fspl_db",
    "load_ntn_loss_table",
    "ntn_pathloss_db",
    "thermal_noise_dbm",
    "uma_pathloss_db",
    "__version__",
]
