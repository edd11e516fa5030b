"""Satellite pass geometry in a local east-north-up frame.

The simulation footprint is a small square (20 km by default) centered at the
origin of a flat ENU frame.  Earth curvature is ignored for ground-to-ground
distances but kept in the ground-to-satellite slant range, which is what
dominates the link budget.  A pass is parameterized purely by elevation angle:
10 deg at rise, 90 deg at zenith, then on to 170 deg on the descending side.
Elevations above 90 deg reuse the mirrored slant range (the pass is symmetric)
so no orbit propagation is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EARTH_RADIUS_M = 6371e3
SPEED_OF_LIGHT_M_S = 3.0e8

# dwell model endpoints: ~1 s per snapshot near zenith, ~10 s near the horizon
_DWELL_ZENITH_S = 1.0
_DWELL_HORIZON_S = 10.0


@dataclass(frozen=True)
class Position3D:
    """Point in the local ENU frame anchored at the footprint center."""

    x_m: float
    y_m: float
    z_m: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x_m, self.y_m, self.z_m)):
            raise ValueError("position components must be finite")

    @property
    def xyz(self) -> np.ndarray:
        return np.array([self.x_m, self.y_m, self.z_m])

    def distance_to(self, other: "Position3D") -> float:
        return float(
            math.hypot(other.x_m - self.x_m, other.y_m - self.y_m, other.z_m - self.z_m)
        )

    def horizontal_distance_to(self, other: "Position3D") -> float:
        return float(math.hypot(other.x_m - self.x_m, other.y_m - self.y_m))


@dataclass(frozen=True)
class EarthModel:
    earth_radius_m: float = EARTH_RADIUS_M
    satellite_altitude_m: float = 600e3

    def __post_init__(self):
        if self.earth_radius_m <= 0 or self.satellite_altitude_m <= 0:
            raise ValueError("earth radius and satellite altitude must be positive")


@dataclass(frozen=True)
class PassSnapshot:
    """One simulation instant of the pass.

    elevation_deg runs from 10 to 170; values past 90 mean the satellite has
    crossed zenith and is descending on the far side of the track.
    """

    index: int
    elevation_deg: float
    slant_distance_m: float
    satellite_position: Position3D
    epoch_s: float

    def __post_init__(self):
        if not 10.0 <= self.elevation_deg <= 170.0:
            raise ValueError(
                f"snapshot elevation {self.elevation_deg} deg outside [10, 170]"
            )
        if self.slant_distance_m <= 0:
            raise ValueError("slant distance must be positive")


def slant_distance(elevation_deg: float, earth: EarthModel) -> float:
    """Slant range from the footprint center to the satellite, in meters.

    Parameters
    ----------
    elevation_deg : float
        Elevation angle in degrees.  (0, 90] is the physical range; values in
        (90, 170] are mapped to the mirrored elevation 180 - alpha.
    earth : EarthModel
        Supplies R_E and the satellite altitude h0.

    Returns
    -------
    float
        d = sqrt(R_E^2 sin^2(a) + h0^2 + 2 h0 R_E) - R_E sin(a), strictly
        decreasing in elevation up to zenith.
    """
    if elevation_deg <= 0 or elevation_deg > 170.0:
        raise ValueError(f"elevation {elevation_deg} deg outside (0, 170]")
    alpha = elevation_deg if elevation_deg <= 90.0 else 180.0 - elevation_deg
    re = earth.earth_radius_m
    h0 = earth.satellite_altitude_m
    s = math.sin(math.radians(alpha))
    return math.sqrt(re * re * s * s + h0 * h0 + 2.0 * h0 * re) - re * s


def satellite_position_at(elevation_deg: float, earth: EarthModel) -> Position3D:
    """Place the satellite on a straight track through zenith over the origin.

    The track runs along the x axis: the satellite rises in +x, passes zenith,
    and sets in -x.  cos(alpha) goes negative past 90 deg, so one expression
    covers both halves of the pass.
    """
    if not 10.0 <= elevation_deg <= 170.0:
        raise ValueError(f"elevation {elevation_deg} deg outside [10, 170]")
    d = slant_distance(elevation_deg, earth)
    a = math.radians(elevation_deg)
    return Position3D(d * math.cos(a), 0.0, d * math.sin(a))


def elevation_from_position(position: Position3D) -> float:
    """Track-relative elevation (degrees) of a satellite position.

    Inverse of satellite_position_at: measures the angle from the +x horizon
    direction, so descending-side positions (x < 0) map back to (90, 180).
    """
    return math.degrees(math.atan2(position.z_m, position.x_m))


def dwell_time_s(elevation_deg: float) -> float:
    """Seconds spent within 1 deg of elevation change, linear in |90 - alpha|."""
    frac = abs(90.0 - elevation_deg) / 80.0
    return _DWELL_ZENITH_S + (_DWELL_HORIZON_S - _DWELL_ZENITH_S) * frac


def generate_pass(
    earth: EarthModel,
    min_deg: float = 10.0,
    max_deg: float = 170.0,
    step_deg: float = 1.0,
) -> list[PassSnapshot]:
    """Snapshots at min, min+step, ... on the half-open range [min, max).

    The default 10-170 deg sweep at 1 deg yields 160 snapshots.  Epoch offsets
    accumulate the dwell model and only affect reporting, never the physics.
    """
    if not min_deg < max_deg:
        raise ValueError("need min_deg < max_deg")
    if step_deg <= 0:
        raise ValueError("step_deg must be positive")
    if min_deg < 10.0:
        raise ValueError("pass elevations below 10 deg are not modeled")
    count = int(math.ceil((max_deg - min_deg) / step_deg - 1e-12))
    snapshots = []
    epoch = 0.0
    for i in range(count):
        elevation = min_deg + i * step_deg
        if elevation > 170.0:
            raise ValueError("pass elevations above 170 deg are not modeled")
        snapshots.append(
            PassSnapshot(
                index=i,
                elevation_deg=elevation,
                slant_distance_m=slant_distance(elevation, earth),
                satellite_position=satellite_position_at(elevation, earth),
                epoch_s=epoch,
            )
        )
        epoch += dwell_time_s(elevation)
    return snapshots


def _as_xyz(p) -> np.ndarray:
    return np.asarray(getattr(p, "xyz", p), dtype=float)


def offaxis_angle(from_pos, boresight_unit, to_pos):
    """Angle (degrees) between a boresight direction and the direction to a target.

    Accepts Position3D or array-like (..., 3) inputs and broadcasts, so a
    whole matrix of link angles can be evaluated in one call.

    Parameters
    ----------
    from_pos : Position3D or ndarray
        Antenna location(s).
    boresight_unit : array-like
        Unit vector(s) of the antenna boresight.
    to_pos : Position3D or ndarray
        Target location(s).

    Returns
    -------
    float or ndarray
        Off-axis angle in [0, 180] degrees.
    """
    a = _as_xyz(from_pos)
    b = np.asarray(boresight_unit, dtype=float)
    c = _as_xyz(to_pos)
    norm_b = np.linalg.norm(b, axis=-1)
    if np.any(np.abs(norm_b - 1.0) > 1e-6):
        raise ValueError("boresight_unit must have unit norm")
    sep = c - a
    dist = np.linalg.norm(sep, axis=-1)
    if np.any(dist == 0.0):
        raise ValueError("from and to positions coincide")
    cosang = np.sum(sep * b, axis=-1) / dist
    ang = np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0)))
    if ang.ndim == 0:
        return float(ang)
    return ang


def pointing_unit(from_pos, to_pos) -> np.ndarray:
    """Unit vector(s) pointing from one position toward another."""
    sep = _as_xyz(to_pos) - _as_xyz(from_pos)
    dist = np.linalg.norm(sep, axis=-1, keepdims=True)
    if np.any(dist == 0.0):
        raise ValueError("from and to positions coincide")
    return sep / dist


def bearing_deg(from_pos, to_pos):
    """Horizontal bearing from +x axis, counter-clockwise, in (-180, 180]."""
    sep = _as_xyz(to_pos) - _as_xyz(from_pos)
    ang = np.degrees(np.arctan2(sep[..., 1], sep[..., 0]))
    if np.ndim(ang) == 0:
        return float(ang)
    return ang


def wrap_angle_deg(angle):
    """Wrap an angle or array of angles to [-180, 180)."""
    wrapped = (np.asarray(angle, dtype=float) + 180.0) % 360.0 - 180.0
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped
