"""Gain patterns for every radiating node in the scenario.

Satellite and NTN terminals use a circular-aperture pattern: relative gain
4 |J1(x)/x|^2 with x = k a sin(theta), floored near the Bessel nulls so dB
arithmetic never sees -inf.  Peak gain and pattern shape are separable: the
peak comes from config, the aperture radius only shapes the lobes.  Terminal
apertures are sized from their peak via the uniform-aperture relation
G = (k a)^2, which makes the T1 dish narrow and the T2 handheld wide.

gNB sectors use the parabolic horizontal/vertical attenuation pattern with a
front-to-back cap.  The vertical angle convention: theta' is measured from
the horizontal plane, positive downward, so theta' equal to the downtilt hits
boresight.  The horizontal attenuation uses 12 (phi/phi_3dB)^2 literally,
which puts -12 dB (not -3 dB) at the nominal half-power width; kept as given.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import j1

from .geometry import SPEED_OF_LIGHT_M_S, wrap_angle_deg

T1 = "T1"
T2 = "T2"

DEFAULT_TILT_RANGE_DEG = (0.0, 15.0)

# default floor: pattern never reported more than this far below its peak
BEAM_FLOOR_REL_DB = 60.0


def wavenumber_per_m(carrier_hz: float) -> float:
    return 2.0 * math.pi * carrier_hz / SPEED_OF_LIGHT_M_S


def aperture_radius_for_peak(peak_gain_dbi: float, k_per_m: float) -> float:
    """Radius realizing a peak gain under G = (k a)^2."""
    return math.sqrt(10.0 ** (peak_gain_dbi / 10.0)) / k_per_m


@dataclass(frozen=True)
class ApertureBeam:
    peak_gain_dbi: float
    aperture_radius_m: float
    wavenumber_per_m: float

    def __post_init__(self):
        if self.aperture_radius_m <= 0 or self.wavenumber_per_m <= 0:
            raise ValueError("aperture radius and wavenumber must be positive")

    def check_carrier(self, carrier_hz: float):
        k = wavenumber_per_m(carrier_hz)
        if abs(self.wavenumber_per_m - k) > 1e-9 * k:
            raise ValueError(
                f"beam wavenumber {self.wavenumber_per_m} inconsistent with "
                f"carrier {carrier_hz} Hz (expected {k})"
            )


def sat_beam_gain_dbi(beam: ApertureBeam, offaxis_deg, floor_rel_db: float = BEAM_FLOOR_REL_DB):
    """Aperture gain at an off-axis angle in [0, 90] degrees.

    Peak at boresight, then peak + 10 log10(4 |J1(x)/x|^2) with
    x = k a sin(theta), floored at peak - floor_rel_db.
    """
    theta = np.asarray(offaxis_deg, dtype=float)
    if np.any(theta < 0) or np.any(theta > 90.0):
        raise ValueError("off-axis angle outside [0, 90] deg")
    x = beam.wavenumber_per_m * beam.aperture_radius_m * np.sin(np.radians(theta))
    x = np.atleast_1d(x)
    rel = np.ones_like(x)
    nz = x > 1e-9
    ratio = np.divide(j1(x), x, out=np.zeros_like(x), where=nz)
    rel[nz] = 4.0 * ratio[nz] ** 2
    with np.errstate(divide="ignore"):
        rel_db = 10.0 * np.log10(rel)
    gain = beam.peak_gain_dbi + np.maximum(rel_db, -floor_rel_db)
    if np.ndim(offaxis_deg) == 0:
        return float(gain[0])
    return gain.reshape(np.shape(offaxis_deg))


@dataclass(frozen=True)
class SectorPattern:
    """One gNB sector: parabolic pattern parameters plus mounting angles."""

    azimuth_deg: float = 0.0
    downtilt_deg: float = 6.0
    peak_gain_dbi: float = 8.0
    hpbw_h_deg: float = 65.0
    hpbw_v_deg: float = 65.0
    sla_v_db: float = 30.0
    front_back_db: float = 30.0
    tilt_range_deg: tuple = DEFAULT_TILT_RANGE_DEG

    def __post_init__(self):
        if not 0.0 < self.hpbw_h_deg < 180.0 or not 0.0 < self.hpbw_v_deg < 180.0:
            raise ValueError("half-power beamwidths must lie in (0, 180) deg")
        if self.sla_v_db <= 0 or self.front_back_db <= 0:
            raise ValueError("attenuation limits must be positive")
        lo, hi = self.tilt_range_deg
        if not lo <= self.downtilt_deg <= hi:
            raise ValueError(
                f"downtilt {self.downtilt_deg} outside mechanical range [{lo}, {hi}]"
            )


def gnb_sector_gain_dbi(p: SectorPattern, theta_deg, phi_deg, downtilt_deg=None):
    """Sector gain at vertical angle theta' and boresight-relative azimuth phi'.

    theta' is horizon-referenced, positive downward.  An explicit
    downtilt_deg (scalar or broadcastable array) overrides the pattern's
    mounted value so a controller can steer tilt without rebuilding patterns.
    """
    tilt = p.downtilt_deg if downtilt_deg is None else downtilt_deg
    theta = np.asarray(theta_deg, dtype=float)
    phi = wrap_angle_deg(phi_deg)
    att_h = np.minimum(12.0 * (np.asarray(phi) / p.hpbw_h_deg) ** 2, p.front_back_db)
    att_v = np.minimum(
        12.0 * ((theta - np.asarray(tilt)) / p.hpbw_v_deg) ** 2, p.sla_v_db
    )
    gain = p.peak_gain_dbi - np.minimum(att_h + att_v, p.front_back_db)
    if np.ndim(gain) == 0:
        return float(gain)
    return gain


@dataclass(frozen=True)
class TerminalPattern:
    """NTN ground terminal: aperture beam pointed at the satellite.

    The boresight is not stored; it tracks the instantaneous satellite
    position, so callers pass the off-axis angle they measured against the
    terminal-to-satellite direction.
    """

    kind: str
    peak_gain_dbi: float
    beam: ApertureBeam

    def __post_init__(self):
        if self.kind not in (T1, T2):
            raise ValueError(f"unknown terminal kind {self.kind!r}")


def t1_pattern(carrier_hz: float, peak_gain_dbi: float = 33.0) -> TerminalPattern:
    """Fixed dish terminal: high gain, narrow beam."""
    k = wavenumber_per_m(carrier_hz)
    beam = ApertureBeam(peak_gain_dbi, aperture_radius_for_peak(peak_gain_dbi, k), k)
    return TerminalPattern(T1, peak_gain_dbi, beam)


def t2_pattern(carrier_hz: float, peak_gain_dbi: float = 17.0) -> TerminalPattern:
    """Direct-to-cell handheld: low gain, wide beam."""
    k = wavenumber_per_m(carrier_hz)
    beam = ApertureBeam(peak_gain_dbi, aperture_radius_for_peak(peak_gain_dbi, k), k)
    return TerminalPattern(T2, peak_gain_dbi, beam)


def terminal_gain_dbi(t: TerminalPattern, offaxis_deg, floor_rel_db: float = BEAM_FLOOR_REL_DB):
    """Terminal gain toward any direction in [0, 180] deg off boresight.

    The front hemisphere follows the aperture pattern; everything behind the
    aperture plane sits at the floor.
    """
    theta = np.asarray(offaxis_deg, dtype=float)
    if np.any(theta < 0) or np.any(theta > 180.0):
        raise ValueError("off-axis angle outside [0, 180] deg")
    front = np.minimum(theta, 90.0)
    gain = np.asarray(sat_beam_gain_dbi(t.beam, front, floor_rel_db))
    floor = t.peak_gain_dbi - floor_rel_db
    out = np.where(theta > 90.0, floor, gain)
    if np.ndim(offaxis_deg) == 0:
        return float(out)
    return out


def ue_gain_dbi(offaxis_deg=0.0, gain_dbi: float = 0.0):
    """TN handset gain: a configurable constant, isotropic by default."""
    out = np.full(np.shape(offaxis_deg), gain_dbi)
    if out.ndim == 0:
        return float(gain_dbi)
    return out
