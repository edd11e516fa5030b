"""Large-scale propagation: satellite-path loss, terrestrial UMa loss, noise.

Two families of links live here.  Satellite-to-ground links use free-space
loss (meters/GHz constant 32.45) plus additive elevation-dependent terms
(clutter, atmosphere, scintillation, optional shadow fading) pulled from a
tabulated lookup.  Ground-to-ground links use the UMa model: a two-branch
LOS expression split at a breakpoint distance, an NLOS floor taken as the max
against the LOS value, and a distance-based LOS probability used to freeze
per-link states at scenario build time.

All pathloss functions accept scalars or numpy arrays and broadcast, so the
interference engine can evaluate whole link matrices with the same code paths
the scalar unit tests exercise.
"""

from __future__ import annotations

import csv
import importlib.resources
import warnings
from dataclasses import dataclass

import numpy as np

from .geometry import SPEED_OF_LIGHT_M_S

BOLTZMANN_J_PER_K = 1.380649e-23

UMA_D2D_MIN_M = 10.0
UMA_D2D_MAX_M = 5000.0

# log-normal shadow spread for ground links, by visibility state
UMA_SHADOW_SIGMA_LOS_DB = 4.0
UMA_SHADOW_SIGMA_NLOS_DB = 6.0


def db_to_linear(db):
    return np.power(10.0, np.asarray(db, dtype=float) / 10.0)


def linear_to_db(linear):
    return 10.0 * np.log10(np.asarray(linear, dtype=float))


@dataclass(frozen=True)
class NtnLossTerms:
    """Additive dB terms on top of free-space loss for a satellite link.

    Deterministic terms must be non-negative; shadow fading is a sampled
    value and may take either sign.
    """

    clutter_loss_db: float = 0.0
    shadow_fading_db: float = 0.0
    atmospheric_loss_db: float = 0.0
    ionospheric_scintillation_db: float = 0.0
    tropospheric_scintillation_db: float = 0.0

    def __post_init__(self):
        for name in (
            "clutter_loss_db",
            "atmospheric_loss_db",
            "ionospheric_scintillation_db",
            "tropospheric_scintillation_db",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def total_db(self) -> float:
        return (
            self.clutter_loss_db
            + self.shadow_fading_db
            + self.atmospheric_loss_db
            + self.ionospheric_scintillation_db
            + self.tropospheric_scintillation_db
        )


@dataclass(frozen=True)
class NoiseModel:
    bandwidth_hz: float
    temperature_k: float = 290.0
    boltzmann: float = BOLTZMANN_J_PER_K

    def __post_init__(self):
        if self.bandwidth_hz <= 0 or self.temperature_k <= 0 or self.boltzmann <= 0:
            raise ValueError("noise model fields must be positive")


@dataclass
class UmaLinkGeometry:
    """Geometry of one (or a batch of) ground link(s) for the UMa model.

    d2d_m/d3d_m/los may be numpy arrays of matching shape; the heights and
    carrier are scalars shared across the batch.
    """

    d2d_m: object
    d3d_m: object
    bs_height_m: float
    ut_height_m: float
    carrier_hz: float
    los: object = True

    def __post_init__(self):
        d2d = np.asarray(self.d2d_m, dtype=float)
        d3d = np.asarray(self.d3d_m, dtype=float)
        if np.any(d2d < 0):
            raise ValueError("d2d must be non-negative")
        dh = self.bs_height_m - self.ut_height_m
        expected = d2d * d2d + dh * dh
        if not np.allclose(d3d * d3d, expected, rtol=1e-9, atol=1e-6):
            raise ValueError("d3d inconsistent with d2d and antenna heights")

    @classmethod
    def from_d2d(cls, d2d_m, bs_height_m, ut_height_m, carrier_hz, los=True):
        d2d = np.asarray(d2d_m, dtype=float)
        dh = bs_height_m - ut_height_m
        d3d = np.sqrt(d2d * d2d + dh * dh)
        if d3d.ndim == 0:
            d3d = float(d3d)
        return cls(d2d_m, d3d, bs_height_m, ut_height_m, carrier_hz, los)


def fspl_db(distance_m, carrier_hz):
    """Free-space loss, distance in meters and carrier converted to GHz.

    32.45 + 20 log10(d_m) + 20 log10(f_GHz).  Strictly increasing in both
    arguments; d=1 m at 1 GHz gives the bare constant.
    """
    d = np.asarray(distance_m, dtype=float)
    f = np.asarray(carrier_hz, dtype=float)
    if np.any(d <= 0) or np.any(f <= 0):
        raise ValueError("distance and carrier must be positive")
    out = 32.45 + 20.0 * np.log10(d) + 20.0 * np.log10(f / 1e9)
    if out.ndim == 0:
        return float(out)
    return out


def ntn_pathloss_db(slant_m, carrier_hz, terms: NtnLossTerms):
    """Free-space loss plus the five additive satellite-link terms."""
    out = np.asarray(fspl_db(slant_m, carrier_hz)) + terms.total_db
    if out.ndim == 0:
        return float(out)
    return out


def uma_breakpoint_m(geom: UmaLinkGeometry, env_height_m: float = 1.0) -> float:
    """Breakpoint distance 4 h'_BS h'_UT f_c / c with 1 m environment height."""
    h_bs = geom.bs_height_m - env_height_m
    h_ut = geom.ut_height_m - env_height_m
    if h_bs <= 0 or h_ut <= 0:
        raise ValueError("antenna heights must exceed the environment height")
    return 4.0 * h_bs * h_ut * geom.carrier_hz / SPEED_OF_LIGHT_M_S


def uma_pathloss_db(geom: UmaLinkGeometry):
    """UMa pathloss in dB for LOS or NLOS links.

    LOS uses the two-branch expression split at the breakpoint distance; the
    second branch carries a -10log10(bp^2 + dh^2) correction that makes the
    split exactly continuous.  NLOS takes the max of the LOS value and the
    39.08-slope expression, so NLOS is never more favorable than LOS.  d2d
    outside [10 m, 5 km] is clamped into validity with a warning and d3d
    recomputed from the clamped value.
    """
    d2d = np.asarray(geom.d2d_m, dtype=float)
    if np.any(d2d <= 0):
        raise ValueError("d2d must be positive")
    scalar_in = d2d.ndim == 0

    n_out = int(np.count_nonzero((d2d < UMA_D2D_MIN_M) | (d2d > UMA_D2D_MAX_M)))
    if n_out:
        warnings.warn(
            f"{n_out} link(s) outside the UMa validity range "
            f"[{UMA_D2D_MIN_M:g} m, {UMA_D2D_MAX_M:g} m]; clamping",
            stacklevel=2,
        )
        d2d = np.clip(d2d, UMA_D2D_MIN_M, UMA_D2D_MAX_M)

    dh = geom.bs_height_m - geom.ut_height_m
    d3d = np.sqrt(d2d * d2d + dh * dh)
    f_ghz = geom.carrier_hz / 1e9
    bp = uma_breakpoint_m(geom)

    pl_near = 32.4 + 20.0 * np.log10(d3d) + 20.0 * np.log10(f_ghz)
    pl_far = (
        32.4
        + 40.0 * np.log10(d3d)
        + 20.0 * np.log10(f_ghz)
        - 10.0 * np.log10(bp * bp + dh * dh)
    )
    pl_los = np.where(d2d < bp, pl_near, pl_far)

    pl_nlos_raw = (
        13.54
        + 39.08 * np.log10(d3d)
        + 20.0 * np.log10(f_ghz)
        - 0.6 * (geom.ut_height_m - 1.5)
    )
    pl_nlos = np.maximum(pl_los, pl_nlos_raw)

    los = np.asarray(geom.los, dtype=bool)
    out = np.where(los, pl_los, pl_nlos)
    if scalar_in and out.ndim == 0:
        return float(out)
    return out


def uma_los_probability(d2d_m):
    """Distance-based outdoor LOS probability for the UMa model.

    Certain LOS within 18 m, then 18/d + exp(-d/63)(1 - 18/d).  The
    low-terminal form; the high-rise enhancement term is zero below 13 m
    terminal height, which covers every node here.
    """
    d2d = np.asarray(d2d_m, dtype=float)
    if np.any(d2d < 0):
        raise ValueError("d2d must be non-negative")
    with np.errstate(divide="ignore", invalid="ignore"):
        p = 18.0 / d2d + np.exp(-d2d / 63.0) * (1.0 - 18.0 / d2d)
    p = np.where(d2d <= 18.0, 1.0, p)
    if p.ndim == 0:
        return float(p)
    return p


def draw_los_states(d2d_m, rng: np.random.Generator):
    """Bernoulli LOS states for a batch of links, frozen by the caller's rng."""
    p = np.asarray(uma_los_probability(d2d_m))
    return rng.random(p.shape) < p


def uma_shadow_sigma_db(los):
    """Shadow-fading spread per link state."""
    return np.where(
        np.asarray(los, dtype=bool), UMA_SHADOW_SIGMA_LOS_DB, UMA_SHADOW_SIGMA_NLOS_DB
    )


def thermal_noise_dbm(noise: NoiseModel) -> float:
    """Thermal noise power 10 log10(kTB / 1 mW)."""
    watts = noise.boltzmann * noise.temperature_k * noise.bandwidth_hz
    return 10.0 * float(np.log10(watts)) + 30.0


@dataclass(frozen=True)
class NtnLossTable:
    """Elevation-indexed satellite-link loss terms.

    Rows sit at elevation deciles (10..90 deg).  Lookups round to the nearest
    tabulated elevation; elevations past zenith use the mirrored value.
    """

    elevation_deg: np.ndarray
    clutter_db: np.ndarray
    atmospheric_db: np.ndarray
    ionospheric_db: np.ndarray
    tropospheric_db: np.ndarray
    shadow_sigma_db: np.ndarray

    def _row(self, elevation_deg: float) -> int:
        el = float(elevation_deg)
        if not 0.0 < el <= 180.0:
            raise ValueError(f"elevation {el} outside (0, 180]")
        if el > 90.0:
            el = 180.0 - el
        return int(np.argmin(np.abs(self.elevation_deg - el)))

    def terms_for(
        self,
        elevation_deg: float,
        include_clutter: bool = True,
        shadow_fading_db: float = 0.0,
    ) -> NtnLossTerms:
        i = self._row(elevation_deg)
        return NtnLossTerms(
            clutter_loss_db=float(self.clutter_db[i]) if include_clutter else 0.0,
            shadow_fading_db=shadow_fading_db,
            atmospheric_loss_db=float(self.atmospheric_db[i]),
            ionospheric_scintillation_db=float(self.ionospheric_db[i]),
            tropospheric_scintillation_db=float(self.tropospheric_db[i]),
        )

    def shadow_sigma_for(self, elevation_deg: float) -> float:
        return float(self.shadow_sigma_db[self._row(elevation_deg)])


_TABLE_COLUMNS = ["elevation_deg", "L_CL", "L_Atm", "L_IS", "L_TS", "sigma_SF"]


def load_ntn_loss_table(path=None) -> NtnLossTable:
    """Read the loss-term table (packaged default when no path is given).

    Plain CSV with '#' comment lines and columns
    elevation_deg, L_CL, L_Atm, L_IS, L_TS, sigma_SF.
    """
    if path is None:
        ref = importlib.resources.files("fr3coex.data") / "ntn_loss_table.csv"
        text = ref.read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    reader = csv.DictReader(lines)
    if reader.fieldnames is None or [c.strip() for c in reader.fieldnames] != _TABLE_COLUMNS:
        raise ValueError(
            f"loss table columns must be {','.join(_TABLE_COLUMNS)}, "
            f"got {reader.fieldnames}"
        )
    rows = sorted((float(r["elevation_deg"]), r) for r in reader)
    if not rows:
        raise ValueError("loss table has no data rows")
    return NtnLossTable(
        elevation_deg=np.array([e for e, _ in rows]),
        clutter_db=np.array([float(r["L_CL"]) for _, r in rows]),
        atmospheric_db=np.array([float(r["L_Atm"]) for _, r in rows]),
        ionospheric_db=np.array([float(r["L_IS"]) for _, r in rows]),
        tropospheric_db=np.array([float(r["L_TS"]) for _, r in rows]),
        shadow_sigma_db=np.array([float(r["sigma_SF"]) for _, r in rows]),
    )
