"""Scenario construction: node placement, sectorization, association.

A Scenario is the immutable world the interference engine evaluates: base
station sites with trisector patterns, terrestrial users bound to their
nearest site, satellite terminals scattered by a Poisson process, and every
propagation/control knob the models need.  Construction is deterministic
given (config, seed); user and terminal point sets are drawn with row-major
fills so the 24-terminal draw is a prefix of the 40-terminal draw at the
same seed, which keeps density sweeps nested.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .antenna import (
    ApertureBeam,
    SectorPattern,
    T1,
    T2,
    TerminalPattern,
    t1_pattern,
    t2_pattern,
    wavenumber_per_m,
)
from .config import ScenarioConfig
from .geometry import EarthModel, Position3D, bearing_deg, wrap_angle_deg
from .propagation import NoiseModel, NtnLossTable, load_ntn_loss_table

SCENARIO_SCHEMA = "fr3coex-scenario"
SCENARIO_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ControlLimits:
    """Mechanical and regulatory bounds every control state must respect."""

    max_dl_power_dbm: float = 33.0
    min_dl_power_dbm: float = 13.0
    tilt_range_deg: tuple = (0.0, 15.0)
    default_tilt_deg: float = 6.0
    ue_cap_range_dbm: tuple = (3.0, 23.0)
    threshold_range_db: tuple = (-12.2, -6.0)
    default_threshold_db: float = -6.0

    def __post_init__(self):
        if self.min_dl_power_dbm > self.max_dl_power_dbm:
            raise ValueError("min dl power above max")
        if not self.tilt_range_deg[0] <= self.default_tilt_deg <= self.tilt_range_deg[1]:
            raise ValueError("default tilt outside mechanical range")
        lo, hi = self.threshold_range_db
        if not lo <= self.default_threshold_db <= hi:
            raise ValueError("default threshold outside its range")


@dataclass(frozen=True)
class BsSite:
    id: int
    position: Position3D
    sectors: tuple

    def __post_init__(self):
        if self.position.z_m <= 0:
            raise ValueError(f"site {self.id}: height must be positive")
        if len(self.sectors) < 1:
            raise ValueError(f"site {self.id}: needs at least one sector")
        az = [s.azimuth_deg for s in self.sectors]
        if len(set(az)) != len(az):
            raise ValueError(f"site {self.id}: sector azimuths must be distinct")


@dataclass(frozen=True)
class TnUser:
    id: int
    position: Position3D
    serving_site_id: int
    serving_sector_index: int
    max_ul_power_dbm: float = 23.0


@dataclass(frozen=True)
class NtnTerminal:
    id: int
    position: Position3D
    kind: str
    pattern: TerminalPattern

    def __post_init__(self):
        if self.kind not in (T1, T2):
            raise ValueError(f"terminal {self.id}: unknown kind {self.kind!r}")


@dataclass
class Scenario:
    """Everything the engine needs, frozen at build time."""

    earth: EarthModel
    footprint_km: float
    sites: list
    tn_users: list
    ntn_terminals: list
    noise: NoiseModel
    carrier_hz: float
    total_bandwidth_hz: float
    sat_tx_power_dbm: float
    sat_beam: ApertureBeam
    limits: ControlLimits
    seed: int
    loss_table: NtnLossTable = field(compare=False, default=None)
    tn2ntn_pathloss: str = "uma"
    uma_nlos_enabled: bool = True
    uma_shadow_enabled: bool = False
    ntn_shadow_enabled: bool = False
    ntn_clutter_kinds: tuple = (T2,)
    ue_p0_dbm: float = -90.0
    ue_gain_dbi: float = 0.0

    def __post_init__(self):
        if self.loss_table is None:
            self.loss_table = load_ntn_loss_table()
        if not self.sites or not self.tn_users or not self.ntn_terminals:
            raise ValueError("scenario needs at least one site, user, and terminal")
        ids = [s.id for s in self.sites]
        if ids != sorted(ids) or len(set(ids)) != len(ids):
            raise ValueError("sites must be sorted by unique id")
        half = self.footprint_km * 500.0 + 1e-6
        for node in [*self.sites, *self.tn_users, *self.ntn_terminals]:
            p = node.position
            if abs(p.x_m) > half or abs(p.y_m) > half:
                raise ValueError(f"node {node.id} outside the footprint square")
        self.sat_beam.check_carrier(self.carrier_hz)
        site_index = {s.id: i for i, s in enumerate(self.sites)}
        for u in self.tn_users:
            if u.serving_site_id not in site_index:
                raise ValueError(f"user {u.id} serves unknown site {u.serving_site_id}")
            n_sec = len(self.sites[site_index[u.serving_site_id]].sectors)
            if not 0 <= u.serving_sector_index < n_sec:
                raise ValueError(f"user {u.id} serves invalid sector index")
        for t in self.ntn_terminals:
            t.pattern.beam.check_carrier(self.carrier_hz)

    @property
    def n_sectors(self) -> int:
        return sum(len(s.sectors) for s in self.sites)

    @property
    def footprint_area_m2(self) -> float:
        return (self.footprint_km * 1000.0) ** 2

    def site_by_id(self, site_id: int) -> BsSite:
        for s in self.sites:
            if s.id == site_id:
                return s
        raise KeyError(site_id)


def parse_mix(text: str) -> tuple:
    """'100:0' style T1:T2 ratio -> normalized fractions."""
    parts = text.split(":")
    if len(parts) != 2:
        raise ValueError(f"mix must look like 'A:B', got {text!r}")
    a, b = (float(p) for p in parts)
    if a < 0 or b < 0 or a + b == 0:
        raise ValueError(f"mix parts must be non-negative and not both zero: {text!r}")
    return a / (a + b), b / (a + b)


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_ppp(
    density_per_m2: float,
    area_m2: float,
    seed,
    count_mode: str = "fixed",
) -> np.ndarray:
    """Scatter points uniformly over a centered square of the given area.

    `fixed` mode places exactly round(density * area) points, matching the
    deterministic terminal counts used in reporting; `expected` mode draws
    the count from Poisson(density * area).  Returns an (n, 2) array; the
    row-major fill makes lower-count draws prefixes of higher-count draws
    under the same seed in fixed mode.
    """
    if density_per_m2 <= 0 or area_m2 <= 0:
        raise ValueError("density and area must be positive")
    rng = _as_rng(seed)
    lam = density_per_m2 * area_m2
    if count_mode == "fixed":
        n = int(round(lam))
    elif count_mode == "expected":
        n = int(rng.poisson(lam))
    else:
        raise ValueError(f"count_mode must be fixed|expected, got {count_mode!r}")
    half = math.sqrt(area_m2) / 2.0
    return rng.uniform(-half, half, size=(n, 2))


def _default_sector_template(cfg: ScenarioConfig | None = None) -> SectorPattern:
    if cfg is None:
        return SectorPattern()
    return SectorPattern(
        azimuth_deg=0.0,
        downtilt_deg=cfg.default_tilt_deg,
        peak_gain_dbi=cfg.sector_peak_gain_dbi,
        hpbw_h_deg=cfg.sector_hpbw_h_deg,
        hpbw_v_deg=cfg.sector_hpbw_v_deg,
        sla_v_db=cfg.sector_sla_v_db,
        front_back_db=cfg.sector_front_back_db,
        tilt_range_deg=(cfg.tilt_min_deg, cfg.tilt_max_deg),
    )


def _trisector(template: SectorPattern, azimuths=(0.0, 120.0, 240.0)) -> tuple:
    return tuple(dataclasses.replace(template, azimuth_deg=a) for a in azimuths)


def load_bs_map(
    path,
    footprint_km: float = 20.0,
    on_outside: str = "clamp",
    sector_template: SectorPattern | None = None,
) -> list:
    """Read sites from a CSV with header id,x_m,y_m,height_m[,azimuths].

    The azimuths column, when present, is a ';'-separated degree list; rows
    without it get the default trisector.  Coordinates outside the footprint
    square are clamped or dropped (with a warning) or rejected, per
    on_outside in {clamp, drop, error}.
    """
    if on_outside not in ("clamp", "drop", "error"):
        raise ValueError(f"on_outside must be clamp|drop|error, got {on_outside!r}")
    template = sector_template or _default_sector_template()
    half = footprint_km * 500.0
    sites = []
    seen = {}
    with open(path, newline="") as fh:
        rows = [
            (ln, line)
            for ln, line in enumerate(csv.reader(fh), start=1)
            if line and not line[0].lstrip().startswith("#")
        ]
    if not rows:
        raise ValueError(f"{path}: no sites (empty file)")
    header_ln, header = rows[0]
    base_cols = ["id", "x_m", "y_m", "height_m"]
    cols = [c.strip() for c in header]
    if cols not in (base_cols, base_cols + ["azimuths"]):
        raise ValueError(f"{path}:{header_ln}: bad header {cols}")
    has_az = len(cols) == 5
    for ln, row in rows[1:]:
        if len(row) != len(cols):
            raise ValueError(f"{path}:{ln}: expected {len(cols)} fields, got {len(row)}")
        try:
            site_id = int(row[0])
            x, y, h = (float(v) for v in row[1:4])
        except ValueError as err:
            raise ValueError(f"{path}:{ln}: malformed row: {err}") from None
        if site_id in seen:
            raise ValueError(
                f"{path}:{ln}: duplicate site id {site_id} (first at line {seen[site_id]})"
            )
        seen[site_id] = ln
        if abs(x) > half or abs(y) > half:
            if on_outside == "error":
                raise ValueError(f"{path}:{ln}: site {site_id} outside footprint")
            warnings.warn(
                f"{path}:{ln}: site {site_id} outside footprint ({on_outside})",
                stacklevel=2,
            )
            if on_outside == "drop":
                continue
            x = float(np.clip(x, -half, half))
            y = float(np.clip(y, -half, half))
        if has_az and row[4].strip():
            azimuths = tuple(float(a) for a in row[4].split(";"))
            sectors = _trisector(template, azimuths)
        else:
            sectors = _trisector(template)
        sites.append(BsSite(site_id, Position3D(x, y, h), sectors))
    if not sites:
        raise ValueError(f"{path}: no sites")
    return sorted(sites, key=lambda s: s.id)


def synthesize_bs_map(
    n_sites: int,
    seed,
    footprint_km: float = 20.0,
    bs_height_m: float = 25.0,
    sector_template: SectorPattern | None = None,
) -> list:
    """Uniform random stand-in for a real site map: trisectors, 25 m masts."""
    if n_sites < 1:
        raise ValueError("need at least one site")
    rng = _as_rng(seed)
    template = sector_template or _default_sector_template()
    half = footprint_km * 500.0
    xy = rng.uniform(-half, half, size=(n_sites, 2))
    return [
        BsSite(i, Position3D(float(x), float(y), bs_height_m), _trisector(template))
        for i, (x, y) in enumerate(xy)
    ]


def associate_users(
    user_positions,
    sites: list,
    ut_height_m: float = 1.5,
    max_ul_power_dbm: float = 23.0,
) -> list:
    """Bind each user to the nearest site (2-D), then its best sector.

    Ties go to the lowest site id, then the lowest sector index; np.argmin's
    first-match rule gives exactly that once sites are sorted by id.
    """
    if not sites:
        raise ValueError("need at least one site")
    pos = np.asarray(user_positions, dtype=float).reshape(-1, 2)
    site_xy = np.array([[s.position.x_m, s.position.y_m] for s in sites])
    d2 = np.sum((pos[:, None, :] - site_xy[None, :, :]) ** 2, axis=2)
    nearest = np.argmin(d2, axis=1)
    users = []
    for uid, (p, si) in enumerate(zip(pos, nearest)):
        site = sites[si]
        upos = Position3D(float(p[0]), float(p[1]), ut_height_m)
        if upos.horizontal_distance_to(site.position) == 0.0:
            sector_idx = 0
        else:
            bearing = bearing_deg(site.position, upos)
            offsets = [
                abs(wrap_angle_deg(bearing - s.azimuth_deg)) for s in site.sectors
            ]
            sector_idx = int(np.argmin(offsets))
        users.append(TnUser(uid, upos, site.id, sector_idx, max_ul_power_dbm))
    return users


def build_scenario(cfg: ScenarioConfig, seed: int) -> Scenario:
    """Deterministic scenario from config + seed.

    Independent child streams (sites, TN users, NTN terminals) come off one
    seed sequence, so changing the terminal density never disturbs the site
    layout or user placement.
    """
    ss = np.random.SeedSequence([int(seed), 0])
    site_rng, tn_rng, ntn_rng = (np.random.default_rng(c) for c in ss.spawn(3))
    template = _default_sector_template(cfg)

    if cfg.bs_map_path is not None:
        sites = load_bs_map(
            cfg.bs_map_path, cfg.footprint_km, sector_template=template
        )
    else:
        sites = synthesize_bs_map(
            cfg.n_synth_sites,
            site_rng,
            cfg.footprint_km,
            cfg.bs_height_m,
            sector_template=template,
        )

    area = (cfg.footprint_km * 1000.0) ** 2
    carrier_hz = cfg.carrier_ghz * 1e9

    user_xy = sample_ppp(cfg.tn_user_density_per_m2, area, tn_rng, "fixed")
    users = associate_users(
        user_xy, sites, cfg.tn_user_height_m, cfg.ue_max_power_dbm
    )

    term_xy = sample_ppp(cfg.ntn_density_per_m2, area, ntn_rng, cfg.ntn_count_mode)
    frac_t1, _ = parse_mix(cfg.t1_t2_mix)
    n_t1 = int(round(len(term_xy) * frac_t1))
    pat1 = t1_pattern(carrier_hz, cfg.t1_gain_dbi)
    pat2 = t2_pattern(carrier_hz, cfg.t2_gain_dbi)
    terminals = [
        NtnTerminal(
            tid,
            Position3D(float(x), float(y), cfg.ntn_terminal_height_m),
            T1 if tid < n_t1 else T2,
            pat1 if tid < n_t1 else pat2,
        )
        for tid, (x, y) in enumerate(term_xy)
    ]

    limits = ControlLimits(
        max_dl_power_dbm=cfg.max_dl_power_dbm,
        min_dl_power_dbm=cfg.min_dl_power_dbm,
        tilt_range_deg=(cfg.tilt_min_deg, cfg.tilt_max_deg),
        default_tilt_deg=cfg.default_tilt_deg,
        ue_cap_range_dbm=(cfg.ue_min_power_dbm, cfg.ue_max_power_dbm),
        threshold_range_db=(cfg.threshold_min_db, cfg.threshold_max_db),
        default_threshold_db=cfg.default_threshold_db,
    )

    return Scenario(
        earth=EarthModel(cfg.earth_radius_km * 1e3, cfg.satellite_altitude_km * 1e3),
        footprint_km=cfg.footprint_km,
        sites=sites,
        tn_users=users,
        ntn_terminals=terminals,
        noise=NoiseModel(bandwidth_hz=cfg.bandwidth_mhz * 1e6, temperature_k=cfg.temperature_k),
        carrier_hz=carrier_hz,
        total_bandwidth_hz=cfg.bandwidth_mhz * 1e6,
        sat_tx_power_dbm=cfg.sat_tx_power_dbm,
        sat_beam=ApertureBeam(
            cfg.sat_peak_gain_dbi, cfg.sat_aperture_radius_m, wavenumber_per_m(carrier_hz)
        ),
        limits=limits,
        seed=int(seed),
        loss_table=load_ntn_loss_table(cfg.loss_table_path),
        tn2ntn_pathloss=cfg.tn2ntn_pathloss,
        uma_nlos_enabled=cfg.uma_nlos_enabled,
        uma_shadow_enabled=cfg.uma_shadow_enabled,
        ntn_shadow_enabled=cfg.ntn_shadow_enabled,
        ntn_clutter_kinds=tuple(cfg.ntn_clutter_kinds),
        ue_p0_dbm=cfg.ue_p0_dbm,
        ue_gain_dbi=cfg.ue_gain_dbi,
    )


def _sector_params_block(scenario: Scenario) -> dict:
    s0 = scenario.sites[0].sectors[0]
    block = {
        "peak_gain_dbi": s0.peak_gain_dbi,
        "hpbw_h_deg": s0.hpbw_h_deg,
        "hpbw_v_deg": s0.hpbw_v_deg,
        "sla_v_db": s0.sla_v_db,
        "front_back_db": s0.front_back_db,
        "tilt_range_deg": list(s0.tilt_range_deg),
    }
    for site in scenario.sites:
        for sec in site.sectors:
            for key in ("peak_gain_dbi", "hpbw_h_deg", "hpbw_v_deg", "sla_v_db", "front_back_db"):
                if getattr(sec, key) != block[key]:
                    raise ValueError(
                        "scenario serialization requires uniform sector shape parameters"
                    )
    return block


def scenario_to_dict(scenario: Scenario) -> dict:
    block = _sector_params_block(scenario)
    return {
        "schema": SCENARIO_SCHEMA,
        "schema_version": SCENARIO_SCHEMA_VERSION,
        "seed": scenario.seed,
        "footprint_km": scenario.footprint_km,
        "carrier_hz": scenario.carrier_hz,
        "total_bandwidth_hz": scenario.total_bandwidth_hz,
        "earth": {
            "earth_radius_m": scenario.earth.earth_radius_m,
            "satellite_altitude_m": scenario.earth.satellite_altitude_m,
        },
        "noise": {
            "bandwidth_hz": scenario.noise.bandwidth_hz,
            "temperature_k": scenario.noise.temperature_k,
            "boltzmann": scenario.noise.boltzmann,
        },
        "satellite": {
            "tx_power_dbm": scenario.sat_tx_power_dbm,
            "peak_gain_dbi": scenario.sat_beam.peak_gain_dbi,
            "aperture_radius_m": scenario.sat_beam.aperture_radius_m,
        },
        "sector_params": block,
        "sites": [
            {
                "id": s.id,
                "x_m": s.position.x_m,
                "y_m": s.position.y_m,
                "height_m": s.position.z_m,
                "azimuths_deg": [sec.azimuth_deg for sec in s.sectors],
                "downtilts_deg": [sec.downtilt_deg for sec in s.sectors],
            }
            for s in scenario.sites
        ],
        "tn_users": [
            {
                "id": u.id,
                "x_m": u.position.x_m,
                "y_m": u.position.y_m,
                "height_m": u.position.z_m,
                "serving_site_id": u.serving_site_id,
                "serving_sector_index": u.serving_sector_index,
                "max_ul_power_dbm": u.max_ul_power_dbm,
            }
            for u in scenario.tn_users
        ],
        "ntn_terminals": [
            {
                "id": t.id,
                "x_m": t.position.x_m,
                "y_m": t.position.y_m,
                "height_m": t.position.z_m,
                "kind": t.kind,
                "peak_gain_dbi": t.pattern.peak_gain_dbi,
            }
            for t in scenario.ntn_terminals
        ],
        "limits": {
            "max_dl_power_dbm": scenario.limits.max_dl_power_dbm,
            "min_dl_power_dbm": scenario.limits.min_dl_power_dbm,
            "tilt_range_deg": list(scenario.limits.tilt_range_deg),
            "default_tilt_deg": scenario.limits.default_tilt_deg,
            "ue_cap_range_dbm": list(scenario.limits.ue_cap_range_dbm),
            "threshold_range_db": list(scenario.limits.threshold_range_db),
            "default_threshold_db": scenario.limits.default_threshold_db,
        },
        "propagation": {
            "tn2ntn_pathloss": scenario.tn2ntn_pathloss,
            "uma_nlos_enabled": scenario.uma_nlos_enabled,
            "uma_shadow_enabled": scenario.uma_shadow_enabled,
            "ntn_shadow_enabled": scenario.ntn_shadow_enabled,
            "ntn_clutter_kinds": list(scenario.ntn_clutter_kinds),
            "ue_p0_dbm": scenario.ue_p0_dbm,
            "ue_gain_dbi": scenario.ue_gain_dbi,
        },
        "loss_table": {
            "elevation_deg": scenario.loss_table.elevation_deg.tolist(),
            "L_CL": scenario.loss_table.clutter_db.tolist(),
            "L_Atm": scenario.loss_table.atmospheric_db.tolist(),
            "L_IS": scenario.loss_table.ionospheric_db.tolist(),
            "L_TS": scenario.loss_table.tropospheric_db.tolist(),
            "sigma_SF": scenario.loss_table.shadow_sigma_db.tolist(),
        },
    }


def scenario_from_dict(d: dict) -> Scenario:
    if d.get("schema") != SCENARIO_SCHEMA:
        raise ValueError(f"not a scenario file (schema {d.get('schema')!r})")
    if d.get("schema_version") != SCENARIO_SCHEMA_VERSION:
        raise ValueError(f"unsupported scenario schema version {d.get('schema_version')!r}")
    carrier = d["carrier_hz"]
    blk = d["sector_params"]

    def sector(azimuth, downtilt):
        return SectorPattern(
            azimuth_deg=azimuth,
            downtilt_deg=downtilt,
            peak_gain_dbi=blk["peak_gain_dbi"],
            hpbw_h_deg=blk["hpbw_h_deg"],
            hpbw_v_deg=blk["hpbw_v_deg"],
            sla_v_db=blk["sla_v_db"],
            front_back_db=blk["front_back_db"],
            tilt_range_deg=tuple(blk["tilt_range_deg"]),
        )

    sites = [
        BsSite(
            s["id"],
            Position3D(s["x_m"], s["y_m"], s["height_m"]),
            tuple(
                sector(a, t) for a, t in zip(s["azimuths_deg"], s["downtilts_deg"])
            ),
        )
        for s in d["sites"]
    ]
    users = [
        TnUser(
            u["id"],
            Position3D(u["x_m"], u["y_m"], u["height_m"]),
            u["serving_site_id"],
            u["serving_sector_index"],
            u["max_ul_power_dbm"],
        )
        for u in d["tn_users"]
    ]
    terminals = []
    for t in d["ntn_terminals"]:
        make = t1_pattern if t["kind"] == T1 else t2_pattern
        terminals.append(
            NtnTerminal(
                t["id"],
                Position3D(t["x_m"], t["y_m"], t["height_m"]),
                t["kind"],
                make(carrier, t["peak_gain_dbi"]),
            )
        )
    lt = d["loss_table"]
    table = NtnLossTable(
        elevation_deg=np.array(lt["elevation_deg"]),
        clutter_db=np.array(lt["L_CL"]),
        atmospheric_db=np.array(lt["L_Atm"]),
        ionospheric_db=np.array(lt["L_IS"]),
        tropospheric_db=np.array(lt["L_TS"]),
        shadow_sigma_db=np.array(lt["sigma_SF"]),
    )
    lim = d["limits"]
    prop = d["propagation"]
    return Scenario(
        earth=EarthModel(d["earth"]["earth_radius_m"], d["earth"]["satellite_altitude_m"]),
        footprint_km=d["footprint_km"],
        sites=sites,
        tn_users=users,
        ntn_terminals=terminals,
        noise=NoiseModel(
            bandwidth_hz=d["noise"]["bandwidth_hz"],
            temperature_k=d["noise"]["temperature_k"],
            boltzmann=d["noise"]["boltzmann"],
        ),
        carrier_hz=carrier,
        total_bandwidth_hz=d["total_bandwidth_hz"],
        sat_tx_power_dbm=d["satellite"]["tx_power_dbm"],
        sat_beam=ApertureBeam(
            d["satellite"]["peak_gain_dbi"],
            d["satellite"]["aperture_radius_m"],
            wavenumber_per_m(carrier),
        ),
        limits=ControlLimits(
            max_dl_power_dbm=lim["max_dl_power_dbm"],
            min_dl_power_dbm=lim["min_dl_power_dbm"],
            tilt_range_deg=tuple(lim["tilt_range_deg"]),
            default_tilt_deg=lim["default_tilt_deg"],
            ue_cap_range_dbm=tuple(lim["ue_cap_range_dbm"]),
            threshold_range_db=tuple(lim["threshold_range_db"]),
            default_threshold_db=lim["default_threshold_db"],
        ),
        seed=d["seed"],
        loss_table=table,
        tn2ntn_pathloss=prop["tn2ntn_pathloss"],
        uma_nlos_enabled=prop["uma_nlos_enabled"],
        uma_shadow_enabled=prop["uma_shadow_enabled"],
        ntn_shadow_enabled=prop["ntn_shadow_enabled"],
        ntn_clutter_kinds=tuple(prop["ntn_clutter_kinds"]),
        ue_p0_dbm=prop["ue_p0_dbm"],
        ue_gain_dbi=prop["ue_gain_dbi"],
    )


def save_scenario(scenario: Scenario, path):
    with open(path, "w") as fh:
        json.dump(scenario_to_dict(scenario), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        return scenario_from_dict(json.load(fh))
