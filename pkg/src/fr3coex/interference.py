"""Coexistence math: per-link interference, aggregate INR, SINR, throughput.

The InterferenceEngine precomputes everything that does not depend on the
satellite position or the control state (link distances, terrestrial
pathloss matrices, frozen LOS states, uplink open-loop targets), caches the
satellite-dependent pieces per pass snapshot (terminal antenna gains toward
every interferer, desired-link pathloss), and reduces each control
evaluation to a few small dense array operations.  Summations run in fixed
index order (sorted ids) via einsum so results are bitwise independent of
evaluation order and thread count.

Scalar per-link operations index the same precomputed matrices and the same
gain functions the vectorized path uses, so the two agree exactly; the
independent brute-force check lives in the test suite, not here.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .antenna import gnb_sector_gain_dbi, sat_beam_gain_dbi, terminal_gain_dbi
from .deployment import ControlLimits, Scenario
from .geometry import PassSnapshot, wrap_angle_deg
from .propagation import (
    UmaLinkGeometry,
    db_to_linear,
    draw_los_states,
    fspl_db,
    thermal_noise_dbm,
    uma_pathloss_db,
    uma_shadow_sigma_db,
)

INR_FLOOR_DB = -200.0

INR_MODE_LINEAR = "linear"
INR_MODE_PAPER_LITERAL = "paper_literal"


@dataclass
class ControlState:
    """Per-sector radio controls plus the scenario-wide protection threshold.

    The uplink cap is stored per sector (a user's cap is the cap of its
    serving sector); a scalar cap broadcasts to every sector, which recovers
    the scenario-wide reading.
    """

    tx_power_dbm: np.ndarray
    downtilt_deg: np.ndarray
    muted: np.ndarray
    ue_power_cap_dbm: np.ndarray
    protection_threshold_db: float

    @classmethod
    def uniform(
        cls,
        n_sectors: int,
        tx_power_dbm: float,
        downtilt_deg: float,
        ue_power_cap_dbm: float,
        protection_threshold_db: float,
        muted: bool = False,
    ) -> "ControlState":
        return cls(
            tx_power_dbm=np.full(n_sectors, float(tx_power_dbm)),
            downtilt_deg=np.full(n_sectors, float(downtilt_deg)),
            muted=np.full(n_sectors, bool(muted)),
            ue_power_cap_dbm=np.full(n_sectors, float(ue_power_cap_dbm)),
            protection_threshold_db=float(protection_threshold_db),
        )

    def validate(self, limits: ControlLimits):
        if np.any(self.tx_power_dbm > limits.max_dl_power_dbm + 1e-9):
            raise ValueError("sector tx power above the cap")
        lo, hi = limits.tilt_range_deg
        if np.any(self.downtilt_deg < lo - 1e-9) or np.any(self.downtilt_deg > hi + 1e-9):
            raise ValueError("downtilt outside the mechanical range")
        tlo, thi = limits.threshold_range_db
        if not tlo - 1e-9 <= self.protection_threshold_db <= thi + 1e-9:
            raise ValueError("protection threshold outside its range")

    def copy(self) -> "ControlState":
        return ControlState(
            self.tx_power_dbm.copy(),
            self.downtilt_deg.copy(),
            self.muted.copy(),
            self.ue_power_cap_dbm.copy(),
            self.protection_threshold_db,
        )


@dataclass
class InrEntry:
    dl_interference_mw: float
    ul_interference_mw: float
    inr_db: float
    interfered: bool


@dataclass
class InrReport:
    """Per-terminal interference aggregates, index-aligned with terminals."""

    dl_interference_mw: np.ndarray
    ul_interference_mw: np.ndarray
    inr_db: np.ndarray
    interfered: np.ndarray

    def entry(self, terminal_index: int) -> InrEntry:
        return InrEntry(
            float(self.dl_interference_mw[terminal_index]),
            float(self.ul_interference_mw[terminal_index]),
            float(self.inr_db[terminal_index]),
            bool(self.interfered[terminal_index]),
        )


@dataclass
class SnapshotMetrics:
    eta: float
    chi: float
    rate_bps: float
    sinr_db: np.ndarray
    rate_per_terminal_bps: np.ndarray
    inr: InrReport
    threshold_db: float
    snapshot_index: int
    elevation_deg: float


@dataclass
class _SnapshotContext:
    # satellite-dependent, control-independent pieces for one snapshot
    g_term_dl_db: np.ndarray      # (T, S) terminal gain toward each sector
    ul_static_lin: np.ndarray     # (T, U) linear gain/loss product of the UL path
    g_sat_db: np.ndarray          # (T,) satellite beam gain toward each terminal
    pl_ntn_db: np.ndarray         # (T,) desired-link pathloss
    dl_static_lin: np.ndarray     # (S, T) linear part of the DL path (gain - loss)


class InterferenceEngine:
    """Evaluates interference, INR, SINR, and metrics for one scenario."""

    def __init__(self, scenario: Scenario, inr_mode: str = INR_MODE_LINEAR, context_cache_size: int = 64):
        if inr_mode not in (INR_MODE_LINEAR, INR_MODE_PAPER_LITERAL):
            raise ValueError(f"inr_mode must be linear|paper_literal, got {inr_mode!r}")
        self.scenario = scenario
        self.inr_mode = inr_mode
        self._cache_size = max(1, int(context_cache_size))
        self._contexts: dict = {}

        # flattened sector table, site-major so ids stay sorted
        sites = scenario.sites
        self.sector_site_index = np.array(
            [i for i, s in enumerate(sites) for _ in s.sectors]
        )
        self.sector_index_in_site = np.array(
            [j for s in sites for j in range(len(s.sectors))]
        )
        self.sector_positions = np.array(
            [
                [s.position.x_m, s.position.y_m, s.position.z_m]
                for i, s in enumerate(sites)
                for _ in s.sectors
            ]
        )
        self.sector_azimuth_deg = np.array(
            [sec.azimuth_deg for s in sites for sec in s.sectors]
        )
        self._site_sector_offset = np.cumsum(
            [0] + [len(s.sectors) for s in sites[:-1]]
        )
        self.n_sectors = len(self.sector_azimuth_deg)
        self._sector_pattern = sites[0].sectors[0]
        for s in sites:
            for sec in s.sectors:
                for key in ("peak_gain_dbi", "hpbw_h_deg", "hpbw_v_deg", "sla_v_db", "front_back_db"):
                    if getattr(sec, key) != getattr(self._sector_pattern, key):
                        raise ValueError("engine requires uniform sector shape parameters")

        terms = scenario.ntn_terminals
        self.n_terminals = len(terms)
        self.terminal_positions = np.array(
            [[t.position.x_m, t.position.y_m, t.position.z_m] for t in terms]
        )
        self.terminal_kinds = [t.kind for t in terms]
        self.terminal_peak_dbi = np.array([t.pattern.peak_gain_dbi for t in terms])

        users = scenario.tn_users
        self.n_users = len(users)
        self.user_positions = np.array(
            [[u.position.x_m, u.position.y_m, u.position.z_m] for u in users]
        )
        site_idx_by_id = {s.id: i for i, s in enumerate(sites)}
        self.user_sector = np.array(
            [
                self._site_sector_offset[site_idx_by_id[u.serving_site_id]]
                + u.serving_sector_index
                for u in users
            ]
        )
        self.user_max_ul_dbm = np.array([u.max_ul_power_dbm for u in users])

        # per-site pathloss rows assume one shared height per node class
        if np.ptp(self.terminal_positions[:, 2]) > 1e-9:
            raise ValueError("engine requires a uniform NTN terminal height")
        if np.ptp(self.user_positions[:, 2]) > 1e-9:
            raise ValueError("engine requires a uniform TN user height")

        self.noise_dbm = thermal_noise_dbm(scenario.noise)
        self.noise_mw = float(db_to_linear(self.noise_dbm))
        self.bandwidth_share_hz = scenario.total_bandwidth_hz / self.n_terminals

        # frozen randomness: LOS states and shadow draws keyed by scenario seed
        streams = np.random.SeedSequence([scenario.seed, 1]).spawn(7)
        (ss_los_dl, ss_los_ul, ss_los_serv, ss_sh_dl, ss_sh_ul, ss_sh_serv, ss_sh_ntn) = streams

        self._prepare_dl(np.random.default_rng(ss_los_dl), np.random.default_rng(ss_sh_dl))
        self._prepare_ul(np.random.default_rng(ss_los_ul), np.random.default_rng(ss_sh_ul))
        self._prepare_serving(np.random.default_rng(ss_los_serv), np.random.default_rng(ss_sh_serv))
        self._ntn_shadow_z = (
            np.random.default_rng(ss_sh_ntn).standard_normal(self.n_terminals)
            if scenario.ntn_shadow_enabled
            else np.zeros(self.n_terminals)
        )

    # ------------------------------------------------------------------
    # construction helpers

    def _ground_pathloss(self, d2d, dz, bs_height, ut_height, los, shadow_db):
        """TN->NTN-terminal and UE->terminal ground path, per scenario model."""
        scn = self.scenario
        if scn.tn2ntn_pathloss == "fspl":
            d3d = np.sqrt(d2d * d2d + dz * dz)
            return fspl_db(np.maximum(d3d, 1.0), scn.carrier_hz)
        geom = UmaLinkGeometry.from_d2d(
            d2d,
            bs_height,
            ut_height,
            scn.carrier_hz,
            los=los if scn.uma_nlos_enabled else True,
        )
        return uma_pathloss_db(geom) + shadow_db

    def _prepare_dl(self, los_rng, shadow_rng):
        scn = self.scenario
        sites = scn.sites
        term_xy = self.terminal_positions[:, :2]
        term_z = self.terminal_positions[:, 2]

        # per-site LOS/shadow shared by the site's sectors (one physical path)
        site_xy = np.array([[s.position.x_m, s.position.y_m] for s in sites])
        d2d_site = np.linalg.norm(site_xy[:, None, :] - term_xy[None, :, :], axis=2)
        los_site = draw_los_states(d2d_site, los_rng)
        self.los_dl_site = los_site
        if scn.uma_shadow_enabled:
            sigma = uma_shadow_sigma_db(los_site)
            shadow_site = shadow_rng.standard_normal(d2d_site.shape) * sigma
        else:
            shadow_site = np.zeros_like(d2d_site)

        n_clamped = int(np.count_nonzero((d2d_site < 10.0) | (d2d_site > 5000.0)))
        pl_rows = []
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for i, s in enumerate(sites):
                dz = s.position.z_m - term_z
                pl_rows.append(
                    self._ground_pathloss(
                        d2d_site[i],
                        dz,
                        s.position.z_m,
                        float(term_z[0]),
                        los_site[i],
                        shadow_site[i],
                    )
                )
        if n_clamped and scn.tn2ntn_pathloss == "uma":
            warnings.warn(
                f"{n_clamped} sector-terminal link(s) outside the UMa validity range; clamped",
                stacklevel=3,
            )
        pl_site = np.vstack(pl_rows)                       # (n_sites, T)
        self.pl_dl_db = pl_site[self.sector_site_index]     # (S, T)

        sep = term_xy[None, :, :] - self.sector_positions[:, None, :2]  # (S, T, 2)
        self.d2d_dl = np.linalg.norm(sep, axis=2)
        dz_down = self.sector_positions[:, None, 2] - term_z[None, :]
        self.theta_dl_deg = np.degrees(np.arctan2(dz_down, self.d2d_dl))
        bearing = np.degrees(np.arctan2(sep[:, :, 1], sep[:, :, 0]))
        self.phi_dl_deg = wrap_angle_deg(bearing - self.sector_azimuth_deg[:, None])

        # unit vectors terminal -> sector, for terminal-side off-axis angles
        sep3 = self.sector_positions[None, :, :] - self.terminal_positions[:, None, :]
        dist3 = np.linalg.norm(sep3, axis=2)
        if np.any(dist3 == 0.0):
            raise ValueError("terminal coincides with a sector antenna")
        self.unit_term_to_sector = sep3 / dist3[:, :, None]  # (T, S, 3)

    def _prepare_ul(self, los_rng, shadow_rng):
        scn = self.scenario
        user_xy = self.user_positions[:, :2]
        term_xy = self.terminal_positions[:, :2]
        d2d = np.linalg.norm(user_xy[:, None, :] - term_xy[None, :, :], axis=2)  # (U, T)
        los = draw_los_states(d2d, los_rng)
        self.los_ul = los
        if scn.uma_shadow_enabled:
            shadow = shadow_rng.standard_normal(d2d.shape) * uma_shadow_sigma_db(los)
        else:
            shadow = np.zeros_like(d2d)
        dz = self.user_positions[:, 2][:, None] - self.terminal_positions[:, 2][None, :]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            pl = self._ground_pathloss(
                d2d,
                dz,
                float(self.user_positions[0, 2]),
                float(self.terminal_positions[0, 2]),
                los,
                shadow,
            )
        self.pl_ul_db = np.asarray(pl).T                    # (T, U)

        sep3 = self.user_positions[None, :, :] - self.terminal_positions[:, None, :]
        dist3 = np.linalg.norm(sep3, axis=2)
        if np.any(dist3 == 0.0):
            raise ValueError("terminal coincides with a TN user")
        self.unit_term_to_user = sep3 / dist3[:, :, None]   # (T, U, 3)

    def _prepare_serving(self, los_rng, shadow_rng):
        """Open-loop uplink targets toward each user's serving sector site."""
        scn = self.scenario
        sites = scn.sites
        site_idx_by_id = {s.id: i for i, s in enumerate(sites)}
        serving_site = np.array([site_idx_by_id[u.serving_site_id] for u in scn.tn_users])
        site_xy = np.array([[s.position.x_m, s.position.y_m] for s in sites])
        site_z = np.array([s.position.z_m for s in sites])
        d2d = np.linalg.norm(self.user_positions[:, :2] - site_xy[serving_site], axis=1)
        los = draw_los_states(d2d, los_rng)
        self.los_serving = los
        if scn.uma_shadow_enabled:
            shadow = shadow_rng.standard_normal(d2d.shape) * uma_shadow_sigma_db(los)
        else:
            shadow = np.zeros_like(d2d)
        pl = np.empty(self.n_users)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for i in np.unique(serving_site):
                mask = serving_site == i
                geom = UmaLinkGeometry.from_d2d(
                    d2d[mask],
                    float(site_z[i]),
                    float(self.user_positions[0, 2]),
                    scn.carrier_hz,
                    los=los[mask] if scn.uma_nlos_enabled else True,
                )
                pl[mask] = uma_pathloss_db(geom) + shadow[mask]
        self.pl_serving_db = pl
        self.ul_target_dbm = scn.ue_p0_dbm + pl

    # ------------------------------------------------------------------
    # per-snapshot context

    def _context(self, snapshot: PassSnapshot) -> _SnapshotContext:
        key = (snapshot.index, snapshot.elevation_deg)
        ctx = self._contexts.get(key)
        if ctx is not None:
            return ctx

        scn = self.scenario
        sat = snapshot.satellite_position.xyz
        to_sat = sat[None, :] - self.terminal_positions
        dist_sat = np.linalg.norm(to_sat, axis=1)
        unit_to_sat = to_sat / dist_sat[:, None]            # (T, 3)

        # terminal-side off-axis angles: boresight tracks the satellite
        cos_dl = np.einsum("tj,tsj->ts", unit_to_sat, self.unit_term_to_sector)
        off_dl = np.degrees(np.arccos(np.clip(cos_dl, -1.0, 1.0)))
        cos_ul = np.einsum("tj,tuj->tu", unit_to_sat, self.unit_term_to_user)
        off_ul = np.degrees(np.arccos(np.clip(cos_ul, -1.0, 1.0)))

        g_term_dl = np.empty_like(off_dl)
        g_term_ul = np.empty_like(off_ul)
        for kind in set(self.terminal_kinds):
            mask = np.array([k == kind for k in self.terminal_kinds])
            pattern = scn.ntn_terminals[int(np.argmax(mask))].pattern
            g_term_dl[mask] = terminal_gain_dbi(pattern, off_dl[mask])
            g_term_ul[mask] = terminal_gain_dbi(pattern, off_ul[mask])

        # satellite boresight points at the footprint center
        bore = -sat / np.linalg.norm(sat)
        cos_bore = np.einsum("j,tj->t", bore, -unit_to_sat)
        off_sat = np.degrees(np.arccos(np.clip(cos_bore, -1.0, 1.0)))
        g_sat = sat_beam_gain_dbi(scn.sat_beam, off_sat)

        # desired-link pathloss per terminal
        table = scn.loss_table
        pl_ntn = np.empty(self.n_terminals)
        for kind in set(self.terminal_kinds):
            mask = np.array([k == kind for k in self.terminal_kinds])
            shadow = 0.0
            if scn.ntn_shadow_enabled:
                shadow = self._ntn_shadow_z[mask] * table.shadow_sigma_for(
                    snapshot.elevation_deg
                )
            terms = table.terms_for(
                snapshot.elevation_deg,
                include_clutter=kind in scn.ntn_clutter_kinds,
            )
            pl_ntn[mask] = (
                fspl_db(dist_sat[mask], scn.carrier_hz) + terms.total_db + shadow
            )

        dl_static_lin = db_to_linear(g_term_dl.T - self.pl_dl_db)        # (S, T)
        ul_static_lin = db_to_linear(g_term_ul - self.pl_ul_db)          # (T, U)

        ctx = _SnapshotContext(g_term_dl, ul_static_lin, np.atleast_1d(g_sat), pl_ntn, dl_static_lin)
        if len(self._contexts) >= self._cache_size:
            self._contexts.pop(next(iter(self._contexts)))
        self._contexts[key] = ctx
        return ctx

    # ------------------------------------------------------------------
    # control-dependent evaluation

    def _sector_gain_matrix(self, control: ControlState) -> np.ndarray:
        return gnb_sector_gain_dbi(
            self._sector_pattern,
            self.theta_dl_deg,
            self.phi_dl_deg,
            downtilt_deg=control.downtilt_deg[:, None],
        )

    def _ue_tx_dbm(self, control: ControlState) -> np.ndarray:
        cap = control.ue_power_cap_dbm[self.user_sector]
        return np.minimum(self.ul_target_dbm, np.minimum(cap, self.user_max_ul_dbm))

    def inr_report(self, control: ControlState, snapshot: PassSnapshot) -> InrReport:
        ctx = self._context(snapshot)
        scn = self.scenario

        gbs = self._sector_gain_matrix(control)
        dl_each = db_to_linear(control.tx_power_dbm[:, None] + gbs) * ctx.dl_static_lin
        unmuted = ~control.muted
        dl_mw = np.einsum("st,s->t", dl_each, unmuted.astype(float))

        active_user = unmuted[self.user_sector]
        p_ue_mw = db_to_linear(self._ue_tx_dbm(control) + scn.ue_gain_dbi) * active_user
        ul_mw = np.einsum("tu,u->t", ctx.ul_static_lin, p_ue_mw)

        if self.inr_mode == INR_MODE_LINEAR:
            total = dl_mw + ul_mw
            with np.errstate(divide="ignore"):
                inr = 10.0 * np.log10(total / self.noise_mw)
            inr = np.maximum(inr, INR_FLOOR_DB)
        else:
            with np.errstate(divide="ignore"):
                dl_db = np.maximum(10.0 * np.log10(dl_mw), INR_FLOOR_DB)
                ul_db = np.maximum(10.0 * np.log10(ul_mw), INR_FLOOR_DB)
            inr = np.maximum(dl_db + ul_db - self.noise_dbm, INR_FLOOR_DB)

        return InrReport(
            dl_interference_mw=dl_mw,
            ul_interference_mw=ul_mw,
            inr_db=inr,
            interfered=inr > control.protection_threshold_db,
        )

    def snapshot_metrics(self, control: ControlState, snapshot: PassSnapshot) -> SnapshotMetrics:
        report = self.inr_report(control, snapshot)
        ctx = self._context(snapshot)
        scn = self.scenario

        p_rx_dbm = (
            scn.sat_tx_power_dbm + ctx.g_sat_db + self.terminal_peak_dbi - ctx.pl_ntn_db
        )
        denom_mw = report.dl_interference_mw + report.ul_interference_mw + self.noise_mw
        gamma = db_to_linear(p_rx_dbm) / denom_mw
        sinr_db = 10.0 * np.log10(gamma)
        rates = self.bandwidth_share_hz * np.log2(1.0 + gamma)

        return SnapshotMetrics(
            eta=float(np.mean(report.interfered)),
            chi=float(np.mean(~control.muted)),
            rate_bps=float(np.sum(rates)),
            sinr_db=sinr_db,
            rate_per_terminal_bps=rates,
            inr=report,
            threshold_db=control.protection_threshold_db,
            snapshot_index=snapshot.index,
            elevation_deg=snapshot.elevation_deg,
        )

    def zero_interference_rate(self, snapshot: PassSnapshot) -> float:
        """Aggregate throughput with every interferer silent."""
        ctx = self._context(snapshot)
        scn = self.scenario
        p_rx_dbm = (
            scn.sat_tx_power_dbm + ctx.g_sat_db + self.terminal_peak_dbi - ctx.pl_ntn_db
        )
        gamma = db_to_linear(p_rx_dbm) / self.noise_mw
        return float(np.sum(self.bandwidth_share_hz * np.log2(1.0 + gamma)))

    # ------------------------------------------------------------------
    # scalar per-link views (same matrices, same gain functions)

    def dl_interference_dbm(
        self, sector_index: int, terminal_index: int, control: ControlState, snapshot: PassSnapshot
    ) -> float:
        """Eq.-style single-link downlink interference in dBm.

        Muting is aggregation semantics (a muted sector contributes zero
        milliwatts there); this returns the would-be dB value regardless.
        """
        ctx = self._context(snapshot)
        s, t = int(sector_index), int(terminal_index)
        gbs = gnb_sector_gain_dbi(
            self._sector_pattern,
            float(self.theta_dl_deg[s, t]),
            float(self.phi_dl_deg[s, t]),
            downtilt_deg=float(control.downtilt_deg[s]),
        )
        return (
            float(control.tx_power_dbm[s])
            + gbs
            + float(ctx.g_term_dl_db[t, s])
            - float(self.pl_dl_db[s, t])
        )

    def ul_interference_dbm(
        self, user_index: int, terminal_index: int, control: ControlState, snapshot: PassSnapshot
    ) -> float:
        ctx = self._context(snapshot)
        u, t = int(user_index), int(terminal_index)
        p_ue = float(self._ue_tx_dbm(control)[u])
        # ul_static_lin folds terminal gain and pathloss together
        return (
            p_ue
            + self.scenario.ue_gain_dbi
            + float(10.0 * np.log10(ctx.ul_static_lin[t, u]))
        )

    def aggregate_inr_db(
        self, terminal_index: int, control: ControlState, snapshot: PassSnapshot
    ) -> InrEntry:
        return self.inr_report(control, snapshot).entry(int(terminal_index))

    def ntn_sinr_and_rate(
        self, terminal_index: int, control: ControlState, snapshot: PassSnapshot
    ) -> tuple:
        m = self.snapshot_metrics(control, snapshot)
        t = int(terminal_index)
        return float(m.sinr_db[t]), float(m.rate_per_terminal_bps[t])


# ----------------------------------------------------------------------
# module-level conveniences matching the one-shot call shapes; building an
# engine per call is fine for micro-scenarios, use the engine directly in loops


def snapshot_metrics(scenario: Scenario, control: ControlState, snapshot: PassSnapshot, engine: InterferenceEngine | None = None) -> SnapshotMetrics:
    eng = engine or InterferenceEngine(scenario)
    return eng.snapshot_metrics(control, snapshot)


def aggregate_inr_db(terminal_index: int, scenario: Scenario, control: ControlState, snapshot: PassSnapshot, engine: InterferenceEngine | None = None) -> InrEntry:
    eng = engine or InterferenceEngine(scenario)
    return eng.aggregate_inr_db(terminal_index, control, snapshot)
