"""Reference controllers: static no-coordination and exclusion-zone muting.

The exclusion-zone controller reacts to the previous snapshot's measured
INR: every sector within a fixed radius of a terminal that exceeded the
trigger gets muted for the next snapshot.  Power, tilt, and uplink caps
are never touched, which keeps it a pure mute/unmute rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .deployment import Scenario
from .geometry import PassSnapshot
from .interference import ControlState, InterferenceEngine, SnapshotMetrics


@dataclass(frozen=True)
class AscentConfig:
    exclusion_radius_m: float = 2000.0
    inr_trigger_db: float | None = None  # None: reuse the protection threshold
    reevaluate_every: int = 1

    def __post_init__(self):
        if not self.exclusion_radius_m > 0.0:
            raise ValueError("exclusion radius must be positive")
        if self.reevaluate_every < 1:
            raise ValueError("reevaluate_every must be at least 1")


def _n_sectors(scenario: Scenario) -> int:
    return sum(len(s.sectors) for s in scenario.sites)


def _sector_xy(scenario: Scenario) -> np.ndarray:
    return np.array(
        [[s.position.x_m, s.position.y_m] for s in scenario.sites for _ in s.sectors]
    )


def no_coordination_step(scenario: Scenario, snapshot: PassSnapshot) -> ControlState:
    """Every sector on at full power with default settings, every snapshot."""
    del snapshot  # static policy
    lim = scenario.limits
    return ControlState.uniform(
        _n_sectors(scenario),
        tx_power_dbm=lim.max_dl_power_dbm,
        downtilt_deg=lim.default_tilt_deg,
        ue_power_cap_dbm=lim.ue_cap_range_dbm[1],
        protection_threshold_db=lim.default_threshold_db,
    )


def ascent_step(
    scenario: Scenario,
    snapshot: PassSnapshot,
    prev_metrics: SnapshotMetrics,
    cfg: AscentConfig,
) -> ControlState:
    """Mute the union of radius-balls around terminals that measured hot."""
    control = no_coordination_step(scenario, snapshot)
    trigger = cfg.inr_trigger_db
    if trigger is None:
        trigger = prev_metrics.threshold_db
    hot = prev_metrics.inr.inr_db > trigger
    if not np.any(hot):
        return control
    term_xy = np.array(
        [[t.position.x_m, t.position.y_m] for t in scenario.ntn_terminals]
    )[hot]
    dist = np.linalg.norm(
        _sector_xy(scenario)[:, None, :] - term_xy[None, :, :], axis=2
    )
    control.muted = np.any(dist <= cfg.exclusion_radius_m, axis=1)
    return control


def run_baseline_pass(
    engine: InterferenceEngine,
    snapshots,
    mode: str = "none",
    cfg: AscentConfig | None = None,
):
    """Drive one controller over a whole pass.

    Returns (controls, metrics) lists, one entry per snapshot.  The
    exclusion-zone controller bootstraps from a no-coordination probe of the
    first snapshot and afterwards reacts to each recorded measurement,
    refreshing its muting set every cfg.reevaluate_every snapshots.
    """
    if mode not in ("none", "ascent"):
        raise ValueError(f"mode must be none|ascent, got {mode!r}")
    scenario = engine.scenario
    cfg = cfg or AscentConfig()

    controls = []
    metrics = []
    prev = None
    control = None
    for i, snap in enumerate(snapshots):
        if mode == "none":
            control = no_coordination_step(scenario, snap)
        else:
            if prev is None:
                prev = engine.snapshot_metrics(no_coordination_step(scenario, snap), snap)
            if control is None or i % cfg.reevaluate_every == 0:
                control = ascent_step(scenario, snap, prev, cfg)
        m = engine.snapshot_metrics(control, snap)
        controls.append(control)
        metrics.append(m)
        prev = m
    return controls, metrics
