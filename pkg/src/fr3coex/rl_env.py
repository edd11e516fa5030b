"""Sequential decision environment over one satellite pass.

One episode walks the pass snapshot by snapshot.  The agent sees a
5-component normalized observation, emits a raw action vector (continuous
heads plus one mute head per sector group), and the environment projects
it onto the feasible control ranges, evaluates the snapshot, and pays a
weighted reward.  Everything is deterministic given the scenario; the only
randomness in training lives in the policy's own sampling.

Action layout (raw vector, length 1 + 4*G for G groups):
    [threshold, dl_power x G, ue_cap x G, downtilt x G, mute x G]
Continuous entries are unbounded reals squashed into their ranges; mute
entries are compared against 0.5 (strict) so probabilities and sampled
0/1 values both work.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .baselines import no_coordination_step
from .config import EnvSection
from .deployment import ControlLimits, Scenario
from .geometry import PassSnapshot
from .interference import ControlState, InterferenceEngine, SnapshotMetrics

OBS_DIM = 5
OBS_ELEVATION, OBS_ETA, OBS_RATE, OBS_CHI, OBS_THRESHOLD = range(5)

ELEVATION_LO_DEG = 10.0
ELEVATION_SPAN_DEG = 160.0


@dataclass
class EnvConfig:
    weights: tuple = (0.5, 0.3, 0.2)
    granularity: str = "per_cluster"
    n_clusters: int = 8
    paper_literal_inr: bool = False
    r_max_bps: float | None = None  # zero-interference pass maximum, set at reset

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if len(w) != 3 or any(x < 0 for x in w):
            raise ValueError("need three non-negative reward weights")
        if abs(sum(w) - 1.0) > 1e-9:
            raise ValueError("reward weights must sum to 1")
        self.weights = w
        if self.granularity not in ("per_cluster", "per_sector"):
            raise ValueError(f"granularity must be per_cluster|per_sector, got {self.granularity!r}")
        if self.granularity == "per_cluster" and self.n_clusters < 1:
            raise ValueError("n_clusters must be positive")

    @classmethod
    def from_section(cls, section: EnvSection) -> "EnvConfig":
        return cls(
            weights=section.weights,
            granularity=section.granularity,
            n_clusters=section.n_clusters,
            paper_literal_inr=section.paper_literal_inr,
        )


@dataclass(frozen=True)
class ActionVector:
    """Projected, feasible control update for one step."""

    new_threshold_db: float
    mute: np.ndarray
    dl_power_dbm: np.ndarray
    ul_power_cap_dbm: np.ndarray
    downtilt_deg: np.ndarray

    def summary(self) -> str:
        return (
            f"mute={int(np.sum(self.mute))}/{len(self.mute)}"
            f" thr={self.new_threshold_db:.2f}"
            f" pdl={float(np.mean(self.dl_power_dbm)):.1f}"
            f" pue={float(np.mean(self.ul_power_cap_dbm)):.1f}"
            f" tilt={float(np.mean(self.downtilt_deg)):.1f}"
        )


@dataclass
class StepResult:
    observation: np.ndarray
    reward: float
    done: bool
    info: SnapshotMetrics


def squash(raw, lo, hi):
    """Affine tanh map onto [lo, hi]; saturated raws hit the bounds exactly."""
    return lo + (hi - lo) * (np.tanh(raw) + 1.0) / 2.0


def action_dim(n_groups: int) -> int:
    return 1 + 4 * n_groups


def decode_action(raw, limits: ControlLimits, n_groups: int) -> ActionVector:
    raw = np.asarray(raw, dtype=float)
    if raw.shape != (action_dim(n_groups),):
        raise ValueError(
            f"raw action must have shape ({action_dim(n_groups)},), got {raw.shape}"
        )
    g = n_groups
    thr = float(squash(raw[0], *limits.threshold_range_db))
    dlp = squash(raw[1 : 1 + g], limits.min_dl_power_dbm, limits.max_dl_power_dbm)
    cap = squash(raw[1 + g : 1 + 2 * g], *limits.ue_cap_range_dbm)
    tilt = squash(raw[1 + 2 * g : 1 + 3 * g], *limits.tilt_range_deg)
    mute = raw[1 + 3 * g :] > 0.5
    return ActionVector(thr, mute, dlp, cap, tilt)


def encode_observation(
    metrics: SnapshotMetrics, snapshot: PassSnapshot, threshold_db: float, cfg: EnvConfig
) -> np.ndarray:
    if not cfg.r_max_bps or cfg.r_max_bps <= 0.0:
        raise ValueError("throughput normalizer not set")
    obs = np.empty(OBS_DIM)
    obs[OBS_ELEVATION] = (snapshot.elevation_deg - ELEVATION_LO_DEG) / ELEVATION_SPAN_DEG
    obs[OBS_ETA] = metrics.eta
    obs[OBS_RATE] = min(metrics.rate_bps / cfg.r_max_bps, 1.0)
    obs[OBS_CHI] = metrics.chi
    obs[OBS_THRESHOLD] = (threshold_db + 12.2) / 6.2
    return obs


def compute_reward(metrics: SnapshotMetrics, cfg: EnvConfig) -> float:
    if not cfg.r_max_bps or cfg.r_max_bps <= 0.0:
        raise ValueError("throughput normalizer not set")
    w1, w2, w3 = cfg.weights
    r_bar = min(metrics.rate_bps / cfg.r_max_bps, 1.0)
    return w1 * r_bar + w2 * metrics.chi - w3 * metrics.eta


def cluster_sectors(xy: np.ndarray, k: int, seed: int):
    """Plain Lloyd iterations, seeded start, ties to the lowest index.

    Returns (assignment, centroids).  Empty clusters steal the point
    farthest from its current centroid, so all k labels stay in use.
    """
    n = len(xy)
    if k >= n:
        return np.arange(n), xy.astype(float).copy()
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 2]))
    centroids = xy[rng.choice(n, size=k, replace=False)].astype(float)
    assign = None
    for _ in range(200):
        d = ((xy[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_assign = np.argmin(d, axis=1)
        for j in range(k):
            if not np.any(new_assign == j):
                far = int(np.argmax(d[np.arange(n), new_assign]))
                new_assign[far] = j
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for j in range(k):
            centroids[j] = xy[assign == j].mean(axis=0)
    return assign, centroids


class CoexistenceEnv:
    """Single-owner episode runner; share the engine across instances freely."""

    def __init__(
        self,
        scenario: Scenario,
        snapshots,
        cfg: EnvConfig | None = None,
        engine: InterferenceEngine | None = None,
    ):
        self.scenario = scenario
        self.snapshots = list(snapshots)
        if not self.snapshots:
            raise ValueError("need at least one pass snapshot")
        self.cfg = replace(cfg) if cfg is not None else EnvConfig()
        self.engine = engine or InterferenceEngine(
            scenario,
            inr_mode="paper_literal" if self.cfg.paper_literal_inr else "linear",
        )

        xy = self.engine.sector_positions[:, :2]
        if self.cfg.granularity == "per_sector":
            self.cluster_of = np.arange(self.engine.n_sectors)
        else:
            k = min(self.cfg.n_clusters, self.engine.n_sectors)
            self.cluster_of, _ = cluster_sectors(xy, k, scenario.seed)
        self.n_groups = int(self.cluster_of.max()) + 1

        self._r_max = None
        self._next = None
        self.control = None

    @property
    def obs_dim(self) -> int:
        return OBS_DIM

    @property
    def n_continuous(self) -> int:
        return 1 + 3 * self.n_groups

    @property
    def n_binary(self) -> int:
        return self.n_groups

    @property
    def action_dim(self) -> int:
        return action_dim(self.n_groups)

    @property
    def n_steps(self) -> int:
        return len(self.snapshots)

    def decode_action(self, raw) -> ActionVector:
        return decode_action(raw, self.scenario.limits, self.n_groups)

    def _apply(self, action: ActionVector):
        c = self.control
        c.tx_power_dbm = np.asarray(action.dl_power_dbm)[self.cluster_of]
        c.downtilt_deg = np.asarray(action.downtilt_deg)[self.cluster_of]
        c.ue_power_cap_dbm = np.asarray(action.ul_power_cap_dbm)[self.cluster_of]
        c.muted = np.asarray(action.mute)[self.cluster_of]
        c.protection_threshold_db = float(action.new_threshold_db)

    def reset(self, seed: int | None = None) -> np.ndarray:
        del seed  # the environment itself is deterministic
        self._next = 0
        self.control = no_coordination_step(self.scenario, self.snapshots[0])
        if self._r_max is None:
            self._r_max = max(
                self.engine.zero_interference_rate(s) for s in self.snapshots
            )
        self.cfg.r_max_bps = self._r_max
        probe = self.engine.snapshot_metrics(self.control, self.snapshots[0])
        return encode_observation(
            probe, self.snapshots[0], self.control.protection_threshold_db, self.cfg
        )

    def step(self, action: ActionVector) -> StepResult:
        if self._next is None:
            raise RuntimeError("call reset before step")
        if self._next >= len(self.snapshots):
            raise RuntimeError("episode is done; call reset")
        self._apply(action)
        snap = self.snapshots[self._next]
        m = self.engine.snapshot_metrics(self.control, snap)
        reward = compute_reward(m, self.cfg)
        self._next += 1
        done = self._next == len(self.snapshots)
        obs = encode_observation(m, snap, self.control.protection_threshold_db, self.cfg)
        return StepResult(obs, float(reward), done, m)
