"""Run configuration: schema, file loading, environment overrides, hashing.

A run config is a single JSON file with sections (scenario, pass, env, ppo,
baseline) plus a handful of top-level keys.  Every key has a default baked
into the dataclasses below, so an empty file is a valid full-scale run.
Unknown keys are rejected rather than ignored; a typo should fail loudly.

Environment variables of the form FR3COEX_<SECTION>_<KEY> (for example
FR3COEX_SCENARIO_CARRIER_GHZ=13) override file values, with FR3COEX_SEED and
FR3COEX_OUTPUT_DIR for the top level.  Values are parsed as JSON when
possible, else taken as strings.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, field, fields


def _from_dict(cls, d: dict, where: str):
    known = {f.name for f in fields(cls)}
    unknown = set(d) - known
    if unknown:
        raise ValueError(f"unknown config key(s) in {where}: {sorted(unknown)}")
    kwargs = {}
    for f in fields(cls):
        if f.name in d:
            v = d[f.name]
            if isinstance(v, list):
                v = tuple(v)
            kwargs[f.name] = v
    return cls(**kwargs)


@dataclass
class ScenarioConfig:
    """Physical scenario knobs; defaults follow the reference setup."""

    footprint_km: float = 20.0
    carrier_ghz: float = 12.0
    bandwidth_mhz: float = 200.0
    satellite_altitude_km: float = 600.0
    earth_radius_km: float = 6371.0

    sat_tx_power_dbm: float = 48.0
    sat_peak_gain_dbi: float = 38.3
    sat_aperture_radius_m: float = 0.25

    bs_map_path: str | None = None
    n_synth_sites: int = 106
    bs_height_m: float = 25.0
    sector_peak_gain_dbi: float = 8.0
    sector_hpbw_h_deg: float = 65.0
    sector_hpbw_v_deg: float = 65.0
    sector_sla_v_db: float = 30.0
    sector_front_back_db: float = 30.0

    tn_user_density_per_m2: float = 1.3e-5
    tn_user_height_m: float = 1.5
    ue_gain_dbi: float = 0.0
    ue_p0_dbm: float = -90.0

    ntn_density_per_m2: float = 6e-8
    ntn_count_mode: str = "fixed"
    t1_t2_mix: str = "100:0"
    t1_gain_dbi: float = 33.0
    t2_gain_dbi: float = 17.0
    ntn_terminal_height_m: float = 1.5

    temperature_k: float = 290.0

    tn2ntn_pathloss: str = "uma"
    uma_nlos_enabled: bool = True
    uma_shadow_enabled: bool = False
    ntn_shadow_enabled: bool = False
    ntn_clutter_kinds: tuple = ("T2",)
    loss_table_path: str | None = None

    max_dl_power_dbm: float = 33.0
    min_dl_power_dbm: float = 13.0
    tilt_min_deg: float = 0.0
    tilt_max_deg: float = 15.0
    default_tilt_deg: float = 6.0
    ue_max_power_dbm: float = 23.0
    ue_min_power_dbm: float = 3.0
    threshold_min_db: float = -12.2
    threshold_max_db: float = -6.0
    default_threshold_db: float = -6.0

    def __post_init__(self):
        if self.ntn_count_mode not in ("fixed", "expected"):
            raise ValueError(f"ntn_count_mode must be fixed|expected, got {self.ntn_count_mode!r}")
        if self.tn2ntn_pathloss not in ("uma", "fspl"):
            raise ValueError(f"tn2ntn_pathloss must be uma|fspl, got {self.tn2ntn_pathloss!r}")


@dataclass
class PassSection:
    min_elevation_deg: float = 10.0
    max_elevation_deg: float = 170.0
    step_deg: float = 1.0


@dataclass
class EnvSection:
    weights: tuple = (0.5, 0.3, 0.2)
    granularity: str = "per_cluster"
    n_clusters: int = 8
    paper_literal_inr: bool = False

    def __post_init__(self):
        if self.granularity not in ("per_cluster", "per_sector"):
            raise ValueError(f"granularity must be per_cluster|per_sector, got {self.granularity!r}")


@dataclass
class PpoSection:
    clip_epsilon: float = 0.2
    discount: float = 0.99
    gae_lambda: float = 0.95
    actor_lr: float = 3e-4
    critic_lr: float = 3e-4
    epochs_per_update: int = 4
    minibatch_size: int = 64
    rollout_steps: int | None = None
    n_workers: int = 4
    entropy_coeff: float = 0.01
    value_coeff: float = 0.5
    max_grad_norm: float = 0.5
    hidden_sizes: tuple = (64, 64)
    log_std_init: float = -0.5
    advantage: str = "gae"
    n_updates: int = 500
    n_seeds: int = 1
    checkpoint_every: int = 0


@dataclass
class BaselineSection:
    exclusion_radius_m: float = 2000.0
    inr_trigger_db: float | None = None
    reevaluate_every: int = 1


@dataclass
class RunConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    pass_: PassSection = field(default_factory=PassSection)
    env: EnvSection = field(default_factory=EnvSection)
    ppo: PpoSection = field(default_factory=PpoSection)
    baseline: BaselineSection = field(default_factory=BaselineSection)
    seed: int = 1
    output_dir: str = "out"
    compare_densities: tuple = (6e-8, 1e-7, 3e-7)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["pass"] = d.pop("pass_")
        return d


_SECTIONS = {
    "scenario": ScenarioConfig,
    "pass": PassSection,
    "env": EnvSection,
    "ppo": PpoSection,
    "baseline": BaselineSection,
}
_TOP_KEYS = {"seed", "output_dir", "compare_densities"}


def config_from_dict(d: dict) -> RunConfig:
    unknown = set(d) - set(_SECTIONS) - _TOP_KEYS
    if unknown:
        raise ValueError(f"unknown top-level config key(s): {sorted(unknown)}")
    kwargs = {}
    for name, cls in _SECTIONS.items():
        section = d.get(name, {})
        if not isinstance(section, dict):
            raise ValueError(f"config section {name!r} must be an object")
        attr = "pass_" if name == "pass" else name
        kwargs[attr] = _from_dict(cls, section, name)
    for key in _TOP_KEYS:
        if key in d:
            v = d[key]
            kwargs[key] = tuple(v) if isinstance(v, list) else v
    return RunConfig(**kwargs)


def load_config(path: str | None = None, environ: dict | None = None) -> RunConfig:
    """Load a config file (all defaults when path is None) and apply overrides."""
    if path is None:
        raw = {}
    else:
        with open(path) as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ValueError("config file must contain a JSON object")
    cfg = config_from_dict(raw)
    return apply_env_overrides(cfg, os.environ if environ is None else environ)


def _parse_override(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_env_overrides(cfg: RunConfig, environ: dict) -> RunConfig:
    d = cfg.to_dict()
    for name, value in sorted(environ.items()):
        if not name.startswith("FR3COEX_"):
            continue
        rest = name[len("FR3COEX_") :].lower()
        if rest in _TOP_KEYS:
            d[rest] = _parse_override(value)
            continue
        section = next((s for s in _SECTIONS if rest.startswith(s + "_")), None)
        if section is None:
            raise ValueError(f"unrecognized override variable {name}")
        key = rest[len(section) + 1 :]
        d.setdefault(section, {})[key] = _parse_override(value)
    return config_from_dict(d)


def config_hash(cfg: RunConfig) -> str:
    """Stable digest of the fully resolved config, for output-file headers."""
    canon = json.dumps(cfg.to_dict(), sort_keys=True)
    return hashlib.sha256(canon.encode()).hexdigest()
