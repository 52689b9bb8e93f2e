"""Experiment configuration: TOML loading, validation, canonical echo.

One file describes one experiment: the environment block (with optional
perturbation and drift schedules), the internal-state bounds, and one block
per regulatory module. Unknown keys are rejected with their full path so
typos fail loudly instead of silently running defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .allostat import AllostatConfig
from .arbiter import ArbiterConfig
from .core import ConfigError, NoiseSpec, ViabilityBounds
from .enact import EnactConfig
from .envs import DriftSchedule, PerturbationSchedule, parse_drift_changes, parse_perturbations
from .homeostat import HomeostatConfig, RegulationMode

_ENV_COMMON = {"kind", "seed", "episode_len", "episodes", "init_v",
               "perturbations", "drift_changes"}
_ENV_KEYS = {
    "viability_grid": _ENV_COMMON | {"size", "start", "goal", "food", "hazards",
                                     "dash", "eat_gain"},
    "drift_bandit": _ENV_COMMON | {"arms", "payout_levels", "shift_window"},
    "costly_maze": _ENV_COMMON | {"rows", "cols", "wall_col", "doors", "start",
                                  "goal", "charger", "noise_levels", "probe_cost"},
}
_SECTION_KEYS = {
    "bounds": {"soft_lo", "soft_hi", "hard_lo", "hard_hi",
               "weight_lo", "weight_hi", "rho", "sigma"},
    "homeostat": {"lambda_h", "tau_min", "tau_max", "mode"},
    "model": {"prior", "pe_beta", "drift_edges"},
    "allostat": {"horizon", "gamma", "n_rollouts", "weights",
                 "abstain_threshold", "risk_coeff"},
    "enact": {"lambda_e", "cost_floor"},
    "arbiter": {"urgency_gain"},
    "learner": {"alpha", "gamma_task", "v_bins"},
    "metrics": {"recovery_window"},
}

_HOMEOSTAT_DEFAULTS = dict(lambda_h=1.0, tau_min=0.05, tau_max=0.6, mode="conservative")
_ALLOSTAT_DEFAULTS = dict(horizon=3, gamma=0.8, n_rollouts=30,
                          weights=[1.0, 0.5, 0.5, 2.0],
                          abstain_threshold=1.0, risk_coeff=1.0)
_ENACT_DEFAULTS = dict(lambda_e=1.0, cost_floor=0.01)
_ARBITER_DEFAULTS = dict(urgency_gain=1.0)
_LEARNER_DEFAULTS = dict(alpha=0.1, gamma_task=0.95, v_bins=3)
_MODEL_DEFAULTS = dict(prior=1.0, pe_beta=0.05,
                       drift_edges=[-0.05, -0.005, 0.005, 0.05])


@dataclass(frozen=True)
class ExperimentConfig:
    env_kind: str
    env_cfg: dict
    env_seed: int
    episode_len: int
    episodes: int
    perturbations: PerturbationSchedule
    drift_changes: DriftSchedule
    bounds: ViabilityBounds
    noise: NoiseSpec
    homeostat: HomeostatConfig
    allostat: AllostatConfig
    enact: EnactConfig
    arbiter: ArbiterConfig
    model_prior: float
    model_pe_beta: float
    model_drift_edges: tuple
    learner_alpha: float
    learner_gamma_task: float
    learner_v_bins: int
    recovery_window: int
    raw: dict = field(compare=False)


def _check_keys(section: str, block: dict, allowed: set):
    for key in block:
        if key not in allowed:
            raise ConfigError(f"unknown config key {section}.{key}")


def _floats(block: dict, section: str, key: str, default=None):
    if key not in block:
        if default is None:
            raise ConfigError(f"missing config key {section}.{key}")
        return list(default)
    vals = block[key]
    if not isinstance(vals, list):
        raise ConfigError(f"{section}.{key} must be an array")
    return [float(x) for x in vals]


def from_dict(raw: dict) -> ExperimentConfig:
    """Build and validate a full experiment description from parsed TOML."""
    known_sections = {"env"} | set(_SECTION_KEYS)
    for section in raw:
        if section not in known_sections:
            raise ConfigError(f"unknown config section [{section}]")

    env = dict(raw.get("env") or {})
    kind = env.get("kind")
    if kind not in _ENV_KEYS:
        raise ConfigError(
            f"env.kind must be one of {sorted(_ENV_KEYS)}, got {kind!r}"
        )
    _check_keys("env", env, _ENV_KEYS[kind])
    env_seed = int(env.pop("seed", 0))
    episode_len = int(env.pop("episode_len", 300))
    episodes = int(env.pop("episodes", 1))
    if episode_len < 1 or episodes < 1:
        raise ConfigError("env.episode_len and env.episodes must be >= 1")
    perturbations = parse_perturbations(env.pop("perturbations", []))
    drift_changes = parse_drift_changes(env.pop("drift_changes", []))
    env.pop("kind")

    bounds_block = dict(raw.get("bounds") or {})
    _check_keys("bounds", bounds_block, _SECTION_KEYS["bounds"])
    if not bounds_block:
        raise ConfigError("missing config section [bounds]")
    bounds = ViabilityBounds(
        soft_lo=_floats(bounds_block, "bounds", "soft_lo"),
        soft_hi=_floats(bounds_block, "bounds", "soft_hi"),
        hard_lo=_floats(bounds_block, "bounds", "hard_lo"),
        hard_hi=_floats(bounds_block, "bounds", "hard_hi"),
        weight_lo=_floats(bounds_block, "bounds", "weight_lo"),
        weight_hi=_floats(bounds_block, "bounds", "weight_hi"),
        rho=_floats(bounds_block, "bounds", "rho"),
    )
    noise = NoiseSpec(_floats(bounds_block, "bounds", "sigma", [0.0] * bounds.n))

    h = {**_HOMEOSTAT_DEFAULTS, **(raw.get("homeostat") or {})}
    _check_keys("homeostat", h, _SECTION_KEYS["homeostat"])
    try:
        mode = RegulationMode(h["mode"])
    except ValueError:
        raise ConfigError(
            f"homeostat.mode must be 'conservative' or 'active_search', got {h['mode']!r}"
        ) from None
    homeostat = HomeostatConfig(float(h["lambda_h"]), float(h["tau_min"]),
                                float(h["tau_max"]), mode)

    a = {**_ALLOSTAT_DEFAULTS, **(raw.get("allostat") or {})}
    _check_keys("allostat", a, _SECTION_KEYS["allostat"])
    allostat = AllostatConfig(
        horizon=int(a["horizon"]),
        gamma_allo=float(a["gamma"]),
        n_rollouts=int(a["n_rollouts"]),
        feature_weights=tuple(float(x) for x in a["weights"]),
        abstain_threshold=float(a["abstain_threshold"]),
        risk_coeff=float(a["risk_coeff"]),
    )

    e = {**_ENACT_DEFAULTS, **(raw.get("enact") or {})}
    _check_keys("enact", e, _SECTION_KEYS["enact"])
    enact = EnactConfig(float(e["lambda_e"]), float(e["cost_floor"]))

    arb = {**_ARBITER_DEFAULTS, **(raw.get("arbiter") or {})}
    _check_keys("arbiter", arb, _SECTION_KEYS["arbiter"])
    arbiter = ArbiterConfig(float(arb["urgency_gain"]))

    m = {**_MODEL_DEFAULTS, **(raw.get("model") or {})}
    _check_keys("model", m, _SECTION_KEYS["model"])

    lrn = {**_LEARNER_DEFAULTS, **(raw.get("learner") or {})}
    _check_keys("learner", lrn, _SECTION_KEYS["learner"])
    if not (0 < float(lrn["alpha"]) <= 1):
        raise ConfigError("learner.alpha must be in (0, 1]")
    if not (0 <= float(lrn["gamma_task"]) < 1):
        raise ConfigError("learner.gamma_task must be in [0, 1)")
    if int(lrn["v_bins"]) < 1:
        raise ConfigError("learner.v_bins must be >= 1")

    met = dict(raw.get("metrics") or {})
    _check_keys("metrics", met, _SECTION_KEYS["metrics"])
    recovery_window = int(met.get("recovery_window", 10))
    if recovery_window < 1:
        raise ConfigError("metrics.recovery_window must be >= 1")

    return ExperimentConfig(
        env_kind=kind,
        env_cfg=env,
        env_seed=env_seed,
        episode_len=episode_len,
        episodes=episodes,
        perturbations=perturbations,
        drift_changes=drift_changes,
        bounds=bounds,
        noise=noise,
        homeostat=homeostat,
        allostat=allostat,
        enact=enact,
        arbiter=arbiter,
        model_prior=float(m["prior"]),
        model_pe_beta=float(m["pe_beta"]),
        model_drift_edges=tuple(float(x) for x in m["drift_edges"]),
        learner_alpha=float(lrn["alpha"]),
        learner_gamma_task=float(lrn["gamma_task"]),
        learner_v_bins=int(lrn["v_bins"]),
        recovery_window=recovery_window,
        raw=raw,
    )


def load_experiment(path) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        # the decoder message carries line and column
        raise ConfigError(f"{path}: {exc}") from None
    return from_dict(raw)
