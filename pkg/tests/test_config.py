"""TOML experiment loading: validation, defaults, shipped files."""

from pathlib import Path

import pytest

from conftest import tiny_maze_raw
from intero.config import from_dict, load_experiment
from intero.core import ConfigError
from intero.homeostat import RegulationMode

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.mark.parametrize("name", ["grid", "bandit", "maze", "combined"])
def test_shipped_configs_load(name):
    cfg = load_experiment(CONFIGS / f"{name}.toml")
    assert cfg.episodes >= 1 and cfg.episode_len >= 1
    assert cfg.bounds.n == cfg.noise.sigma.size
    assert cfg.homeostat.tau_min < cfg.homeostat.tau_max


def test_shipped_grid_fields():
    cfg = load_experiment(CONFIGS / "grid.toml")
    assert cfg.env_kind == "viability_grid"
    assert cfg.bounds.n == 2
    assert cfg.arbiter.urgency_gain == 1.0  # section omitted: default applies


def test_combined_has_both_schedules():
    cfg = load_experiment(CONFIGS / "combined.toml")
    assert cfg.env_kind == "viability_grid"
    assert len(cfg.perturbations.events) >= 2
    assert len(cfg.drift_changes.change_points) >= 1
    assert cfg.env_cfg.get("dash") is True


def test_round_trip_preserves_fields():
    raw = tiny_maze_raw()
    cfg = from_dict(raw)
    assert cfg.env_kind == "costly_maze"
    assert cfg.env_seed == 3
    assert cfg.episodes == 2 and cfg.episode_len == 30
    assert cfg.homeostat.lambda_h == 1.0
    assert cfg.homeostat.mode is RegulationMode.CONSERVATIVE
    assert cfg.model_prior == 0.2
    assert cfg.allostat.abstain_threshold == 8.0
    assert cfg.enact.lambda_e == 2.0
    assert cfg.learner_v_bins == 1
    assert cfg.recovery_window == 5
    assert cfg.raw is raw
    # "kind" and schedule keys are consumed; the rest reaches the env ctor
    assert "kind" not in cfg.env_cfg
    assert cfg.env_cfg["rows"] == 3


def test_unknown_section_and_keys_rejected_with_path():
    raw = tiny_maze_raw()
    with pytest.raises(ConfigError, match=r"\[telemetry\]"):
        from_dict({**raw, "telemetry": {}})
    with pytest.raises(ConfigError, match="env.lava"):
        from_dict({**raw, "env": {**raw["env"], "lava": 1}})
    with pytest.raises(ConfigError, match="homeostat.lambda"):
        from_dict({**raw, "homeostat": {"lambda": 1.0}})
    with pytest.raises(ConfigError, match="enact.lambda_E"):
        from_dict({**raw, "enact": {"lambda_E": 1.0}})


def test_env_kind_gates_env_keys():
    raw = tiny_maze_raw()
    # grid-only key on a maze env
    with pytest.raises(ConfigError, match="env.hazards"):
        from_dict({**raw, "env": {**raw["env"], "hazards": [[1, 1]]}})
    with pytest.raises(ConfigError, match="env.kind"):
        from_dict({**raw, "env": {**raw["env"], "kind": "cartpole"}})


def test_missing_bounds_is_fatal_with_path():
    raw = tiny_maze_raw()
    with pytest.raises(ConfigError, match=r"\[bounds\]"):
        from_dict({k: v for k, v in raw.items() if k != "bounds"})
    bad = {**raw, "bounds": {k: v for k, v in raw["bounds"].items()
                             if k != "rho"}}
    with pytest.raises(ConfigError, match="bounds.rho"):
        from_dict(bad)


def test_optional_sections_fall_back_to_defaults():
    raw = {k: v for k, v in tiny_maze_raw().items() if k in ("env", "bounds")}
    cfg = from_dict(raw)
    assert cfg.homeostat.lambda_h == 1.0
    assert cfg.model_prior == 1.0
    assert cfg.learner_v_bins == 3
    assert cfg.enact.cost_floor == 0.01
    assert cfg.recovery_window == 10
    assert cfg.allostat.n_rollouts == 30
    # noise defaults to zero per dimension
    assert list(cfg.noise.sigma) == [0.0]


def test_scalar_validation():
    raw = tiny_maze_raw()
    with pytest.raises(ConfigError, match="learner.alpha"):
        from_dict({**raw, "learner": {**raw["learner"], "alpha": 0.0}})
    with pytest.raises(ConfigError, match="gamma_task"):
        from_dict({**raw, "learner": {**raw["learner"], "gamma_task": 1.0}})
    with pytest.raises(ConfigError, match="v_bins"):
        from_dict({**raw, "learner": {**raw["learner"], "v_bins": 0}})
    with pytest.raises(ConfigError, match="recovery_window"):
        from_dict({**raw, "metrics": {"recovery_window": 0}})
    with pytest.raises(ConfigError, match="homeostat.mode"):
        from_dict({**raw, "homeostat": {**raw["homeostat"], "mode": "bold"}})
    with pytest.raises(ConfigError, match="episode_len"):
        from_dict({**raw, "env": {**raw["env"], "episode_len": 0}})


def test_bounds_array_type_checked():
    raw = tiny_maze_raw()
    bad = {**raw, "bounds": {**raw["bounds"], "soft_lo": 0.3}}
    with pytest.raises(ConfigError, match="soft_lo"):
        from_dict(bad)


def test_load_missing_file_and_bad_toml(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_experiment(tmp_path / "absent.toml")
    bad = tmp_path / "broken.toml"
    bad.write_text("[env\nkind == what")
    with pytest.raises(ConfigError, match="broken.toml"):
        load_experiment(bad)
