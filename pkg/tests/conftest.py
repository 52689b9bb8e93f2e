"""Shared fixtures: small bounds/configs plus the acceptance-verdict hook."""

import numpy as np
import pytest

from intero.core import NoiseSpec, RngStream, ViabilityBounds, ViabilityVector

# One verdict line per acceptance criterion, echoed in the terminal summary
# so the pass/fail outcome of each criterion is visible in one place.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def criterion():
    """Record one acceptance verdict and assert it."""

    def check(name: str, ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'}  {name} -- {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return check


@pytest.fixture
def bounds1():
    """One-dimensional (energy) bounds: soft [0.3, 0.7] inside hard [0, 1]."""
    return ViabilityBounds(
        soft_lo=[0.3], soft_hi=[0.7], hard_lo=[0.0], hard_hi=[1.0],
        weight_lo=[0.3], weight_hi=[0.3], rho=[1.0],
    )


@pytest.fixture
def bounds2():
    """Two-dimensional (energy, thermal) bounds with asymmetric weights."""
    return ViabilityBounds(
        soft_lo=[0.3, 0.0], soft_hi=[1.0, 0.3], hard_lo=[0.0, 0.0],
        hard_hi=[1.5, 0.8], weight_lo=[0.3, 0.2], weight_hi=[0.5, 0.3],
        rho=[1.0, 0.6],
    )


@pytest.fixture
def v_mid(bounds1):
    return ViabilityVector([0.5], ("energy",))


@pytest.fixture
def noise0():
    return NoiseSpec([0.0])


@pytest.fixture
def rng():
    return RngStream(0, "test")


def tiny_maze_raw(**env_over):
    """A seconds-fast maze experiment description for harness-level tests."""
    env = {
        "kind": "costly_maze", "seed": 3, "episodes": 2, "episode_len": 30,
        "rows": 3, "cols": 5, "wall_col": 2, "doors": [[0, 2], [2, 2]],
        "start": [2, 0], "goal": [0, 4], "charger": [0, 0],
        "noise_levels": [-0.06, 0.0, 0.06], "init_v": [0.9], "probe_cost": 0.05,
    }
    env.update(env_over)
    return {
        "env": env,
        "bounds": {
            "soft_lo": [0.3], "soft_hi": [1.6], "hard_lo": [0.0],
            "hard_hi": [2.0], "weight_lo": [0.3], "weight_hi": [0.4],
            "rho": [1.0],
        },
        "homeostat": {"lambda_h": 1.0, "tau_min": 0.08, "tau_max": 0.3,
                      "mode": "conservative"},
        "model": {"prior": 0.2},
        "allostat": {"horizon": 1, "gamma": 0.8, "n_rollouts": 5,
                     "weights": [1.0, 0.5, 0.5, 2.0],
                     "abstain_threshold": 8.0, "risk_coeff": 0.05},
        "enact": {"lambda_e": 2.0, "cost_floor": 0.01},
        "learner": {"alpha": 0.2, "gamma_task": 0.9, "v_bins": 1},
        "metrics": {"recovery_window": 5},
    }


def stressed_grid_raw():
    """A grid schedule harsh enough to force shield activations."""
    return {
        "env": {
            "kind": "viability_grid", "seed": 7, "episodes": 2,
            "episode_len": 80, "size": 5, "start": [0, 0], "goal": [4, 4],
            "food": [[1, 3], [3, 1]], "hazards": [[2, 2]],
            "init_v": [0.45, 0.0], "eat_gain": 0.4,
            "perturbations": [
                {"step": 10, "kind": "energy_drain_spike",
                 "magnitude": 0.12, "duration": 6},
                {"step": 40, "kind": "resource_lockout",
                 "magnitude": 0.0, "duration": 8},
            ],
        },
        "bounds": {
            "soft_lo": [0.3, 0.0], "soft_hi": [1.2, 0.25],
            "hard_lo": [0.0, 0.0], "hard_hi": [1.5, 0.6],
            "weight_lo": [0.3, 0.15], "weight_hi": [0.5, 0.25],
            "rho": [1.0, 0.8],
        },
        "homeostat": {"lambda_h": 1.5, "tau_min": 0.1, "tau_max": 0.4},
        "model": {"prior": 0.5},
        "allostat": {"horizon": 1, "gamma": 0.8, "n_rollouts": 5,
                     "abstain_threshold": 6.0, "risk_coeff": 0.2},
        "enact": {"lambda_e": 1.0},
        "learner": {"alpha": 0.2, "gamma_task": 0.9, "v_bins": 2},
    }
