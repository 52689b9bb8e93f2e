"""Interoceptive agents: viability-aware regulation, anticipation, and
curiosity for tabular reinforcement learners, plus the environments,
metrics, and ablation harness used to study them."""

from .allostat import (
    AllostatConfig,
    AllostaticSignal,
    AllostatOutput,
    estimate_g,
    modulate,
    one_step_threat,
    viability_features,
)
from .arbiter import ArbiterConfig, ArbitrationWeights, compute_weights, select_action
from .config import ExperimentConfig, load_experiment
from .core import (
    AugmentedState,
    ConfigError,
    NoiseSpec,
    RngStream,
    UsageError,
    ViabilityBounds,
    ViabilityVector,
    advance_mean,
    apply_internal_dynamics,
    hard_violation,
    soft_violation,
    viability_margin,
)
from .enact import EnactConfig, exploration_channel, exploration_score, intrinsic_value
from .envs import (
    ENV_KINDS,
    CostlyMaze,
    DriftBandit,
    DriftChange,
    DriftSchedule,
    PerturbationEvent,
    PerturbationSchedule,
    StepResult,
    ViabilityGrid,
    make_env,
)
from .harness import Mask, ablate, run_experiment
from .homeostat import (
    HomeostatConfig,
    RegulationMode,
    deviation_penalty,
    homeostatic_cost,
    shaped_reward,
    softmax_policy,
    temperature,
)
from .learner import QTable, bin_viability
from .report import report
from .world_model import DirichletModel, expected_info_gain_alpha

__version__ = "0.1.0"

__all__ = [
    "AllostatConfig",
    "AllostaticSignal",
    "AllostatOutput",
    "ArbiterConfig",
    "ArbitrationWeights",
    "AugmentedState",
    "ConfigError",
    "CostlyMaze",
    "DirichletModel",
    "DriftBandit",
    "DriftChange",
    "DriftSchedule",
    "ENV_KINDS",
    "EnactConfig",
    "ExperimentConfig",
    "HomeostatConfig",
    "Mask",
    "NoiseSpec",
    "PerturbationEvent",
    "PerturbationSchedule",
    "QTable",
    "RegulationMode",
    "RngStream",
    "StepResult",
    "UsageError",
    "ViabilityBounds",
    "ViabilityGrid",
    "ViabilityVector",
    "ablate",
    "advance_mean",
    "apply_internal_dynamics",
    "bin_viability",
    "compute_weights",
    "deviation_penalty",
    "estimate_g",
    "expected_info_gain_alpha",
    "exploration_channel",
    "exploration_score",
    "hard_violation",
    "homeostatic_cost",
    "intrinsic_value",
    "load_experiment",
    "make_env",
    "modulate",
    "one_step_threat",
    "report",
    "run_experiment",
    "select_action",
    "shaped_reward",
    "soft_violation",
    "softmax_policy",
    "temperature",
    "viability_features",
    "viability_margin",
]
