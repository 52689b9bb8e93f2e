"""Exploration valued as information gain per unit of predicted internal cost.

Curiosity here is embodied twice over: learning about the world and learning
about one's own drift dynamics both count as gain, and the score is
discounted by how much homeostatic trouble the action is predicted to cause.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AugmentedState, ConfigError, UsageError, ViabilityBounds, ViabilityVector
from .core import advance_mean
from .homeostat import homeostatic_cost
from .world_model import DirichletModel


@dataclass(frozen=True)
class EnactConfig:
    lambda_e: float
    cost_floor: float = 0.01

    def __post_init__(self):
        if not (np.isfinite(self.lambda_e) and self.lambda_e >= 0):
            raise ConfigError("enact.lambda_e must be nonnegative")
        if not (np.isfinite(self.cost_floor) and self.cost_floor > 0):
            raise ConfigError("enact.cost_floor must be positive")


def intrinsic_value(
    st: AugmentedState,
    v: ViabilityVector,
    a: int,
    model: DirichletModel,
    b: ViabilityBounds,
    cfg: EnactConfig,
) -> float:
    """Expected info gain about external transitions plus lambda_e times the
    gain about the agent's own drift dynamics."""
    ig_ext = model.expected_info_gain(st, a)
    ig_int = model.expected_info_gain_internal(st, a)
    return ig_ext + cfg.lambda_e * ig_int


def predicted_cost(
    st: AugmentedState,
    v: ViabilityVector,
    a: int,
    model: DirichletModel,
    b: ViabilityBounds,
    lambda_h: float,
) -> float:
    """Homeostatic cost expected one step ahead, under the model's mean drift."""
    _, drift = model.predict(st, a)
    return lambda_h * homeostatic_cost(advance_mean(v, drift, b), b)


def exploration_score(
    st: AugmentedState,
    v: ViabilityVector,
    a: int,
    model: DirichletModel,
    b: ViabilityBounds,
    cfg: EnactConfig,
    cost: float,
) -> float:
    """Intrinsic value over effective predicted cost; the floor keeps
    cost-free actions from scoring infinitely."""
    if not np.isfinite(cost) or cost < 0:
        raise UsageError("predicted cost must be finite and nonnegative")
    return intrinsic_value(st, v, a, model, b, cfg) / max(cost, cfg.cost_floor)


def exploration_channel(
    st: AugmentedState,
    v: ViabilityVector,
    model: DirichletModel,
    b: ViabilityBounds,
    cfg: EnactConfig,
    lambda_h: float,
) -> np.ndarray:
    """exploration_score for every action at `st`, as one vector."""
    return np.array(
        [
            exploration_score(
                st, v, a, model, b, cfg, predicted_cost(st, v, a, model, b, lambda_h)
            )
            for a in range(model.n_actions)
        ]
    )
