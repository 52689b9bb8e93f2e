"""Homeostatic regulation: deviation cost, reward shaping, and the viability-coupled temperature."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    ConfigError,
    RngStream,
    UsageError,
    ViabilityBounds,
    ViabilityVector,
    viability_margin,
)


class RegulationMode(enum.Enum):
    """How the softmax temperature responds to a shrinking viability margin.

    CONSERVATIVE: deterioration lowers the temperature (risk-averse
    exploitation). ACTIVE_SEARCH: deterioration raises it (scarcity-driven
    search).
    """

    CONSERVATIVE = "conservative"
    ACTIVE_SEARCH = "active_search"


@dataclass(frozen=True)
class HomeostatConfig:
    lambda_h: float
    tau_min: float
    tau_max: float
    mode: RegulationMode = RegulationMode.CONSERVATIVE

    def __post_init__(self):
        if self.lambda_h < 0:
            raise ConfigError("homeostat.lambda_h must be nonnegative")
        if not (0 < self.tau_min < self.tau_max):
            raise ConfigError("need 0 < homeostat.tau_min < homeostat.tau_max")


def deviation_penalty(v_i: float, dim: int, b: ViabilityBounds) -> float:
    """Asymmetric quadratic hinge: zero inside the soft range.

    Below soft_lo the shortfall is scaled by weight_lo, above soft_hi by
    weight_hi, and each side is squared, so the two tails can penalize at
    different rates.
    """
    below = max(0.0, float(b.soft_lo[dim]) - v_i) / float(b.weight_lo[dim])
    above = max(0.0, v_i - float(b.soft_hi[dim])) / float(b.weight_hi[dim])
    return below * below + above * above


def homeostatic_cost(v: ViabilityVector, b: ViabilityBounds) -> float:
    """Importance-weighted sum of per-dimension deviation penalties."""
    if v.n != b.n:
        raise ConfigError(f"state has {v.n} dims but bounds have {b.n}")
    below = np.maximum(0.0, b.soft_lo - v.values) / b.weight_lo
    above = np.maximum(0.0, v.values - b.soft_hi) / b.weight_hi
    return float(np.sum(b.rho * (below * below + above * above)))


def shaped_reward(r_task: float, v: ViabilityVector, b: ViabilityBounds,
                  cfg: HomeostatConfig) -> float:
    """Task reward minus the scaled homeostatic cost."""
    if not math.isfinite(r_task):
        raise UsageError("r_task must be finite")
    return r_task - cfg.lambda_h * homeostatic_cost(v, b)


def temperature(v: ViabilityVector, b: ViabilityBounds, cfg: HomeostatConfig) -> float:
    """Map the current viability margin to a softmax temperature.

    Affine in the margin between tau_min and tau_max; the direction depends
    on the regulation mode (see RegulationMode).
    """
    m = viability_margin(v, b)
    if cfg.mode is RegulationMode.CONSERVATIVE:
        return cfg.tau_min + (cfg.tau_max - cfg.tau_min) * m
    return cfg.tau_min + (cfg.tau_max - cfg.tau_min) * (1.0 - m)


def softmax_probs(q_values, tau: float) -> np.ndarray:
    """Max-shifted Boltzmann distribution over actions."""
    q = np.asarray(q_values, dtype=float)
    if q.size == 0:
        raise UsageError("q_values must be nonempty")
    if not np.all(np.isfinite(q)):
        raise UsageError("q_values must be finite")
    if tau <= 0:
        raise UsageError("tau must be positive")
    z = np.exp((q - q.max()) / tau)
    return z / z.sum()


def sample_index(probs: np.ndarray, rng: RngStream) -> int:
    """Draw an index from a probability vector using one uniform draw."""
    u = rng.generator().random()
    cum = np.cumsum(probs)
    return int(min(np.searchsorted(cum, u, side="right"), probs.size - 1))


def softmax_policy(q_values, tau: float, rng: RngStream) -> tuple[int, np.ndarray]:
    """Sample an action from the tempered softmax over q_values."""
    p = softmax_probs(q_values, tau)
    return sample_index(p, rng), p
