"""Anticipatory regulation: imagined rollouts scored for upcoming threat.

The allostatic signal g is the expected discounted accumulation of
viability-threat features along short model-based rollouts. Estimation
never touches the world or the model's counts; it only reads the current
posterior. Downstream, g modulates the acting policy — cooler sampling,
per-action risk penalties, abstention, and a boost to information seeking —
but is never itself a learning target.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (
    AugmentedState,
    ConfigError,
    RngStream,
    UsageError,
    ViabilityBounds,
    ViabilityVector,
    advance_mean,
    hard_violation,
    viability_margin,
)
from .world_model import DirichletModel

N_FEATURES = 4


@dataclass(frozen=True)
class AllostatConfig:
    horizon: int
    gamma_allo: float
    n_rollouts: int
    feature_weights: tuple[float, float, float, float] = (1.0, 0.5, 0.5, 2.0)
    abstain_threshold: float = 1.0
    risk_coeff: float = 1.0

    def __post_init__(self):
        if int(self.horizon) != self.horizon or self.horizon < 0:
            raise ConfigError("allostat.horizon must be an integer >= 0")
        if not (0 <= self.gamma_allo < 1):
            raise ConfigError("allostat.gamma must be in [0, 1)")
        if int(self.n_rollouts) != self.n_rollouts or self.n_rollouts < 1:
            raise ConfigError("allostat.n_rollouts must be a positive integer")
        w = np.asarray(self.feature_weights, dtype=float)
        if w.shape != (N_FEATURES,) or not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ConfigError(
                f"allostat.weights must be {N_FEATURES} nonnegative finite numbers"
            )
        object.__setattr__(self, "feature_weights", tuple(float(x) for x in w))
        if not np.isfinite(self.abstain_threshold):
            raise ConfigError("allostat.abstain_threshold must be finite")
        if not (np.isfinite(self.risk_coeff) and self.risk_coeff >= 0):
            raise ConfigError("allostat.risk_coeff must be nonnegative")


@dataclass(frozen=True)
class AllostaticSignal:
    """The estimated threat signal plus the feature accumulation behind it."""

    g: float
    per_feature: np.ndarray
    horizon_used: int
    rollouts_used: int


@dataclass(frozen=True)
class AllostatOutput:
    """How a given threat level reshapes the acting policy.

    `risk_penalty` maps a per-action threat score (or vector of them) to the
    additive penalty subtracted from that action's arbitration score, keeping
    modulate itself a pure function of (g, config).
    """

    tau_multiplier: float
    risk_penalty: Callable
    abstain: bool
    info_seek_bonus: float


def viability_features(
    v_hat: ViabilityVector,
    st_hat: AugmentedState,
    a_hat: int,
    model: DirichletModel,
    b: ViabilityBounds,
) -> np.ndarray:
    """Threat features in [0, 1]: boundary proximity, normalized predictive
    entropy of the transition being taken, recent surprise, violation flag."""
    ent_norm = np.log(max(model.n_states, 2))
    return np.array(
        [
            1.0 - viability_margin(v_hat, b),
            model.predictive_entropy(st_hat, a_hat) / ent_norm,
            min(max(model.pe_ema, 0.0), 1.0),
            1.0 if hard_violation(v_hat, b) else 0.0,
        ]
    )


def estimate_g(
    st: AugmentedState,
    v: ViabilityVector,
    policy: Callable[[AugmentedState, ViabilityVector], np.ndarray],
    model: DirichletModel,
    b: ViabilityBounds,
    cfg: AllostatConfig,
    rng: RngStream,
    binner: Callable[[ViabilityVector], tuple],
) -> AllostaticSignal:
    """Monte-Carlo estimate of the discounted threat accumulation.

    Each rollout samples actions from `policy`, walks successors from the
    model's posterior predictive, and advances the internal state noise-free
    by the cell's mean drift, rebinned via `binner`. Horizon 0 still scores
    the current state under one sampled action.
    """
    gen = rng.generator()
    weights = np.asarray(cfg.feature_weights)
    pe = min(max(model.pe_ema, 0.0), 1.0)
    ent_norm = np.log(max(model.n_states, 2))
    discounts = cfg.gamma_allo ** np.arange(cfg.horizon + 1)

    # memoize per-cell model queries; the model is frozen during one estimate
    cell_cache: dict = {}

    def cell(aug: AugmentedState, a: int):
        key = (aug.external, aug.internal_bin, a)
        hit = cell_cache.get(key)
        if hit is None:
            probs, drift = model.predict(aug, a)
            hit = (
                np.cumsum(probs),
                drift,
                model.predictive_entropy(aug, a) / ent_norm,
            )
            cell_cache[key] = hit
        return hit

    acc = np.zeros(N_FEATURES)
    for _ in range(cfg.n_rollouts):
        aug = st
        v_hat = v
        for k in range(cfg.horizon + 1):
            p_act = policy(aug, v_hat)
            a = int(
                min(
                    np.searchsorted(np.cumsum(p_act), gen.random(), side="right"),
                    len(p_act) - 1,
                )
            )
            cum, drift, entropy = cell(aug, a)
            acc[0] += discounts[k] * (1.0 - viability_margin(v_hat, b))
            acc[1] += discounts[k] * entropy
            acc[2] += discounts[k] * pe
            if hard_violation(v_hat, b):
                acc[3] += discounts[k]
            if k < cfg.horizon:
                nxt = int(min(np.searchsorted(cum, gen.random(), side="right"),
                              model.n_states - 1))
                v_hat = advance_mean(v_hat, drift, b)
                aug = AugmentedState(nxt, binner(v_hat))

    per_feature = acc / cfg.n_rollouts
    g = float(np.dot(weights, per_feature))
    bound = float(weights.sum() * discounts.sum())
    if g < 0 or g > bound + 1e-9:
        raise UsageError(f"threat signal {g} escaped its bound [0, {bound}]")
    return AllostaticSignal(g, per_feature, cfg.horizon, cfg.n_rollouts)


def one_step_threat(
    st: AugmentedState,
    v: ViabilityVector,
    a: int,
    model: DirichletModel,
    b: ViabilityBounds,
    feature_weights,
) -> float:
    """Predicted next-step threat score of taking `a`: the weighted features
    at the mean-drift-advanced internal state."""
    _, drift = model.predict(st, a)
    v_next = advance_mean(v, drift, b)
    phi = viability_features(v_next, st, a, model, b)
    return float(np.dot(np.asarray(feature_weights, dtype=float), phi))


def threat_vector(
    st: AugmentedState,
    v: ViabilityVector,
    model: DirichletModel,
    b: ViabilityBounds,
    feature_weights,
) -> np.ndarray:
    """one_step_threat for every action, as one vector."""
    return np.array(
        [one_step_threat(st, v, a, model, b, feature_weights)
         for a in range(model.n_actions)]
    )


def modulate(signal: AllostaticSignal | float, cfg: AllostatConfig) -> AllostatOutput:
    """Turn the scalar threat signal into concrete policy adjustments."""
    g = float(getattr(signal, "g", signal))
    if not np.isfinite(g):
        raise UsageError("allostatic signal must be finite")
    g_eff = max(g, 0.0)
    scale = cfg.risk_coeff * g_eff

    def risk_penalty(threat):
        return scale * np.asarray(threat, dtype=float) if np.ndim(threat) else scale * threat

    return AllostatOutput(
        tau_multiplier=1.0 / (1.0 + cfg.risk_coeff * g_eff),
        risk_penalty=risk_penalty,
        abstain=g > cfg.abstain_threshold,
        info_seek_bonus=scale,
    )
