"""Policy arbitration: urgency-ranked blending of the three value channels,
with a hard viability shield.

Stability outranks anticipation outranks exploration: urgencies are turned
into simplex weights by stick-breaking, so whatever mass stability does not
claim is split by anticipated threat, and exploration gets the remainder.
A hard-bound violation bypasses the blend entirely and restricts choice to
recovery actions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConfigError, RngStream, UsageError, ViabilityBounds, ViabilityVector
from .core import hard_violation, viability_margin
from .homeostat import softmax_probs, sample_index


@dataclass(frozen=True)
class ArbitrationWeights:
    w_h: float
    w_a: float
    w_e: float
    shielded: bool

    def __post_init__(self):
        for name in ("w_h", "w_a", "w_e"):
            x = getattr(self, name)
            if not (np.isfinite(x) and -1e-12 <= x <= 1 + 1e-12):
                raise ConfigError(f"{name} must lie in [0, 1], got {x}")
        if abs(self.w_h + self.w_a + self.w_e - 1.0) > 1e-12:
            raise ConfigError("arbitration weights must sum to 1")
        if self.shielded and self.w_h != 1.0:
            raise ConfigError("shielded arbitration must put all weight on stability")

    def as_array(self) -> np.ndarray:
        return np.array([self.w_h, self.w_a, self.w_e])


@dataclass(frozen=True)
class ArbiterConfig:
    urgency_gain: float
    recovery_actions: frozenset[int] = frozenset()

    def __post_init__(self):
        if not (np.isfinite(self.urgency_gain) and self.urgency_gain > 0):
            raise ConfigError("arbiter.urgency_gain must be positive")
        object.__setattr__(self, "recovery_actions", frozenset(self.recovery_actions))


def compute_weights(
    v: ViabilityVector,
    b: ViabilityBounds,
    signal,
    model_uncertainty: float,
    cfg: ArbiterConfig,
    info_seek_bonus: float = 0.0,
) -> ArbitrationWeights:
    """Stick-breaking weights from stability and threat urgencies.

    Stability urgency is the eroded margin; threat urgency saturates in g.
    `info_seek_bonus` multiplies the exploration stick before normalization
    (threat-driven information seeking). A hard-bound violation shields:
    all weight on stability, no further computation."""
    if not (0.0 <= model_uncertainty <= 1.0):
        raise UsageError(f"model_uncertainty must be in [0, 1], got {model_uncertainty}")
    if info_seek_bonus < 0:
        raise UsageError("info_seek_bonus must be nonnegative")
    if hard_violation(v, b):
        return ArbitrationWeights(1.0, 0.0, 0.0, True)

    g = float(getattr(signal, "g", signal))
    m = viability_margin(v, b)
    u_h = 1.0 - m
    u_a = min(max(cfg.urgency_gain * g / (1.0 + cfg.urgency_gain * g), 0.0), 1.0)
    z = np.array(
        [
            u_h,
            (1.0 - u_h) * u_a,
            (1.0 - u_h) * (1.0 - u_a) * (1.0 + info_seek_bonus),
        ]
    )
    total = z.sum()
    if total <= 0.0:
        return ArbitrationWeights(0.0, 0.0, 1.0, False)
    w_h = z[0] / total
    w_a = z[1] / total
    w_e = max(1.0 - w_h - w_a, 0.0)  # exact simplex closure
    return ArbitrationWeights(w_h, w_a, w_e, False)


def _as_mask(allowed, n: int) -> np.ndarray:
    arr = np.asarray(allowed)
    if arr.dtype == bool:
        if arr.shape != (n,):
            raise UsageError(f"action mask must have length {n}")
        return arr.copy()
    mask = np.zeros(n, dtype=bool)
    for a in np.atleast_1d(arr):
        if not (0 <= int(a) < n):
            raise UsageError(f"action id {a} out of range [0, {n})")
        mask[int(a)] = True
    return mask


def _normalize(channel: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Min-max over the choice set; a flat channel carries no preference."""
    vals = channel[mask]
    lo, hi = vals.min(), vals.max()
    out = np.full(channel.shape, 0.5)
    if hi - lo > 1e-12:
        out[mask] = (vals - lo) / (hi - lo)
    return out


def select_action(
    q_shaped,
    r_a,
    r_e,
    weights: ArbitrationWeights,
    tau: float,
    allowed,
    rng: RngStream,
    *,
    recovery=None,
    tau_min: float | None = None,
    penalties=None,
) -> int:
    """Blend the three channels and sample one action.

    Channels are min-max normalized over the effective choice set (they have
    incommensurable units), combined by the arbitration weights, optionally
    reduced by per-action `penalties`, and sampled through the tempered
    softmax. When shielded, the choice set is intersected with `recovery`
    and tau drops to `tau_min`; an empty intersection falls back to the full
    recovery set (a shield fault, detectable by the caller from the same
    inputs)."""
    q_h = np.asarray(q_shaped, dtype=float)
    ch_a = np.asarray(r_a, dtype=float)
    ch_e = np.asarray(r_e, dtype=float)
    n = q_h.size
    if ch_a.size != n or ch_e.size != n or n == 0:
        raise UsageError("the three channels must be same-length nonempty vectors")
    mask = _as_mask(allowed, n)
    if not mask.any():
        raise UsageError("allowed action set must be nonempty")

    eff = mask
    t = float(tau)
    if weights.shielded:
        if recovery is None:
            raise UsageError("shielded selection requires a recovery action set")
        rec = _as_mask(recovery, n)
        if not rec.any():
            raise UsageError("recovery action set must be nonempty")
        eff = mask & rec
        if not eff.any():
            eff = rec
        if tau_min is None:
            raise UsageError("shielded selection requires tau_min")
        t = float(tau_min)

    combined = (
        weights.w_h * _normalize(q_h, eff)
        + weights.w_a * _normalize(ch_a, eff)
        + weights.w_e * _normalize(ch_e, eff)
    )
    if penalties is not None:
        p = np.asarray(penalties, dtype=float)
        if p.shape != (n,) or not np.all(np.isfinite(p)):
            raise UsageError("penalties must be one finite value per action")
        combined = combined - p

    idx = np.flatnonzero(eff)
    probs = softmax_probs(combined[idx], t)
    return int(idx[sample_index(probs, rng)])
