"""Tabular action-value learning over the augmented (external, binned
internal) state.

Deliberately ignorant of every regulatory signal: the value target sees only
the shaped reward. Regulation modulates how actions are *selected*, never
what the learner is taught to want.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import AugmentedState, ConfigError, UsageError, ViabilityBounds, ViabilityVector


def bin_viability(v: ViabilityVector, b: ViabilityBounds, bins: int) -> tuple[int, ...]:
    """Uniform per-dimension discretization of the hard range.

    Out-of-range values clamp to the edge bins; bins = 1 collapses the
    internal state entirely (the viability-blind variant)."""
    if int(bins) != bins or bins < 1:
        raise ConfigError("learner.v_bins must be a positive integer")
    if v.n != b.n:
        raise ConfigError(f"state has {v.n} dims but bounds have {b.n}")
    frac = (v.values - b.hard_lo) / (b.hard_hi - b.hard_lo)
    idx = np.floor(frac * bins).astype(int)
    return tuple(int(i) for i in np.clip(idx, 0, bins - 1))


@dataclass
class QTable:
    """Sparse (state, action) -> value table with one-step TD control."""

    n_actions: int
    alpha: float
    gamma_task: float
    _values: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if int(self.n_actions) != self.n_actions or self.n_actions < 1:
            raise ConfigError("QTable needs at least one action")
        if not (0 < self.alpha <= 1):
            raise ConfigError("learner.alpha must be in (0, 1]")
        if not (0 <= self.gamma_task < 1):
            raise ConfigError("learner.gamma_task must be in [0, 1)")

    def q(self, st: AugmentedState, a: int) -> float:
        return self._values.get((st, a), 0.0)

    def q_row(self, st: AugmentedState) -> np.ndarray:
        return np.array([self.q(st, a) for a in range(self.n_actions)])

    def max_q(self, st: AugmentedState) -> float:
        return max(self.q(st, a) for a in range(self.n_actions))

    def td_update(
        self, prev: AugmentedState, a: int, r_shaped: float, nxt: AugmentedState
    ) -> "QTable":
        """Q(prev,a) += alpha * (r + gamma * max_a' Q(next,a') - Q(prev,a))."""
        if not np.isfinite(r_shaped):
            raise UsageError("shaped reward must be finite")
        if not (0 <= a < self.n_actions):
            raise UsageError(f"action {a} out of range [0, {self.n_actions})")
        target = r_shaped + self.gamma_task * self.max_q(nxt)
        old = self.q(prev, a)
        self._values[(prev, a)] = old + self.alpha * (target - old)
        return self

    def __len__(self) -> int:
        return len(self._values)

    def max_abs(self) -> float:
        if not self._values:
            return 0.0
        return max(abs(x) for x in self._values.values())

    def snapshot(self) -> dict:
        """JSON-friendly dump keyed like the model snapshot."""
        out = {}
        for (st, a), val in sorted(
            self._values.items(),
            key=lambda kv: (kv[0][0].external, kv[0][0].internal_bin, kv[0][1]),
        ):
            bins = "-".join(str(i) for i in st.internal_bin)
            out[f"s{st.external}:v{bins}:a{a}"] = float(val)
        return out
