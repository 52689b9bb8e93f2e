"""Bayesian tabular model of external transitions and internal drift.

One Dirichlet-categorical cell per (augmented state, action) gives exact
posterior predictives, predictive entropy, and closed-form expected
information gain. A second table over discretized drift outcomes does the
same for the internal dynamics, and a running mean of observed drift feeds
noise-free rollouts.

The model is read-only to every consumer except `observe`, which only the
run loop calls: regulatory signals derived from the model never feed back
into it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import digamma

from .core import AugmentedState, ConfigError, UsageError


def expected_info_gain_alpha(alpha: np.ndarray) -> float:
    """Expected KL from posterior to prior for one predicted observation.

    For a Dirichlet(alpha) cell, averaging KL(Dir(alpha + e_k) || Dir(alpha))
    over the posterior predictive p_k = alpha_k / alpha_0. The single-count
    increment collapses the KL to log(alpha_0) - log(alpha_k)
    + psi(alpha_k + 1) - psi(alpha_0 + 1).
    """
    alpha = np.asarray(alpha, dtype=float)
    a0 = alpha.sum()
    p = alpha / a0
    kl = np.log(a0) - np.log(alpha) + digamma(alpha + 1.0) - digamma(a0 + 1.0)
    return float(np.dot(p, kl))


@dataclass
class _DriftStats:
    """Running mean/variance (Welford) of observed drift vectors."""

    count: int = 0
    mean: np.ndarray | None = None
    m2: np.ndarray | None = None

    def update(self, x: np.ndarray):
        if self.mean is None:
            self.mean = np.zeros_like(x)
            self.m2 = np.zeros_like(x)
        self.count += 1
        delta = x - self.mean
        self.mean = self.mean + delta / self.count
        self.m2 = self.m2 + delta * (x - self.mean)

    def variance(self) -> np.ndarray:
        if self.count < 2:
            return np.zeros_like(self.mean) if self.mean is not None else np.zeros(0)
        return self.m2 / self.count


@dataclass
class DirichletModel:
    """Count-based model over (augmented state, action) cells.

    Untouched cells fall back to the symmetric prior, so `predict` is total.
    `pe_ema` tracks an exponential moving average of one-step prediction
    error on the external transition, a cheap global surprise indicator.
    """

    n_states: int
    n_actions: int
    n_dims: int
    prior: float = 1.0
    pe_beta: float = 0.05
    drift_edges: tuple[float, ...] = (-0.05, -0.005, 0.005, 0.05)

    pe_ema: float = field(default=0.0, init=False)
    _counts: dict = field(default_factory=dict, init=False, repr=False)
    _drift_counts: dict = field(default_factory=dict, init=False, repr=False)
    _drift_stats: dict = field(default_factory=dict, init=False, repr=False)
    _obs_total: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        if self.n_states < 1 or self.n_actions < 1 or self.n_dims < 1:
            raise ConfigError("model needs at least one state, action and dimension")
        if self.prior <= 0:
            raise ConfigError("model.prior must be positive")
        if not (0 < self.pe_beta <= 1):
            raise ConfigError("model.pe_beta must be in (0, 1]")
        edges = tuple(float(e) for e in self.drift_edges)
        if list(edges) != sorted(edges):
            raise ConfigError("model.drift_edges must be ascending")
        self.drift_edges = edges
        self._edges_arr = np.asarray(edges, dtype=float)

    # ------------------------------------------------------------------
    # indexing

    @property
    def drift_bins_per_dim(self) -> int:
        return len(self.drift_edges) + 1

    @property
    def n_drift_outcomes(self) -> int:
        return self.drift_bins_per_dim ** self.n_dims

    def drift_bin_index(self, drift) -> int:
        """Joint index of the per-dimension sign/magnitude bin of a drift vector."""
        d = np.asarray(drift, dtype=float)
        if d.size != self.n_dims:
            raise UsageError(f"drift has {d.size} dims, model expects {self.n_dims}")
        per_dim = np.searchsorted(self._edges_arr, d, side="right")
        idx = 0
        for bin_i in per_dim:
            idx = idx * self.drift_bins_per_dim + int(bin_i)
        return idx

    def _check(self, st: AugmentedState, a: int):
        if not (0 <= st.external < self.n_states):
            raise UsageError(f"state id {st.external} out of range [0, {self.n_states})")
        if not (0 <= a < self.n_actions):
            raise UsageError(f"action {a} out of range [0, {self.n_actions})")

    def _key(self, st: AugmentedState, a: int):
        return (st.external, st.internal_bin, a)

    # ------------------------------------------------------------------
    # update

    def observe(self, prev: AugmentedState, a: int, next_external: int, drift) -> None:
        """Record one transition: bump both count tables and the error average."""
        self._check(prev, a)
        if not (0 <= next_external < self.n_states):
            raise UsageError(f"successor id {next_external} out of range")
        key = self._key(prev, a)

        alpha = self._counts.get(key)
        if alpha is None:
            alpha = np.full(self.n_states, self.prior)
            self._counts[key] = alpha
        p_next = alpha[next_external] / alpha.sum()
        self.pe_ema = (1.0 - self.pe_beta) * self.pe_ema + self.pe_beta * (1.0 - p_next)
        alpha[next_external] += 1.0

        d = np.asarray(drift, dtype=float)
        beta = self._drift_counts.get(key)
        if beta is None:
            beta = np.full(self.n_drift_outcomes, self.prior)
            self._drift_counts[key] = beta
        beta[self.drift_bin_index(d)] += 1.0

        stats = self._drift_stats.get(key)
        if stats is None:
            stats = _DriftStats()
            self._drift_stats[key] = stats
        stats.update(d)
        self._obs_total[key] = self._obs_total.get(key, 0) + 1

    # ------------------------------------------------------------------
    # queries

    def alpha(self, st: AugmentedState, a: int) -> np.ndarray:
        self._check(st, a)
        alpha = self._counts.get(self._key(st, a))
        if alpha is None:
            return np.full(self.n_states, self.prior)
        return alpha.copy()

    def drift_alpha(self, st: AugmentedState, a: int) -> np.ndarray:
        self._check(st, a)
        beta = self._drift_counts.get(self._key(st, a))
        if beta is None:
            return np.full(self.n_drift_outcomes, self.prior)
        return beta.copy()

    def predict(self, st: AugmentedState, a: int) -> tuple[np.ndarray, np.ndarray]:
        """Posterior predictive over successors plus the mean observed drift."""
        alpha = self.alpha(st, a)
        stats = self._drift_stats.get(self._key(st, a))
        drift = np.zeros(self.n_dims) if stats is None or stats.mean is None else stats.mean.copy()
        return alpha / alpha.sum(), drift

    def drift_predictive(self, st: AugmentedState, a: int) -> np.ndarray:
        beta = self.drift_alpha(st, a)
        return beta / beta.sum()

    def drift_variance(self, st: AugmentedState, a: int) -> np.ndarray:
        self._check(st, a)
        stats = self._drift_stats.get(self._key(st, a))
        if stats is None or stats.mean is None:
            return np.zeros(self.n_dims)
        return stats.variance()

    def obs_count(self, st: AugmentedState, a: int) -> int:
        self._check(st, a)
        return self._obs_total.get(self._key(st, a), 0)

    def predictive_entropy(self, st: AugmentedState, a: int) -> float:
        """Shannon entropy (nats) of the successor predictive."""
        p, _ = self.predict(st, a)
        nz = p[p > 0]
        return float(-np.sum(nz * np.log(nz)))

    def expected_info_gain(self, st: AugmentedState, a: int) -> float:
        """Expected reduction of uncertainty about the external transition cell."""
        return expected_info_gain_alpha(self.alpha(st, a))

    def expected_info_gain_internal(self, st: AugmentedState, a: int) -> float:
        """Same closed form on the discretized drift-outcome cell."""
        return expected_info_gain_alpha(self.drift_alpha(st, a))

    # ------------------------------------------------------------------
    # persistence

    def snapshot(self) -> dict:
        """JSON-friendly dump of the external concentration table."""
        out = {}
        for (ext, bins, a), alpha in sorted(self._counts.items()):
            key = f"s{ext}:v{'-'.join(str(b) for b in bins)}:a{a}"
            out[key] = [float(x) for x in alpha]
        return out
