"""Shared domain types: bounded internal state, its dynamics, and seeded randomness.

The internal state of an agent is a small vector of operational variables
(energy, thermal load, strain, ...), each with a preferred soft range inside a
hard range. Everything downstream (cost shaping, anticipatory rollouts,
arbitration, the shield) is driven by where the current vector sits relative
to those ranges.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np


class ConfigError(ValueError):
    """Invalid configuration: bad bounds, mismatched dimensions, bad ranges."""


class UsageError(ValueError):
    """An operation was called outside its contract (bad index, empty input)."""


def _vector(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ConfigError(f"{name} must be a 1-d vector with at least one entry")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} must be finite, got {arr.tolist()}")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ViabilityVector:
    """Internal state: one bounded operational variable per dimension."""

    values: np.ndarray
    dim_names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", _vector(self.values, "viability values"))
        names = tuple(self.dim_names)
        object.__setattr__(self, "dim_names", names)
        if len(names) != self.values.size:
            raise ConfigError(
                f"{len(names)} dim names for {self.values.size} values"
            )

    @property
    def n(self) -> int:
        return self.values.size

    def replace(self, values) -> "ViabilityVector":
        return ViabilityVector(values, self.dim_names)


@dataclass(frozen=True)
class ViabilityBounds:
    """Per-dimension soft and hard ranges with asymmetric penalty scales.

    soft_lo/soft_hi delimit the preferred operating range; hard_lo/hard_hi the
    survivable one. weight_lo/weight_hi scale how steeply deviations below or
    above the soft range are penalized (smaller weight = steeper), and rho
    weights each dimension's contribution to the total cost.
    """

    soft_lo: np.ndarray
    soft_hi: np.ndarray
    hard_lo: np.ndarray
    hard_hi: np.ndarray
    weight_lo: np.ndarray
    weight_hi: np.ndarray
    rho: np.ndarray

    def __post_init__(self):
        for name in ("soft_lo", "soft_hi", "hard_lo", "hard_hi",
                     "weight_lo", "weight_hi", "rho"):
            object.__setattr__(self, name, _vector(getattr(self, name), f"bounds.{name}"))
        n = self.soft_lo.size
        for name in ("soft_hi", "hard_lo", "hard_hi", "weight_lo", "weight_hi", "rho"):
            if getattr(self, name).size != n:
                raise ConfigError(f"bounds.{name} has wrong dimension")
        if not np.all(self.hard_lo <= self.soft_lo):
            raise ConfigError("hard_lo must be <= soft_lo")
        if not np.all(self.soft_lo < self.soft_hi):
            raise ConfigError("soft_lo must be < soft_hi")
        if not np.all(self.soft_hi <= self.hard_hi):
            raise ConfigError("soft_hi must be <= hard_hi")
        if not (np.all(self.weight_lo > 0) and np.all(self.weight_hi > 0)):
            raise ConfigError("weight_lo and weight_hi must be positive")
        if not np.all(self.rho >= 0):
            raise ConfigError("rho must be nonnegative")

    @property
    def n(self) -> int:
        return self.soft_lo.size


@dataclass(frozen=True)
class NoiseSpec:
    """Std-dev of the additive Gaussian noise on each internal dimension."""

    sigma: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "sigma", _vector(self.sigma, "noise.sigma"))
        if not np.all(self.sigma >= 0):
            raise ConfigError("noise.sigma must be nonnegative")


@dataclass(frozen=True)
class AugmentedState:
    """Learner state: external state id paired with binned internal state."""

    external: int
    internal_bin: tuple[int, ...]


@dataclass
class RngStream:
    """A named, single-owner random stream.

    Two streams constructed with the same (seed, stream_id) produce the same
    draw sequence. A stream advances as its owner consumes it; never share one
    stream between consumers.
    """

    seed: int
    stream_id: str
    _gen: np.random.Generator | None = field(default=None, repr=False, compare=False)

    def generator(self) -> np.random.Generator:
        if self._gen is None:
            digest = hashlib.sha256(self.stream_id.encode("utf-8")).digest()
            words = [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]
            seq = np.random.SeedSequence([self.seed & 0xFFFFFFFFFFFFFFFF, *words])
            self._gen = np.random.Generator(np.random.PCG64(seq))
        return self._gen


def _check_dims(v: ViabilityVector, b: ViabilityBounds):
    if v.n != b.n:
        raise ConfigError(f"state has {v.n} dims but bounds have {b.n}")


def viability_margin(v: ViabilityVector, b: ViabilityBounds) -> float:
    """Normalized distance of the internal state from its nearest hard bound.

    Per dimension: twice the distance to the closer hard bound, over the hard
    range width, clipped to [0, 1]. The margin is the minimum over dimensions,
    so one critical variable dominates: 1 only when every dimension sits at
    its hard-range midpoint, 0 as soon as any dimension touches a hard bound.
    """
    _check_dims(v, b)
    width = b.hard_hi - b.hard_lo
    dist = np.minimum(v.values - b.hard_lo, b.hard_hi - v.values)
    per_dim = np.clip(2.0 * dist / width, 0.0, 1.0)
    return float(per_dim.min())


def hard_violation(v: ViabilityVector, b: ViabilityBounds) -> bool:
    """True when any dimension is strictly outside its hard range."""
    _check_dims(v, b)
    return bool(np.any(v.values < b.hard_lo) or np.any(v.values > b.hard_hi))


def soft_violation(v: ViabilityVector, b: ViabilityBounds) -> bool:
    """True when any dimension is strictly outside its soft range."""
    _check_dims(v, b)
    return bool(np.any(v.values < b.soft_lo) or np.any(v.values > b.soft_hi))


def apply_internal_dynamics(
    v: ViabilityVector,
    drift,
    noise: NoiseSpec,
    rng: RngStream,
    b: ViabilityBounds,
) -> ViabilityVector:
    """Advance the internal state by one step: v + drift + Gaussian noise.

    The result is clamped to [hard_lo - 1, hard_hi + 1] per dimension: values
    can violate hard bounds (the shield needs to see that) but cannot run away
    numerically.
    """
    _check_dims(v, b)
    drift = np.asarray(drift, dtype=float)
    if drift.shape != v.values.shape:
        raise ConfigError(f"drift shape {drift.shape} does not match state {v.values.shape}")
    if not np.all(np.isfinite(drift)):
        raise ConfigError("drift must be finite")
    if noise.sigma.size != v.n:
        raise ConfigError("noise.sigma has wrong dimension")
    out = v.values + drift
    if np.any(noise.sigma > 0):
        out = out + rng.generator().normal(0.0, 1.0, size=v.n) * noise.sigma
    out = np.clip(out, b.hard_lo - 1.0, b.hard_hi + 1.0)
    return v.replace(out)


def advance_mean(v: ViabilityVector, drift, b: ViabilityBounds) -> ViabilityVector:
    """Noise-free advance used inside rollouts and one-step predictions."""
    _check_dims(v, b)
    drift = np.asarray(drift, dtype=float)
    out = np.clip(v.values + drift, b.hard_lo - 1.0, b.hard_hi + 1.0)
    return v.replace(out)
