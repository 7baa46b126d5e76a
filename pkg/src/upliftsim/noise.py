"""Gaussian robustness noise: ``p_sim = sigmoid(scale * P)``, ``P ~ N(b, 1/beta)``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import ConfigError

# float64 rounds the logistic to exactly 0 or 1 for |z| beyond ~37 / ~745;
# clamp to the nearest representable interior values so p_sim stays in (0, 1)
P_LOW = np.finfo(float).tiny
P_HIGH = np.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class NoiseSpec:
    precision: float = 1.0
    sigmoid_scale: float = 3.0
    enabled: bool = True

    def validate(self) -> None:
        if not np.isfinite(self.precision) or self.precision <= 0:
            raise ConfigError("noise.precision", f"beta must be > 0, got {self.precision}")
        if not np.isfinite(self.sigmoid_scale):
            raise ConfigError("noise.sigmoid_scale", "must be finite")

    @property
    def sd(self) -> float:
        return float(self.precision) ** -0.5


def sample_pre_sigmoid(b_value, spec: NoiseSpec, rng: np.random.Generator, size=None):
    """Draw P with mean ``b_value`` and variance ``1 / precision``."""
    if spec.precision <= 0:
        raise ConfigError("noise.precision", f"beta must be > 0, got {spec.precision}")
    return rng.normal(b_value, spec.sd, size=size)


def apply_noise(b_value, spec: NoiseSpec, rng: np.random.Generator, size=None):
    """Perturb a base value and squash it; a disabled channel returns ``b_value`` untouched.

    With ``size`` set, that many independent draws are returned as an array.
    """
    if not spec.enabled:
        if size is None:
            return b_value
        return np.full(size, b_value, dtype=float)
    p = sample_pre_sigmoid(b_value, spec, rng, size=size)
    out = np.clip(expit(spec.sigmoid_scale * p), P_LOW, P_HIGH)
    return float(out) if size is None and np.ndim(out) == 0 else out
