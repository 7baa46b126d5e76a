"""Concept drift signals d(t) >= 0, indexed by the interaction counter t."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ConfigError

KINDS = ("constant", "linear", "sinusoidal", "step", "random-walk")

_WALK_CHUNK = 4096


@dataclass(frozen=True)
class DriftSpec:
    """Declarative drift schedule.

    constant:    ``level``
    linear:      ``intercept + slope * t``
    sinusoidal:  ``amplitude * (sin(omega * t + phase) + 1) / 2``
    step:        ``level`` until the first change point, then the level of the
                 latest ``(t_start, level)`` pair with ``t_start <= t``
    random-walk: reflected Gaussian walk ``w_{t+1} = |w_t + step_scale * z_t|``
                 started at ``level``, reproducible from ``seed``
    """

    kind: str = "constant"
    level: float = 0.0
    slope: float = 0.0
    intercept: float = 0.0
    amplitude: float = 1.0
    omega: float = 1.0
    phase: float = 0.0
    change_points: tuple[tuple[int, float], ...] = field(default_factory=tuple)
    step_scale: float = 0.1
    seed: int = 0

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError("drift.kind", f"unknown drift kind {self.kind!r}")
        if self.kind in ("constant", "step", "random-walk") and self.level < 0:
            raise ConfigError("drift.level", "must be >= 0")
        if self.kind == "linear":
            if self.intercept < 0:
                raise ConfigError("drift.intercept", "must be >= 0")
            if self.slope < 0:
                raise ConfigError("drift.slope", "must be >= 0 to keep d(t) >= 0")
        if self.kind == "sinusoidal" and self.amplitude < 0:
            raise ConfigError("drift.amplitude", "must be >= 0")
        if self.kind == "step":
            starts = [t for t, _ in self.change_points]
            if starts != sorted(starts):
                raise ConfigError("drift.change_points", "must be sorted by time")
            if any(lvl < 0 for _, lvl in self.change_points):
                raise ConfigError("drift.change_points", "levels must be >= 0")
        if self.kind == "random-walk" and self.step_scale < 0:
            raise ConfigError("drift.step_scale", "must be >= 0")

    @property
    def is_constant(self) -> bool:
        return (
            self.kind == "constant"
            or (self.kind == "linear" and self.slope == 0)
            or (self.kind == "sinusoidal" and self.amplitude == 0)
            or (self.kind == "step" and not self.change_points)
            or (self.kind == "random-walk" and self.step_scale == 0)
        )


@lru_cache(maxsize=256)
def _walk_chunk(seed: int, scale: float, start: float, index: int) -> np.ndarray:
    # each chunk continues from the last value of the previous one
    if index == 0:
        w = start
    else:
        w = float(_walk_chunk(seed, scale, start, index - 1)[-1])
    steps = np.random.default_rng([seed, index]).standard_normal(_WALK_CHUNK) * scale
    out = np.empty(_WALK_CHUNK)
    for j, s in enumerate(steps):
        out[j] = w
        w = abs(w + s)
    return out


def eval_drift(spec: DriftSpec, t: int) -> float:
    """Evaluate d(t). Raises ``ValueError`` for negative ``t``."""
    if t < 0:
        raise ValueError(f"drift time must be >= 0, got {t}")
    kind = spec.kind
    if kind == "constant":
        return float(spec.level)
    if kind == "linear":
        return float(spec.intercept + spec.slope * t)
    if kind == "sinusoidal":
        return float(spec.amplitude * (math.sin(spec.omega * t + spec.phase) + 1.0) / 2.0)
    if kind == "step":
        value = spec.level
        for start, lvl in spec.change_points:
            if start > t:
                break
            value = lvl
        return float(value)
    if kind == "random-walk":
        t = int(t)
        key = (int(spec.seed), float(spec.step_scale), float(spec.level))
        # warm chunks in order so the recursion above stays one level deep
        for index in range(t // _WALK_CHUNK + 1):
            chunk = _walk_chunk(*key, index)
        return float(chunk[t % _WALK_CHUNK])
    raise ConfigError("drift.kind", f"unknown drift kind {kind!r}")
