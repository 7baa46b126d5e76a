"""Entities, the observable/domain dimension policy and extended contexts.

An agent only ever sees an entity ``x`` of length N. Base functions are
defined on an M-dimensional domain and are evaluated on the extended context
``x' = (x[active_mask], u)`` where ``u`` holds ``max(0, M - N)`` unobserved
confounders.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class Distribution:
    """Per-coordinate iid sampling law: ``uniform`` on [low, high] or ``gaussian``."""

    kind: str = "uniform"
    low: float = -1.0
    high: float = 1.0
    loc: float = 0.0
    scale: float = 1.0

    def validate(self, where: str) -> None:
        if self.kind == "uniform":
            if not self.low < self.high:
                raise ConfigError(f"{where}.low", "uniform requires low < high")
        elif self.kind == "gaussian":
            if not self.scale > 0:
                raise ConfigError(f"{where}.scale", "gaussian scale must be > 0")
        else:
            raise ConfigError(f"{where}.kind", f"unknown distribution {self.kind!r}")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "uniform":
            return rng.uniform(self.low, self.high, size=size)
        return rng.normal(self.loc, self.scale, size=size)

    def box(self) -> tuple[float, float]:
        """Bounding interval used for surfaces and agent binning (±3 sd for gaussians)."""
        if self.kind == "uniform":
            return (self.low, self.high)
        return (self.loc - 3 * self.scale, self.loc + 3 * self.scale)


@dataclass(frozen=True)
class DimensionPolicy:
    n_observed: int
    m_domain: int
    active_mask: tuple[int, ...] = ()
    entity_distribution: Distribution = field(default_factory=Distribution)
    confounder_distribution: Distribution = field(
        default_factory=lambda: Distribution(kind="gaussian")
    )
    # u drawn from a hash of the entity instead of the confounder stream
    confounders_per_entity: bool = False

    def __post_init__(self):
        if not self.active_mask:
            object.__setattr__(
                self, "active_mask", tuple(range(min(self.n_observed, self.m_domain)))
            )
        else:
            object.__setattr__(self, "active_mask", tuple(int(i) for i in self.active_mask))

    @property
    def n_confounders(self) -> int:
        return max(0, self.m_domain - self.n_observed)

    def validate(self) -> None:
        if self.n_observed < 0:
            raise ConfigError("N", "must be >= 0")
        if self.m_domain < 1:
            raise ConfigError("M", "must be >= 1")
        mask = self.active_mask
        if len(mask) != min(self.n_observed, self.m_domain):
            raise ConfigError(
                "active_mask",
                f"expected {min(self.n_observed, self.m_domain)} indices, got {len(mask)}",
            )
        if len(set(mask)) != len(mask) or any(i < 0 or i >= self.n_observed for i in mask):
            raise ConfigError("active_mask", "indices must be distinct and < N")
        if self.n_observed <= self.m_domain and mask != tuple(range(self.n_observed)):
            raise ConfigError("active_mask", "must be the identity when N <= M")
        self.entity_distribution.validate("entity")
        self.confounder_distribution.validate("confounder")

    def domain_box(self) -> tuple[np.ndarray, np.ndarray]:
        """Lower/upper corners of the M-dimensional box surfaces are drawn over."""
        lo_x, hi_x = self.entity_distribution.box()
        lo_u, hi_u = self.confounder_distribution.box()
        n_x = self.m_domain - self.n_confounders
        low = np.array([lo_x] * n_x + [lo_u] * self.n_confounders, dtype=float)
        high = np.array([hi_x] * n_x + [hi_u] * self.n_confounders, dtype=float)
        return low, high


@dataclass(frozen=True)
class ExtendedContext:
    x_prime: np.ndarray
    n_observed: int
    n_confounders: int

    @property
    def u(self) -> np.ndarray:
        return self.x_prime[len(self.x_prime) - self.n_confounders:]

    def __len__(self):
        return len(self.x_prime)


def sample_entity(policy: DimensionPolicy, rng: np.random.Generator) -> np.ndarray:
    """Draw one entity: N iid coordinates from the configured entity distribution."""
    return policy.entity_distribution.sample(rng, policy.n_observed)


def entity_confounder_rng(x: np.ndarray, seed: int) -> np.random.Generator:
    """Generator keyed on the entity's bytes, so a recurring entity keeps its u."""
    digest = hashlib.blake2b(np.ascontiguousarray(x, dtype=float).tobytes(), digest_size=8)
    return np.random.default_rng([seed, int.from_bytes(digest.digest(), "little")])


def extend_context(
    x: np.ndarray,
    policy: DimensionPolicy,
    rng: np.random.Generator | None = None,
    u: np.ndarray | None = None,
) -> ExtendedContext:
    """Build ``x' = (x[active_mask], u)``.

    ``u`` is sampled from ``policy.confounder_distribution`` with ``rng``
    unless given explicitly. For N >= M no randomness is consumed.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (policy.n_observed,):
        raise ConfigError(
            "N", f"entity has shape {x.shape}, policy expects ({policy.n_observed},)"
        )
    n_u = policy.n_confounders
    if n_u == 0:
        u = np.empty(0)
    elif u is None:
        if rng is None:
            raise ValueError("an rng is required to sample confounders")
        u = policy.confounder_distribution.sample(rng, n_u)
    else:
        u = np.asarray(u, dtype=float)
        if u.shape != (n_u,):
            raise ConfigError("M", f"confounder vector must have length {n_u}")
    x_prime = np.concatenate([x[list(policy.active_mask)], u])
    return ExtendedContext(x_prime=x_prime, n_observed=policy.n_observed, n_confounders=n_u)
