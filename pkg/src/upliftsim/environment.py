"""The interactive k+1 arm environment and its ground-truth oracle handle.

Agents talk to :class:`Environment` (``observe`` / ``interact``) and never see
confounders, base values, drift or ``p_sim``. Benchmark code wraps the same
environment in an :class:`Oracle` to read those.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .bases import BaseFunction, TabulatedBase
from .context import DimensionPolicy, ExtendedContext, entity_confounder_rng, extend_context, sample_entity
from .drift import DriftSpec, eval_drift
from .errors import ConfigError, EpisodeComplete, OracleAccessError
from .noise import NoiseSpec, apply_noise


@dataclass(frozen=True)
class EnvironmentConfig:
    n_arms: int
    policy: DimensionPolicy
    bases: tuple[BaseFunction, ...]
    drift: DriftSpec = field(default_factory=DriftSpec)
    noise: NoiseSpec = field(default_factory=lambda: NoiseSpec(enabled=False))
    seed: int = 0
    horizon: int | None = None
    # True when one base spec serves every arm; only affects error field names
    shared_base: bool = True

    def base_field(self, arm: int) -> str:
        return "base" if self.shared_base else f"bases[{arm}]"

    def validate(self) -> None:
        if self.n_arms < 2:
            raise ConfigError("arms", f"need at least two arms (control + one cause), got {self.n_arms}")
        self.policy.validate()
        if len(self.bases) != self.n_arms:
            raise ConfigError("bases", f"expected {self.n_arms} per-arm bases, got {len(self.bases)}")
        low, high = self.policy.domain_box()
        checked = set()
        for arm, base in enumerate(self.bases):
            where = self.base_field(arm)
            if id(base) not in checked:
                base.validate(where)
                checked.add(id(base))
            if base.m != self.policy.m_domain:
                raise ConfigError("M", f"{where} is defined on {base.m} dimensions, M={self.policy.m_domain}")
            if base.n_arms is not None and arm >= base.n_arms:
                raise ConfigError(where, f"has parameters for {base.n_arms} arms, arm {arm} is undefined")
            if isinstance(base, TabulatedBase):
                if not _covers_dims(base, low, high, self._uniform_dims()):
                    raise ConfigError(f"{where}.axes", "lattice does not cover the sampling box")
        self.drift.validate()
        self.noise.validate()
        if self.horizon is not None and self.horizon < 1:
            raise ConfigError("horizon", "must be >= 1 when set")

    def _uniform_dims(self) -> list[int]:
        p = self.policy
        n_x = p.m_domain - p.n_confounders
        dims = []
        if p.entity_distribution.kind == "uniform":
            dims += list(range(n_x))
        if p.confounder_distribution.kind == "uniform":
            dims += list(range(n_x, p.m_domain))
        return dims

    def response(self, arm: int, x_prime, d: float):
        """Noiseless ``b_arm(x', d)``; vectorised over leading axes of ``x_prime``."""
        return self.bases[arm](arm, x_prime, d)

    def responses(self, x_prime, d: float) -> np.ndarray:
        return np.array([self.response(i, x_prime, d) for i in range(self.n_arms)], dtype=float)


def _covers_dims(base: TabulatedBase, low, high, dims) -> bool:
    return all(base.axes[j][0] <= low[j] and base.axes[j][-1] >= high[j] for j in dims)


@dataclass(frozen=True)
class InteractionRecord:
    t: int
    x: np.ndarray
    C: int
    E: int
    # oracle-only fields
    x_prime: np.ndarray | None = None
    u: np.ndarray | None = None
    b: np.ndarray | None = None
    p_sim: float | None = None
    d: float | None = None

    @property
    def has_oracle(self) -> bool:
        return self.b is not None and self.d is not None and self.p_sim is not None

    def agent_view(self) -> "InteractionRecord":
        return replace(self, x_prime=None, u=None, b=None, p_sim=None, d=None)


def draw_effects(b_value, noise: NoiseSpec, rng: np.random.Generator, size=None):
    """Noise channel followed by the Bernoulli draw. Returns ``(E, p_sim)``."""
    p = apply_noise(b_value, noise, rng, size=size)
    if size is None:
        return int(rng.random() < p), float(p)
    return (rng.random(size) < p).astype(np.int8), p


class Environment:
    """Agent-facing environment.

    One entity is drawn per round. ``observe`` returns it (idempotently) and
    ``interact`` applies a cause, emits the binary effect and moves to the
    next round. Entity, confounder and effect randomness live on three
    streams split from the master seed, so the entity sequence does not
    depend on the actions taken.
    """

    def __init__(self, config: EnvironmentConfig):
        config.validate()
        self._config = config
        entities, confounders, effects = np.random.SeedSequence(config.seed).spawn(3)
        self._entity_rng = np.random.default_rng(entities)
        self._confounder_rng = np.random.default_rng(confounders)
        self._confounder_seed = int(confounders.generate_state(1)[0])
        self._effect_rng = np.random.default_rng(effects)
        self._t = 0
        self._records: list[InteractionRecord] = []
        self._draw_round()

    def _draw_round(self) -> None:
        policy = self._config.policy
        x = sample_entity(policy, self._entity_rng)
        if policy.n_confounders and policy.confounders_per_entity:
            ctx = extend_context(x, policy, entity_confounder_rng(x, self._confounder_seed))
        else:
            ctx = extend_context(x, policy, self._confounder_rng)
        self._x = x
        self._ctx = ctx

    @property
    def n_arms(self) -> int:
        return self._config.n_arms

    @property
    def n_observed(self) -> int:
        return self._config.policy.n_observed

    @property
    def entity_box(self) -> tuple[float, float]:
        return self._config.policy.entity_distribution.box()

    @property
    def horizon(self) -> int | None:
        return self._config.horizon

    @property
    def t(self) -> int:
        return self._t

    @property
    def exhausted(self) -> bool:
        return self.horizon is not None and self._t >= self.horizon

    def observe(self) -> tuple[int, np.ndarray]:
        if self.exhausted:
            raise EpisodeComplete(f"horizon {self.horizon} reached")
        return self._t, self._x.copy()

    def interact(self, arm: int) -> int:
        if self.exhausted:
            raise EpisodeComplete(f"horizon {self.horizon} reached")
        if isinstance(arm, bool) or int(arm) != arm or not 0 <= arm < self.n_arms:
            raise ValueError(f"arm must be an integer in [0, {self.n_arms - 1}], got {arm!r}")
        arm = int(arm)
        cfg = self._config
        d = eval_drift(cfg.drift, self._t)
        b = cfg.responses(self._ctx.x_prime, d)
        effect, p_sim = draw_effects(b[arm], cfg.noise, self._effect_rng)
        self._records.append(
            InteractionRecord(
                t=self._t, x=self._x, C=arm, E=effect,
                x_prime=self._ctx.x_prime, u=self._ctx.u, b=b, p_sim=p_sim, d=d,
            )
        )
        self._t += 1
        self._draw_round()
        return effect

    @property
    def history(self) -> list[InteractionRecord]:
        """Agent-view records: ``t``, ``x``, ``C``, ``E`` only."""
        return [r.agent_view() for r in self._records]


def create_environment(config: EnvironmentConfig) -> Environment:
    return Environment(config)


class Oracle:
    """Ground-truth handle over an environment, for evaluation code only."""

    def __init__(self, env: Environment):
        if not isinstance(env, Environment):
            raise TypeError("Oracle wraps an Environment")
        self._env = env

    @property
    def env(self) -> Environment:
        return self._env

    @property
    def config(self) -> EnvironmentConfig:
        return self._env._config

    @property
    def n_arms(self) -> int:
        return self._env.n_arms

    def current_context(self) -> ExtendedContext:
        return self._env._ctx

    def drift(self, t: int) -> float:
        return eval_drift(self.config.drift, t)

    def true_response(self, arm: int, x_prime, t: int):
        if not 0 <= arm < self.n_arms:
            raise ValueError(f"arm must be in [0, {self.n_arms - 1}], got {arm}")
        return self.config.response(arm, _domain(x_prime), self.drift(t))

    def responses(self, x_prime, t: int) -> np.ndarray:
        return self.config.responses(_domain(x_prime), self.drift(t))

    @property
    def records(self) -> list[InteractionRecord]:
        return list(self._env._records)

    def replay_effects(self, arm: int, x_prime, t: int, n: int, rng: np.random.Generator):
        """Re-run the effect channel ``n`` times at a pinned ``(x', arm, t)``.

        Uses ``rng`` instead of the environment's effect stream, so the
        episode itself is not perturbed. Returns ``(E, p_sim)`` arrays.
        """
        b = self.true_response(arm, x_prime, t)
        return draw_effects(b, self.config.noise, rng, size=n)


def _domain(x_prime):
    return x_prime.x_prime if isinstance(x_prime, ExtendedContext) else x_prime


def true_response(handle, arm: int, x_prime, t: int):
    """Noiseless ``b_arm(x', d(t))``. Only an :class:`Oracle` handle grants access."""
    if not isinstance(handle, Oracle):
        raise OracleAccessError("ground truth requires an Oracle handle, not the agent-facing environment")
    return handle.true_response(arm, x_prime, t)
