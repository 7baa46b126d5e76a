"""Baseline bandit agents and the observe -> act -> interact -> learn loop.

Learners generalise over entities by uniform axis-aligned binning of the
entity box and keep per-bin, per-arm success/failure counts. With two arms
the epsilon-greedy learner is the classic two-model uplift approach: one
response estimate per arm, compared within a bin.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .environment import Environment, Oracle
from .errors import AgentStateError, ConfigError, EpisodeComplete
from .evaluation import EpisodeReport, evaluate_trajectory, optimal_action

KINDS = ("uniform-random", "fixed-arm", "epsilon-greedy-two-model", "thompson-binned", "oracle-cheat")


@dataclass(frozen=True)
class AgentSpec:
    kind: str
    arm: int = 0
    epsilon: float = 0.1
    bins: int = 4
    prior: tuple[float, float] = (1.0, 1.0)
    seed: int = 0
    name: str | None = None

    @property
    def label(self) -> str:
        return self.name or self.kind

    def validate(self, where: str = "agent") -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"{where}.kind", f"unknown agent kind {self.kind!r}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError(f"{where}.epsilon", "must lie in [0, 1]")
        if int(self.bins) != self.bins or self.bins < 1:
            raise ConfigError(f"{where}.bins", "must be a positive integer")
        if len(self.prior) != 2 or min(self.prior) <= 0:
            raise ConfigError(f"{where}.prior", "pseudo-counts must be > 0")
        if self.arm < 0:
            raise ConfigError(f"{where}.arm", "must be >= 0")


class Agent:
    def __init__(self, spec: AgentSpec):
        spec.validate()
        self.spec = spec
        self.rng = np.random.default_rng(spec.seed)
        self.n_arms: int | None = None
        self.counts: np.ndarray | None = None
        self.rounds = 0
        self._oracle: Oracle | None = None
        self._env: Environment | None = None

    @property
    def bound(self) -> bool:
        return self.n_arms is not None

    def bind(self, env: Environment, oracle: Oracle | None = None) -> "Agent":
        """Size the count tables from the environment's public surface."""
        if self.spec.kind == "fixed-arm" and self.spec.arm >= env.n_arms:
            raise ConfigError("agent.arm", f"arm {self.spec.arm} does not exist ({env.n_arms} arms)")
        if self.spec.kind == "oracle-cheat":
            if oracle is None:
                raise AgentStateError("oracle-cheat needs an Oracle handle")
            self._oracle = oracle
            self._env = env
        self.n_arms = env.n_arms
        self.n_observed = env.n_observed
        self.low, self.high = env.entity_box
        self.counts = np.zeros((self.spec.bins ** self.n_observed, self.n_arms, 2), dtype=np.int64)
        return self

    def bin_index(self, x) -> int:
        if self.n_observed == 0:
            return 0
        res = self.spec.bins
        span = self.high - self.low
        index = 0
        # row-major over coordinates, matching np.ravel_multi_index
        for v in x:
            cell = min(max(math.floor((v - self.low) / span * res), 0), res - 1)
            index = index * res + cell
        return index

    def act(self, x) -> int:
        if not self.bound:
            raise AgentStateError("agent must be bound to an environment before acting")
        kind = self.spec.kind
        if kind == "uniform-random":
            return int(self.rng.integers(self.n_arms))
        if kind == "fixed-arm":
            return self.spec.arm
        if kind == "oracle-cheat":
            return optimal_action(self._oracle, self._oracle.current_context(), self._env.t)
        cell = self.counts[self.bin_index(x)]
        succ, fail = cell[:, 0], cell[:, 1]
        if kind == "epsilon-greedy-two-model":
            if self.rng.random() < self.spec.epsilon:
                return int(self.rng.integers(self.n_arms))
            pulls = succ + fail
            # unseen arms are tried first
            with np.errstate(divide="ignore", invalid="ignore"):
                rates = np.where(pulls > 0, succ / np.maximum(pulls, 1), np.inf)
            return int(np.argmax(rates))
        a, b = self.spec.prior
        draws = self.rng.beta(a + succ, b + fail)
        return int(np.argmax(draws))

    def learn(self, x, arm: int, effect: int) -> "Agent":
        if not self.bound:
            raise AgentStateError("agent must be bound to an environment before learning")
        self.counts[self.bin_index(x), arm, 0 if effect else 1] += 1
        self.rounds += 1
        return self

    def snapshot(self) -> dict:
        if not self.bound:
            raise AgentStateError("agent is not bound")
        res = self.spec.bins
        edges = np.linspace(self.low, self.high, res + 1).tolist()
        return {
            "kind": self.spec.kind,
            "rounds": self.rounds,
            "n_arms": self.n_arms,
            "n_observed": self.n_observed,
            "bin_edges": [edges] * self.n_observed,
            "successes": self.counts[:, :, 0].tolist(),
            "failures": self.counts[:, :, 1].tolist(),
        }

    def write_snapshot(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.snapshot(), fh, sort_keys=True)
            fh.write("\n")

    def restore(self, snapshot: dict) -> "Agent":
        """Load counts from :meth:`snapshot` output; the agent must already be bound."""
        if not self.bound:
            raise AgentStateError("bind the agent before restoring counts")
        succ = np.asarray(snapshot["successes"], dtype=np.int64)
        fail = np.asarray(snapshot["failures"], dtype=np.int64)
        if succ.shape != self.counts.shape[:2] or fail.shape != succ.shape:
            raise ConfigError("snapshot", "count tables do not match this agent's bins/arms")
        self.counts[:, :, 0] = succ
        self.counts[:, :, 1] = fail
        self.rounds = int(snapshot.get("rounds", 0))
        return self


def make_agent(spec: AgentSpec) -> Agent:
    return Agent(spec)


def run_episode(env: Environment, agent: Agent, rounds: int, window: int = 100, oracle: Oracle | None = None):
    """Play ``rounds`` rounds and score them.

    Returns ``(records, report)`` with oracle-extended records. If the
    horizon cuts the episode short, :class:`EpisodeComplete` is raised with
    the partial records and report attached.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    oracle = oracle if oracle is not None else Oracle(env)
    if not agent.bound:
        agent.bind(env, oracle)
    start = len(oracle.records)
    for _ in range(rounds):
        try:
            _, x = env.observe()
        except EpisodeComplete as exc:
            records = oracle.records[start:]
            raise EpisodeComplete(str(exc), records, evaluate_trajectory(records, window)) from None
        arm = agent.act(x)
        effect = env.interact(arm)
        agent.learn(x, arm, effect)
    records = oracle.records[start:]
    report: EpisodeReport = evaluate_trajectory(records, window)
    return records, report
