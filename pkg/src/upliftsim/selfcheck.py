"""Monte-Carlo self-checks of an environment's stochastic contracts.

Expected values are computed here independently of the noise module
(Gauss-Hermite quadrature and a local logistic), so a miswired noise channel
shows up as a failed check rather than a self-consistent one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from numpy.polynomial.hermite_e import hermegauss

from .environment import Environment, EnvironmentConfig, Oracle
from .noise import apply_noise, sample_pre_sigmoid

MIN_DRAWS = 10_000
LIMIT_PRECISION = 1e12
LIMIT_TOL = 1e-4


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    tolerance: str
    detail: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag} {self.name}: worst={self.worst:.3g} tolerance={self.tolerance} {self.detail}".rstrip()


def _logistic(z):
    return 1.0 / (1.0 + np.exp(-z))


def expected_p_sim(b: float, precision: float, scale: float, nodes: int = 120) -> float:
    """E[logistic(scale * P)] for P ~ N(b, 1/precision), by Gauss-Hermite quadrature."""
    x, w = hermegauss(nodes)
    sd = precision ** -0.5
    return float(np.sum(w * _logistic(scale * (b + sd * x))) / math.sqrt(2 * math.pi))


def _sample_domain(config: EnvironmentConfig, rng: np.random.Generator, n: int) -> np.ndarray:
    p = config.policy
    n_x = p.m_domain - p.n_confounders
    cols = [p.entity_distribution.sample(rng, n) for _ in range(n_x)]
    cols += [p.confounder_distribution.sample(rng, n) for _ in range(p.n_confounders)]
    return np.stack(cols, axis=-1)


def pinned_triples(config: EnvironmentConfig, rng: np.random.Generator, n_contexts: int = 5):
    """``(x', arm, t)`` probes: a few random contexts crossed with every arm."""
    xs = _sample_domain(config, rng, n_contexts)
    ts = rng.integers(0, 1000, size=n_contexts)
    return [(xs[i], arm, int(ts[i])) for i in range(n_contexts) for arm in range(config.n_arms)]


def check_range(config, oracle, rng, draws) -> CheckResult:
    worst = 0.0
    per_t = max(1, draws // 16)
    for t in rng.integers(0, 100_000, size=16):
        xp = _sample_domain(config, rng, per_t)
        for arm in range(config.n_arms):
            b = np.asarray(oracle.true_response(arm, xp, int(t)))
            worst = max(worst, float(np.max(-b, initial=0.0)), float(np.max(b - 1.0, initial=0.0)))
    return CheckResult("range", worst == 0.0, worst, "b in [0,1]", f"({16 * per_t} contexts x {config.n_arms} arms)")


def check_expectation(config, oracle, triples, rng, draws) -> CheckResult:
    noise = config.noise
    if not noise.enabled:
        return CheckResult("expectation", True, 0.0, "P == b", "(noise disabled)")
    worst = 0.0
    for xp, arm, t in triples:
        b = oracle.true_response(arm, xp, t)
        p = sample_pre_sigmoid(b, noise, rng, size=draws)
        se = noise.precision ** -0.5 / math.sqrt(draws)
        worst = max(worst, abs(float(p.mean()) - b) / se)
    return CheckResult("expectation", worst <= 4.0, worst, "4 standard errors", f"({len(triples)} probes)")


def check_p_sim(config, oracle, triples, rng, draws) -> CheckResult:
    noise = config.noise
    worst = 0.0
    if not noise.enabled:
        for xp, arm, t in triples:
            b = oracle.true_response(arm, xp, t)
            worst = max(worst, abs(float(apply_noise(b, noise, rng)) - b))
        return CheckResult("p_sim", worst == 0.0, worst, "p_sim == b exactly", "(noise disabled)")
    for xp, arm, t in triples:
        b = oracle.true_response(arm, xp, t)
        p = np.asarray(apply_noise(b, noise, rng, size=draws))
        expected = expected_p_sim(b, noise.precision, noise.sigmoid_scale)
        se = max(float(p.std()), 1e-15) / math.sqrt(draws)
        worst = max(worst, abs(float(p.mean()) - expected) / se)
    return CheckResult("p_sim", worst <= 4.0, worst, "4 standard errors of quadrature mean", f"({len(triples)} probes)")


def check_limit(config, oracle, triples, rng) -> CheckResult:
    noise = config.noise
    if not noise.enabled:
        return CheckResult("limit", True, 0.0, f"{LIMIT_TOL:g}", "(noise disabled)")
    sharp = replace(noise, precision=LIMIT_PRECISION)
    worst = 0.0
    for xp, arm, t in triples:
        b = oracle.true_response(arm, xp, t)
        p = np.asarray(apply_noise(b, sharp, rng, size=100))
        worst = max(worst, float(np.max(np.abs(p - _logistic(noise.sigmoid_scale * b)))))
    return CheckResult("limit", worst < LIMIT_TOL, worst, f"{LIMIT_TOL:g}", f"(beta={LIMIT_PRECISION:g})")


def check_bernoulli(config, oracle, triples, rng, draws) -> CheckResult:
    noise = config.noise
    worst = 0.0
    for xp, arm, t in triples:
        effects, _ = oracle.replay_effects(arm, xp, t, draws, rng)
        b = oracle.true_response(arm, xp, t)
        p = expected_p_sim(b, noise.precision, noise.sigmoid_scale) if noise.enabled else b
        freq = float(np.mean(effects))
        sd = math.sqrt(p * (1 - p) / draws)
        if sd == 0.0:
            score = 0.0 if freq == p else math.inf
        else:
            score = abs(freq - p) / sd
        worst = max(worst, score)
    return CheckResult("bernoulli", worst <= 3.0, worst, "3 sqrt(p(1-p)/n)", f"({len(triples)} probes)")


def run_selfcheck(config: EnvironmentConfig, draws: int, seed: int | None = None) -> list[CheckResult]:
    if draws < MIN_DRAWS:
        raise ValueError(f"draws must be >= {MIN_DRAWS}, got {draws}")
    rng = np.random.default_rng([config.seed if seed is None else seed, 0x5E1F])
    oracle = Oracle(Environment(config))
    triples = pinned_triples(config, rng)
    return [
        check_range(config, oracle, rng, draws),
        check_expectation(config, oracle, triples, rng, draws),
        check_p_sim(config, oracle, triples, rng, draws),
        check_limit(config, oracle, triples, rng),
        check_bernoulli(config, oracle, triples, rng, draws),
    ]
