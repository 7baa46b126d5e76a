"""Ground-truth evaluation: true uplift, the optimal policy, regret reports."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .environment import InteractionRecord, Oracle
from .errors import DataError


def true_uplift(oracle: Oracle, x_prime, t: int, arm: int = 1):
    """``b_arm(x', d(t)) - b_0(x', d(t))``; arm 0 is rejected."""
    if arm == 0:
        raise ValueError("uplift is measured against the control arm; arm must be >= 1")
    return oracle.true_response(arm, x_prime, t) - oracle.true_response(0, x_prime, t)


def best_arm(b) -> int:
    # np.argmax returns the first maximum, i.e. ties go to the lowest index
    return int(np.argmax(np.asarray(b, dtype=float)))


def optimal_action(oracle: Oracle, x_prime, t: int) -> int:
    return best_arm(oracle.responses(x_prime, t))


@dataclass(frozen=True)
class PolicyDecision:
    t: int
    C: int
    C_star: int
    b: tuple[float, ...]
    regret: float


@dataclass
class EpisodeReport:
    rounds: int
    cumulative_regret: float
    accuracy: float
    effects: int
    window: int
    window_regret: list[float]
    decisions: list[PolicyDecision] = field(default_factory=list, repr=False)

    def cumulative_trace(self) -> np.ndarray:
        return np.cumsum([dec.regret for dec in self.decisions])

    def summary(self) -> dict:
        return {
            "rounds": self.rounds,
            "cum_regret": self.cumulative_regret,
            "accuracy": self.accuracy,
            "effects": self.effects,
            "window": self.window,
            "window_regret": list(self.window_regret),
        }

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_decisions_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["t", "C", "C_star", "regret", "cum_regret"])
            for dec, cum in zip(self.decisions, self.cumulative_trace()):
                writer.writerow([dec.t, dec.C, dec.C_star, repr(float(dec.regret)), repr(float(cum))])


def decide(record: InteractionRecord) -> PolicyDecision:
    if record.b is None:
        raise DataError(f"record at t={record.t} has no oracle fields")
    b = np.asarray(record.b, dtype=float)
    star = best_arm(b)
    regret = float(b[star] - b[record.C])
    return PolicyDecision(t=record.t, C=record.C, C_star=star, b=tuple(b.tolist()), regret=regret)


def evaluate_trajectory(records: Iterable[InteractionRecord], window: int = 100) -> EpisodeReport:
    """Score a trajectory against noiseless truth.

    Regret is ``b[C*] - b[C]`` with ``C*`` the argmax (lowest index on ties).
    ``effects`` counts realised E = 1 and is the only noisy figure here.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    records = list(records)
    decisions = [decide(r) for r in records]
    effects = sum(int(r.E) for r in records)
    regrets = [dec.regret for dec in decisions]
    n = len(decisions)
    return EpisodeReport(
        rounds=n,
        cumulative_regret=math.fsum(regrets),
        accuracy=(sum(1 for dec in decisions if dec.regret == 0.0) / n) if n else 0.0,
        effects=effects,
        window=window,
        window_regret=[math.fsum(regrets[i:i + window]) for i in range(0, n, window)],
        decisions=decisions,
    )
