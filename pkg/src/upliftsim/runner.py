"""Batch execution of a run manifest: one artifact directory per (agent, seed)."""

from __future__ import annotations

import json
import logging
import shutil
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .agents import Agent, AgentSpec, run_episode
from .config import RunManifest, load_config
from .environment import Environment, EnvironmentConfig, Oracle
from .trajectory import write_trajectory_csv

log = logging.getLogger(__name__)

PARTIAL_MARKER = "MANIFEST.partial"


@dataclass(frozen=True)
class EpisodeOutcome:
    agent: str
    seed: int
    cum_regret: float | None
    accuracy: float | None
    error: str | None = None


def agent_seed(spec: AgentSpec, run_seed: int) -> int:
    return int(np.random.SeedSequence([spec.seed, run_seed]).generate_state(1)[0])


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def run_one(config: EnvironmentConfig, spec: AgentSpec, seed: int, rounds: int, window: int,
            out_dir: Path, oracle_export: bool) -> EpisodeOutcome:
    """Run a single episode and write its artifacts atomically into ``out_dir``."""
    env = Environment(replace(config, seed=seed))
    oracle = Oracle(env)
    agent = Agent(replace(spec, seed=agent_seed(spec, seed)))
    records, report = run_episode(env, agent, rounds, window=window, oracle=oracle)

    tmp = out_dir.with_name(f".{out_dir.name}.tmp")
    if tmp.exists():
        shutil.rmtree(tmp)
    tmp.mkdir(parents=True)
    policy = config.policy
    write_trajectory_csv(tmp / "trajectory.csv", records if oracle_export else [r.agent_view() for r in records],
                         policy.n_observed, config.n_arms, policy.n_confounders, oracle=oracle_export)
    report.write_decisions_csv(tmp / "decisions.csv")
    _write_json(tmp / "report.json", {"agent": spec.label, "seed": seed, **report.summary()})
    if spec.kind != "oracle-cheat":
        _write_json(tmp / "agent.json", agent.snapshot())
    if out_dir.exists():
        shutil.rmtree(out_dir)
    tmp.rename(out_dir)
    return EpisodeOutcome(spec.label, seed, report.cumulative_regret, report.accuracy)


def _task(args) -> EpisodeOutcome:
    config, spec, seed, rounds, window, out_dir, oracle_export = args
    try:
        return run_one(config, spec, seed, rounds, window, out_dir, oracle_export)
    except Exception as exc:  # reported per episode; the batch keeps going
        return EpisodeOutcome(spec.label, seed, None, None, error=f"{type(exc).__name__}: {exc}")


def summarize(outcomes: list[EpisodeOutcome], rounds: int) -> list[dict]:
    rows = []
    labels = list(dict.fromkeys(o.agent for o in outcomes))
    for label in labels:
        done = [o for o in outcomes if o.agent == label and o.error is None]
        regrets = np.array([o.cum_regret for o in done], dtype=float)
        rows.append({
            "agent": label,
            "seeds": [o.seed for o in done],
            "rounds": rounds,
            "cum_regret_mean": float(regrets.mean()) if len(done) else None,
            "cum_regret_std": float(regrets.std()) if len(done) else None,
            "accuracy_mean": float(np.mean([o.accuracy for o in done])) if done else None,
        })
    return rows


def run_manifest(manifest: RunManifest, jobs: int = 1) -> tuple[list[dict], list[EpisodeOutcome]]:
    """Run every (agent, seed) pair. Returns the summary rows and failed outcomes."""
    config = load_config(manifest.config_path)
    out = manifest.output
    out.mkdir(parents=True, exist_ok=True)
    tasks = [
        (config, spec, seed, manifest.rounds, manifest.window, out / spec.label / f"seed_{seed}", manifest.oracle_export)
        for spec in manifest.agents
        for seed in manifest.seeds
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_task, tasks))
    else:
        outcomes = [_task(t) for t in tasks]

    failed = [o for o in outcomes if o.error is not None]
    summary = summarize(outcomes, manifest.rounds)
    _write_json(out / "summary.json", summary)
    marker = out / PARTIAL_MARKER
    if failed:
        marker.write_text("".join(f"{o.agent}\tseed={o.seed}\t{o.error}\n" for o in failed))
        for o in failed:
            log.error("episode failed: agent=%s seed=%s: %s", o.agent, o.seed, o.error)
    elif marker.exists():
        marker.unlink()
    return summary, failed
