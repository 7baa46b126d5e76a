"""Bundled environment configs reproducing the reference parameter settings."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

NAMES = (
    "fig1a",
    "fig1a_noisy",
    "fig1b",
    "fig1c",
    "null_effect",
    "confounded",
    "drift_sinusoidal",
    "prior_model",
)


def fixture_path(name: str) -> Path:
    if name not in NAMES:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(NAMES)}")
    return Path(str(resources.files(__name__) / f"{name}.json"))


def load_fixture(name: str):
    from ..config import load_config

    return load_config(fixture_path(name))
