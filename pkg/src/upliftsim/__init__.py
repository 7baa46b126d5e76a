"""Seedable causal simulation environments for testing uplift and bandit learners."""

from .agents import Agent, AgentSpec, make_agent, run_episode
from .bases import (
    MixtureBase,
    PolyBase,
    SineBase,
    TabulatedBase,
    mixture_base,
    poly_base,
    read_grid_csv,
    sine_base,
    tabulated_base,
    write_grid_csv,
)
from .config import load_config, load_manifest, parse_config
from .context import DimensionPolicy, Distribution, ExtendedContext, extend_context, sample_entity
from .drift import DriftSpec, eval_drift
from .environment import (
    Environment,
    EnvironmentConfig,
    InteractionRecord,
    Oracle,
    create_environment,
    true_response,
)
from .errors import AgentStateError, ConfigError, DataError, EpisodeComplete, OracleAccessError
from .evaluation import EpisodeReport, PolicyDecision, evaluate_trajectory, optimal_action, true_uplift
from .noise import NoiseSpec, apply_noise

__version__ = "0.1.0"
