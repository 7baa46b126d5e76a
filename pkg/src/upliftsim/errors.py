"""Exception types shared across the simulator."""

from __future__ import annotations


class ConfigError(ValueError):
    """An environment, agent or manifest description is invalid.

    ``field`` carries the dotted path of the offending key (e.g.
    ``noise.precision``) so the CLI can report it verbatim.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class OracleAccessError(PermissionError):
    """Ground-truth access was attempted through an agent-facing handle."""


class EpisodeComplete(Exception):
    """The environment horizon has been reached.

    When raised from :func:`upliftsim.agents.run_episode` the partial
    trajectory and its report are attached.
    """

    def __init__(self, message: str = "episode complete", records=None, report=None):
        super().__init__(message)
        self.records = records
        self.report = report


class AgentStateError(RuntimeError):
    """An agent was used before being bound to an environment."""


class DataError(ValueError):
    """A trajectory lacks the fields needed for evaluation."""
