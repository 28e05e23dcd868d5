"""Particle swarm optimization with classic, fuzzy-adaptive and Bayesian variants."""

from .core import (
    Bounds,
    ConfigurationError,
    NonFiniteObjectiveError,
    SwarmConfig,
    SwarmState,
    Variant,
    run,
)
from .metrics import NOT_FOUND, RunReport, Summary, accuracy, aggregate, efficiency
from .rng import RandomStream

__all__ = [
    "Bounds",
    "ConfigurationError",
    "NonFiniteObjectiveError",
    "NOT_FOUND",
    "RandomStream",
    "RunReport",
    "Summary",
    "SwarmConfig",
    "SwarmState",
    "Variant",
    "accuracy",
    "aggregate",
    "efficiency",
    "run",
]
