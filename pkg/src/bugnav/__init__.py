"""Deterministic 2D simulator for the Bug family of reactive navigators."""

from .nav import Algorithm, Behavior
from .sim import Outcome, SimParams, compare, metrics, run
from .world import Environment, builtin_scenarios, get_builtin, load_scenario

__version__ = "0.1.0"

__all__ = [
    "Algorithm",
    "Behavior",
    "Environment",
    "Outcome",
    "SimParams",
    "builtin_scenarios",
    "compare",
    "get_builtin",
    "load_scenario",
    "metrics",
    "run",
]
