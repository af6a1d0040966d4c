"""Layered solution-space exploration with a production reconfiguration use case."""

from .core import (ExplorationNode, ExplorationStats, Expansion, FilterLevel, FilterRule, LayerSpec,
                   apply_filters, estimate_bruteforce, explore, explore_bruteforce)
from .metaheuristics import GaConfig, ObjectiveWeights, SaConfig, ga_optimize, sa_optimize, scalarize
from .scenario_io import load_scenario, write_report

__all__ = [
    "ExplorationNode", "ExplorationStats", "Expansion", "FilterLevel", "FilterRule", "LayerSpec",
    "apply_filters", "estimate_bruteforce", "explore", "explore_bruteforce",
    "GaConfig", "ObjectiveWeights", "SaConfig", "ga_optimize", "sa_optimize", "scalarize",
    "load_scenario", "write_report",
]
