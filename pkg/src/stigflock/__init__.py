"""Decentralized mini-UAV target search with digital pheromones and Boids flocking."""

from .environment import Confirmation, GridEnvironment, SensorModel, SensorReading
from .experiment import (
    ExperimentStats,
    TrialConfig,
    TrialResult,
    run_experiment,
    run_grid,
    run_trial,
    sweep,
)
from .field import FieldParams, PheromoneField
from .params import Algorithm, SimParams
from .scenario import Scenario, generate, parse, serialize

__all__ = [
    "Algorithm", "Confirmation", "ExperimentStats", "FieldParams", "GridEnvironment",
    "PheromoneField", "Scenario", "SensorModel", "SensorReading", "SimParams", "TrialConfig",
    "TrialResult", "generate", "parse", "run_experiment", "run_grid", "run_trial", "serialize", "sweep",
]
