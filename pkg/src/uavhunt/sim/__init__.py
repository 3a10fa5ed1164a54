"""Deterministic arena simulator: plant, sensors, moving target, scenarios and the closed loop."""

from .plant import IDEAL, PlantParams, step_plant
from .run import SWEEP_COLUMNS, TRACE_COLUMNS, Metrics, Trace, rng_streams, run, sweep, sweep_csv
from .scenario import Scenario, bundled_scenarios, load_scenario
from .sensors import Camera, SensorParams, TargetSensorParams, sense_balloons, sense_targets
from .target import FigureEight

__all__ = [
    "IDEAL",
    "SWEEP_COLUMNS",
    "TRACE_COLUMNS",
    "Camera",
    "FigureEight",
    "Metrics",
    "PlantParams",
    "Scenario",
    "SensorParams",
    "TargetSensorParams",
    "Trace",
    "bundled_scenarios",
    "load_scenario",
    "rng_streams",
    "run",
    "sense_balloons",
    "sense_targets",
    "step_plant",
    "sweep",
    "sweep_csv",
]
