"""Energy-aware trajectory planning for a bistatic radar-carrying UAV."""

from .geometry import FeasibilityReport, verify_trajectory
from .planner import (PlannerError, SolveReport, Trajectory, initialize,
                      plan_baseline, plan_sca_bcd)
from .power import hover_power, min_power_speed, propulsion_power
from .scenario import (Scenario, ScenarioError, load_scenario, loads,
                       save_scenario)
from .stochastic import asymptotic_dmin, expected_dmin

__version__ = "0.1.0"

__all__ = [
    "FeasibilityReport",
    "PlannerError",
    "Scenario",
    "ScenarioError",
    "SolveReport",
    "Trajectory",
    "asymptotic_dmin",
    "expected_dmin",
    "hover_power",
    "initialize",
    "load_scenario",
    "loads",
    "min_power_speed",
    "plan_baseline",
    "plan_sca_bcd",
    "propulsion_power",
    "save_scenario",
    "verify_trajectory",
    "__version__",
]
