"""Scenario files, Monte-Carlo experiments and result emission."""
from .experiments import (
    ScenarioResult,
    complexity_report,
    run_ber_experiment,
    run_heatmap,
    run_sinr_comparison,
    scenario_allocation,
    scenario_cfos,
    sinr_gap,
)
from .scenario import Scenario, Technique, bundled_scenario, load_complexity_params, load_scenario

__all__ = [
    "Scenario", "ScenarioResult", "Technique", "bundled_scenario", "complexity_report",
    "load_complexity_params", "load_scenario", "run_ber_experiment", "run_heatmap",
    "run_sinr_comparison", "scenario_allocation", "scenario_cfos", "sinr_gap",
]
