"""Differentiation/synthesis model of cultural evolution: simulation, regime analysis, sweeps and fitting."""

from .analysis import (
    ClassifierThresholds, ExtremaList, Regime, RegimeReport, classify_all, classify_regime,
    find_extrema, relative_amplitude,
)
from .errors import (
    ConvergenceError, CultureDynError, DivergenceError, FigureReproductionError, NumericalError,
    ScenarioParseError, ValidationError,
)
from .export import export_trajectory_csv, read_trajectory_csv, render_svg_plot
from .figures import reproduce_figure
from .integrator import TrajectorySet, integrate, refine_until_converged
from .model import (
    CouplingMatrices, CultureParams, CultureState, DerivativeVector, Scenario, eval_derivatives,
    eval_growth_factor, hierarchy_level,
)
from .scenario_file import dump_scenario, load_scenario
from .sweep import AxisSpec, FitResult, RegimeMap, fit_parameters, run_sweep, trace_regime_boundary

__version__ = "0.1.0"

__all__ = [
    "AxisSpec",
    "ClassifierThresholds",
    "classify_all",
    "classify_regime",
    "ConvergenceError",
    "CouplingMatrices",
    "CultureDynError",
    "CultureParams",
    "CultureState",
    "DerivativeVector",
    "DivergenceError",
    "dump_scenario",
    "eval_derivatives",
    "eval_growth_factor",
    "export_trajectory_csv",
    "ExtremaList",
    "FigureReproductionError",
    "find_extrema",
    "fit_parameters",
    "FitResult",
    "hierarchy_level",
    "integrate",
    "load_scenario",
    "NumericalError",
    "read_trajectory_csv",
    "refine_until_converged",
    "Regime",
    "RegimeMap",
    "RegimeReport",
    "relative_amplitude",
    "render_svg_plot",
    "reproduce_figure",
    "run_sweep",
    "Scenario",
    "ScenarioParseError",
    "trace_regime_boundary",
    "TrajectorySet",
    "ValidationError",
]
