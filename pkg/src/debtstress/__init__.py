"""Debt-sustainability stress testing: baseline debt paths, natural-disaster
shock scenarios, and Monte Carlo fan charts."""
__version__ = "0.1.0"

from .core import (DebtPath, Decomposition, DegenerateEconomyError, MacroAssumptions,
                   NegativeDebtWarning, ProjectionError, amplification, approx_step, contributions,
                   debt_step, decompose, first_crossing_below, project_path, stabilization_year)
from .disaster import (Channel, DisasterKind, DisasterRecord, EmpiricalDistribution, Mode,
                       ScenarioSpec, ShockVector, apply_scenario, build_shock_vectors, percentile)
from .stochastic import (FanChart, ShockDistribution, band_summary, estimate_distribution,
                         simulate_fan)
