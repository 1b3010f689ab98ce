"""Degrees-of-freedom simulator for the two-user MISO broadcast channel with
mixed (delayed plus imperfect current) CSIT."""

from .analysis import (DoFEstimate, DoFRegionPoint, baseline_dof, fit_dof,
                       outer_bound_sum, region_feasible)
from .channel import ChannelState, SimParams, sample_state, stream
from .schemes import (SchemeResult, run_kobayashi_scheme, run_mat_scheme,
                      run_optimal_scheme, run_scheme, run_zf_scheme)

__version__ = "0.1.0"

__all__ = [
    "DoFEstimate", "DoFRegionPoint", "baseline_dof", "fit_dof", "outer_bound_sum",
    "region_feasible", "ChannelState", "SimParams", "sample_state", "stream",
    "SchemeResult", "run_kobayashi_scheme", "run_mat_scheme", "run_optimal_scheme",
    "run_scheme", "run_zf_scheme",
]
