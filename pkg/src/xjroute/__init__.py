"""Ion routing on an X-junction grid, connectivity-aware quantum volume, and
two-qubit gate synthesis into Rx, Ry and Molmer-Sorensen gates."""

from .device import DeviceLayout, GateZone, build_layout
from .errormodel import ErrorModelParams, qv_native
from .routing import RoutingRun, lower_bound, run_lane_priority, run_swap_based
from .stats import EnsembleParams, EnsembleResult, run_ensemble
from .workload import DepthOneCircuit, assign_pairs, random_matching
from .decomp import NativeCircuit, decompose_su4

__version__ = "0.1.0"

__all__ = [
    "DepthOneCircuit", "DeviceLayout", "EnsembleParams", "EnsembleResult", "ErrorModelParams",
    "GateZone", "NativeCircuit", "RoutingRun", "assign_pairs", "build_layout", "decompose_su4",
    "lower_bound", "qv_native", "random_matching", "run_ensemble", "run_lane_priority",
    "run_swap_based",
]
