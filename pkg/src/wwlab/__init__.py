"""Numerical laboratory for double-recurrence Wiener-Wintner averages on torus systems."""

__version__ = "0.1.0"

from .engine import AverageResult, AverageSpec, SupScanResult, sup_scan, sup_trace, trace, ww_average, ww_sequence
from .identities import ReductionSetup, verify_reduction
from .observable import Observable
from .polyphase import PolyReal, phase_stream, phases
from .seminorm import estimate_pair_bound, ghk_estimate, gowers_norm_finite
from .torus import Point, Product, Rotation, Skew, iterate_closed_form, orbit, orbit_array, step
from .vdc import vdc_check

__all__ = [
    "AverageResult", "AverageSpec", "SupScanResult", "sup_scan", "sup_trace", "trace", "ww_average",
    "ww_sequence", "ReductionSetup", "verify_reduction", "Observable", "PolyReal", "phase_stream",
    "phases", "estimate_pair_bound", "ghk_estimate", "gowers_norm_finite", "Point", "Product",
    "Rotation", "Skew", "iterate_closed_form", "orbit", "orbit_array", "step", "vdc_check",
]
