"""Monotone Boolean functions, Shapley values under minors, and Boolean ordered PCSPs."""

from .boolfn import BoolFn, is_monotone, make_threshold, majority
from .shapley import shapley_exact, shapley_montecarlo
from .minors import VarMap, apply_minor

__all__ = [
    "BoolFn",
    "VarMap",
    "apply_minor",
    "is_monotone",
    "majority",
    "make_threshold",
    "shapley_exact",
    "shapley_montecarlo",
]
