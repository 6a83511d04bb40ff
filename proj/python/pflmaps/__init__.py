"""Piecewise fractional-linear (Moebius) interval maps.

Exact classification of the three-branch map families via their dual maps,
invariant-density verification through transfer-operator residuals, jump
extensions, and orbit simulation. All exact values cross this boundary as
strings ("3/5", "(-3 + sqrt(5))/2", "inf").
"""

from ._core import (
    Branch,
    PflError,
    build_map,
    classify,
    density_table,
    dual,
    extend,
    fibonacci_iterate_check,
    invariance,
    lemma1,
    orbit_histogram,
    scalar_float,
    scalar_str,
    sign,
    sqrt_adjoin,
    validate_map,
)

__all__ = [
    "Branch",
    "PflError",
    "build_map",
    "classify",
    "density_table",
    "dual",
    "extend",
    "fibonacci_iterate_check",
    "invariance",
    "lemma1",
    "orbit_histogram",
    "scalar_float",
    "scalar_str",
    "sign",
    "sqrt_adjoin",
    "validate_map",
]

__version__ = "0.1.0"
