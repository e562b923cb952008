"""Conformal potential metrics, rescaling limits and tangent cones."""

from ._core import (
    Metric,
    SolverConfig,
    axis_segment_length,
    check_conv1,
    classify_limit,
    distance,
    potential,
    table1,
)

__all__ = [
    "Metric",
    "SolverConfig",
    "axis_segment_length",
    "check_conv1",
    "classify_limit",
    "distance",
    "potential",
    "table1",
]
