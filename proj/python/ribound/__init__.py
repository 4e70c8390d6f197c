"""Randomization inference for bounded null hypotheses on unit-level effects."""

from ._ribound import (
    RiboundError,
    __version__,
    confidence_bound,
    p_value,
    run_cli,
    statistic_value,
    test_bounded,
    test_simultaneous,
)

__all__ = [
    "RiboundError",
    "__version__",
    "confidence_bound",
    "p_value",
    "run_cli",
    "statistic_value",
    "test_bounded",
    "test_simultaneous",
]
