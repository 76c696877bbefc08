"""Relative-difference metrics against the exact Shapley allocation."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import ZeroTruth


def relative_difference(estimate: float, truth: float) -> float:
    """Absolute deviation from ``truth`` in percent of ``|truth|``."""
    if truth == 0:
        raise ZeroTruth("relative difference undefined for a zero reference")
    return abs(estimate - truth) / abs(truth) * 100.0


def average_relative_difference(per_class_rd: Sequence[float], class_sizes: Sequence[int]) -> float:
    """Agent-weighted mean of per-class relative differences."""
    rd = np.asarray(per_class_rd, dtype=float)
    sizes = np.asarray(class_sizes, dtype=float)
    return float(np.dot(sizes, rd) / np.sum(sizes))
