"""Shared utility functions."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import asdict, is_dataclass
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

logger = logging.getLogger(__name__)


def format_float(value: float) -> str:
    """Round-trip exact text for a float (17 significant digits)."""
    return format(float(value), ".17g")


def json_ready(obj: Any) -> Any:
    """Convert numpy scalars/arrays, enums, paths and dataclasses into plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_ready(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [json_ready(v) for v in obj.tolist()]
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, Path):
        return str(obj)
    if is_dataclass(obj) and not isinstance(obj, type):
        return json_ready(asdict(obj))
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        # JSON has no NaN/inf
        return v if math.isfinite(v) else None
    return obj


def interior_mask(x: ArrayLike, fraction: float = 0.9) -> NDArray[np.bool_]:
    """Points of [0, pi] inside the central `fraction` of the interval."""
    xs = np.asarray(x, dtype=float)
    margin = 0.5 * (1.0 - fraction) * math.pi
    return (xs >= margin) & (xs <= math.pi - margin)


def loglog_slope(n: ArrayLike, values: ArrayLike) -> float:
    """Least-squares slope of log(values) against log(n)."""
    ns = np.asarray(n, dtype=float)
    vs = np.asarray(values, dtype=float)
    keep = vs > 0
    if keep.sum() < 2:
        return 0.0
    slope, _ = np.polyfit(np.log(ns[keep]), np.log(vs[keep]), 1)
    return float(slope)
