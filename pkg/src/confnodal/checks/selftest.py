"""Calculus identity table over probe functions and orders."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable

import numpy as np

from confnodal.calculus import CalculusReport, check_calculus_identities

logger = logging.getLogger(__name__)

SELFTEST_ALPHAS = (0.25, 0.5, 0.75, 1.0)


def probe_functions(alpha: float) -> dict[str, Callable]:
    return {
        "sin x": np.sin,
        "x^2+1": lambda x: x * x + 1.0,
        "cos(pi^(1-a) x^a)": lambda x: np.cos(math.pi ** (1.0 - alpha) * x**alpha),
    }


def run_selftest(alphas=SELFTEST_ALPHAS, size: int = 4001) -> list[tuple[str, CalculusReport]]:
    rows = []
    for alpha in alphas:
        for name, fn in probe_functions(alpha).items():
            report = check_calculus_identities(fn, alpha, size=size)
            logger.debug("Identities for %s at alpha=%g: worst %.2e", name, alpha, report.worst)
            rows.append((name, report))
    return rows
