"""Acceptance logic: when a reconstruction or an asymptotic sweep counts as a pass."""

from __future__ import annotations

import logging
import math
from typing import Any

import numpy as np

from confnodal.calculus import GridFunction, definite_integral, t_grid
from confnodal.model import PotentialPair
from confnodal.shared.types import ReconstructionResult, SpectrumRecord
from confnodal.shared.utils import interior_mask, loglog_slope

logger = logging.getLogger(__name__)

# Thresholds
P_ERROR_THRESHOLD = 0.10  # relative L2 error of p on the interior
Q_ERROR_THRESHOLD = 0.15  # relative L2 error of q on the interior
MEAN_Q_THRESHOLD = 0.15  # relative error of the recovered mean of q
IDENTITY_TOLERANCE = 1e-7  # calculus identity residuals
SLOPE_TOLERANCE = 0.2  # log-log slope of a scaled residual counted as "no growth"
MONOTONE_SLACK = 0.02  # relative noise allowed in a "non-increasing" error column
GROWTH_FLOOR = 1e-4  # scaled residuals below this are solver noise
GUESS_GROWTH_MIN_N = 10


def relative_l2_error(estimate: GridFunction, truth, fraction: float = 0.9) -> float:
    """||estimate - truth|| / ||truth|| in L2(d_alpha) over the central part of [0, pi].

    truth may be a GridFunction or any potential with value_at. When the truth
    vanishes there the absolute norm is returned.
    """
    t = estimate.t
    mask = interior_mask(estimate.x, fraction)
    ref = truth.values if isinstance(truth, GridFunction) else truth.value_at(t)
    diff = np.asarray(estimate.values) - np.asarray(ref)
    tt = t[mask]
    num = math.sqrt(definite_integral(diff[mask] ** 2, tt))
    den = math.sqrt(definite_integral(np.asarray(ref)[mask] ** 2, tt))
    return num / den if den > 0 else num


def true_mean_q(pp: PotentialPair, size: int | None = None) -> float:
    t = t_grid(pp.alpha, size)
    return float(definite_integral(pp.q.value_at(t), t) / pp.alpha.T)


def reconstruction_errors(result: ReconstructionResult, pp: PotentialPair, fraction: float = 0.9) -> dict[str, Any]:
    errors: dict[str, Any] = {}
    if result.p is not None:
        errors["p"] = relative_l2_error(result.p, pp.p, fraction)
    if result.q is not None:
        errors["q"] = relative_l2_error(result.q, pp.q, fraction)
    if result.mean_q is not None:
        truth = true_mean_q(pp, result.q.size if result.q is not None else None)
        errors["mean_q_true"] = truth
        errors["mean_q"] = abs(result.mean_q - truth) / abs(truth) if truth else abs(result.mean_q)
    return errors


def is_monotone(values: list[float], slack: float = MONOTONE_SLACK) -> bool:
    """Non-increasing up to a relative slack."""
    return all(b <= a * (1.0 + slack) for a, b in zip(values, values[1:]))


def evaluate_roundtrip(
    sweep: list[dict[str, Any]],
    p_threshold: float = P_ERROR_THRESHOLD,
    q_threshold: float = Q_ERROR_THRESHOLD,
    mean_threshold: float = MEAN_Q_THRESHOLD,
) -> tuple[bool, dict[str, Any]]:
    """Judge a round-trip sweep (one dict per n_use, ascending).

    The last entry must meet the thresholds and the p, q error columns must be
    non-increasing. Returns (passed, info) with the worst metric named in info.
    """
    if not sweep:
        return False, {"reason": "empty_sweep"}
    final = sweep[-1]
    p_errs = [s["errors"].get("p", math.inf) for s in sweep]
    q_errs = [s["errors"].get("q", math.inf) for s in sweep]
    checks = {
        "p": (final["errors"].get("p", math.inf), p_threshold),
        "q": (final["errors"].get("q", math.inf), q_threshold),
        "mean_q": (final["errors"].get("mean_q", math.inf), mean_threshold),
    }
    info: dict[str, Any] = {
        "monotone_p": is_monotone(p_errs),
        "monotone_q": is_monotone(q_errs),
        "final_n_use": final["n_use"],
    }
    # worst = largest value/threshold ratio
    worst_name, (worst_value, worst_threshold) = max(checks.items(), key=lambda kv: kv[1][0] / kv[1][1])
    info["worst_metric"] = worst_name
    info["worst_value"] = worst_value
    info["worst_threshold"] = worst_threshold

    passed = all(v <= thr for v, thr in checks.values()) and info["monotone_p"] and info["monotone_q"]
    if passed:
        logger.info("Round trip passed (p=%.3g, q=%.3g at n_use=%d)",
                    checks["p"][0], checks["q"][0], final["n_use"])
        info["reason"] = "thresholds_met"
    else:
        logger.info("Round trip failed: worst %s=%.3g (threshold %.3g)", worst_name, worst_value, worst_threshold)
        info["reason"] = "thresholds_missed" if worst_value > worst_threshold else "non_monotone"
    return passed, info


def growth_check(
    n: list[int],
    residuals: list[float],
    tolerance: float = SLOPE_TOLERANCE,
    floor: float = GROWTH_FLOOR,
) -> tuple[bool, dict[str, Any]]:
    """Scaled residuals show no growth when their log-log slope is at most `tolerance`.

    The fit runs on the running maximum in order of n, with residuals below
    `floor` raised to it, so a dip where a residual changes sign does not
    read as growth.
    """
    order = np.argsort(np.asarray(n, dtype=float))
    ns = np.asarray(n, dtype=float)[order]
    values = np.asarray(residuals, dtype=float)[order]
    slope = loglog_slope(ns, np.maximum.accumulate(np.maximum(values, floor)))
    return slope <= tolerance, {"slope": slope, "max": float(values.max()) if values.size else 0.0}


def guess_growth(record: SpectrumRecord, n_min: int = GUESS_GROWTH_MIN_N) -> dict[str, Any] | None:
    """growth_check on n^2 |lambda_n - guess| over the indices with |n| >= n_min.

    None when fewer than three such indices were computed.
    """
    entries = [e for e in record.entries if abs(e.n) >= n_min]
    if len(entries) < 3:
        return None
    n = [abs(e.n) for e in entries]
    scaled = [k * k * abs(e.lambda_n - e.guess) for k, e in zip(n, entries)]
    ok, info = growth_check(n, scaled)
    return info | {"ok": ok, "n_min": min(n), "n_max": max(n)}
