"""Steps 2 to 5 of the reconstruction: p from Q, r from f, the mean of q, q itself."""

from __future__ import annotations

import logging
import warnings
from typing import Any

import numpy as np
from numpy.typing import NDArray
from scipy.ndimage import uniform_filter1d
from scipy.signal import savgol_filter

from confnodal.calculus import GridFunction, cumulative_integral, definite_integral, fd_derivative
from confnodal.shared.errors import ConfigError, DegenerateDenominatorError, Step4SpreadWarning
from confnodal.shared.types import Step4Report

logger = logging.getLogger(__name__)

SMOOTHERS = ("moving_average", "savgol", "none")
# Below this max |denominator| no grid point can determine the mean of q
DEGENERATE_DENOMINATOR = 1e-6
SAVGOL_ORDER = 3
# Relative IQR of the Step 4 estimates counted as disagreement
STEP4_SPREAD_LIMIT = 0.25
SPREAD_FLOOR = 1e-3


def smooth(values: NDArray[np.float64], method: str = "moving_average", window: int = 5) -> NDArray[np.float64]:
    """Presmoother applied before differentiating reconstructed data."""
    v = np.asarray(values, dtype=float)
    if method == "none":
        return v.copy()
    if method == "moving_average":
        out = uniform_filter1d(v, size=window, mode="nearest")
        half = window // 2
        # edge windows would mix in padded samples
        out[:half] = v[:half]
        out[-half:] = v[-half:]
        return out
    if method == "savgol":
        win = window if window % 2 else window + 1
        return savgol_filter(v, win, max(1, min(SAVGOL_ORDER, win - 2)), mode="interp")
    raise ConfigError(f"unknown smoothing {method!r}; choose from {SMOOTHERS}")


def step2_p(
    Q_rec: GridFunction,
    smoothing: str = "moving_average",
    window: int = 5,
) -> tuple[GridFunction, dict[str, Any]]:
    """p = D^alpha Q, which is d/dt of the smoothed samples."""
    smoothed = smooth(Q_rec.values, smoothing, window)
    p = fd_derivative(smoothed, Q_rec.h)
    report = {
        "smoothing": smoothing,
        "smoothing_change": float(np.max(np.abs(smoothed - Q_rec.values))),
        # d/dt amplifies sample errors of size eps to about eps / h
        "amplification": 1.0 / Q_rec.h,
    }
    return Q_rec.with_values(p), report


def step3_r(
    f_rec: GridFunction,
    p_rec: GridFunction,
    smoothing: str = "moving_average",
    window: int = 5,
) -> tuple[GridFunction, dict[str, Any]]:
    """r = D^alpha f - p^2 + (1/T) int p^2, then forced to zero d_alpha-mean."""
    smoothed = smooth(f_rec.values, smoothing, window)
    p2 = p_rec.values**2
    r = fd_derivative(smoothed, f_rec.h) - p2 + definite_integral(p2, f_rec.t) / f_rec.alpha.T
    residual_mean = definite_integral(r, f_rec.t) / f_rec.alpha.T
    report = {
        "smoothing_change": float(np.max(np.abs(smoothed - f_rec.values))),
        "residual_mean": residual_mean,
    }
    return f_rec.with_values(r - residual_mean), report


def step4_mean_q(
    g_rec: GridFunction,
    r_rec: GridFunction,
    p_rec: GridFunction,
    Q_rec: GridFunction,
    threshold: float = 0.1,
    endpoint_term: bool = False,
    spread_limit: float = STEP4_SPREAD_LIMIT,
) -> Step4Report:
    """Median over well-conditioned points of the mean-of-q identity.

    With g = int_0^t (q+p^2) p - (t/T) int (q+p^2) p, the limit the nodes
    deliver, the mean m of q satisfies at each t
    m Q = g - int_0^t (r+p^2) p + (t/T) int (r+p^2) p,
    because Q(T) = 0. With endpoint_term, g is taken to carry the extra
    -e (t/T) int (q+p^2), e = p(pi) + p(0), and the identity becomes
    m (Q - e t) = ... + e (t/T) int (r+p^2). Points with a denominator above
    threshold times its maximum are used.

    A relative IQR of the pointwise estimates above spread_limit sets
    `flagged` and emits Step4SpreadWarning.
    """
    t = g_rec.t
    T = g_rec.alpha.T
    p = p_rec.values
    e = float(p[-1] + p[0]) if endpoint_term else 0.0
    den = Q_rec.values - e * t
    den_max = float(np.max(np.abs(den)))
    if den_max < DEGENERATE_DENOMINATOR:
        raise DegenerateDenominatorError(
            f"Step 4 denominator vanishes on the whole grid (max {den_max:.2e}); "
            "the mean of q is not determined when p is constant"
        )
    w = r_rec.values + p * p
    ratio = t / T
    num = (
        g_rec.values
        - cumulative_integral(w * p, t)
        + ratio * definite_integral(w * p, t)
        + e * ratio * definite_integral(w, t)
    )
    mask = np.abs(den) > threshold * den_max
    estimates = num[mask] / den[mask]
    q25, q75 = np.percentile(estimates, [25, 75])
    median = float(np.median(estimates))
    spread = float(q75 - q25) / max(abs(median), SPREAD_FLOOR)
    report = Step4Report(
        mean_q=median,
        points=int(mask.sum()),
        dispersion=float(np.std(estimates)),
        iqr=float(q75 - q25),
        denominator_max=den_max,
        endpoint_sum=e,
        relative_spread=spread,
        flagged=spread > spread_limit,
    )
    logger.info("Step 4: mean of q %.6g from %d points (IQR %.2e)", report.mean_q, report.points, report.iqr)
    if report.flagged:
        warnings.warn(
            f"Step 4 estimates spread by {spread:.2f} of their median; "
            "g and the endpoint convention may not match",
            Step4SpreadWarning,
            stacklevel=2,
        )
        logger.warning("Step 4 spread %.3f exceeds %.3f (endpoint term %s)", spread, spread_limit, endpoint_term)
    return report


def step5_q(r_rec: GridFunction, mean_q: float) -> GridFunction:
    return r_rec + mean_q
