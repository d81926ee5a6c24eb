"""Real eigenvalues of the pencil as zeros of Delta(lam) = S(pi, lam)."""

from __future__ import annotations

import logging
import math
import warnings

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import brentq, minimize_scalar

from confnodal.asymptotics import CoefficientBundle, coefficients
from confnodal.config import get_settings
from confnodal.forward.shooting import Pencil, pencil_for, shoot_S
from confnodal.model import PotentialPair
from confnodal.shared.errors import IndexingError, LambdaCapError, NearDoubleZeroWarning, ResolutionError
from confnodal.shared.types import ShotSolution, SpectrumEntry, SpectrumRecord

logger = logging.getLogger(__name__)

# Scan step is kappa / SCAN_DIVISIONS
SCAN_DIVISIONS = 16
# |n| at or below this is indexed by the dense scan instead of the asymptotic bracket
DENSE_BELOW = 5
# Bracket samples used to verify there is exactly one sign change
BRACKET_SAMPLES = 17
NEAR_DOUBLE_ZERO = 1e-12
RESIDUAL_LIMIT = 1e-9
# Grid points per half-wavelength needed at the largest |lam|
MIN_POINTS_PER_HALF_WAVE = 4

_XTOL = 1e-14
_RTOL = 4 * np.finfo(float).eps


def eigenvalue_guess(pp: PotentialPair, n: int, bundle: CoefficientBundle | None = None) -> float:
    """n kappa + (a1 - A_n^n)/(2 n pi) + ((p(pi)+p(0)) a1 + 2 a2)/(4 n^2 pi kappa)."""
    if n == 0:
        raise ValueError("eigenvalue indices are nonzero")
    bundle = bundle or coefficients(pp, [n])
    kappa = pp.alpha.kappa
    return (
        n * kappa
        + (bundle.a1 - bundle.A_end(n)) / (2.0 * n * math.pi)
        + (bundle.p_ends * bundle.a1 + 2.0 * bundle.a2) / (4.0 * n * n * math.pi * kappa)
    )


def _signs(values: NDArray) -> NDArray[np.bool_]:
    return np.signbit(values)


def _refine(pencil: Pencil, a: float, b: float) -> float:
    return brentq(lambda lam: float(pencil.characteristic([lam])[0]), a, b, xtol=_XTOL, rtol=_RTOL)


def _check_resolution(pencil: Pencil, lam_max: float) -> None:
    if lam_max > 0 and math.pi / (lam_max * pencil.h) < MIN_POINTS_PER_HALF_WAVE:
        raise ResolutionError(
            f"|lambda| up to {lam_max:.6g} needs a finer grid than {pencil.size} points; "
            "rerun with --refine or a larger CONFNODAL_GRID"
        )


def scan_zeros(
    pencil: Pencil,
    upper: float,
    sign: int = 1,
) -> tuple[list[tuple[float, float]], list[dict]]:
    """Sign-change brackets of Delta on (0, upper] (or [-upper, 0) for sign=-1), ordered by |lam|.

    Also returns near-double-zero anomalies: local minima of |Delta| below
    NEAR_DOUBLE_ZERO without a sign change.
    """
    step = pencil.alpha.kappa / SCAN_DIVISIONS
    grid = sign * np.arange(0.0, upper + step, step)
    delta = pencil.characteristic(grid)
    flips = np.flatnonzero(_signs(delta[:-1]) != _signs(delta[1:]))
    brackets = [tuple(sorted((float(grid[i]), float(grid[i + 1])))) for i in flips]

    anomalies: list[dict] = []
    mag = np.abs(delta)
    for i in range(1, grid.size - 1):
        if mag[i] > mag[i - 1] or mag[i] > mag[i + 1]:
            continue
        if _signs(delta[i - 1]) != _signs(delta[i]) or _signs(delta[i]) != _signs(delta[i + 1]):
            continue
        lo, hi = sorted((float(grid[i - 1]), float(grid[i + 1])))
        res = minimize_scalar(lambda lam: abs(float(pencil.characteristic([lam])[0])),
                              bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
        if res.fun < NEAR_DOUBLE_ZERO:
            anomalies.append({"kind": "near_double_zero", "lambda": float(res.x), "delta": float(res.fun),
                              "candidates": [lo, hi]})
            warnings.warn(
                f"|Delta| dips to {res.fun:.2e} near lambda={res.x:.10g} without a sign change",
                NearDoubleZeroWarning,
                stacklevel=2,
            )
            logger.warning("Near-double zero of Delta at lambda=%.10g (|Delta|=%.2e)", res.x, res.fun)
    return brackets, anomalies


def count_zeros(pp: PotentialPair, upper: float, size: int | None = None, scheme: str | None = None) -> int:
    """Number of sign changes of Delta on (0, upper]."""
    brackets, _ = scan_zeros(pencil_for(pp, size, scheme), upper)
    return len(brackets)


def _bracket(pencil: Pencil, guess: float) -> tuple[float, float] | None:
    half = 0.5 * pencil.alpha.kappa
    lams = np.linspace(guess - half, guess + half, BRACKET_SAMPLES)
    delta = pencil.characteristic(lams)
    flips = np.flatnonzero(_signs(delta[:-1]) != _signs(delta[1:]))
    if flips.size != 1:
        return None
    i = int(flips[0])
    return float(lams[i]), float(lams[i + 1])


def locate_eigenvalues(
    pp: PotentialPair,
    n_min: int,
    n_max: int,
    size: int | None = None,
    scheme: str | None = None,
    lambda_cap: float | None = None,
    dense_below: int = DENSE_BELOW,
) -> SpectrumRecord:
    """Locate lam_n for every nonzero n in [n_min, n_max].

    Indices with |n| <= dense_below are indexed by counting sign changes of
    Delta from lam = 0; the others bracket the asymptotic guess by half the
    asymptotic gap and fall back to the dense scan if that bracket does not
    hold exactly one sign change.
    """
    if n_min > n_max:
        raise ValueError("n_min must not exceed n_max")
    indices = [n for n in range(n_min, n_max + 1) if n != 0]
    pencil = pencil_for(pp, size, scheme)
    kappa = pp.alpha.kappa
    cap = lambda_cap or get_settings().lambda_cap
    # leading-order reach first; the coefficients for large n are not cheap
    reach = (max(abs(n) for n in indices) + 0.5) * kappa if indices else 0.0
    if reach > cap:
        raise LambdaCapError(reach, cap)
    _check_resolution(pencil, reach)
    bundle = coefficients(pp, indices)
    guesses = {n: eigenvalue_guess(pp, n, bundle) for n in indices}

    scans: dict[int, tuple[list[tuple[float, float]], float]] = {}
    anomalies: list[dict] = []

    def scanned(sign: int, upper: float) -> list[tuple[float, float]]:
        cached = scans.get(sign)
        if cached is None or cached[1] < upper:
            brackets, found = scan_zeros(pencil, upper, sign)
            anomalies.extend(found)
            scans[sign] = (brackets, upper)
            logger.debug("Dense scan to |lambda|=%.6g: %d zeros", upper, len(brackets))
            return brackets
        return cached[0]

    entries: list[SpectrumEntry] = []
    for n in indices:
        guess = guesses[n]
        sign = 1 if n > 0 else -1
        bracket = None if abs(n) <= dense_below else _bracket(pencil, guess)
        if bracket is None:
            upper = abs(guess) + kappa
            brackets = scanned(sign, upper)
            if len(brackets) < abs(n):
                raise IndexingError(n, len(brackets), f"scan up to |lambda|={upper:.6g}")
            bracket = brackets[abs(n) - 1]
            if abs(n) > dense_below:
                logger.info("Bracket around the guess failed for n=%d; indexed by dense scan", n)
        lam = _refine(pencil, *bracket)
        residual = abs(float(pencil.characteristic([lam])[0]))
        if residual > RESIDUAL_LIMIT:
            anomalies.append({"kind": "residual", "n": n, "lambda": lam, "residual": residual})
            logger.warning("Eigenvalue n=%d has residual %.2e", n, residual)
        entries.append(SpectrumEntry(n=n, lambda_n=lam, residual=residual, guess=guess))

    record = SpectrumRecord(alpha=float(pp.alpha), entries=entries, anomalies=anomalies)
    _check_order(record)
    logger.info("Located %d eigenvalues (n=%d..%d, alpha=%g)", len(entries), n_min, n_max, pp.alpha.alpha)
    return record


def _check_order(record: SpectrumRecord) -> None:
    # entries are sorted by n; within one sign lam_n must increase with n
    for a, b in zip(record.entries, record.entries[1:]):
        if (a.n > 0) == (b.n > 0) and b.lambda_n <= a.lambda_n:
            raise IndexingError(b.n, len(record.entries), "located eigenvalues are not increasing in n")


def eigenfunction(
    pp: PotentialPair,
    record: SpectrumRecord,
    n: int,
    size: int | None = None,
    scheme: str | None = None,
) -> ShotSolution:
    """Forward shot S(x, lam_n)."""
    return shoot_S(pp, record.get(n).lambda_n, size, scheme)
