"""Nodal points of eigenfunctions: numeric extraction, asymptotic formula, datasets."""

from __future__ import annotations

import logging
import math

import numpy as np
from numpy.typing import NDArray

from confnodal.asymptotics import CoefficientBundle, coefficients
from confnodal.calculus import t_to_x
from confnodal.forward.shooting import pencil_for
from confnodal.forward.spectral import locate_eigenvalues
from confnodal.model import PotentialPair
from confnodal.shared.errors import AsymptoticFailure, NodalCountError
from confnodal.shared.types import NodalSet, Provenance, SpectrumRecord

logger = logging.getLogger(__name__)

BISECTION_STEPS = 50


def compute_nodes(
    pp: PotentialPair,
    n: int,
    spectrum: SpectrumRecord | None = None,
    size: int | None = None,
    scheme: str | None = None,
) -> NDArray[np.float64]:
    """Interior zeros of S(x, lam_n), refined by bisection on partial steps and mapped to x."""
    if spectrum is None or n not in spectrum:
        spectrum = locate_eigenvalues(pp, n, n, size=size, scheme=scheme)
    lam = spectrum.get(n).lambda_n
    pencil = pencil_for(pp, size, scheme)
    y, v = pencil.forward_states(lam)

    # endpoints excluded: y(0) = 0 exactly and y(pi) is rounding noise
    inner = np.signbit(y[1:-1])
    cells = np.flatnonzero(inner[:-1] != inner[1:]) + 1
    expected = abs(n) - 1
    if cells.size != expected:
        raise NodalCountError(n, expected, int(cells.size))
    if not expected:
        return np.empty(0)

    start_sign = np.signbit(y[cells])
    lo = np.zeros(cells.size)
    hi = np.full(cells.size, pencil.h)
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        same = np.signbit(pencil.partial_y(lam, cells, mid, y, v)) == start_sign
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    t = pencil.t[cells] + 0.5 * (lo + hi)
    return t_to_x(t, pp.alpha)


def asymptotic_nodes(
    pp: PotentialPair,
    n: int,
    order: int = 2,
    passes: int = 2,
    bundle: CoefficientBundle | None = None,
) -> NDArray[np.float64]:
    """Nodes from the asymptotic nodal formula, resolved by fixed-point passes.

    In t the formula reads n kappa t = j pi + Q(t) + c2(t) + c3(t) with
    c2 = [F - a1 t/T - (A_n(t) - A_n^n t/T)] / (2 n kappa) and
    c3 = [G - (a2 + (p(pi)+p(0)) a1/2) t/T] / (2 n^2 kappa^2),
    F and G the running integrals of q + p^2 and (q + p^2) p.
    """
    if n == 0:
        raise ValueError("eigenvalue indices are nonzero")
    if order not in (1, 2, 3):
        raise ValueError(f"order must be 1, 2 or 3, got {order}")
    if abs(n) < 2:
        return np.empty(0)
    bundle = bundle or coefficients(pp, [n])
    alpha = pp.alpha
    kappa, T = alpha.kappa, alpha.T
    nk = n * kappa
    j = math.copysign(1.0, n) * np.arange(1, abs(n), dtype=float)
    A_end = bundle.A_end(n) if order >= 2 else 0.0

    t = j * math.pi / nk
    for _ in range(passes):
        rhs = j * math.pi + pp.p.integral_at(t)
        if order >= 2:
            ratio = t / T
            rhs = rhs + (bundle.F_t(t) - bundle.a1 * ratio - (bundle.A_t(n, t) - A_end * ratio)) / (2.0 * nk)
        if order >= 3:
            rhs = rhs + (bundle.G_t(t) - (bundle.a2 + 0.5 * bundle.p_ends * bundle.a1) * (t / T)) / (2.0 * nk * nk)
        t = rhs / nk

    if not np.all(np.isfinite(t)) or t[0] <= 0.0 or t[-1] >= T or np.any(np.diff(t) <= 0):
        raise AsymptoticFailure(f"asymptotic node iteration for n={n} left (0, pi) or lost monotonicity")
    return t_to_x(t, alpha)


def _max_gap(points: NDArray[np.float64]) -> float:
    full = np.concatenate([[0.0], np.sort(points), [math.pi]])
    return float(np.max(np.diff(full)))


def _interlaces(inner: NDArray[np.float64], outer: NDArray[np.float64]) -> bool:
    if inner.size < 2:
        return True
    # every open gap (inner[k], inner[k+1]) must contain a point of outer
    counts = np.searchsorted(outer, inner[1:], side="left") - np.searchsorted(outer, inner[:-1], side="right")
    return bool(np.all(counts >= 1))


def nodal_dataset(
    pp: PotentialPair,
    n_max: int,
    spectrum: SpectrumRecord | None = None,
    size: int | None = None,
    scheme: str | None = None,
) -> NodalSet:
    """Numeric nodes for n = 1..n_max with a density and an interlacing report."""
    if spectrum is None or any(n not in spectrum for n in range(1, n_max + 1)):
        spectrum = locate_eigenvalues(pp, 1, n_max, size=size, scheme=scheme)
    entries = {n: compute_nodes(pp, n, spectrum, size, scheme) for n in range(1, n_max + 1)}

    union = np.empty(0)
    density = []
    for n in range(1, n_max + 1):
        union = np.concatenate([union, entries[n]])
        density.append({"n_max": n, "max_gap": _max_gap(union)})
    interlacing = [
        {"n": n, "interlaces": _interlaces(entries[n], entries[n + 1])} for n in range(1, n_max)
    ]
    report = {
        "max_union_gap": density[-1]["max_gap"] if density else math.pi,
        "density": density,
        "interlacing": interlacing,
    }
    if not all(item["interlaces"] for item in interlacing):
        logger.info("Interlacing does not hold for every n up to %d", n_max)
    logger.info("Nodal dataset n<=%d: max union gap %.3g", n_max, report["max_union_gap"])
    return NodalSet(alpha=float(pp.alpha), entries=entries, provenance=Provenance.NUMERIC, report=report)


def asymptotic_dataset(pp: PotentialPair, indices, order: int = 2) -> NodalSet:
    """NodalSet of asymptotic nodes, usable as inverse input."""
    bundle = coefficients(pp, list(indices))
    entries = {n: asymptotic_nodes(pp, n, order=order, bundle=bundle) for n in indices}
    return NodalSet(alpha=float(pp.alpha), entries=entries, provenance=Provenance.ASYMPTOTIC)


def nodes_alpha_power(x: NDArray[np.float64], pp: PotentialPair) -> NDArray[np.float64]:
    """(x_n^j)^alpha, the quantity the nodal formula predicts."""
    return np.asarray(x, dtype=float) ** pp.alpha.alpha

