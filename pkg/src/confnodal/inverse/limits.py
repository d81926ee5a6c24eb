"""Finite-n approximants of the limit functions Q, f and g, and their extrapolation.

For index n the node differences D_n(x_n^j) = n kappa t_n^j - j pi converge to
Q(x_n^j) as n grows; f and g follow from the next orders of the same
differences. Approximants are sampled at every node of index n together with
the implicit boundary nodes 0 and pi, then interpolated to the canonical grid.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from confnodal.asymptotics import coefficients
from confnodal.calculus import GridFunction, cumulative_integral, local_cubic, t_grid, x_to_t
from confnodal.model import PotentialPair
from confnodal.shared.errors import EdgeBiasWarning, NodalDataError
from confnodal.shared.types import NodalInput

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NodeSelection:
    """x_n^{j_n} for each requested x, with j_n and the boundary-clamping mask."""

    n: int
    nodes: NDArray[np.float64]
    j: NDArray[np.int64]
    clamped: NDArray[np.bool_]

    @property
    def edge_bias_count(self) -> int:
        return int(np.count_nonzero(self.clamped))


def select_node_sequence(input: NodalInput, x: ArrayLike, n: int | None = None) -> NodeSelection:
    """j_n = round(n x^alpha / pi^alpha) clamped to [1, n-1]; returns the j_n-th node of index n."""
    n = n or input.n_use
    nodes = _checked_nodes(input, n)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    ratio = x_to_t(xs, input.alpha) / input.alpha.T
    raw = np.rint(abs(n) * ratio).astype(np.int64)
    j = np.clip(raw, 1, abs(n) - 1)
    clamped = j != raw
    if clamped.any():
        warnings.warn(
            f"{int(clamped.sum())} points clamped to the first or last node of index {n}",
            EdgeBiasWarning,
            stacklevel=2,
        )
        logger.debug("Edge bias: %d of %d points clamped at n=%d", int(clamped.sum()), xs.size, n)
    return NodeSelection(n=n, nodes=nodes[j - 1], j=j, clamped=clamped)


def _checked_nodes(input: NodalInput, n: int) -> NDArray[np.float64]:
    nodes = input.nodal_set.nodes(n)
    if nodes.size != abs(n) - 1:
        raise NodalDataError(f"index n={n} carries {nodes.size} nodes, expected {abs(n) - 1}")
    if np.any(np.diff(nodes) <= 0):
        raise NodalDataError(f"nodes of index n={n} are not strictly increasing")
    return nodes


def node_differences(input: NodalInput, n: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """(t_n^j, n kappa t_n^j - j pi) for j = 1..n-1."""
    t = x_to_t(_checked_nodes(input, n), input.alpha)
    j = np.arange(1, abs(n), dtype=float)
    return t, n * input.alpha.kappa * t - j * math.pi


def index_ladder(n_use: int, top: int, richardson: bool = True, levels: int = 3) -> list[int]:
    """Indices the limits are sampled at: two rungs, or `levels` evenly spaced ones."""
    if not richardson or levels <= 2:
        return [n_use, top]
    return sorted({int(round(v)) for v in np.linspace(n_use, top, levels)})


def extrapolate_to_limit(samples: ArrayLike, indices: list[int]) -> NDArray[np.float64]:
    """Polynomial extrapolation in h = 1/n to h = 0, row k of samples taken at indices[k].

    With two rows at n and 2n this is 2 F(2n) - F(n).
    """
    rows = np.asarray(samples, dtype=float)
    if len(indices) == 1:
        return rows[0].copy()
    h = 1.0 / np.asarray(indices, dtype=float)
    out = np.zeros(rows.shape[1:])
    for k in range(h.size):
        w = 1.0
        for m in range(h.size):
            if m != k:
                w *= h[m] / (h[m] - h[k])
        out = out + w * rows[k]
    return out


def _to_grid(t_nodes: NDArray, values: NDArray, grid: NDArray, T: float, zero_at_end: bool = True) -> NDArray[np.float64]:
    # every approximant vanishes at x = 0; Q and f also vanish at x = pi
    if zero_at_end:
        return local_cubic(np.concatenate([[0.0], t_nodes, [T]]), np.concatenate([[0.0], values, [0.0]]), grid)
    return local_cubic(np.concatenate([[0.0], t_nodes]), np.concatenate([[0.0], values]), grid)


def recover_Q(input: NodalInput, ladder: list[int], size: int | None = None) -> GridFunction:
    """Q from node differences on every rung, extrapolated in 1/n."""
    alpha = input.alpha
    grid = t_grid(alpha, size)
    rows = []
    for n in ladder:
        t, d = node_differences(input, n)
        rows.append(_to_grid(t, d, grid, alpha.T))
    Q = extrapolate_to_limit(rows, ladder)
    logger.debug("Q recovered from n=%s (|Q(pi)|=%.2e)", ladder, abs(Q[-1]))
    return GridFunction(Q, alpha)


def f_at_nodes(input: NodalInput, n: int, Q_rec: GridFunction) -> tuple[NDArray, NDArray]:
    """2 kappa n [D_n - Q](x_n^j) at the nodes of index n."""
    t, d = node_differences(input, n)
    return t, 2.0 * input.alpha.kappa * n * (d - Q_rec.at_t(t))


def recover_f(input: NodalInput, Q_rec: GridFunction, ladder: list[int], size: int | None = None) -> GridFunction:
    alpha = input.alpha
    grid = t_grid(alpha, size)
    rows = []
    for n in ladder:
        t, f = f_at_nodes(input, n, Q_rec)
        rows.append(_to_grid(t, f, grid, alpha.T))
    return GridFunction(extrapolate_to_limit(rows, ladder), alpha)


def recover_g(
    input: NodalInput,
    Q_rec: GridFunction,
    f_rec: GridFunction,
    pair: PotentialPair,
    n: int | None = None,
    size: int | None = None,
) -> GridFunction:
    """kappa n {2 kappa n [D_n - Q] - f + A_n - A_n^n t/T} at the nodes of index n.

    pair supplies the oscillatory A_n terms; the reconstruction builds it from
    the recovered p and the current estimate of q.
    """
    n = n or input.n_use
    alpha = input.alpha
    kappa, T = alpha.kappa, alpha.T
    bundle = coefficients(pair, [n])
    t, f_n = f_at_nodes(input, n, Q_rec)
    inner = f_n - f_rec.at_t(t) + bundle.A_t(n, t) - bundle.A_end(n) * t / T
    g = _to_grid(t, kappa * n * inner, t_grid(alpha, size), T, zero_at_end=False)
    return GridFunction(g, alpha)


def exact_limit_functions(
    pp: PotentialPair,
    endpoint_term: bool = False,
    size: int | None = None,
) -> tuple[GridFunction, GridFunction, GridFunction]:
    """Closed forms of Q, f and g for a known pair, by quadrature on the canonical grid.

    endpoint_term adds -(p(pi)+p(0)) (t/T) int (q+p^2) to g, the form Step 4
    expects with its own endpoint_term on.
    """
    alpha = pp.alpha
    t = t_grid(alpha, size)
    ratio = t / alpha.T
    w = pp.weight_at(t)
    F = cumulative_integral(w, t)
    G = cumulative_integral(w * pp.p.value_at(t), t)
    a1, a2 = F[-1], G[-1]
    e = pp.p_ends if endpoint_term else 0.0
    Q = GridFunction(pp.p.integral_at(t), alpha)
    f = GridFunction(F - a1 * ratio, alpha)
    g = GridFunction(G - a2 * ratio - e * a1 * ratio, alpha)
    return Q, f, g
