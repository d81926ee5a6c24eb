"""Conformable fractional calculus on [0, pi].

All numerics run in the transformed coordinate t = x^alpha / alpha. Under
this substitution D^alpha becomes d/dt and the d_alpha measure becomes dt,
so every grid here is uniform in t on [0, T] with T = pi^alpha / alpha.
"""

from __future__ import annotations

import logging
import math
import warnings
from collections.abc import Callable
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import quad, simpson
from scipy.interpolate import CubicSpline

from confnodal.config import get_settings
from confnodal.shared.errors import DomainError, LimitFormWarning

logger = logging.getLogger(__name__)

# Relative slack when deciding whether a point lies inside [0, pi].
_DOMAIN_SLACK = 1e-12


@dataclass(frozen=True)
class AlphaOrder:
    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not math.isfinite(a) or not 0.0 < a <= 1.0:
            raise DomainError(f"alpha must satisfy 0 < alpha <= 1, got {self.alpha!r}")
        object.__setattr__(self, "alpha", a)

    @property
    def T(self) -> float:
        """Length of the t-interval, pi^alpha / alpha."""
        return math.pi**self.alpha / self.alpha

    @property
    def kappa(self) -> float:
        """Asymptotic eigenvalue spacing alpha * pi^(1 - alpha), equal to pi / T."""
        return self.alpha * math.pi ** (1.0 - self.alpha)

    def __float__(self) -> float:
        return self.alpha


def as_alpha(alpha: float | AlphaOrder) -> AlphaOrder:
    return alpha if isinstance(alpha, AlphaOrder) else AlphaOrder(alpha)


@dataclass(frozen=True)
class TransformedCoord:
    t: float
    alpha: AlphaOrder

    @property
    def x(self) -> float:
        return from_transformed(self.t, self.alpha)


def _check_x(x: NDArray[np.float64]) -> None:
    if np.any(~np.isfinite(x)) or np.any(x < -_DOMAIN_SLACK * math.pi) or np.any(
        x > math.pi * (1.0 + _DOMAIN_SLACK)
    ):
        bad = x[(~np.isfinite(x)) | (x < 0) | (x > math.pi * (1.0 + _DOMAIN_SLACK))]
        raise DomainError(f"x must lie in [0, pi], got {bad[:3].tolist()}")


def x_to_t(x: ArrayLike, alpha: float | AlphaOrder) -> NDArray[np.float64]:
    a = as_alpha(alpha)
    xs = np.asarray(x, dtype=float)
    _check_x(xs)
    return np.clip(xs, 0.0, math.pi) ** a.alpha / a.alpha


def t_to_x(t: ArrayLike, alpha: float | AlphaOrder) -> NDArray[np.float64]:
    a = as_alpha(alpha)
    ts = np.clip(np.asarray(t, dtype=float), 0.0, None)
    return np.minimum((a.alpha * ts) ** (1.0 / a.alpha), math.pi)


def to_transformed(x: float, alpha: float | AlphaOrder) -> TransformedCoord:
    a = as_alpha(alpha)
    return TransformedCoord(t=float(x_to_t(x, a)), alpha=a)


def from_transformed(t: float, alpha: float | AlphaOrder) -> float:
    a = as_alpha(alpha)
    if t < 0 or t > a.T * (1.0 + _DOMAIN_SLACK):
        raise DomainError(f"t must lie in [0, {a.T:.6g}], got {t!r}")
    return float((a.alpha * t) ** (1.0 / a.alpha))


def default_grid_size() -> int:
    return get_settings().grid


def t_grid(alpha: float | AlphaOrder, size: int | None = None) -> NDArray[np.float64]:
    a = as_alpha(alpha)
    n = size or default_grid_size()
    if n < 2:
        raise DomainError(f"grid needs at least 2 points, got {n}")
    return np.linspace(0.0, a.T, n)


# --- Grid primitives ---

def local_cubic(xp: ArrayLike, fp: ArrayLike, points: ArrayLike) -> NDArray[np.float64]:
    """Four-point Lagrange interpolation on a sorted (not necessarily uniform) abscissa."""
    xp = np.asarray(xp, dtype=float)
    fp = np.asarray(fp, dtype=float)
    pts = np.asarray(points, dtype=float)
    if xp.size < 4:
        return np.interp(pts, xp, fp)
    flat = np.atleast_1d(pts).ravel()
    idx = np.searchsorted(xp, flat, side="right") - 1
    base = np.clip(idx - 1, 0, xp.size - 4)
    cols = base[:, None] + np.arange(4)
    X = xp[cols]
    F = fp[cols]
    out = np.zeros(flat.shape)
    for k in range(4):
        w = np.ones(flat.shape)
        for m in range(4):
            if m != k:
                w *= (flat - X[:, m]) / (X[:, k] - X[:, m])
        out += w * F[:, k]
    return out.reshape(np.shape(pts))


def fd_derivative(values: ArrayLike, h: float) -> NDArray[np.float64]:
    """Fourth-order finite differences with one-sided stencils at both ends."""
    v = np.asarray(values, dtype=float)
    if v.size < 5:
        return np.gradient(v, h, edge_order=2 if v.size >= 3 else 1)
    d = np.empty_like(v)
    d[2:-2] = (v[:-4] - 8.0 * v[1:-3] + 8.0 * v[3:-1] - v[4:]) / (12.0 * h)
    d[0] = (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * h)
    d[1] = (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]) / (12.0 * h)
    d[-1] = (25.0 * v[-1] - 48.0 * v[-2] + 36.0 * v[-3] - 16.0 * v[-4] + 3.0 * v[-5]) / (12.0 * h)
    d[-2] = (3.0 * v[-1] + 10.0 * v[-2] - 18.0 * v[-3] + 6.0 * v[-4] - v[-5]) / (12.0 * h)
    return d


def cumulative_integral(values: ArrayLike, t: ArrayLike) -> NDArray[np.float64]:
    """Running integral from t[0], via the antiderivative of a not-a-knot cubic spline."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.size < 2:
        return np.zeros_like(v)
    out = CubicSpline(t, v).antiderivative()(t)
    out[0] = 0.0
    return out


def definite_integral(values: ArrayLike, t: ArrayLike) -> float:
    return float(simpson(np.asarray(values, dtype=float), x=np.asarray(t, dtype=float)))


# --- GridFunction ---

@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples on the uniform t-grid of [0, pi^alpha/alpha]."""

    values: NDArray[np.float64]
    alpha: AlphaOrder

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise DomainError("GridFunction needs a 1-d array of at least 2 samples")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "alpha", as_alpha(self.alpha))

    @classmethod
    def from_t(cls, fn: Callable[[NDArray], ArrayLike], alpha, size: int | None = None) -> GridFunction:
        a = as_alpha(alpha)
        t = t_grid(a, size)
        return cls(np.broadcast_to(np.asarray(fn(t), dtype=float), t.shape), a)

    @classmethod
    def from_x(cls, fn: Callable[[NDArray], ArrayLike], alpha, size: int | None = None) -> GridFunction:
        a = as_alpha(alpha)
        x = t_to_x(t_grid(a, size), a)
        return cls(np.broadcast_to(np.asarray(fn(x), dtype=float), x.shape), a)

    @property
    def size(self) -> int:
        return self.values.size

    @cached_property
    def t(self) -> NDArray[np.float64]:
        return t_grid(self.alpha, self.size)

    @cached_property
    def x(self) -> NDArray[np.float64]:
        return t_to_x(self.t, self.alpha)

    @property
    def h(self) -> float:
        return self.alpha.T / (self.size - 1)

    def with_values(self, values: ArrayLike) -> GridFunction:
        return GridFunction(values, self.alpha)

    def at_t(self, t: ArrayLike) -> NDArray[np.float64]:
        ts = np.asarray(t, dtype=float)
        T = self.alpha.T
        if np.any(ts < -_DOMAIN_SLACK * T) or np.any(ts > T * (1.0 + _DOMAIN_SLACK)):
            raise DomainError("evaluation outside [0, pi]")
        return local_cubic(self.t, self.values, np.clip(ts, 0.0, T))

    def __call__(self, x: ArrayLike) -> NDArray[np.float64]:
        return self.at_t(x_to_t(x, self.alpha))

    # derivative / antiderivative in t, i.e. D^alpha and I_alpha
    @cached_property
    def slope_values(self) -> NDArray[np.float64]:
        return fd_derivative(self.values, self.h)

    @cached_property
    def integral_values(self) -> NDArray[np.float64]:
        return cumulative_integral(self.values, self.t)

    def derivative(self) -> GridFunction:
        return self.with_values(self.slope_values)

    def antiderivative(self) -> GridFunction:
        return self.with_values(self.integral_values)

    def integral(self) -> float:
        return definite_integral(self.values, self.t)

    def mean(self) -> float:
        """d_alpha-mean over [0, pi]."""
        return self.integral() / self.alpha.T

    # Potential protocol
    def value_at(self, t: ArrayLike) -> NDArray[np.float64]:
        return self.at_t(t)

    def slope_at(self, t: ArrayLike) -> NDArray[np.float64]:
        return local_cubic(self.t, self.slope_values, np.clip(np.asarray(t, dtype=float), 0.0, self.alpha.T))

    def integral_at(self, t: ArrayLike) -> NDArray[np.float64]:
        return local_cubic(self.t, self.integral_values, np.clip(np.asarray(t, dtype=float), 0.0, self.alpha.T))

    def _combine(self, other, op) -> GridFunction:
        if isinstance(other, GridFunction):
            if other.size != self.size or other.alpha != self.alpha:
                raise DomainError("GridFunctions live on different grids")
            return self.with_values(op(self.values, other.values))
        return self.with_values(op(self.values, float(other)))

    def __add__(self, other) -> GridFunction:
        return self._combine(other, np.add)

    def __sub__(self, other) -> GridFunction:
        return self._combine(other, np.subtract)

    def __mul__(self, other) -> GridFunction:
        return self._combine(other, np.multiply)

    __radd__ = __add__
    __rmul__ = __mul__


# --- Derivative and integral operators ---

def frac_derivative(f, x: float, alpha: float | AlphaOrder) -> float:
    """D^alpha f(x) = x^(1-alpha) f'(x).

    GridFunctions are differentiated in t on their own grid. Callables of x are
    differentiated with a five-point central difference in t and accept any
    x > 0. At x = 0 the value is a one-sided limit and a LimitFormWarning is
    raised.
    """
    a = as_alpha(alpha)
    if isinstance(f, GridFunction):
        t = float(x_to_t(x, a))
        if t < f.h:
            warnings.warn(
                f"D^alpha at x={x!r} is within one grid spacing of 0; using one-sided extrapolation",
                LimitFormWarning,
                stacklevel=2,
            )
            logger.info("Limit form of D^alpha used at x=%g", x)
        return float(f.slope_at(t))

    if x < 0 or not math.isfinite(x):
        raise DomainError(f"x must be a finite non-negative number, got {x!r}")

    def g(t: float) -> float:
        return float(f((a.alpha * t) ** (1.0 / a.alpha)))

    t0 = x**a.alpha / a.alpha
    if t0 == 0.0:
        warnings.warn("D^alpha at x=0 taken as a one-sided limit", LimitFormWarning, stacklevel=2)
        d = 1e-4 * a.T
        return (-25 * g(0) + 48 * g(d) - 36 * g(2 * d) + 16 * g(3 * d) - 3 * g(4 * d)) / (12 * d)
    d = min(1e-3 * max(t0, 1.0), t0 / 4.0)
    return (g(t0 - 2 * d) - 8 * g(t0 - d) + 8 * g(t0 + d) - g(t0 + 2 * d)) / (12 * d)


def frac_integral(f, x: float, alpha: float | AlphaOrder, points: int = 2001) -> float:
    """I_alpha f(x) = int_0^x s^(alpha-1) f(s) ds, integrated in u = s^alpha/alpha."""
    a = as_alpha(alpha)
    tx = float(x_to_t(x, a))
    if isinstance(f, GridFunction):
        return float(f.integral_at(tx))
    if tx == 0.0:
        return 0.0
    u = np.linspace(0.0, tx, points)
    vals = np.asarray(f(t_to_x(u, a)), dtype=float)
    return definite_integral(np.broadcast_to(vals, u.shape), u)


def frac_integral_reference(f: Callable[[float], float], x: float, alpha: float | AlphaOrder) -> float:
    """Adaptive quadrature of the raw integrand s^(alpha-1) f(s); slow, for cross-checks."""
    a = as_alpha(alpha)
    value, _ = quad(lambda s: s ** (a.alpha - 1.0) * f(s), 0.0, x, limit=400)
    return float(value)


# --- Identity checks ---

@dataclass(frozen=True)
class CalculusReport:
    alpha: float
    size: int
    lower: float
    derivative_of_integral: float
    integral_of_derivative: float
    integration_by_parts: float

    @property
    def worst(self) -> float:
        return max(self.derivative_of_integral, self.integral_of_derivative, self.integration_by_parts)


def check_calculus_identities(
    f: Callable[[NDArray], ArrayLike],
    alpha: float | AlphaOrder,
    size: int = 4001,
    lower: float = 0.01 * math.pi,
    partner: Callable[[NDArray], ArrayLike] | None = None,
) -> CalculusReport:
    """Max residuals of D I f = f, I D f = f - f(a) and alpha-integration by parts on [a, pi].

    The lower limit a keeps probes such as sin x away from the t^(1/alpha)
    branch point at x = 0; every identity holds for any base point a.
    """
    a = as_alpha(alpha)
    ta = lower**a.alpha / a.alpha
    t = np.linspace(ta, a.T, size)
    h = t[1] - t[0]
    x = t_to_x(t, a)
    fv = np.broadcast_to(np.asarray(f(x), dtype=float), t.shape)
    if partner is None:
        def partner(xx):
            return np.cos(math.pi ** (1.0 - a.alpha) * xx**a.alpha)
    gv = np.broadcast_to(np.asarray(partner(x), dtype=float), t.shape)

    d_of_i = np.max(np.abs(fd_derivative(cumulative_integral(fv, t), h) - fv))
    df = fd_derivative(fv, h)
    i_of_d = np.max(np.abs(cumulative_integral(df, t) - (fv - fv[0])))
    dg = fd_derivative(gv, h)
    parts = abs(
        definite_integral(fv * dg, t) - (fv[-1] * gv[-1] - fv[0] * gv[0]) + definite_integral(gv * df, t)
    )
    return CalculusReport(
        alpha=a.alpha,
        size=size,
        lower=lower,
        derivative_of_integral=float(d_of_i),
        integral_of_derivative=float(i_of_d),
        integration_by_parts=float(parts),
    )
