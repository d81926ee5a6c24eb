"""Large-lambda expansions of S, Delta and lambda_n S(x, lambda_n), and their coefficients.

Every expansion is evaluated in t. With kappa = alpha pi^(1-alpha) = pi/T the
oscillatory phases read lam t - Q(t) and n kappa t - Q(t). Integrals of the form
int_0^t w(s) cos(lam (t - 2s) - Q(t) + 2 Q(s)) ds are split by the angle-sum
rule into cumulative integrals of w cos(psi) and w sin(psi), psi = 2Q(s) - 2 lam s,
computed once on a grid refined to the oscillation.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from confnodal.calculus import (
    GridFunction,
    cumulative_integral,
    default_grid_size,
    definite_integral,
    local_cubic,
    t_grid,
    x_to_t,
)
from confnodal.model import PotentialPair
from confnodal.shared.errors import PowerAmbiguityWarning, ResolutionError

logger = logging.getLogger(__name__)

# Points per oscillation period on refined grids
COEFFICIENT_POINTS_PER_PERIOD = 16
EXPANSION_POINTS_PER_PERIOD = 32
MAX_REFINED_POINTS = 400_001


def refined_grid(pp: PotentialPair, periods: float, per_period: int, base: int | None = None) -> NDArray[np.float64]:
    """Uniform t-grid with at least per_period points per period of the fastest phase."""
    size = max(base or default_grid_size(), int(per_period * math.ceil(abs(periods))) + 1)
    if size > MAX_REFINED_POINTS:
        raise ResolutionError(
            f"{periods:.0f} oscillation periods need {size} quadrature points (limit "
            f"{MAX_REFINED_POINTS}); lower n or lambda"
        )
    return t_grid(pp.alpha, size)


@dataclass(frozen=True)
class _Moments:
    """Running integrals on a refined grid for one phase frequency lam."""

    t: NDArray[np.float64]
    F: NDArray[np.float64]   # int_0^t (q + p^2)
    G: NDArray[np.float64]   # int_0^t (q + p^2) p
    C1: NDArray[np.float64]  # int_0^t (q + p^2) cos(psi)
    S1: NDArray[np.float64]  # int_0^t (q + p^2) sin(psi)
    C2: NDArray[np.float64]  # int_0^t D^a p cos(psi)
    S2: NDArray[np.float64]  # int_0^t D^a p sin(psi)

    def at(self, name: str, t: ArrayLike) -> NDArray[np.float64]:
        return local_cubic(self.t, getattr(self, name), t)


def _moments(pp: PotentialPair, lam: float, per_period: int, base: int | None = None) -> _Moments:
    T = pp.alpha.T
    t = refined_grid(pp, lam * T / math.pi, per_period, base)
    w = pp.weight_at(t)
    psi = 2.0 * pp.p.integral_at(t) - 2.0 * lam * t
    dp = pp.p.slope_at(t)
    cos_psi, sin_psi = np.cos(psi), np.sin(psi)
    return _Moments(
        t=t,
        F=cumulative_integral(w, t),
        G=cumulative_integral(w * pp.p.value_at(t), t),
        C1=cumulative_integral(w * cos_psi, t),
        S1=cumulative_integral(w * sin_psi, t),
        C2=cumulative_integral(dp * cos_psi, t),
        S2=cumulative_integral(dp * sin_psi, t),
    )


@dataclass(eq=False)
class CoefficientBundle:
    """a1 = int (q + p^2), a2 = int (q + p^2) p and the oscillatory A_n(x)."""

    pp: PotentialPair
    a1: float
    a2: float
    p0: float
    p_pi: float
    _cache: dict[int, _Moments] = field(default_factory=dict, repr=False)

    @property
    def p_ends(self) -> float:
        return self.p0 + self.p_pi

    def moments(self, n: int) -> _Moments:
        if n not in self._cache:
            self._cache[n] = _moments(self.pp, n * self.pp.alpha.kappa, COEFFICIENT_POINTS_PER_PERIOD)
        return self._cache[n]

    def A_t(self, n: int, t: ArrayLike) -> NDArray[np.float64]:
        """A_n at transformed abscissae t."""
        m = self.moments(n)
        # cos(2 n kappa s - 2Q) = cos(psi), sin(2 n kappa s - 2Q) = -sin(psi)
        return m.at("C1", t) + m.at("S2", t)

    def A(self, n: int, x: ArrayLike) -> NDArray[np.float64]:
        return self.A_t(n, x_to_t(x, self.pp.alpha))

    def A_end(self, n: int) -> float:
        """A_n^n, the value at x = pi."""
        m = self.moments(n)
        return float(m.C1[-1] + m.S2[-1])

    def F_t(self, t: ArrayLike) -> NDArray[np.float64]:
        return self._base.at("F", t)

    def G_t(self, t: ArrayLike) -> NDArray[np.float64]:
        return self._base.at("G", t)

    @property
    def _base(self) -> _Moments:
        return self.moments(0)


_BUNDLES: dict[int, CoefficientBundle] = {}


def coefficients(pp: PotentialPair, n_list=(), x_list=None) -> CoefficientBundle:
    """Coefficient functionals of pp; A_n for every n in n_list is precomputed.

    Bundles are cached per potential pair so that eigenvalue guesses and nodal
    asymptotics share one definition.
    """
    bundle = _BUNDLES.get(id(pp))
    if bundle is None or bundle.pp is not pp:
        t = t_grid(pp.alpha)
        w = pp.weight_at(t)
        bundle = CoefficientBundle(
            pp=pp,
            a1=definite_integral(w, t),
            a2=definite_integral(w * pp.p.value_at(t), t),
            p0=float(pp.p.value_at(0.0)),
            p_pi=float(pp.p.value_at(pp.alpha.T)),
        )
        if len(_BUNDLES) > 32:
            _BUNDLES.clear()
        _BUNDLES[id(pp)] = bundle
        logger.debug("Coefficients a1=%.10g a2=%.10g", bundle.a1, bundle.a2)
    for n in n_list:
        bundle.moments(int(n))
    if x_list is not None:
        for n in n_list:
            bundle.A(int(n), x_list)
    return bundle


# --- Power terms ---

def signed_power(base: ArrayLike, exponent: float) -> NDArray[np.float64]:
    """base**exponent; negative bases with non-integer exponents become sgn(b)|b|^e and warn."""
    b = np.asarray(base, dtype=float)
    if float(exponent).is_integer():
        return b**exponent
    if np.any(b < 0):
        warnings.warn(
            f"fractional power {exponent:g} of a negative base; using sgn(b)|b|^e",
            PowerAmbiguityWarning,
            stacklevel=3,
        )
        logger.info("Power ambiguity: negative base raised to %g", exponent)
    return np.sign(b) * np.abs(b) ** exponent


def _power_bracket(pv: NDArray, p0: float, alpha: float) -> NDArray[np.float64]:
    """4 p0^2 + [2(p+p0)^(1+a) - 2^(2+a) p0^(1+a) + (p-p0)^(1+a)] / (1+a)."""
    e = 1.0 + alpha
    combo = 2.0 * signed_power(pv + p0, e) - 2.0 ** (2.0 + alpha) * signed_power(p0, e) + signed_power(pv - p0, e)
    return 4.0 * p0 * p0 + combo / e


# --- Expansions ---

def _s_expansion(pp: PotentialPair, t: NDArray, lam: float, order: int, Qv: NDArray) -> NDArray[np.float64]:
    if lam == 0:
        raise ValueError("expansions need lam != 0")
    theta = lam * t - Qv
    sin_t, cos_t = np.sin(theta), np.cos(theta)
    out = sin_t / lam
    if order < 2:
        return out
    m = _moments(pp, lam, EXPANSION_POINTS_PER_PERIOD)
    F, G = m.at("F", t), m.at("G", t)
    pv = pp.p.value_at(t)
    p0 = float(pp.p.value_at(0.0))
    second = (
        (pv + p0) * sin_t
        - F * cos_t
        + cos_t * m.at("C1", t) - sin_t * m.at("S1", t)
        + sin_t * m.at("C2", t) + cos_t * m.at("S2", t)
    )
    out = out + second / (2.0 * lam * lam)
    if order < 3:
        return out
    third = (_power_bracket(pv, p0, pp.alpha.alpha) - 0.5 * F * F) * sin_t - ((pv + p0) * F + 2.0 * G) * cos_t
    return out + third / (4.0 * lam**3)


def _scalar(values: NDArray, like: ArrayLike):
    return float(values) if np.ndim(like) == 0 else values


def S_expansion(pp: PotentialPair, x: ArrayLike, lam: float, order: int = 2) -> NDArray[np.float64] | float:
    """Large-lam expansion of S(x, lam) truncated after the 1/lam^order term."""
    _check_order(order)
    t = x_to_t(x, pp.alpha)
    return _scalar(_s_expansion(pp, np.atleast_1d(t), lam, order, pp.p.integral_at(np.atleast_1d(t))).reshape(np.shape(t)), x)


def delta_expansion(pp: PotentialPair, lam: float, order: int = 2) -> float:
    """Expansion of Delta(lam) = S(pi, lam), with Q(pi) = 0."""
    _check_order(order)
    t = np.array([pp.alpha.T])
    return float(_s_expansion(pp, t, lam, order, np.zeros(1))[0])


def lambdaS_expansion(
    pp: PotentialPair,
    x: ArrayLike,
    n: int,
    order: int = 3,
    bundle: CoefficientBundle | None = None,
) -> NDArray[np.float64] | float:
    """Expansion of lambda_n S(x, lambda_n) in powers of 1/n (order 1, 2 or 3 terms)."""
    _check_order(order)
    bundle = bundle or coefficients(pp, [n])
    alpha = pp.alpha
    kappa, T = alpha.kappa, alpha.T
    t = np.atleast_1d(x_to_t(x, alpha))
    theta = n * kappa * t - pp.p.integral_at(t)
    sin_t, cos_t = np.sin(theta), np.cos(theta)
    out = sin_t.copy()
    if order >= 2:
        m = bundle.moments(n)
        F, G = m.at("F", t), m.at("G", t)
        pv = pp.p.value_at(t)
        p0 = bundle.p0
        ratio = t / T
        second = (
            ((bundle.a1 - bundle.A_end(n)) * ratio - F) * cos_t
            + (pv + p0) * sin_t
            + cos_t * m.at("C1", t) - sin_t * m.at("S1", t)
            + sin_t * m.at("C2", t) + cos_t * m.at("S2", t)
        )
        out = out + second / (2.0 * n * kappa)
        if order >= 3:
            a1, a2 = bundle.a1, bundle.a2
            cos_coef = (bundle.p_ends * a1 + 2.0 * a2) * ratio + (pv + p0) * a1 * ratio - ((pv + p0) * F + 2.0 * G)
            sin_coef = (
                _power_bracket(pv, p0, alpha.alpha)
                + a1 * ratio * F
                - (a1 * ratio) ** 2
                - 0.5 * F * F
            )
            out = out + (cos_coef * cos_t + sin_coef * sin_t) / (4.0 * (n * kappa) ** 2)
    return _scalar(out.reshape(np.shape(x_to_t(x, alpha))), x)


def _check_order(order: int) -> None:
    if order not in (1, 2, 3):
        raise ValueError(f"order must be 1, 2 or 3, got {order}")


# --- Successive approximations ---

@dataclass(frozen=True)
class SuccessiveApproximation:
    lam: float
    solution: GridFunction
    changes: list[float]

    @property
    def converged(self) -> bool:
        return bool(self.changes) and self.changes[-1] < 1e-12 * max(1.0, float(np.max(np.abs(self.solution.values))))


def successive_approximations(
    pp: PotentialPair,
    lam: float,
    iterations: int = 40,
    size: int | None = None,
    tol: float = 1e-13,
) -> SuccessiveApproximation:
    """Picard iteration of S = sin(lam t)/lam + int_0^t sin(lam(t-s))/lam (2 lam p + q)(s) S(s) ds."""
    if lam == 0:
        raise ValueError("successive approximations need lam != 0")
    t = t_grid(pp.alpha, size)
    forcing = 2.0 * lam * pp.p.value_at(t) + pp.q.value_at(t)
    s_l, c_l = np.sin(lam * t), np.cos(lam * t)
    y = s_l / lam
    changes: list[float] = []
    for _ in range(iterations):
        f = forcing * y
        nxt = s_l / lam + (s_l * cumulative_integral(c_l * f, t) - c_l * cumulative_integral(s_l * f, t)) / lam
        change = float(np.max(np.abs(nxt - y)))
        changes.append(change)
        y = nxt
        if change < tol * max(1.0, float(np.max(np.abs(y)))):
            break
    logger.debug("Successive approximations at lam=%g: %d iterations, last change %.2e",
                 lam, len(changes), changes[-1])
    return SuccessiveApproximation(lam=float(lam), solution=GridFunction(y, pp.alpha), changes=changes)
