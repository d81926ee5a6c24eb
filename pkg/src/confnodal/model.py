"""Operator data: the potential pair (p, q), trigonometric presets, validation."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any, Protocol, runtime_checkable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from confnodal.calculus import (
    AlphaOrder,
    GridFunction,
    as_alpha,
    definite_integral,
    local_cubic,
    t_grid,
    t_to_x,
    x_to_t,
)
from confnodal.shared.errors import ConfigError, ConstantPotentialError, MeanZeroError

logger = logging.getLogger(__name__)

MEAN_ZERO_TOLERANCE = 1e-8
CONSTANT_VARIANCE = 1e-14  # sample variance on 101 points below this means "constant"
VALIDATION_POINTS = 101


@runtime_checkable
class Potential(Protocol):
    """Anything that can report its value, D^alpha and d_alpha-antiderivative in t."""

    def value_at(self, t: ArrayLike) -> NDArray[np.float64]: ...

    def slope_at(self, t: ArrayLike) -> NDArray[np.float64]: ...

    def integral_at(self, t: ArrayLike) -> NDArray[np.float64]: ...


@dataclass(frozen=True)
class TrigPotential:
    """c + sum_k a_k cos(k u) + sum_k b_k sin(k u), u = pi^(1-alpha) x^alpha = kappa t.

    With center_sines the d_alpha-mean (1 - cos k pi)/(k pi) of every sine term
    is subtracted, which makes the mean of the oscillating part exactly zero.
    """

    alpha: AlphaOrder
    constant: float = 0.0
    cos: tuple[float, ...] = ()
    sin: tuple[float, ...] = ()
    center_sines: bool = False

    def _omega(self, k: int) -> float:
        return k * self.alpha.kappa

    def _sine_mean(self, k: int) -> float:
        return (1.0 - math.cos(k * math.pi)) / (k * math.pi) if self.center_sines else 0.0

    def value_at(self, t: ArrayLike) -> NDArray[np.float64]:
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, self.constant)
        for k, c in enumerate(self.cos, start=1):
            out = out + c * np.cos(self._omega(k) * t)
        for k, s in enumerate(self.sin, start=1):
            out = out + s * (np.sin(self._omega(k) * t) - self._sine_mean(k))
        return out

    def slope_at(self, t: ArrayLike) -> NDArray[np.float64]:
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        for k, c in enumerate(self.cos, start=1):
            w = self._omega(k)
            out = out - c * w * np.sin(w * t)
        for k, s in enumerate(self.sin, start=1):
            w = self._omega(k)
            out = out + s * w * np.cos(w * t)
        return out

    def integral_at(self, t: ArrayLike) -> NDArray[np.float64]:
        t = np.asarray(t, dtype=float)
        out = self.constant * t
        for k, c in enumerate(self.cos, start=1):
            w = self._omega(k)
            out = out + c * np.sin(w * t) / w
        for k, s in enumerate(self.sin, start=1):
            w = self._omega(k)
            out = out + s * ((1.0 - np.cos(w * t)) / w - self._sine_mean(k) * t)
        return out

    def __call__(self, x: ArrayLike) -> NDArray[np.float64]:
        return self.value_at(x_to_t(x, self.alpha))

    def describe(self) -> dict[str, Any]:
        return {
            "kind": "preset",
            "constant": self.constant,
            "cos": list(self.cos),
            "sin": list(self.sin),
            "center_sines": self.center_sines,
        }


@dataclass(frozen=True, eq=False)
class PotentialPair:
    """The pencil data (p, q, alpha). Built through make_potential for validation.

    eq=False keeps instances hashable by identity so per-pair caches can key on them.
    """

    p: Potential
    q: Potential
    alpha: AlphaOrder
    report: dict[str, float] = field(default_factory=dict)

    @property
    def p_ends(self) -> float:
        """p(pi) + p(0)."""
        return float(self.p.value_at(self.alpha.T) + self.p.value_at(0.0))

    def weight_at(self, t: ArrayLike) -> NDArray[np.float64]:
        """q + p^2."""
        pv = self.p.value_at(t)
        return self.q.value_at(t) + pv * pv


def _as_potential(spec: Any, alpha: AlphaOrder) -> Potential:
    if isinstance(spec, GridFunction):
        if spec.alpha != alpha:
            raise ConfigError("GridFunction potential was sampled for a different alpha")
        return spec
    if isinstance(spec, Potential):
        return spec
    if isinstance(spec, (int, float)):
        return TrigPotential(alpha, constant=float(spec))
    if callable(spec):
        return GridFunction.from_x(spec, alpha)
    raise ConfigError(f"unsupported potential spec: {type(spec).__name__}")


def make_potential(p_spec: Any, q_spec: Any, alpha: float | AlphaOrder, allow_constant_p: bool = False) -> PotentialPair:
    """Validate and assemble a PotentialPair.

    Specs may be Potential objects (presets, GridFunctions), constants or
    callables of x. Raises ConstantPotentialError for constant p (unless
    allowed) and MeanZeroError when the d_alpha-integral of p is not zero.
    """
    a = as_alpha(alpha)
    p = _as_potential(p_spec, a)
    q = _as_potential(q_spec, a)

    probe_t = x_to_t(np.linspace(0.0, math.pi, VALIDATION_POINTS), a)
    variance = float(np.var(p.value_at(probe_t)))
    if variance < CONSTANT_VARIANCE and not allow_constant_p:
        raise ConstantPotentialError(variance)

    t = t_grid(a)
    pv, qv, dpv = p.value_at(t), q.value_at(t), p.slope_at(t)
    for name, vals in (("p", pv), ("q", qv), ("D^alpha p", dpv)):
        if not np.all(np.isfinite(vals)):
            raise ConfigError(f"{name} is not finite on [0, pi]")

    mean_p = definite_integral(pv, t)
    if abs(mean_p) > MEAN_ZERO_TOLERANCE:
        raise MeanZeroError(mean_p, MEAN_ZERO_TOLERANCE)

    report = {"mean_p": mean_p, "variance_p": variance, "mean_q": definite_integral(qv, t) / a.T}
    logger.info("Potential pair ready (alpha=%g, d_alpha-integral of p=%.2e)", a.alpha, mean_p)
    return PotentialPair(p=p, q=q, alpha=a, report=report)


def capital_Q(pp: PotentialPair, x: ArrayLike) -> NDArray[np.float64] | float:
    """Q(x) = I_alpha p(x)."""
    t = x_to_t(x, pp.alpha)
    out = pp.p.integral_at(t)
    return float(out) if np.ndim(out) == 0 else out


# --- Presets ---

def _cosine(alpha: AlphaOrder) -> tuple[Potential, Potential, bool]:
    return TrigPotential(alpha, cos=(0.2,)), TrigPotential(alpha), False


def _roundtrip(alpha: AlphaOrder) -> tuple[Potential, Potential, bool]:
    # sin u has d_alpha-mean 2/pi, so q has mean exactly 0.1
    return (
        TrigPotential(alpha, cos=(0.2,)),
        TrigPotential(alpha, constant=0.1 - 0.2 / math.pi, sin=(0.1,)),
        False,
    )


def _zero(alpha: AlphaOrder) -> tuple[Potential, Potential, bool]:
    return TrigPotential(alpha), TrigPotential(alpha), True


def _classical(alpha: AlphaOrder) -> tuple[Potential, Potential, bool]:
    return TrigPotential(alpha), TrigPotential(alpha, constant=1.0), True


def _mixed(alpha: AlphaOrder) -> tuple[Potential, Potential, bool]:
    return (
        TrigPotential(alpha, cos=(0.15,), sin=(0.1,), center_sines=True),
        TrigPotential(alpha, constant=0.05, cos=(0.0, 0.1)),
        False,
    )


def _shifted(alpha: AlphaOrder) -> tuple[Potential, Potential, bool]:
    return TrigPotential(alpha, cos=(0.2,)), TrigPotential(alpha, constant=0.1), False


PRESETS: dict[str, Callable[[AlphaOrder], tuple[Potential, Potential, bool]]] = {
    "zero": _zero,
    "cosine": _cosine,
    "shifted": _shifted,
    "roundtrip": _roundtrip,
    "classical": _classical,
    "mixed": _mixed,
}


def preset_pair(name: str, alpha: float | AlphaOrder) -> PotentialPair:
    a = as_alpha(alpha)
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    p, q, allow_constant = factory(a)
    return make_potential(p, q, a, allow_constant_p=allow_constant)


def trig_from_spec(spec: Any, alpha: AlphaOrder) -> TrigPotential:
    return TrigPotential(
        alpha,
        constant=spec.constant,
        cos=tuple(spec.cos),
        sin=tuple(spec.sin),
        center_sines=spec.center_sines,
    )


def sampled_potential(x: ArrayLike, values: ArrayLike, alpha: float | AlphaOrder, size: int | None = None) -> GridFunction:
    """Resample (x, value) data onto the canonical t-grid."""
    a = as_alpha(alpha)
    xs = np.asarray(x, dtype=float)
    order = np.argsort(xs)
    t_data = x_to_t(xs[order], a)
    grid = t_grid(a, size)
    return GridFunction(local_cubic(t_data, np.asarray(values, dtype=float)[order], grid), a)


def potential_samples(pp: PotentialPair, size: int | None = None) -> dict[str, NDArray[np.float64]]:
    t = t_grid(pp.alpha, size)
    return {"x": t_to_x(t, pp.alpha), "t": t, "p": pp.p.value_at(t), "q": pp.q.value_at(t)}
