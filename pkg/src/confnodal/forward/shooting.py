"""Shooting for the pencil -D^a D^a y + (2 lam p + q) y = lam^2 y.

In t the problem is the linear system y' = v, v' = (2 lam p + q - lam^2) y.
Each grid cell is advanced by a 2x2 propagator: a fourth-order Magnus step
(closed-form exponential of the traceless generator, exact for constant
coefficients and determinant one) or a classical RK4 step. Propagators are
composed with vectorized tree reductions, so a whole shot, or a batch of
characteristic values, is a handful of array operations.
"""

from __future__ import annotations

import logging
import math
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike, NDArray

from confnodal.calculus import AlphaOrder, GridFunction, default_grid_size, t_grid, t_to_x, x_to_t
from confnodal.config import get_settings
from confnodal.model import PotentialPair
from confnodal.shared.errors import ConfigError, IntegrationOverflowError
from confnodal.shared.types import CharacteristicSample, Direction, ShotSolution

logger = logging.getLogger(__name__)

SCHEMES = ("magnus4", "rk4")
_GAUSS = math.sqrt(3.0) / 6.0
_COMMUTATOR = math.sqrt(3.0) / 12.0

# Relative agreement required between S(pi) and -psi(0)
CROSS_CHECK_TOLERANCE = 1e-6

# lam values per vectorized characteristic evaluation
_BATCH = 64


# --- Cell propagators ---

def _magnus_cells(s, kk1, kk2, inverse: bool = False) -> NDArray[np.float64]:
    """exp(+-Omega) for Omega = [[c, s], [-s kb, -c]], the 4th-order Magnus generator.

    kk1, kk2 are k^2 = lam^2 - 2 lam p - q at the two Gauss points.
    """
    c = _COMMUTATOR * s * s * (kk2 - kk1)
    kb = 0.5 * (kk1 + kk2)
    mu = c * c - s * s * kb
    theta = np.sqrt(np.abs(mu))
    osc = mu < 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        cos_part = np.where(osc, np.cos(theta), np.cosh(theta))
        safe = np.where(theta > 0.0, theta, 1.0)
        sinc_part = np.where(osc, np.sinc(theta / math.pi), np.where(theta > 0.0, np.sinh(theta) / safe, 1.0))
    sign = -1.0 if inverse else 1.0
    out = np.empty(np.broadcast(c, s, kb).shape + (2, 2))
    out[..., 0, 0] = cos_part + sign * sinc_part * c
    out[..., 0, 1] = sign * sinc_part * s
    out[..., 1, 0] = -sign * sinc_part * s * kb
    out[..., 1, 1] = cos_part - sign * sinc_part * c
    return out


def _generator(kk) -> NDArray[np.float64]:
    kk = np.asarray(kk, dtype=float)
    A = np.zeros(kk.shape + (2, 2))
    A[..., 0, 1] = 1.0
    A[..., 1, 0] = -kk
    return A


def _rk4_cells(s, kk0, kkm, kk1) -> NDArray[np.float64]:
    """Propagator of one classical RK4 step of size s (negative s steps backward from kk0)."""
    A0, Am, A1 = _generator(kk0), _generator(kkm), _generator(kk1)
    s = np.asarray(s, dtype=float)[..., None, None]
    eye = np.eye(2)
    K1 = A0
    K2 = Am @ (eye + 0.5 * s * K1)
    K3 = Am @ (eye + 0.5 * s * K2)
    K4 = A1 @ (eye + s * K3)
    return eye + (s / 6.0) * (K1 + 2.0 * K2 + 2.0 * K3 + K4)


def chain_product(M: NDArray[np.float64]) -> NDArray[np.float64]:
    """M[..., m-1, :, :] @ ... @ M[..., 0, :, :] by ordered pairwise reduction."""
    while M.shape[-3] > 1:
        carry = None
        if M.shape[-3] % 2:
            carry = M[..., -1:, :, :]
            M = M[..., :-1, :, :]
        M = M[..., 1::2, :, :] @ M[..., 0::2, :, :]
        if carry is not None:
            M = np.concatenate([M, carry], axis=-3)
    return M[..., 0, :, :]


def prefix_products(M: NDArray[np.float64]) -> NDArray[np.float64]:
    """P[i] = M[i] @ ... @ M[0] (Hillis-Steele scan along axis -3)."""
    P = np.array(M, copy=True)
    m = P.shape[-3]
    d = 1
    while d < m:
        P[..., d:, :, :] = P[..., d:, :, :] @ P[..., :-d, :, :]
        d *= 2
    return P


# --- Pencil ---

class Pencil:
    """Propagators of the pencil equation on the canonical t-grid of one potential pair."""

    def __init__(self, pp: PotentialPair, size: int | None = None, scheme: str | None = None):
        scheme = scheme or get_settings().scheme
        if scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")
        self.pp = pp
        self.alpha: AlphaOrder = pp.alpha
        self.size = size or default_grid_size()
        self.scheme = scheme
        self.t = t_grid(self.alpha, self.size)
        self.h = float(self.t[1] - self.t[0])
        self._samples = self._coefficients(self.t[:-1], self.h)

    def _coefficients(self, t0: NDArray, s) -> tuple[tuple[NDArray, NDArray], ...]:
        """(p, q) at the stage points of cells [t0, t0 + s]."""
        if self.scheme == "magnus4":
            stages = (t0 + (0.5 - _GAUSS) * s, t0 + (0.5 + _GAUSS) * s)
        else:
            stages = (t0, t0 + 0.5 * s, t0 + s)
        return tuple((self.pp.p.value_at(ts), self.pp.q.value_at(ts)) for ts in stages)

    @staticmethod
    def _kk(lam, pq) -> NDArray[np.float64]:
        p, q = pq
        return lam * lam - 2.0 * lam * p - q

    def _cells(self, lam, s, samples, inverse: bool = False) -> NDArray[np.float64]:
        if self.scheme == "magnus4":
            kk1, kk2 = (self._kk(lam, pq) for pq in samples)
            return _magnus_cells(s, kk1, kk2, inverse=inverse)
        kk0, kkm, kk1 = (self._kk(lam, pq) for pq in samples)
        if inverse:
            return _rk4_cells(-s, kk1, kkm, kk0)
        return _rk4_cells(s, kk0, kkm, kk1)

    def cells(self, lam: float, inverse: bool = False) -> NDArray[np.float64]:
        return self._cells(float(lam), self.h, self._samples, inverse=inverse)

    def characteristic(self, lams: ArrayLike) -> NDArray[np.float64]:
        """Delta(lam) = S(pi, lam) for a batch of lam."""
        lam = np.atleast_1d(np.asarray(lams, dtype=float))
        total = np.concatenate([
            chain_product(self._cells(chunk[:, None], self.h, self._samples))
            for chunk in np.array_split(lam, max(1, -(-lam.size // _BATCH)))
        ])
        delta = total[:, 0, 1]
        bad = ~np.isfinite(total).all(axis=(-2, -1))
        if bad.any():
            lam_bad = float(lam[np.argmax(bad)])
            self.forward_states(lam_bad)
            raise IntegrationOverflowError(lam_bad, self.alpha.T)
        return delta

    def psi_at_zero(self, lam: float) -> float:
        Minv = self.cells(lam, inverse=True)
        total = chain_product(Minv[::-1])
        return float(total[0, 1])

    def _check_finite(self, lam: float, y: NDArray, v: NDArray) -> None:
        bad = ~(np.isfinite(y) & np.isfinite(v))
        if bad.any():
            raise IntegrationOverflowError(lam, float(self.t[np.argmax(bad)]))

    def forward_states(self, lam: float) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """(y, v) on the grid from y(0) = 0, v(0) = 1."""
        P = prefix_products(self.cells(lam))
        y = np.concatenate([[0.0], P[:, 0, 1]])
        v = np.concatenate([[1.0], P[:, 1, 1]])
        self._check_finite(lam, y, v)
        return y, v

    def backward_states(self, lam: float) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """(y, v) on the grid from y(T) = 0, v(T) = 1."""
        P = prefix_products(self.cells(lam, inverse=True)[::-1])
        y = np.concatenate([P[::-1, 0, 1], [0.0]])
        v = np.concatenate([P[::-1, 1, 1], [1.0]])
        bad = ~(np.isfinite(y) & np.isfinite(v))
        if bad.any():
            raise IntegrationOverflowError(lam, float(self.t[len(bad) - 1 - np.argmax(bad[::-1])]))
        return y, v

    def advance(self, lam: float, t: ArrayLike, y: NDArray, v: NDArray) -> tuple[NDArray, NDArray]:
        """Propagate grid states to arbitrary t inside the grid by one partial step."""
        ts = np.clip(np.asarray(t, dtype=float), 0.0, self.alpha.T)
        i = np.clip(np.floor(ts / self.h).astype(int), 0, self.size - 2)
        s = ts - self.t[i]
        M = self._cells(lam, s, self._coefficients(self.t[i], s))
        return M[..., 0, 0] * y[i] + M[..., 0, 1] * v[i], M[..., 1, 0] * y[i] + M[..., 1, 1] * v[i]

    def partial_y(self, lam: float, i: NDArray, s: NDArray, y: NDArray, v: NDArray) -> NDArray:
        M = self._cells(lam, s, self._coefficients(self.t[i], s))
        return M[..., 0, 0] * y[i] + M[..., 0, 1] * v[i]


@lru_cache(maxsize=16)
def _cached_pencil(pp: PotentialPair, size: int, scheme: str) -> Pencil:
    return Pencil(pp, size, scheme)


def pencil_for(pp: PotentialPair, size: int | None = None, scheme: str | None = None) -> Pencil:
    return _cached_pencil(pp, size or default_grid_size(), scheme or get_settings().scheme)


# --- Shots ---

def _shot(pp: PotentialPair, lam: float, direction: Direction, size, scheme) -> ShotSolution:
    pencil = pencil_for(pp, size, scheme)
    if direction is Direction.FORWARD:
        y, v = pencil.forward_states(lam)
    else:
        y, v = pencil.backward_states(lam)
    return ShotSolution(
        lam=float(lam),
        y=GridFunction(y, pp.alpha),
        dy=GridFunction(v, pp.alpha),
        direction=direction,
    )


def shoot_S(pp: PotentialPair, lam: float, size: int | None = None, scheme: str | None = None) -> ShotSolution:
    """S(x, lam): S(0) = 0, D^alpha S(0) = 1."""
    return _shot(pp, lam, Direction.FORWARD, size, scheme)


def shoot_psi(pp: PotentialPair, lam: float, size: int | None = None, scheme: str | None = None) -> ShotSolution:
    """psi(x, lam): psi(pi) = 0, D^alpha psi(pi) = 1."""
    return _shot(pp, lam, Direction.BACKWARD, size, scheme)


def characteristic(
    pp: PotentialPair,
    lam: float,
    cross_check: bool = False,
    size: int | None = None,
    scheme: str | None = None,
) -> CharacteristicSample:
    """Delta(lam) = S(pi, lam), optionally cross-checked against -psi(0, lam)."""
    pencil = pencil_for(pp, size, scheme)
    delta = float(pencil.characteristic([lam])[0])
    if not cross_check:
        return CharacteristicSample(lam=float(lam), delta=delta)
    via_psi = -pencil.psi_at_zero(lam)
    agrees = abs(delta - via_psi) <= CROSS_CHECK_TOLERANCE * max(abs(delta), abs(via_psi)) + 1e-12
    if not agrees:
        logger.warning("Delta cross-check failed at lambda=%.10g: S(pi)=%.12g, -psi(0)=%.12g",
                       lam, delta, via_psi)
    return CharacteristicSample(lam=float(lam), delta=delta, delta_psi=via_psi, agrees=agrees)


def characteristic_batch(pp: PotentialPair, lams: ArrayLike, size: int | None = None,
                         scheme: str | None = None) -> NDArray[np.float64]:
    return pencil_for(pp, size, scheme).characteristic(lams)


def wronskian(
    pp: PotentialPair,
    lam: float,
    x_probe: ArrayLike,
    size: int | None = None,
    scheme: str | None = None,
) -> list[float]:
    """W = S D^a psi - psi D^a S at each probe; independent of x."""
    pencil = pencil_for(pp, size, scheme)
    t = x_to_t(np.atleast_1d(np.asarray(x_probe, dtype=float)), pp.alpha)
    ys, vs = pencil.forward_states(lam)
    yp, vp = pencil.backward_states(lam)
    S, dS = pencil.advance(lam, t, ys, vs)
    psi, dpsi = pencil.advance(lam, t, yp, vp)
    return (S * dpsi - psi * dS).tolist()


def shot_table(shot: ShotSolution) -> dict[str, NDArray[np.float64]]:
    t = shot.y.t
    return {"x": t_to_x(t, shot.y.alpha), "t": t, "S": np.asarray(shot.y.values), "DS": np.asarray(shot.dy.values)}
