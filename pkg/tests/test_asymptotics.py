import math

import numpy as np
import pytest

from confnodal.asymptotics import (
    S_expansion,
    coefficients,
    delta_expansion,
    lambdaS_expansion,
    refined_grid,
    signed_power,
)
from confnodal.forward.shooting import characteristic, shoot_S
from confnodal.forward.spectral import eigenvalue_guess, locate_eigenvalues
from confnodal.shared.errors import PowerAmbiguityWarning, ResolutionError


def test_zero_potential_coefficients_vanish(pair):
    bundle = coefficients(pair("zero", 0.5), [4])
    assert bundle.a1 == 0.0
    assert bundle.a2 == 0.0
    assert bundle.A_end(4) == 0.0


def test_classical_coefficients(pair):
    bundle = coefficients(pair("classical", 1.0), [7])
    assert bundle.a1 == pytest.approx(math.pi, rel=1e-12)
    assert bundle.a2 == pytest.approx(0.0, abs=1e-14)
    # int_0^pi cos(14 s) ds = 0
    assert bundle.A_end(7) == pytest.approx(0.0, abs=1e-9)
    assert float(bundle.A(7, 0.0)) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("order", [1, 2, 3])
def test_zero_potential_expansion_is_exact(pair, order):
    pp = pair("zero", 0.75)
    x = np.linspace(0.0, math.pi, 9)
    t = x**0.75 / 0.75
    np.testing.assert_allclose(S_expansion(pp, x, 6.5, order), np.sin(6.5 * t) / 6.5, atol=1e-14)
    np.testing.assert_allclose(
        lambdaS_expansion(pp, x, 5, order), np.sin(5 * pp.alpha.kappa * t), atol=1e-13
    )


def test_classical_delta_closed_form(pair):
    lam = 7.3
    expected = (
        math.sin(lam * math.pi) / lam
        - math.pi * math.cos(lam * math.pi) / (2 * lam**2)
        + math.sin(lam * math.pi) / (2 * lam**3)
    )
    assert delta_expansion(pair("classical", 1.0), lam, order=2) == pytest.approx(expected, abs=1e-10)


def test_expansions_reject_bad_order(pair):
    with pytest.raises(ValueError):
        delta_expansion(pair("cosine", 1.0), 3.0, order=4)


@pytest.mark.parametrize("alpha", [0.5, 0.75, 1.0])
def test_delta_remainder_scaling(pair, alpha):
    pp = pair("cosine", alpha)
    scaled = []
    for n in (20, 40, 80):
        lam = eigenvalue_guess(pp, n)
        residual = abs(characteristic(pp, lam).delta - delta_expansion(pp, lam, order=2))
        scaled.append(lam * lam * residual)
    assert max(scaled) < 1.0
    assert scaled[-1] <= 1.5 * scaled[0] + 1e-6


def test_lambda_s_expansion_against_shooting(pair):
    pp = pair("cosine", 1.0)
    x = np.linspace(0.0, math.pi, 41)
    scaled = []
    for n in (30, 60):
        lam = locate_eigenvalues(pp, n, n).get(n).lambda_n
        numeric = lam * shoot_S(pp, lam)(x)
        scaled.append(n * n * np.max(np.abs(numeric - lambdaS_expansion(pp, x, n, order=2))))
    assert max(scaled) < 1.0


def test_s_expansion_improves_with_order(pair):
    pp = pair("shifted", 1.0)
    lam = 40.3
    x = np.linspace(0.2, 3.0, 15)
    numeric = shoot_S(pp, lam)(x)
    first = np.max(np.abs(numeric - S_expansion(pp, x, lam, 1)))
    second = np.max(np.abs(numeric - S_expansion(pp, x, lam, 2)))
    assert second < 0.5 * first


def test_fractional_power_of_negative_base_warns(pair):
    with pytest.warns(PowerAmbiguityWarning):
        S_expansion(pair("cosine", 0.5), np.linspace(0.0, math.pi, 5), 20.0, order=3)


def test_signed_power():
    with pytest.warns(PowerAmbiguityWarning):
        cube_roots = signed_power([-8.0, 8.0], 1.0 / 3.0)
    np.testing.assert_allclose(cube_roots, [-2.0, 2.0])
    np.testing.assert_allclose(signed_power([-2.0], 2.0), [4.0])


def test_refined_grid_limit(pair):
    with pytest.raises(ResolutionError):
        refined_grid(pair("cosine", 1.0), 30_000, 16)
