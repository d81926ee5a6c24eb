import math

import numpy as np
import pytest

from confnodal.calculus import (
    AlphaOrder,
    GridFunction,
    check_calculus_identities,
    cumulative_integral,
    fd_derivative,
    frac_derivative,
    frac_integral,
    frac_integral_reference,
    from_transformed,
    local_cubic,
    t_grid,
    t_to_x,
    to_transformed,
    x_to_t,
)
from confnodal.checks.acceptance import IDENTITY_TOLERANCE
from confnodal.checks.selftest import SELFTEST_ALPHAS, probe_functions
from confnodal.shared.errors import DomainError, LimitFormWarning


@pytest.mark.parametrize("bad", [0.0, -0.5, 1.5, float("nan")])
def test_alpha_outside_unit_interval_is_rejected(bad):
    with pytest.raises(DomainError):
        AlphaOrder(bad)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75, 1.0])
def test_interval_length_and_spacing(alpha):
    a = AlphaOrder(alpha)
    assert a.T == pytest.approx(math.pi**alpha / alpha)
    assert a.kappa == pytest.approx(math.pi / a.T)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 1.0])
def test_coordinate_maps_invert_each_other(alpha):
    x = np.linspace(0.0, math.pi, 17)
    np.testing.assert_allclose(t_to_x(x_to_t(x, alpha), alpha), x, rtol=1e-13, atol=1e-14)
    coord = to_transformed(2.0, alpha)
    assert coord.x == pytest.approx(2.0, rel=1e-13)
    assert from_transformed(AlphaOrder(alpha).T, alpha) == pytest.approx(math.pi, rel=1e-13)


def test_points_outside_the_interval_raise():
    with pytest.raises(DomainError):
        x_to_t([0.5, 4.0], 0.5)
    with pytest.raises(DomainError):
        from_transformed(-1.0, 0.5)


def test_local_cubic_reproduces_cubics():
    xp = 2.0 * np.linspace(0.0, 1.0, 12) ** 2
    fp = 1.0 - 2.0 * xp + 0.5 * xp**3
    pts = np.linspace(xp[0], xp[-1], 50)
    np.testing.assert_allclose(local_cubic(xp, fp, pts), 1.0 - 2.0 * pts + 0.5 * pts**3, atol=1e-9)


def test_fd_derivative_is_exact_for_quartics():
    t = np.linspace(0.0, 2.0, 41)
    values = t**4 - 3.0 * t**2
    np.testing.assert_allclose(fd_derivative(values, t[1] - t[0]), 4.0 * t**3 - 6.0 * t, atol=1e-9)


def test_cumulative_integral_is_exact_for_cubics():
    t = np.linspace(0.0, 3.0, 31)
    np.testing.assert_allclose(cumulative_integral(3.0 * t**2 + 1.0, t), t**3 + t, atol=1e-10)


def test_frac_derivative_of_identity():
    # D^alpha x = x^(1 - alpha)
    assert frac_derivative(lambda x: x, 2.0, 0.5) == pytest.approx(math.sqrt(2.0), rel=1e-8)
    assert frac_derivative(np.sin, 1.0, 1.0) == pytest.approx(math.cos(1.0), rel=1e-8)


def test_frac_derivative_at_zero_warns():
    with pytest.warns(LimitFormWarning):
        value = frac_derivative(lambda x: x, 0.0, 1.0)
    assert value == pytest.approx(1.0, rel=1e-8)


def test_frac_integral_of_constant():
    # I_alpha 1 (x) = x^alpha / alpha
    expected = 2.0 * math.sqrt(math.pi)
    assert frac_integral(lambda x: np.ones_like(x), math.pi, 0.5) == pytest.approx(expected, rel=1e-12)
    assert frac_integral_reference(lambda s: 1.0, math.pi, 0.5) == pytest.approx(expected, rel=1e-6)


def test_grid_function_calculus():
    g = GridFunction.from_t(lambda t: np.sin(t), 1.0, size=2001)
    assert g.size == 2001
    assert g.t[-1] == pytest.approx(math.pi)
    np.testing.assert_allclose(g.derivative().values, np.cos(g.t), atol=1e-10)
    np.testing.assert_allclose(g.antiderivative().values, 1.0 - np.cos(g.t), atol=1e-10)
    assert g.integral() == pytest.approx(2.0, rel=1e-10)
    assert g(math.pi / 2) == pytest.approx(1.0, abs=1e-10)
    assert frac_integral(g, math.pi / 2, 1.0) == pytest.approx(1.0, abs=1e-10)


def test_grid_functions_on_different_grids_do_not_combine():
    a = GridFunction(np.zeros(11), 1.0)
    b = GridFunction(np.zeros(21), 1.0)
    with pytest.raises(DomainError):
        a + b


def test_grid_needs_two_points():
    with pytest.raises(DomainError):
        t_grid(1.0, 1)


@pytest.mark.parametrize("alpha", SELFTEST_ALPHAS)
def test_calculus_identities_hold_for_every_probe(alpha):
    for name, fn in probe_functions(alpha).items():
        report = check_calculus_identities(fn, alpha)
        assert report.worst < IDENTITY_TOLERANCE, name
