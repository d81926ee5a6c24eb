import math

import numpy as np
import pytest

from confnodal.asymptotics import coefficients
from confnodal.calculus import AlphaOrder, GridFunction, t_grid
from confnodal.model import (
    PRESETS,
    TrigPotential,
    capital_Q,
    make_potential,
    potential_samples,
    sampled_potential,
)
from confnodal.shared.errors import ConfigError, ConstantPotentialError, MeanZeroError


@pytest.mark.parametrize("name", sorted(PRESETS))
@pytest.mark.parametrize("alpha", [0.5, 1.0])
def test_every_preset_validates(pair, name, alpha):
    pp = pair(name, alpha)
    assert abs(pp.report["mean_p"]) < 1e-8
    assert capital_Q(pp, math.pi) == pytest.approx(0.0, abs=1e-12)


def test_unknown_preset(pair):
    with pytest.raises(ConfigError, match="unknown preset"):
        pair("nope", 0.5)


def test_roundtrip_preset_has_mean_q_one_tenth(pair):
    for alpha in (0.5, 0.75, 1.0):
        assert pair("roundtrip", alpha).report["mean_q"] == pytest.approx(0.1, abs=1e-10)


def test_cosine_preset_coefficient(pair):
    # a1 = int p^2 = 0.04 T / 2 with T = 2 sqrt(pi)
    bundle = coefficients(pair("cosine", 0.5))
    assert bundle.a1 == pytest.approx(0.02 * 2.0 * math.sqrt(math.pi), rel=1e-8)
    assert bundle.a2 == pytest.approx(0.0, abs=1e-12)
    assert bundle.p_ends == pytest.approx(0.0, abs=1e-15)


def test_nonzero_mean_is_rejected():
    a = AlphaOrder(0.5)
    with pytest.raises(MeanZeroError):
        make_potential(TrigPotential(a, constant=0.1, cos=(0.2,)), 0.0, a)


def test_constant_p_is_rejected_unless_allowed():
    a = AlphaOrder(1.0)
    with pytest.raises(ConstantPotentialError):
        make_potential(0.3, 0.0, a)
    with pytest.raises(ConstantPotentialError):
        make_potential(0.0, 1.0, a)
    pp = make_potential(0.0, 1.0, a, allow_constant_p=True)
    assert pp.report["mean_q"] == pytest.approx(1.0)


def test_trig_potential_slope_and_integral_are_consistent():
    a = AlphaOrder(0.75)
    pot = TrigPotential(a, constant=0.0, cos=(0.15, 0.05), sin=(0.1,), center_sines=True)
    t = t_grid(a, 2001)
    g = GridFunction(pot.value_at(t), a)
    np.testing.assert_allclose(g.slope_values, pot.slope_at(t), atol=1e-9)
    np.testing.assert_allclose(g.integral_values, pot.integral_at(t), atol=1e-10)


def test_callable_specs_are_sampled():
    a = AlphaOrder(1.0)
    pp = make_potential(np.cos, lambda x: 0.5 + 0 * x, a)
    assert isinstance(pp.p, GridFunction)
    assert pp.p(1.0) == pytest.approx(math.cos(1.0), abs=1e-10)
    assert pp.report["mean_q"] == pytest.approx(0.5)


def test_sampled_potential_resamples_onto_the_grid():
    x = np.linspace(0.0, math.pi, 401)
    g = sampled_potential(x, np.cos(x), 1.0, size=1001)
    assert g.size == 1001
    np.testing.assert_allclose(g.values, np.cos(g.x), atol=1e-8)


def test_potential_samples_columns(pair):
    data = potential_samples(pair("roundtrip", 0.5), size=101)
    assert set(data) == {"x", "t", "p", "q"}
    assert data["x"][-1] == pytest.approx(math.pi)
