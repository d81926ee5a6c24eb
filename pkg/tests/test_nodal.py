import math

import numpy as np
import pytest

from confnodal.forward.nodal import (
    asymptotic_dataset,
    asymptotic_nodes,
    compute_nodes,
    nodal_dataset,
    nodes_alpha_power,
)
from confnodal.forward.spectral import locate_eigenvalues
from confnodal.shared.errors import NodalCountError
from confnodal.shared.types import Provenance, SpectrumEntry, SpectrumRecord


def test_third_eigenfunction_nodes(pair):
    np.testing.assert_allclose(compute_nodes(pair("zero", 1.0), 3), [math.pi / 3, 2 * math.pi / 3], atol=1e-9)


def test_half_order_second_eigenfunction(pair):
    # (x^1/2) = pi^(1/2) / 2 gives x = pi / 4
    np.testing.assert_allclose(compute_nodes(pair("zero", 0.5), 2), [math.pi / 4], atol=1e-9)


def test_first_eigenfunction_has_no_interior_nodes(pair):
    assert compute_nodes(pair("zero", 0.75), 1).size == 0


@pytest.mark.parametrize("alpha", [0.5, 0.75, 1.0])
def test_zero_potential_nodes_in_closed_form(pair, alpha):
    pp = pair("zero", alpha)
    spectrum = locate_eigenvalues(pp, 1, 20)
    for n in (2, 7, 20):
        nodes = compute_nodes(pp, n, spectrum)
        j = np.arange(1, n)
        np.testing.assert_allclose(nodes_alpha_power(nodes, pp), j * math.pi**alpha / n, atol=1e-8)


def test_wrong_eigenvalue_gives_wrong_node_count(pair):
    # lam = 2 is the second eigenvalue, so n = 3 finds one node instead of two
    fake = SpectrumRecord(alpha=1.0, entries=[SpectrumEntry(n=3, lambda_n=2.0, residual=0.0, guess=3.0)])
    with pytest.raises(NodalCountError) as info:
        compute_nodes(pair("zero", 1.0), 3, fake)
    assert info.value.expected == 2
    assert info.value.actual == 1


def test_asymptotic_nodes_of_zero_potential_are_exact(pair):
    pp = pair("zero", 0.5)
    nodes = asymptotic_nodes(pp, 8, order=3)
    np.testing.assert_allclose(nodes**0.5, np.arange(1, 8) * math.sqrt(math.pi) / 8, atol=1e-14)
    assert asymptotic_nodes(pp, 1).size == 0


def _scaled_residual(pp, n, order, scheme=None):
    numeric = compute_nodes(pp, n, scheme=scheme)
    asym = asymptotic_nodes(pp, n, order=order)
    return np.max(np.abs(nodes_alpha_power(asym, pp) - nodes_alpha_power(numeric, pp)))


@pytest.mark.parametrize("scheme", ["magnus4", "rk4"])
@pytest.mark.parametrize("name, alpha", [("cosine", 0.5), ("shifted", 0.75)])
def test_asymptotic_nodes_track_numeric_nodes(pair, name, alpha, scheme):
    pp = pair(name, alpha)
    for n in (10, 20, 40, 60):
        assert _scaled_residual(pp, n, 2, scheme) * n * n < 0.05
    assert _scaled_residual(pp, 40, 2) < 0.5 * _scaled_residual(pp, 40, 1)


def test_nodal_dataset_reports(pair):
    nodal_set = nodal_dataset(pair("zero", 1.0), 20)
    assert nodal_set.indices == list(range(1, 21))
    assert nodal_set.nodes(1).size == 0
    report = nodal_set.report
    assert report["max_union_gap"] == pytest.approx(math.pi / 20, abs=1e-8)
    gaps = [item["max_gap"] for item in report["density"]]
    assert all(b <= a + 1e-12 for a, b in zip(gaps, gaps[1:]))
    assert all(item["interlaces"] for item in report["interlacing"])


def test_asymptotic_dataset_is_usable_as_input(pair):
    nodal_set = asymptotic_dataset(pair("roundtrip", 1.0), [10, 15, 20])
    assert nodal_set.provenance is Provenance.ASYMPTOTIC
    assert nodal_set.indices == [10, 15, 20]
    assert nodal_set.nodes(15).size == 14
