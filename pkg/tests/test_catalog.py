import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biharm import catalog
from biharm import geometry as geo
from biharm.catalog import CatalogError, INV_SQRT2

import oracles


@pytest.mark.parametrize("name", list(catalog.ENTRIES))
def test_entries_lie_on_their_sphere(name):
    patch = catalog.build(name)
    geo.validate_patch(patch)
    x = patch.evaluate(patch.sample_points(3))
    np.testing.assert_allclose(np.linalg.norm(x, axis=-1), patch.radius, atol=1e-12)


@pytest.mark.parametrize("name", list(catalog.ENTRIES))
def test_expectations_have_provenance(name):
    exp = catalog.expectations(name)
    for key, e in exp.items():
        assert e.provenance, key


def test_bad_parameters_rejected():
    with pytest.raises(CatalogError):
        catalog.small_hypersphere(2, 1.2)
    with pytest.raises(CatalogError):
        catalog.small_hypersphere(0, 0.5)
    with pytest.raises(CatalogError):
        catalog.clifford_product(1, 2, 0.6, 0.6)
    with pytest.raises(CatalogError):
        catalog.clifford_geodesic(1.0)
    with pytest.raises(CatalogError):
        catalog.build("no_such_entry")
    with pytest.raises(CatalogError):
        catalog.build("small_hypersphere", {"radius": 0.5})


def test_r2_filled_from_r1():
    patch = catalog.build("clifford_product", {"m1": 1, "m2": 2, "r1": 0.6})
    assert patch.params["r2"] == pytest.approx(0.8)


def test_composed_minimal_rejects_non_minimal():
    with pytest.raises(CatalogError):
        catalog.composed_minimal(catalog.small_hypersphere(2, 0.8))


def test_composed_entries_are_minimal_inside_small_sphere():
    patch = catalog.build("composed_clifford_torus")
    assert patch.ambient_dim == 5
    x = patch.evaluate(patch.sample_points(2))
    np.testing.assert_allclose(x[:, -1], INV_SQRT2, atol=1e-15)
    np.testing.assert_allclose(np.linalg.norm(x[:, :-1], axis=-1), INV_SQRT2, atol=1e-15)


def test_geodesic_periodicity():
    assert catalog.clifford_geodesic(0.0).fully_periodic
    p = catalog.clifford_geodesic(0.5)
    assert not p.fully_periodic
    assert p.upper[0] == pytest.approx(8 * math.pi)


def test_geodesic_unit_speed_and_curvature():
    for s in (0.0, 0.3, 0.5):
        p = catalog.clifford_geodesic(s)
        md = geo.first_fundamental(p, [1.0])
        assert md.g[0, 0] == pytest.approx(1.0)
        assert np.linalg.norm(geo.mean_curvature(p, [1.0])) == pytest.approx(oracles.geodesic_mean_curvature(s))
        assert oracles.geodesic_mean_curvature(s) == pytest.approx(s)


def test_antiinvariant_torus_is_flat_and_legendrian_shaped():
    p = catalog.antiinvariant_torus()
    assert (p.dim, p.ambient_dim) == (3, 6)
    assert p.fully_periodic
    md = geo.first_fundamental(p, p.sample_points(2))
    np.testing.assert_allclose(md.christoffel, 0.0, atol=1e-12)
    assert geo.scalar_curvature(p, [0.2, 0.3, 0.4]) == pytest.approx(0.0, abs=1e-10)


@pytest.mark.parametrize("name", ["small_hypersphere", "clifford_product", "biharmonic_circle",
                                  "composed_clifford_torus", "circle_cross_minimal", "antiinvariant_torus"])
def test_expected_mean_curvature_matches_geometry(name):
    patch = catalog.build(name)
    exp = catalog.expectations(name)["mean_curvature"]
    H = np.linalg.norm(geo.mean_curvature(patch, patch.sample_points(2)), axis=-1)
    np.testing.assert_allclose(H, exp.value, atol=exp.tol)


@given(st.floats(0.1, 1.0))
@settings(max_examples=25, deadline=None)
def test_hypersphere_expectation_matches_oracle(a):
    exp = catalog.expectations("small_hypersphere", {"m": 3, "a": a})
    assert exp["normal_residual"].value == pytest.approx(oracles.umbilical_normal_residual(3, a), abs=1e-12)
    assert exp["verdict"].value == ("harmonic" if a == 1.0 else
                                    "proper_biharmonic" if abs(a - INV_SQRT2) < 1e-12 else "not_biharmonic")


@given(st.floats(0.2, 0.95))
@settings(max_examples=25, deadline=None)
def test_product_mean_curvature_matches_oracle(r1):
    r2 = math.sqrt(1 - r1 * r1)
    exp = catalog.expectations("clifford_product", {"m1": 1, "m2": 2, "r1": r1})
    assert exp["mean_curvature"].value == pytest.approx(oracles.product_mean_curvature(1, 2, r1, r2))


def test_scaled_patch():
    p = catalog.small_hypersphere(2, 0.8).scaled(2.0)
    assert p.radius == 2.0
    x = p.evaluate(p.sample_points(2))
    np.testing.assert_allclose(np.linalg.norm(x, axis=-1), 2.0)
