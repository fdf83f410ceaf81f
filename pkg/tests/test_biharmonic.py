import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biharm import analysis, catalog
from biharm import biharmonic as bh
from biharm import geometry as geo
from biharm.jetcalc import FdScheme

import oracles

R = catalog.INV_SQRT2
PROPER = ["small_hypersphere", "clifford_product", "biharmonic_circle", "clifford_geodesic",
          "antiinvariant_torus", "composed_clifford_torus", "composed_great_circle", "circle_cross_minimal"]


@pytest.mark.parametrize("name", PROPER)
def test_proper_biharmonic_examples(name):
    patch = catalog.build(name)
    rep = bh.residual_general(patch, patch.sample_points(3))
    assert rep.max_residual <= 1e-6
    assert rep.verdict == "proper_biharmonic"
    assert not rep.failures


@pytest.mark.parametrize("name", PROPER)
def test_bitension_agrees(name):
    patch = catalog.build(name)
    rep = bh.bitension_report(patch, patch.sample_points(3))
    assert rep.verdict == "proper_biharmonic"
    assert rep.extras["tangency"] <= 1e-6


def test_exact_bitension_route():
    patch = catalog.antiinvariant_torus()
    tau2 = bh.bitension_sphere(patch, patch.sample_points(2), scheme=None)
    assert np.max(np.abs(tau2)) <= 1e-10


def test_minimal_is_harmonic():
    for patch in [catalog.clifford_product(1, 1, R, R), catalog.small_hypersphere(2, 1.0),
                  catalog.clifford_geodesic(0.0)]:
        assert bh.residual_general(patch, patch.sample_points(3)).verdict == "harmonic"


@pytest.mark.parametrize("m,a", [(2, 0.8), (3, 0.6), (1, 0.5)])
def test_small_hypersphere_normal_residual(m, a):
    patch = catalog.small_hypersphere(m, a)
    rep = bh.residual_general(patch, patch.sample_points(2))
    assert rep.max_norms["normal"] == pytest.approx(oracles.umbilical_normal_residual(m, a), rel=1e-6)
    assert rep.max_norms["tangent"] <= 1e-8
    assert rep.verdict == "not_biharmonic"


def test_small_hypersphere_bitension_closed_form():
    patch = catalog.small_hypersphere(2, 0.8)
    tau2 = bh.bitension_sphere(patch, patch.sample_points(2))
    np.testing.assert_allclose(np.linalg.norm(tau2, axis=-1), oracles.umbilical_bitension(2, 0.8), rtol=1e-6)
    assert oracles.umbilical_bitension(2, 0.8) == pytest.approx(1.3125)


def test_bitension_is_m_times_normal_residual_for_parallel_H():
    for patch in [catalog.small_hypersphere(3, 0.6), catalog.clifford_product(1, 2, 0.6, 0.8)]:
        pts = patch.sample_points(2)
        tau2 = np.linalg.norm(bh.bitension_sphere(patch, pts), axis=-1)
        res = bh.residual_general(patch, pts).max_norms["normal"]
        assert np.max(tau2) == pytest.approx(patch.dim * res, rel=1e-5)


def test_unbalanced_product_not_biharmonic():
    patch = catalog.clifford_product(1, 2, 0.6, 0.8)
    rep = bh.residual_general(patch, patch.sample_points(2))
    assert rep.max_norms["normal"] == pytest.approx(oracles.product_normal_residual(1, 2, 0.6, 0.8), rel=1e-6)
    assert rep.verdict == "not_biharmonic"


def test_hypersurface_system_matches_general():
    for patch in [catalog.small_hypersphere(2, 0.8), catalog.clifford_product(1, 2, R, R),
                  catalog.clifford_product(2, 1, 0.8, 0.6)]:
        pts = patch.sample_points(2)
        hs = bh.residual_hypersurface(patch, pts)
        gen = bh.residual_general(patch, pts)
        assert hs.max_norms["first"] == pytest.approx(gen.max_norms["normal"], abs=1e-8)
        assert hs.verdict == gen.verdict
        assert hs.extras["cmc"]


def test_hypersurface_reduced_condition():
    # CMC proper biharmonic hypersurfaces satisfy |A|^2 = m
    for m1, m2 in [(1, 2), (1, 3), (2, 3)]:
        patch = catalog.clifford_product(m1, m2, R, R)
        rep = bh.residual_hypersurface(patch, patch.sample_points(2))
        assert rep.extras["A_squared_minus_mc"] <= 1e-10
    rep = bh.residual_hypersurface(catalog.small_hypersphere(2, 0.8), catalog.small_hypersphere(2, 0.8).sample_points(2))
    assert rep.extras["A_squared_max"] == pytest.approx(1.125)


def test_hypersurface_rejects_higher_codimension():
    with pytest.raises(geo.UnsupportedError):
        bh.residual_hypersurface(catalog.antiinvariant_torus())


def test_fd_step_halving_stable():
    patch = catalog.antiinvariant_torus()
    pts = patch.sample_points(2)
    a = bh.residual_general(patch, pts, FdScheme(step=1e-3)).max_residual
    b = bh.residual_general(patch, pts, FdScheme(step=5e-4)).max_residual
    assert a <= 1e-6 and b <= 1e-6
    patch = catalog.small_hypersphere(2, 0.8)
    a = bh.residual_general(patch, pts[:, :2] % 1.0 + 1.0, FdScheme(step=1e-3)).max_residual
    b = bh.residual_general(patch, pts[:, :2] % 1.0 + 1.0, FdScheme(step=5e-4)).max_residual
    assert a == pytest.approx(b, rel=1e-6)


def test_exact_and_fd_routes_agree():
    patch = catalog.clifford_geodesic(0.5)
    pts = patch.sample_points(4)
    a = bh.residual_general(patch, pts, None).residuals
    b = bh.residual_general(patch, pts).residuals
    np.testing.assert_allclose(a, b, atol=1e-7)


def test_report_points_sorted_and_per_point():
    patch = catalog.small_hypersphere(2, 0.8)
    pts = patch.sample_points(2)[::-1]
    rep = bh.residual_general(patch, pts)
    np.testing.assert_array_equal(rep.points, bh.sort_points(pts))
    assert len(rep.per_point) == len(pts)


def test_failed_point_flagged_not_aborted():
    patch = catalog.small_hypersphere(2, R)
    pts = np.array([[1.0, 1.0], [0.2001, 1.0], [2.0, 3.0]])
    rep = bh.residual_general(patch, pts)
    assert len(rep.failures) == 1
    assert np.isnan(rep.residuals).sum() == 2
    assert rep.verdict == "inconclusive"


def test_classify():
    assert bh.classify(0.0, 0.0) == "harmonic"
    assert bh.classify(1.0, 1e-7) == "proper_biharmonic"
    assert bh.classify(1.0, 1.0) == "not_biharmonic"
    assert bh.classify(1.0, 5e-5) == "inconclusive"
    assert bh.classify(1.0, math.nan) == "inconclusive"


@given(st.floats(0.2, 0.99))
@settings(max_examples=15, deadline=None)
def test_biharmonic_mean_curvature_bounded(a):
    # biharmonic hypersurfaces with parallel H have |H| in (0, 1]; only a = 1/sqrt2 passes
    patch = catalog.small_hypersphere(2, a)
    rep = bh.residual_general(patch, patch.sample_points(1))
    H = np.linalg.norm(geo.mean_curvature(patch, patch.sample_points(1)), axis=-1)
    if rep.verdict == "proper_biharmonic":
        assert np.all((H > 0) & (H <= 1 + 1e-9))
        assert a == pytest.approx(R, abs=1e-4)


@pytest.mark.parametrize("name", PROPER)
def test_identity_cmc(name):
    # the identity is a consequence of biharmonicity, so only proper examples
    patch = catalog.build(name)
    rep = bh.identity_cmc(patch, patch.sample_points(2))
    assert rep.residual <= 1e-6
    assert rep.slack >= -1e-9


def test_identity_slack_values():
    for name in ["composed_clifford_torus", "small_hypersphere"]:
        assert bh.identity_cmc(catalog.build(name)).slack == pytest.approx(0.0, abs=1e-9)
    rep = bh.identity_cmc(catalog.clifford_product(1, 2, R, R))
    assert rep.slack > 0.1
    # fails off the biharmonic locus
    assert not bh.identity_cmc(catalog.small_hypersphere(2, 0.8)).holds


def test_pseudo_umbilical():
    pu, lam, second = bh.pseudo_umbilical_check(catalog.build("composed_clifford_torus"))
    assert pu and second <= 1e-6
    np.testing.assert_allclose(lam, 1.0, atol=1e-8)
    pu, lam, second = bh.pseudo_umbilical_check(catalog.build("circle_cross_minimal"))
    assert not pu and second is None
    assert not bh.pseudo_umbilical_check(catalog.antiinvariant_torus()).is_pu


def test_parallel_mean_curvature():
    for name in ["composed_clifford_torus", "composed_great_circle", "small_hypersphere",
                 "clifford_product", "antiinvariant_torus", "circle_cross_minimal"]:
        assert bh.parallel_mean_curvature_check(catalog.build(name)), name
    geo_patch = catalog.clifford_geodesic(0.5)
    assert not bh.parallel_mean_curvature_check(geo_patch)
    assert bh.max_normal_derivative(geo_patch) > 1e-2


def test_scalar_curvature_matches_closed_form():
    # proper biharmonic CMC hypersurface: s = m^2(1 + |H|^2) - 2m
    for m1, m2 in [(1, 2), (1, 3), (2, 3)]:
        patch = catalog.clifford_product(m1, m2, R, R)
        m = m1 + m2
        H2 = float(np.sum(geo.mean_curvature(patch, patch.center) ** 2))
        s = geo.scalar_curvature(patch, patch.center)
        assert s == pytest.approx(m * m * (1 + H2) - 2 * m)
        assert s == pytest.approx(float(analysis.scalar_curvature_cmc(m, Fraction(m2 - m1, m) ** 2)), rel=1e-9)


@pytest.mark.parametrize("m", [1, 2])
def test_composition_codim2(m):
    a = 0.9
    inner = catalog.sphere_in_sphere(m, R * a, a) if m == 2 else catalog.sphere_in_sphere(1, 0.6, a)
    rep = bh.composition_codim2(inner, a, inner.sample_points(2))
    assert rep.tau_residual <= 1e-8
    assert rep.tau2_residual <= 1e-6


def test_composition_required_tension():
    a = 0.9
    inner = catalog.sphere_in_sphere(1, 0.6, a)
    rep = bh.composition_codim2(inner, a, inner.sample_points(2))
    c2 = a * a / (1 - a * a)
    assert rep.tau_j_sq_required == pytest.approx(1 * 1 * (c2 - 1) / c2)


def test_composition_rejects_wrong_radius():
    with pytest.raises(bh.EmbeddingError):
        bh.composition_codim2(catalog.small_hypersphere(2, 0.8), 0.9)
    with pytest.raises(bh.EmbeddingError):
        bh.composition_codim2(catalog.sphere_in_sphere(1, 0.6, 0.9), 1.0)


def test_bitension_radius_scaling():
    patch = catalog.small_hypersphere(2, 0.8)
    big = patch.scaled(2.0)
    pts = patch.sample_points(2)
    t1 = bh.bitension_sphere(patch, pts)
    t2 = bh.bitension_sphere(big, pts, rescale=True)
    np.testing.assert_allclose(t2, t1 / 8.0, atol=1e-9)
    with pytest.raises(ValueError):
        bh.bitension_sphere(big, pts)


def test_product_minimal_point_is_harmonic():
    # r1^2 = m1/m is the minimal Clifford hypersurface, harmonic rather than proper
    patch = catalog.clifford_product(1, 3, 0.5, math.sqrt(0.75))
    assert bh.residual_general(patch, patch.sample_points(2)).verdict == "harmonic"
