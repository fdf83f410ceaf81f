"""Acceptance criteria 1-8, one recorded pass/fail line per criterion."""

import math
import time
from fractions import Fraction

import numpy as np

from biharm import analysis, catalog
from biharm import biharmonic as bh
from biharm import geometry as geo
from biharm import jetcalc as jc
from biharm import spectral
from biharm.jetcalc import FdScheme

import oracles
from conftest import record_acceptance

R = catalog.INV_SQRT2
SCHEME = FdScheme(step=1e-3, stencil_order=4)
HALF = SCHEME.halved()
GRID = 4


def zero_residual_suite():
    return [
        (catalog.small_hypersphere(1, R), 1e-5),
        (catalog.small_hypersphere(2, R), 1e-5),
        (catalog.small_hypersphere(3, R), 1e-5),
        (catalog.clifford_product(1, 2, R, R), 1e-5),
        (catalog.clifford_geodesic(0.5), 1e-5),
        (catalog.biharmonic_circle(R), 1e-5),
        (catalog.antiinvariant_torus(), 1e-4),
        (catalog.composed_minimal(catalog.clifford_product(1, 1, R, R)), 1e-5),
        (catalog.circle_cross_minimal(2), 1e-5),
    ]


def suite1_verdicts(scheme):
    out = []
    for patch, tol in zero_residual_suite():
        rep = bh.residual_general(patch, patch.sample_points(GRID), scheme, tol)
        out.append((patch.name, rep.max_residual, tol, rep.verdict))
    return out


def test_criterion_1_zero_residual_suite():
    t0 = time.perf_counter()
    rows = suite1_verdicts(SCHEME)
    elapsed = time.perf_counter() - t0
    worst = max(r for _, r, _, _ in rows)
    ok = all(r <= tol and v == "proper_biharmonic" for _, r, tol, v in rows) and elapsed <= 60
    record_acceptance(1, ok, f"{len(rows)} examples, max residual {worst:.2e}, {elapsed:.1f} s")
    assert ok, rows


def sweep_rows(scheme):
    a_vals = sorted(set(np.round(np.arange(0.5, 0.9501, 0.05), 12)) | {R})
    r_vals = sorted(set(np.round(np.arange(0.5, 0.8501, 0.05), 12)) | {R})
    rows = []
    for m in (1, 2, 3):
        for a in a_vals:
            p = catalog.small_hypersphere(m, a)
            rep = bh.residual_general(p, p.sample_points(3), scheme)
            rows.append((f"small_hypersphere m={m}", a, rep.max_residual, rep.verdict))
    for m1, m2 in [(1, 2), (2, 1)]:
        for r1 in r_vals:
            p = catalog.clifford_product(m1, m2, r1, math.sqrt(1 - r1 * r1))
            rep = bh.residual_general(p, p.sample_points(3), scheme)
            rows.append((f"clifford_product {m1},{m2}", r1, rep.max_residual, rep.verdict))
    flat = catalog.clifford_product(1, 1, R, R)
    harmonic = bh.residual_general(flat, flat.sample_points(3), scheme).verdict
    return rows, harmonic


def sweep_ok(rows, harmonic):
    for _, v, res, verdict in rows:
        near = abs(v - R) < 1e-3
        if near and not (res <= 1e-5 and verdict == "proper_biharmonic"):
            return False
        if not near and not res > 1e-3:
            return False
    return harmonic == "harmonic"


def test_criterion_2_iff_sweeps():
    rows, harmonic = sweep_rows(SCHEME)
    off = min(res for _, v, res, _ in rows if abs(v - R) >= 1e-3)
    ok = sweep_ok(rows, harmonic)
    record_acceptance(2, ok, f"{len(rows)} sweep rows, min off-critical residual {off:.3e}, "
                             f"clifford_product(1,1) at 1/sqrt2: {harmonic}")
    assert ok


def known_values(scheme):
    out = {}
    H = lambda p: np.linalg.norm(geo.mean_curvature(p, p.sample_points(GRID)), axis=-1)
    out["composed"] = max(np.max(np.abs(H(catalog.build(n)) - 1.0))
                          for n in ("composed_clifford_torus", "composed_great_circle"))
    out["product"] = np.max(np.abs(H(catalog.clifford_product(1, 2, R, R)) - 1 / 3))
    out["torus"] = np.max(np.abs(H(catalog.antiinvariant_torus()) - 1 / 3))
    hypersurfaces = [catalog.small_hypersphere(m, R) for m in (1, 2, 3)]
    hypersurfaces += [catalog.clifford_product(m1, m2, R, R) for m1, m2 in [(1, 2), (2, 1), (1, 3), (2, 3)]]
    out["A2"] = max(bh.residual_hypersurface(p, p.sample_points(3), scheme).extras["A_squared_minus_mc"]
                    for p in hypersurfaces)
    ctrl = catalog.small_hypersphere(2, 0.8)
    rep = bh.residual_hypersurface(ctrl, ctrl.sample_points(GRID), scheme)
    out["control"] = rep.max_norms["first"]
    out["control_verdict"] = rep.verdict
    return out


def test_criterion_3_known_values():
    v = known_values(SCHEME)
    ok = (v["composed"] <= 1e-6 and v["product"] <= 1e-6 and v["torus"] <= 1e-5 and v["A2"] <= 1e-6
          and abs(v["control"] - 0.65625) <= 1e-4)
    record_acceptance(3, ok, f"|H| errors {v['composed']:.1e}/{v['product']:.1e}/{v['torus']:.1e}, "
                             f"||A|^2-m| {v['A2']:.1e}, control residual {v['control']:.6f}")
    assert ok


def test_criterion_4_chen_type():
    t0 = time.perf_counter()
    circle = spectral.chen_type(spectral.build_mesh(catalog.biharmonic_circle(R), 256))
    geod = spectral.chen_type(spectral.build_mesh(catalog.clifford_geodesic(0.5), 400, open_ok=True))
    torus = spectral.chen_type(spectral.build_mesh(catalog.antiinvariant_torus(), 24))
    elapsed = time.perf_counter() - t0
    # exact eigenvalues from the analytic module
    e_circle = analysis.type_eigenvalues(1, 1)
    e_geod = analysis.type_eigenvalues(1, Fraction(1, 4))
    e_torus = analysis.type_eigenvalues(3, Fraction(1, 9))
    exact_ok = e_circle == 2 and set(e_geod) == {Fraction(1, 2), Fraction(3, 2)} and set(e_torus) == {2, 4}
    ok = (exact_ok and elapsed <= 180
          and circle.k == 1 and abs(circle.eigenvalues[0] - float(e_circle)) <= 1e-3
          and geod.k == 2 and np.allclose(geod.eigenvalues, sorted(map(float, e_geod)), atol=1e-3)
          and torus.k == 2 and np.allclose(torus.eigenvalues, sorted(map(float, e_torus)), atol=1e-2))
    record_acceptance(4, ok, f"circle {circle.eigenvalues[0]:.6f}, geodesic "
                             f"{[round(x, 6) for x in geod.eigenvalues]}, torus "
                             f"{[round(x, 5) for x in torus.eigenvalues]}, {elapsed:.1f} s")
    assert ok


PROPER = ["small_hypersphere", "clifford_product", "biharmonic_circle", "clifford_geodesic",
          "antiinvariant_torus", "composed_clifford_torus", "composed_great_circle", "circle_cross_minimal"]
COMPACT = [catalog.biharmonic_circle(R), catalog.small_hypersphere(2, R), catalog.clifford_product(1, 2, R, R),
           catalog.antiinvariant_torus(), catalog.circle_cross_minimal(2),
           catalog.build("composed_clifford_torus")]


def identity_residuals(scheme):
    return {n: bh.identity_cmc(catalog.build(n), catalog.build(n).sample_points(GRID), scheme).residual
            for n in PROPER}


def test_criterion_5_identities():
    ids = identity_residuals(SCHEME)
    hh = [spectral.verify_caract_bih_HH(spectral.build_mesh(p, open_ok=True)).residual for p in COMPACT]
    ctrl = catalog.small_hypersphere(2, 0.8)
    hh_ctrl = spectral.verify_caract_bih_HH(spectral.build_mesh(ctrl, open_ok=True)).residual
    ok = max(ids.values()) <= 1e-5 and max(hh) <= 1e-3 and hh_ctrl > 1e-1
    record_acceptance(5, ok, f"identity max {max(ids.values()):.1e}, HH max {max(hh):.1e}, "
                             f"HH control {hh_ctrl:.4f}")
    assert ok


def composition_reports(scheme):
    a = 0.9
    reps = [bh.composition_codim2(catalog.sphere_in_sphere(m, R, a), a,
                                  catalog.sphere_in_sphere(m, R, a).sample_points(GRID), scheme)
            for m in (1, 2)]
    inners = [catalog.clifford_product(1, 1, R, R).scaled(R)] + [catalog.sphere_in_sphere(m, R, R) for m in (1, 2)]
    minimal = [bh.composition_codim2(p, R, p.sample_points(GRID), scheme) for p in inners]
    return reps, minimal


def test_criterion_6_composition():
    reps, minimal = composition_reports(SCHEME)
    a = 0.9
    ok = True
    for m, r in zip((1, 2), reps):
        ok &= r.tau_residual <= 1e-6 and r.tau2_residual <= 1e-6
        ok &= abs(r.tau_j_sq_required - m * m * (2 * a * a - 1) / (a * a)) <= 1e-12
        ok &= r.tau_j_sq_error <= 1e-6
        ok &= r.verdict == "proper_biharmonic"
    for r in minimal:
        ok &= r.tau_residual <= 1e-6 and r.tau2_residual <= 1e-6 and r.tau_j_sq_error <= 1e-6
        ok &= r.verdict == "proper_biharmonic"
    worst = max(max(r.tau_residual, r.tau2_residual, r.tau_j_sq_error) for r in reps + minimal)
    record_acceptance(6, ok, f"a = 0.9 (m = 1, 2) and minimal inner at a = 1/sqrt2; worst identity error {worst:.1e}")
    assert ok


def test_criterion_7_exact_analysis():
    ok = True
    for m in range(2, 13):
        for c in (-1, 1):
            sys_ = analysis.two_curvature_system(m, c)
            if m == 4:
                ok &= sys_.verdict == "m_equals_4_branch"
            else:
                ok &= sys_.verdict == "f_constant"
                ok &= sys_.D.coefficient(2) == oracles.displayed_eliminations(m, c)[4]
    ok &= all(analysis.hyperbolic_nonexistence(m, -1).verdict == "nonexistent" for m in range(1, 13))
    clash = [m for m in range(1, 13) if analysis.pseudo_umbilical_coefficient_clash(m).verdict == "undetermined"]
    ok &= clash == [4]
    record_acceptance(7, ok, f"m = 2..12, c = -1, 1; D f^4 at m = 3: "
                             f"{analysis.two_curvature_system(3, 1).D.coefficient(2)}; clash undetermined at {clash}")
    assert ok


def test_criterion_8_oracle_equivalence():
    worst = 0.0
    for name in catalog.ENTRIES:
        patch = catalog.build(name)
        pts = patch.sample_points(GRID if patch.dim < 3 else 3)
        jet = patch.jet(pts, 3)
        alphas = jc.multi_indices(patch.dim, 3)
        fd = jc.fd_partials(lambda p: jc.evaluate(patch.map, patch.wrap(p)), pts, alphas, SCHEME, domain=patch)
        for k, alpha in enumerate(alphas):
            err = np.abs(jet.derivative(alpha) - fd[k]) / (1 + np.abs(fd[k]))
            worst = max(worst, float(err.max()))
    # verdicts of suites 1-6 under a halved step
    same = [v for *_, v in suite1_verdicts(SCHEME)] == [v for *_, v in suite1_verdicts(HALF)]
    rows, harmonic = sweep_rows(HALF)
    same &= sweep_ok(rows, harmonic)
    v = known_values(HALF)
    same &= v["A2"] <= 1e-6 and abs(v["control"] - 0.65625) <= 1e-4 and v["control_verdict"] == "not_biharmonic"
    same &= max(identity_residuals(HALF).values()) <= 1e-5
    reps, minimal = composition_reports(HALF)
    same &= all(r.verdict == "proper_biharmonic" for r in reps + minimal)
    ok = worst <= 1e-5 and same
    record_acceptance(8, ok, f"jet vs FD worst relative {worst:.1e}; halved-step verdicts unchanged: {same}")
    assert ok
