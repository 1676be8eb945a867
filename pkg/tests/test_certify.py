import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bandcert import hermitian as hm
from bandcert.catalog import d4_family, honeycomb_family, lieb_family, multi_edge_family
from bandcert.certify import (Certificate, GridBudgetError, SearchConfig, Verdict, certify,
                              conjecture_probe, corner_points, dedupe, det_w_residual,
                              detect_flat_band, find_critical_point, grid_scan_oracle, is_corner,
                              low_dimension_upgrade, oracle_for, run_pipeline, verdict_from_inertia,
                              weyl_bracket_check)
from bandcert.dispersion import PreconditionError, band_at, derivative_pack
from bandcert.hermitian import Inertia
from bandcert.lattice import BlochFamily, grid_points, random_single_crossing_family, torus_distance
from bandcert.suites import random_critical_point

A0 = np.array([2 * np.pi / 3, -2 * np.pi / 3])
seeds = st.integers(0, 2**32 - 1)


def remark_matrix(eps):
    return np.array([[eps, 1j, 0], [-1j, eps, 0], [0, 0, 0]])


def test_corner_points():
    c = corner_points(2)
    assert [tuple(p) for p in c] == [(0, 0), (0, np.pi), (np.pi, 0), (np.pi, np.pi)]
    assert len(corner_points(4)) == 16
    assert is_corner([np.pi, -np.pi, 0.0]) and not is_corner([0.1, 0.0])
    with pytest.raises(ValueError):
        corner_points(0)


def test_verdict_from_inertia():
    assert verdict_from_inertia(Inertia(2, 0, 0)) == Verdict.GLOBAL_MIN
    assert verdict_from_inertia(Inertia(0, 1, 1)) == Verdict.GLOBAL_MAX
    assert verdict_from_inertia(Inertia(0, 0, 3)) == Verdict.FLAT_BAND
    assert verdict_from_inertia(Inertia(1, 1, 0)) == Verdict.NO_CERTIFICATE


def test_certificate_invariant_enforced():
    with pytest.raises(AssertionError):
        Certificate(np.zeros(2), 1, 0.0, Verdict.GLOBAL_MIN, (), Inertia(1, 1, 0), None, 0.0)


@pytest.mark.parametrize("eps", [0.5, 0.1, 0.9])
def test_three_dim_negative_control(eps):
    w = remark_matrix(eps)
    assert np.allclose(np.linalg.eigvalsh(w), [-1 + eps, 0, 1 + eps])
    assert np.allclose(np.linalg.eigvalsh(w.real), [0, eps, eps])
    assert det_w_residual(w) < 1e-12
    assert hm.inertia(w.real).minus == 0
    assert hm.inertia(w).minus == 1
    verdict, code = low_dimension_upgrade(w, 3)
    assert verdict is None and code == "dim_3_degenerate"
    assert verdict_from_inertia(hm.inertia(w)) == Verdict.NO_CERTIFICATE


def test_low_dimension_upgrade_rules():
    assert low_dimension_upgrade(np.diag([1.0, 0.0]), 2) == (Verdict.GLOBAL_MIN, "dim_le_2")
    assert low_dimension_upgrade(np.diag([-1.0, 0.0]), 2) == (Verdict.GLOBAL_MAX, "dim_le_2")
    assert low_dimension_upgrade(np.diag([1.0, 2.0]), 2)[0] is None
    assert low_dimension_upgrade(np.diag([1.0, 2.0, 3.0]), 3) == (Verdict.GLOBAL_MIN, "dim_3_nondegenerate")
    assert low_dimension_upgrade(np.eye(4), 4) == (None, "dim_ge_4")


@settings(max_examples=25)
@given(seeds)
def test_two_dim_upgrade_agrees_with_inertia(seed):
    # d = 2: det W = 0 and Re W semidefinite force W semidefinite
    rng = np.random.default_rng(seed)
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    w = rng.choice([-1, 1]) * rng.uniform(0.1, 3) * np.outer(v, v.conj())
    verdict, _ = low_dimension_upgrade(w, 2)
    assert verdict == verdict_from_inertia(hm.inertia(w))


def test_honeycomb_search_and_certificate():
    fam = honeycomb_family(0, 1)
    res = find_critical_point(fam, 1, [2.0, -2.0], mode="max")
    assert res.converged and torus_distance(res.eigen.alpha, A0) < 1e-8
    cert = certify(fam, res.eigen)
    assert cert.verdict == Verdict.GLOBAL_MAX
    assert cert.w_inertia == Inertia(0, 1, 1)
    assert cert.det_w_residual < 1e-9
    assert "dim_le_2" in cert.reason_codes
    rec = oracle_for(cert, fam, 101)
    assert rec.consistent and rec.grid_max <= 1e-10 and rec.margin >= -1e-10
    # with alpha0 added to the grid the scan attains the certified value
    scan = grid_scan_oracle(fam, 1, 101, extra_points=[A0])
    assert abs(scan.max) < 1e-10 and torus_distance(scan.argmax, A0) < 1e-12


def test_lieb_certificate():
    fam = lieb_family(1, -1, -1)
    cert = certify(fam, band_at(fam, [np.pi, np.pi], 3))
    assert cert.verdict == Verdict.GLOBAL_MIN and abs(cert.value - 1) < 1e-12
    assert "corner_point" in cert.reason_codes and cert.imag_w_norm < 1e-10
    assert oracle_for(cert, fam, 101).consistent
    scan = grid_scan_oracle(fam, 3, 101)
    assert abs(scan.min - 1) < 1e-12 and is_corner(scan.argmin)


def test_hypothesis_failures():
    me = multi_edge_family(4.0)
    cert = certify(me, band_at(me, [0, 0], 1))
    assert cert.verdict == Verdict.HYPOTHESIS_FAILED and cert.reason_codes == ("not_single_crossing",)
    lieb = lieb_family(1, -1, -1)
    cert = certify(lieb, band_at(lieb, [np.pi, np.pi], 1))
    assert cert.verdict == Verdict.HYPOTHESIS_FAILED and cert.reason_codes == ("eigenvalue_degenerate",)
    with pytest.raises(PreconditionError):
        certify(lieb, band_at(lieb, [0.3, 0.2], 3))


def test_vanishing_eigenvector_gate():
    # band 1 lives on vertex 1 only, the single crossing edge joins vertices 2 and 3
    c0 = np.diag([0.0, 5.0, 5.0]).astype(complex)
    coeffs = np.zeros((1, 3, 3), dtype=complex)
    coeffs[0, 1, 2] = 1.0
    fam = BlochFamily(c0, coeffs)
    be = band_at(fam, [0.4], 1)
    assert abs(be.value) < 1e-14
    cert = certify(fam, be)
    assert cert.verdict == Verdict.HYPOTHESIS_FAILED
    assert cert.reason_codes[0] == "eigvec_vanishes_both_ends"


def test_weyl_examples():
    fam = honeycomb_family(0, 1)
    pack = derivative_pack(fam, band_at(fam, A0, 1))
    chk = weyl_bracket_check(fam, pack, 1, grid_points(2, 61))
    assert chk.max_violation < 1e-10 and chk.lower_unbounded and not chk.upper_unbounded
    lieb = lieb_family(1, -1, -1)
    pack = derivative_pack(lieb, band_at(lieb, [np.pi, np.pi], 3))
    chk = weyl_bracket_check(lieb, pack, 3, grid_points(2, 61))
    assert chk.max_violation < 1e-10
    me = multi_edge_family(4.0)
    with pytest.raises(PreconditionError):
        weyl_bracket_check(me, derivative_pack(me, band_at(me, [0, 0], 1)), 1, grid_points(2, 5))


@settings(max_examples=10)
@given(seeds)
def test_weyl_random(seed):
    rng = np.random.default_rng(seed)
    fam, be, pack = random_critical_point(rng, d=2)
    chk = weyl_bracket_check(fam, pack, be.band, grid_points(2, 41))
    assert chk.max_violation < 1e-9 * pack.scale


@settings(max_examples=15)
@given(seeds, st.integers(1, 3))
def test_time_reversal_corners(seed, d):
    rng = np.random.default_rng(seed)
    fam = random_single_crossing_family(rng, int(rng.integers(2, 6)), d, real=True)
    for c in corner_points(d):
        for n in range(1, fam.size + 1):
            be = band_at(fam, c, n)
            if not be.simple:
                continue
            pack = derivative_pack(fam, be)
            assert np.abs(pack.gradient).max() < 1e-10 * max(1.0, pack.scale)
            assert np.abs(pack.w.imag).max() < 1e-10 * max(1.0, pack.scale)


@settings(max_examples=15)
@given(seeds)
def test_interior_det_w(seed):
    rng = np.random.default_rng(seed)
    fam, be, pack = random_critical_point(rng, real=True)
    if is_corner(be.alpha, 1e-6):
        return
    assert det_w_residual(pack.w) < 1e-6


@settings(max_examples=15)
@given(seeds)
def test_certificate_soundness(seed):
    rng = np.random.default_rng(seed)
    fam, be, pack = random_critical_point(rng, d=int(rng.integers(1, 3)))
    cert = certify(fam, be, pack)
    if cert.verdict in (Verdict.GLOBAL_MIN, Verdict.GLOBAL_MAX):
        assert oracle_for(cert, fam, 61).consistent


def test_search_determinism():
    fam = d4_family()
    a = find_critical_point(fam, 1, [0.3, -1.0, 2.0, 0.5], mode="max")
    b = find_critical_point(fam, 1, [0.3, -1.0, 2.0, 0.5], mode="max")
    assert a.eigen.alpha.tobytes() == b.eigen.alpha.tobytes() and a.iterations == b.iterations
    p1 = run_pipeline(honeycomb_family(0, 1), 1, SearchConfig(random_seeds=6), seed=3)
    p2 = run_pipeline(honeycomb_family(0, 1), 1, SearchConfig(random_seeds=6), seed=3, threads=4)
    assert [c.alpha_star.tobytes() for c in p1.certificates] == [c.alpha_star.tobytes() for c in p2.certificates]


def test_search_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(grad_tol=0)
    with pytest.raises(ValueError):
        SearchConfig(mode="sideways")


def test_dedupe_torus_and_mirror():
    pts = [np.array([1.0, 2.0]), np.array([1.0 + 2 * np.pi, 2.0]), np.array([-1.0, -2.0])]
    assert dedupe(pts, time_reversal=False) == [0, 2]
    assert dedupe(pts, time_reversal=True) == [0]


def test_grid_budget():
    with pytest.raises(GridBudgetError):
        grid_scan_oracle(d4_family(), 1, 60)
    with pytest.raises(ValueError):
        grid_scan_oracle(honeycomb_family(0, 1), 1, 1)


def test_flat_band_detection():
    lieb = lieb_family(1, -1, -1)
    assert detect_flat_band(lieb, 2, np.random.default_rng(0))
    assert not detect_flat_band(lieb, 3, np.random.default_rng(0))
    res = run_pipeline(lieb, 2)
    assert res.flat_band and res.certificates[0].verdict == Verdict.FLAT_BAND


def test_pipeline_lieb_band3():
    res = run_pipeline(lieb_family(1, -1, -1), 3)
    by = {c.verdict: c for c in res.certificates}
    assert torus_distance(by[Verdict.GLOBAL_MIN].alpha_star, [np.pi, np.pi]) < 1e-12
    assert abs(by[Verdict.GLOBAL_MAX].value - 3) < 1e-12


def test_conjecture_probe_honeycomb_consistent():
    fam = honeycomb_family(0, 1)
    cert = certify(fam, band_at(fam, A0, 1))
    rep = conjecture_probe(fam, 1, [cert], 61)
    assert rep.entries == () and rep.consistency == ()
    with pytest.raises(ValueError):
        conjecture_probe(fam, 2, [cert], 61)
