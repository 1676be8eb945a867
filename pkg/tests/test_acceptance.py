"""The twelve acceptance criteria, each at its stated tolerance.

Every test prints one PASS/FAIL line (also collected in the terminal summary)
followed by the sub-checks that failed.
"""

import time

import numpy as np

from bandcert import hermitian as hm
from bandcert.catalog import (D4_CORNER, D4_INTERIOR, HKS_GLOBAL_MAX_RAW, HKS_LOCAL_MAX_RAW,
                              HONEYCOMB_LATTICE_JACOBIAN, d4_family, hks_family, honeycomb_family,
                              lieb_family, multi_edge_family)
from bandcert.certify import (SearchConfig, Verdict, certify, conjecture_probe, corner_points,
                              det_w_residual, find_critical_point, grid_scan_oracle, is_corner,
                              low_dimension_upgrade, oracle_for, run_pipeline, verdict_from_inertia,
                              weyl_bracket_check)
from bandcert.dispersion import band_at, derivative_pack, reparameterize
from bandcert.lattice import (grid_points, random_single_crossing_family, to_zero_two_pi,
                              torus_distance)
from bandcert.suites import (eps_schur_suite, gradient_suite, haynsworth_suite, hessian_suite,
                             index_suite, random_block, reparam_suite, weyl_suite)
from conftest import ACCEPTANCE_LINES

A0 = np.array([2 * np.pi / 3, -2 * np.pi / 3])
PIPI = np.array([np.pi, np.pi])


class Criterion:
    def __init__(self, number: int, title: str):
        self.number, self.title = number, title
        self.items: list[tuple[str, bool, str]] = []
        self.t0 = time.perf_counter()

    def check(self, label: str, ok, detail: str = ""):
        self.items.append((label, bool(ok), detail))

    def runtime(self, limit: float):
        dt = time.perf_counter() - self.t0
        self.check(f"runtime < {limit:g} s", dt < limit, f"{dt:.2f} s")

    def finish(self):
        bad = [(l, d) for l, ok, d in self.items if not ok]
        status = "PASS" if not bad else "FAIL"
        line = f"criterion {self.number:2d} {status}  {self.title}"
        if bad:
            line += "  [" + "; ".join(f"{l}: {d}" for l, d in bad) + "]"
        ACCEPTANCE_LINES[self.number] = line
        print(line)
        assert not bad, line


def test_criterion_01_honeycomb():
    c = Criterion(1, "honeycomb (0,1): alpha0, W, inertia (0,1,1), GlobalMax confirmed on 101^2")
    fam = honeycomb_family(0.0, 1.0)
    res = find_critical_point(fam, 1, [2.0, -2.0], mode="max")
    dist = torus_distance(res.eigen.alpha, A0)
    c.check("critical point within 1e-8", res.converged and dist < 1e-8, f"{dist:.1e}")
    pack = derivative_pack(fam, res.eigen)
    w_ref = -np.array([[1, np.exp(-2j * np.pi / 3)], [np.exp(2j * np.pi / 3), 1]])
    dev = np.abs(pack.w - w_ref).max()
    c.check("W entrywise within 1e-9", dev < 1e-9, f"{dev:.1e}")
    c.check("inertia (0,1,1)", pack.w_inertia == hm.Inertia(0, 1, 1), str(pack.w_inertia))
    cert = certify(fam, res.eigen, pack)
    c.check("verdict GlobalMax", cert.verdict == Verdict.GLOBAL_MAX, cert.verdict.value)
    rec = oracle_for(cert, fam, 101)
    c.check("101x101 scan confirms within 1e-10", rec.consistent and rec.margin >= -1e-10,
            f"margin {rec.margin:.1e}")
    c.runtime(1.0)
    c.finish()


def test_criterion_02_lieb():
    c = Criterion(2, "Lieb (1,-1,-1): band 3 GlobalMin at (pi,pi), W, i_infty = 2, flat band 2")
    fam = lieb_family(1.0, -1.0, -1.0)
    res = run_pipeline(fam, 3)
    mins = [x for x in res.certificates if x.verdict == Verdict.GLOBAL_MIN]
    ok = bool(mins) and torus_distance(mins[0].alpha_star, PIPI) < 1e-12
    c.check("GlobalMin at (pi,pi)", ok, str([x.alpha_star for x in mins]))
    if mins:
        c.check("value 1 within 1e-12", abs(mins[0].value - 1) < 1e-12, f"{mins[0].value!r}")
    pack = derivative_pack(fam, band_at(fam, PIPI, 3))
    dev = np.abs(pack.w - np.diag([0.5, 0.5])).max()
    c.check("W = diag(1/2,1/2) within 1e-10", dev < 1e-10, f"{dev:.1e}")
    c.check("i_infty = 2", pack.i_infty == 2, str(pack.i_infty))
    flat = run_pipeline(fam, 2)
    c.check("flat band 2 detected", flat.flat_band and flat.certificates[0].verdict == Verdict.FLAT_BAND)
    c.runtime(1.0)
    c.finish()


def test_criterion_03_hks_magnetic():
    c = Criterion(3, "HKS magnetic beta=0.1: band-2 maxima, W eigenvalues, verdicts, probe")
    fam = hks_family(0.1)
    res = run_pipeline(fam, 2, SearchConfig(random_seeds=8))
    maxima = [x for x in res.certificates
              if x.rew_inertia is not None and x.rew_inertia.plus == 0
              and not is_corner(x.alpha_star, 1e-6)]
    c.check("two interior local maxima found", len(maxima) == 2, str(len(maxima)))
    published = ((HKS_GLOBAL_MAX_RAW, np.array([-0.3433, -0.0095]), Verdict.GLOBAL_MAX),
                 (HKS_LOCAL_MAX_RAW, np.array([-0.3240, 0.0097]), Verdict.NO_CERTIFICATE))
    for raw, w_ref, verdict in published:
        if not maxima:
            break
        near = min(maxima, key=lambda x: torus_distance(to_zero_two_pi(x.alpha_star), raw))
        got = to_zero_two_pi(near.alpha_star)
        dist = torus_distance(got, raw)
        c.check(f"location {raw.tolist()} within 2e-3", dist < 2e-3,
                f"found {np.round(got, 4).tolist()} at distance {dist:.2e}")
        dev = float(np.abs(near.w_eigenvalues - w_ref).max())
        c.check(f"W eigenvalues {w_ref.tolist()} within 2e-3", dev < 2e-3,
                f"found {np.round(near.w_eigenvalues, 4).tolist()}")
        c.check(f"verdict {verdict.value}", near.verdict == verdict, near.verdict.value)
    uncertified = [x for x in maxima if x.verdict == Verdict.NO_CERTIFICATE]
    if uncertified:
        probe = conjecture_probe(fam, 2, maxima)
        c.check("probe: indefinite point dominated", probe.all_dominated and probe.entries)
    c.runtime(5.0)
    c.finish()


def test_criterion_04_multi_edge():
    c = Criterion(4, "multi-edge t=4: HypothesisFailed, origin is a local min above the global min")
    fam = multi_edge_family(4.0)
    be = band_at(fam, [0.0, 0.0], 1)
    cert = certify(fam, be)
    c.check("HypothesisFailed(not_single_crossing)",
            cert.verdict == Verdict.HYPOTHESIS_FAILED and "not_single_crossing" in cert.reason_codes,
            f"{cert.verdict.value} {cert.reason_codes}")
    pipe = run_pipeline(fam, 1)
    c.check("pipeline never certifies", all(x.verdict == Verdict.HYPOTHESIS_FAILED for x in pipe.certificates))
    scan = grid_scan_oracle(fam, 1, 101)
    margin = be.value - scan.min
    c.check("lambda_1(0,0) - grid min > 0.1", margin > 0.1, f"{margin:.4f}")
    pack = derivative_pack(fam, be)
    g = float(np.abs(pack.gradient).max())
    c.check("gradient at origin ~ 0", g < 1e-12, f"{g:.1e}")
    re_in = hm.inertia(pack.w.real, pack.tol)
    c.check("Re W(0,0) psd", re_in.minus == 0, str(re_in))
    c.runtime(2.0)
    c.finish()


def test_criterion_05_d4():
    c = Criterion(5, "d=4 example: interior local max 0.989459, corner GlobalMax 1.2467, band-2 min")
    fam = d4_family()
    res = run_pipeline(fam, 1, SearchConfig(random_seeds=32), extra_seeds=[D4_INTERIOR])
    interior_max = [x for x in res.certificates
                    if not is_corner(x.alpha_star, 1e-6) and x.rew_inertia is not None
                    and x.rew_inertia.plus == 0]
    # also polish from the published location in ascent mode
    polished = find_critical_point(fam, 1, D4_INTERIOR, mode="max")
    candidates = [(x.value, x.alpha_star, x.w_inertia) for x in interior_max]
    if polished.converged and not is_corner(polished.eigen.alpha, 1e-6):
        pk = derivative_pack(fam, polished.eigen)
        if hm.inertia(pk.w.real, pk.tol).plus == 0:
            candidates.append((polished.eigen.value, polished.eigen.alpha, pk.w_inertia))
    hit = [v for v in candidates if abs(v[0] - 0.989459) < 2e-3]
    near = find_critical_point(fam, 1, D4_INTERIOR, mode="any").eigen
    near_pack = derivative_pack(fam, near)
    near_re = hm.inertia(near_pack.w.real, near_pack.tol)
    c.check("interior local max 0.989459 within 2e-3", bool(hit),
            f"interior local maxima found: {[round(v[0], 6) for v in candidates]}; "
            f"ascent from the published point ends at {np.round(polished.eigen.alpha, 4).tolist()} "
            f"value {polished.eigen.value:.6f}; the critical point at the published location has "
            f"value {near.value:.6f} and Re W inertia {near_re}")
    if hit:
        w_in = hit[0][2]
        c.check("W indefinite there", w_in.plus > 0 and w_in.minus > 0, str(w_in))
    corner = [x for x in res.certificates if torus_distance(x.alpha_star, D4_CORNER) < 1e-9]
    ok = bool(corner) and corner[0].verdict == Verdict.GLOBAL_MAX
    c.check("corner (pi,0,pi,0) GlobalMax", ok, str([x.verdict.value for x in corner]))
    if corner:
        c.check("corner value 1.2467 within 2e-3", abs(corner[0].value - 1.2467) < 2e-3,
                f"{corner[0].value:.6f}")
    scan = grid_scan_oracle(fam, 2, 21)
    c.check("band-2 21^4 grid min 2.63496 within 5e-3", abs(scan.min - 2.63496) < 5e-3, f"{scan.min:.6f}")
    c.runtime(60.0)
    c.finish()


def test_criterion_06_derivative_suites():
    c = Criterion(6, "derivatives: gradient vs FD (1e-5), 2 Re W vs FD Hessian (1e-3), 50 families")
    rng = np.random.default_rng(6)
    g = gradient_suite(rng, 50)
    h = hessian_suite(rng, 50)
    c.check("gradient 50/50", g.passed == 50 and g.ok, f"{g.passed}/50 worst {g.worst:.1e}")
    c.check("hessian 50/50", h.passed == 50 and h.ok, f"{h.passed}/50 worst {h.worst:.1e}")
    c.finish()


def test_criterion_07_index_identities():
    c = Criterion(7, "index identities hold exactly at 50 random critical points")
    s = index_suite(np.random.default_rng(7), 50)
    c.check("50/50", s.passed == 50 and s.ok, f"{s.passed}/50 {s.failures[:1]}")
    c.finish()


def test_criterion_08_weyl():
    c = Criterion(8, "Weyl bracket on 41-per-axis grids: catalog examples and 20 random families")
    cases = []
    hc = honeycomb_family(0.0, 1.0)
    cases.append(("honeycomb", hc, band_at(hc, A0, 1)))
    lb = lieb_family(1.0, -1.0, -1.0)
    cases.append(("lieb", lb, band_at(lb, PIPI, 3)))
    for beta in (0.0, 0.1):
        hk = hks_family(beta)
        for raw in (HKS_GLOBAL_MAX_RAW, HKS_LOCAL_MAX_RAW):
            cases.append((f"hks beta={beta}", hk, find_critical_point(hk, 2, raw, mode="max").eigen))
    d4 = d4_family()
    cases.append(("d4 corner", d4, band_at(d4, D4_CORNER, 1)))
    for name, fam, be in cases:
        pack = derivative_pack(fam, be)
        chk = weyl_bracket_check(fam, pack, be.band, grid_points(fam.dimension, 41))
        c.check(name, chk.max_violation < 1e-9 * pack.scale, f"violation {chk.max_violation:.1e}")
    s = weyl_suite(np.random.default_rng(8), 20)
    c.check("20 random families", s.passed == 20 and s.ok, f"{s.passed}/20 worst {s.worst:.1e}")
    c.finish()


def test_criterion_09_appendix_identities():
    c = Criterion(9, "generalized Haynsworth (100 blocks), eps-Schur invariance, Han-Fujiwara")
    rng = np.random.default_rng(9)
    s = haynsworth_suite(rng, 100)
    c.check("Haynsworth 100/100", s.passed == 100, f"{s.passed}/100")
    e = eps_schur_suite(rng, 50)
    c.check("eps-Schur within 1e-8", e.ok, f"worst {e.worst:.1e}")
    hf_bad = 0
    for _ in range(50):
        blk = random_block(rng, "zero")
        if hm.han_fujiwara(blk.b, blk.c) != hm.inertia(blk.assemble()):
            hf_bad += 1
    c.check("Han-Fujiwara on zero-A blocks", hf_bad == 0, f"{hf_bad} mismatches")
    c.finish()


def _interior_critical_points(fam, rng, tries=12):
    out = []
    for k in range(tries):
        mode = ("min", "max", "any")[k % 3]
        n = int(rng.integers(1, fam.size + 1))
        res = find_critical_point(fam, n, rng.uniform(-np.pi, np.pi, fam.dimension), mode=mode)
        if res.converged and not is_corner(res.eigen.alpha, 1e-6):
            pack = derivative_pack(fam, res.eigen)
            if not pack.crossing_vanishing:
                out.append(pack)
    return out


def test_criterion_10_time_reversal():
    c = Criterion(10, "time reversal: corners critical with real W; det W = 0 at interior points")
    rng = np.random.default_rng(10)
    worst_g = worst_im = worst_det = 0.0
    interior = 0
    for _ in range(20):
        d = int(rng.integers(1, 4))
        fam = random_single_crossing_family(rng, int(rng.integers(2, 7)), d, real=True)
        for p in corner_points(d):
            for n in range(1, fam.size + 1):
                be = band_at(fam, p, n)
                if not be.simple:
                    continue
                pack = derivative_pack(fam, be)
                worst_g = max(worst_g, float(np.abs(pack.gradient).max()))
                worst_im = max(worst_im, float(np.abs(pack.w.imag).max()))
        for pack in _interior_critical_points(fam, rng):
            interior += 1
            worst_det = max(worst_det, det_w_residual(pack.w))
    c.check("corner gradients < 1e-10", worst_g < 1e-10, f"{worst_g:.1e}")
    c.check("corner |Im W| < 1e-10", worst_im < 1e-10, f"{worst_im:.1e}")
    c.check("interior points examined", interior >= 20, str(interior))
    c.check("interior det W residual < 1e-6", worst_det < 1e-6, f"{worst_det:.1e}")
    c.finish()


def test_criterion_11_reparameterization():
    c = Criterion(11, "reparameterization: W~ = J^T W J and inertia invariance")
    fam = honeycomb_family(0.0, 1.0)
    be = band_at(fam, A0, 1)
    pack = derivative_pack(fam, be)
    j = HONEYCOMB_LATTICE_JACOBIAN
    rp = reparameterize(fam, be, j)
    dev = np.abs(rp.w - j.T @ pack.w @ j).max()
    c.check("honeycomb lattice Jacobian", dev < 1e-9 and rp.w_inertia == pack.w_inertia, f"{dev:.1e}")
    s = reparam_suite(np.random.default_rng(11), 20)
    c.check("20 random Jacobians", s.passed == 20 and s.ok, f"{s.passed}/20 worst {s.worst:.1e}")
    c.finish()


def test_criterion_12_three_dim_negative_control():
    c = Criterion(12, "d=3 negative control (eps=0.5): no GlobalMin without strictly definite Re W")
    eps = 0.5
    w = np.array([[eps, 1j, 0], [-1j, eps, 0], [0, 0, 0]])
    c.check("det W = 0", det_w_residual(w) < 1e-12)
    c.check("Re W psd", hm.inertia(w.real).minus == 0)
    c.check("i_-(W) = 1", hm.inertia(w).minus == 1, str(hm.inertia(w)))
    verdict, code = low_dimension_upgrade(w, 3)
    c.check("d=3 rule issues nothing", verdict is None, f"{verdict} {code}")
    c.check("inertia rule issues no GlobalMin", verdict_from_inertia(hm.inertia(w)) != Verdict.GLOBAL_MIN)
    c.finish()
