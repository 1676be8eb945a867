"""Randomized property suites behind ``bandcert verify``.

Each suite returns pass/fail counts, the worst residual seen and the failing
cases in a replayable form (family matrices, quasimomentum, band).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import hermitian as hm
from .certify import SearchConfig, find_critical_point, weyl_bracket_check
from .dispersion import (BandEigen, DerivativePack, ReparameterizationError, _relative_error,
                         band_at, derivative_pack, fd_gradient, fd_hessian, index_identities,
                         reparameterize)
from .lattice import BlochFamily, family_to_dict, grid_points, random_single_crossing_family

SUITES = ("gradient", "hessian", "index", "weyl", "haynsworth", "eps-schur", "reparam")

GRAD_REL_TOL = 1e-5
HESS_REL_TOL = 1e-3
WEYL_TOL = 1e-9
EPS_SCHUR_TOL = 1e-8
CONGRUENCE_TOL = 1e-9


@dataclass
class SuiteResult:
    name: str
    passed: int = 0
    failed: int = 0
    worst: float = 0.0
    failures: list = field(default_factory=list)

    def record(self, ok: bool, residual: float, case: dict | None = None):
        self.worst = max(self.worst, float(residual))
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            if case is not None:
                self.failures.append(case)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "failed": self.failed,
                "worst_residual": self.worst, "failures": self.failures}


def _case(family: BlochFamily, alpha=None, band=None, **extra) -> dict:
    out = {"family": family_to_dict(family)}
    if alpha is not None:
        out["alpha"] = [float(a) for a in alpha]
    if band is not None:
        out["band"] = int(band)
    out.update(extra)
    return out


def random_family(rng: np.random.Generator, n_max: int = 6, d_max: int = 3, real: bool = False,
                  d: int | None = None) -> BlochFamily:
    n = int(rng.integers(2, n_max + 1))
    d = int(rng.integers(1, d_max + 1)) if d is None else d
    return random_single_crossing_family(rng, n, d, real=real)


def random_critical_point(rng: np.random.Generator, n_max: int = 6, d_max: int = 3,
                          real: bool = False, d: int | None = None, attempts: int = 50,
                          family: BlochFamily | None = None
                          ) -> tuple[BlochFamily, BandEigen, DerivativePack]:
    """A converged critical point of a simple band where the hypotheses hold."""
    for _ in range(attempts):
        fam = family or random_family(rng, n_max, d_max, real, d)
        n = int(rng.integers(1, fam.size + 1))
        mode = ("min", "max", "any")[int(rng.integers(0, 3))]
        res = find_critical_point(fam, n, rng.uniform(-np.pi, np.pi, fam.dimension),
                                  SearchConfig(), mode=mode)
        if not res.converged:
            continue
        pack = derivative_pack(fam, res.eigen)
        if fam.single_crossing and pack.crossing_vanishing:
            continue
        return fam, res.eigen, pack
    raise RuntimeError("no usable critical point found")


# ---------------------------------------------------------------- family suites

def gradient_suite(rng, count: int, families=None, max_draws: int = 20) -> SuiteResult:
    out = SuiteResult("gradient")
    for k in range(count):
        # near-degenerate draws are redrawn so that exactly ``count`` cases are recorded
        for _ in range(max_draws):
            fam = families[k % len(families)] if families else random_family(rng)
            alpha = rng.uniform(-np.pi, np.pi, fam.dimension)
            n = int(rng.integers(1, fam.size + 1))
            be = band_at(fam, alpha, n)
            if be.simple and be.gap >= 1e-4:
                break
        else:
            raise RuntimeError("no well-separated band value found")
        g = derivative_pack(fam, be).gradient
        err = _relative_error(fd_gradient(fam, alpha, n), g, max(1.0, hm.spectral_norm(fam.evaluate(alpha))))
        out.record(err < GRAD_REL_TOL, err, _case(fam, be.alpha, n, residual=err))
    return out


def hessian_suite(rng, count: int, families=None, max_draws: int = 20) -> SuiteResult:
    out = SuiteResult("hessian")
    for k in range(count):
        for _ in range(max_draws):
            fam, be, pack = random_critical_point(
                rng, family=families[k % len(families)] if families else None)
            if be.gap >= 1e-3:
                break
        else:
            raise RuntimeError("no well-separated critical point found")
        err = _relative_error(fd_hessian(fam, be.alpha, be.band), pack.hessian, pack.scale)
        out.record(err < HESS_REL_TOL, err, _case(fam, be.alpha, be.band, residual=err))
    return out


def index_suite(rng, count: int, families=None) -> SuiteResult:
    out = SuiteResult("index")
    for k in range(count):
        fam, be, pack = random_critical_point(rng, family=families[k % len(families)] if families else None)
        rep = index_identities(pack)
        bad = sum(abs(r.lhs - r.rhs) for r in rep.rows)
        out.record(rep.ok, bad, _case(fam, be.alpha, be.band, rows=[r.name for r in rep.rows if not r.ok]))
    return out


def weyl_suite(rng, count: int, families=None, points_per_axis: int = 41) -> SuiteResult:
    out = SuiteResult("weyl")
    for k in range(count):
        fam, be, pack = random_critical_point(
            rng, d=2, family=families[k % len(families)] if families else None)
        grid = grid_points(fam.dimension, points_per_axis)
        chk = weyl_bracket_check(fam, pack, be.band, grid)
        rel = chk.max_violation / pack.scale
        out.record(rel < WEYL_TOL, rel, _case(fam, be.alpha, be.band, violation=chk.max_violation))
    return out


def reparam_suite(rng, count: int, families=None) -> SuiteResult:
    out = SuiteResult("reparam")
    for k in range(count):
        fam, be, pack = random_critical_point(rng, family=families[k % len(families)] if families else None)
        d = fam.dimension
        jac = rng.normal(size=(d, d))
        while abs(np.linalg.det(jac)) < 0.1:
            jac = rng.normal(size=(d, d))
        try:
            rp = reparameterize(fam, be, jac)
            dev = float(np.abs(rp.w - jac.T @ pack.w @ jac).max()) / max(1.0, pack.scale)
            ok = dev < CONGRUENCE_TOL and rp.w_inertia == pack.w_inertia
        except ReparameterizationError as exc:
            dev, ok = float("inf"), False
            out.failures.append(_case(fam, be.alpha, be.band, error=str(exc)))
            out.failed += 1
            continue
        out.record(ok, dev, _case(fam, be.alpha, be.band, jacobian=jac.tolist()))
    return out


# ---------------------------------------------------------------- block-matrix suites

def random_block(rng: np.random.Generator, regime: str, p: int | None = None, q: int | None = None
                 ) -> hm.BlockMatrix:
    """Random Hermitian block with A invertible, singular (rank deficit 1-3) or zero."""
    p = p or int(rng.integers(2, 7))
    q = q or int(rng.integers(1, 5))

    def herm(k):
        x = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
        return (x + x.conj().T) / 2

    b = rng.normal(size=(p, q)) + 1j * rng.normal(size=(p, q))
    c = herm(q)
    if regime == "invertible":
        a = herm(p)
    elif regime == "singular":
        deficit = int(rng.integers(1, min(3, p - 1) + 1))
        u, _ = np.linalg.qr(rng.normal(size=(p, p)) + 1j * rng.normal(size=(p, p)))
        vals = rng.normal(size=p)
        vals[:deficit] = 0.0
        a = (u * vals) @ u.conj().T
    elif regime == "zero":
        a = np.zeros((p, p), dtype=complex)
    else:
        raise ValueError(regime)
    # sometimes make B partly orthogonal to Null(A) so that i_infty varies
    if regime != "invertible" and rng.random() < 0.5:
        null = hm.null_space(hm.hermitize(a), 1e-9)
        if null.shape[1]:
            b = b - null[:, :1] @ (null[:, :1].conj().T @ b)
    return hm.BlockMatrix(hm.hermitize(a), b, hm.hermitize(c))


def haynsworth_suite(rng, count: int) -> SuiteResult:
    out = SuiteResult("haynsworth")
    regimes = ("invertible", "singular", "zero")
    for k in range(count):
        blk = random_block(rng, regimes[k % 3])
        direct = hm.inertia(blk.assemble())
        res = hm.haynsworth_generalized(blk)
        ii = res.i_infty
        total = res.inertia_a + res.inertia_schur_on_q + hm.Inertia(ii, ii, -ii)
        ok = total == direct
        out.record(ok, 0.0 if ok else 1.0,
                   {"a": _mat(blk.a), "b": _mat(blk.b), "c": _mat(blk.c),
                    "direct": direct.as_tuple(), "formula": total.as_tuple()})
    return out


def eps_schur_suite(rng, count: int, eps_list=(0.1, 1.0, 10.0)) -> SuiteResult:
    out = SuiteResult("eps-schur")
    for k in range(count):
        blk = random_block(rng, ("singular", "zero")[k % 2])
        dev = hm.epsilon_schur_invariance_check(blk, list(eps_list))
        rel = dev / max(hm.spectral_norm(blk.c), 1.0)
        out.record(rel < EPS_SCHUR_TOL, rel, {"a": _mat(blk.a), "b": _mat(blk.b), "c": _mat(blk.c)})
    return out


def _mat(m) -> list:
    m = np.asarray(m)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def run_suites(names, count: int, seed: int = 0, families=None, grid: int = 41) -> list[SuiteResult]:
    rng = np.random.default_rng(seed)
    table = {
        "gradient": lambda: gradient_suite(rng, count, families),
        "hessian": lambda: hessian_suite(rng, count, families),
        "index": lambda: index_suite(rng, count, families),
        "weyl": lambda: weyl_suite(rng, count, families, grid),
        "haynsworth": lambda: haynsworth_suite(rng, count),
        "eps-schur": lambda: eps_schur_suite(rng, count),
        "reparam": lambda: reparam_suite(rng, count, families),
    }
    out = []
    for name in names:
        if name not in table:
            raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")
        out.append(table[name]())
    return out
