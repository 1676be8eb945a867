"""Band functions and the derivative data of a band at a point.

For a simple eigenvalue ``lam = lambda_n(T(alpha0))`` with unit eigenvector
``f`` the pack holds

* ``B``: columns ``dT/dalpha_j f``; the gradient of the band is ``B* f``;
* ``Omega``: half the Hessian of ``<f, T(alpha) f>`` (diagonal for Bloch families);
* ``W = Omega - B* (T - lam)^+ B``; the band Hessian is ``2 Re W``;
* ``S``: ``T - lam - B Omega^+ B*`` compressed to ``Q = Null(B P B*)`` where
  ``P`` projects on ``Null(Omega)``, and ``i_infty = rank(B P B*)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import hermitian as hm
from .hermitian import Inertia
from .lattice import BlochFamily, canonicalize, evaluate

TAU_GAP = 1e-8
TAU_ZERO = 1e-8
FD_GRAD_STEP = 1e-5
FD_HESS_STEP = 1e-3
FD_HESS_FLAG = 1e-3


class DegenerateEigenvalueError(ValueError):
    """Derivatives of a band are undefined where it touches a neighbor."""


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class BandEigen:
    alpha: np.ndarray
    band: int           # 1-based
    value: float
    vector: np.ndarray
    gap: float
    simple: bool
    spectrum: np.ndarray


def band_at(family: BlochFamily, alpha, n: int, tol_gap: float = TAU_GAP) -> BandEigen:
    if not 1 <= n <= family.size:
        raise ValueError(f"band index {n} out of range 1..{family.size}")
    alpha = canonicalize(alpha)
    t = evaluate(family, alpha)
    ed = hm.eig_hermitian(t)
    vals = ed.values
    lam = float(vals[n - 1])
    neighbours = [abs(lam - vals[k]) for k in (n - 2, n) if 0 <= k < len(vals)]
    gap = min(neighbours) if neighbours else np.inf
    # the family bound keeps the test meaningful where the spectrum collapses (T(alpha) ~ 0)
    scale = max(float(vals[-1] - vals[0]), family.norm_bound, 1e-300)
    return BandEigen(alpha=alpha, band=n, value=lam, vector=ed.vectors[:, n - 1].copy(),
                     gap=float(gap), simple=bool(gap > tol_gap * scale), spectrum=vals)


def band_value(family: BlochFamily, alpha, n: int) -> float:
    return float(np.linalg.eigvalsh(evaluate(family, alpha))[n - 1])


def fd_gradient(family: BlochFamily, alpha, n: int, h: float = FD_GRAD_STEP) -> np.ndarray:
    """Central differences of the band, independent of the eigenvector."""
    alpha = np.asarray(alpha, dtype=float)
    g = np.empty(len(alpha))
    for j in range(len(alpha)):
        e = np.zeros(len(alpha))
        e[j] = h
        g[j] = (band_value(family, alpha + e, n) - band_value(family, alpha - e, n)) / (2 * h)
    return g


def fd_hessian_of(func, x, h: float = FD_HESS_STEP) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    d = len(x)
    hess = np.empty((d, d))
    f0 = func(x)
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = h
        hess[i, i] = (func(x + ei) - 2 * f0 + func(x - ei)) / h ** 2
        for j in range(i + 1, d):
            ej = np.zeros(d)
            ej[j] = h
            v = (func(x + ei + ej) - func(x + ei - ej) - func(x - ei + ej) + func(x - ei - ej)) / (4 * h * h)
            hess[i, j] = hess[j, i] = v
    return hess


def fd_hessian(family: BlochFamily, alpha, n: int, h: float = FD_HESS_STEP) -> np.ndarray:
    return fd_hessian_of(lambda a: band_value(family, a, n), alpha, h)


def _phase_terms(family: BlochFamily, alpha):
    """Per generator: T_j(alpha_j) and its derivative i (C_j e^{ia} - C_j^* e^{-ia})."""
    ph = np.exp(1j * np.asarray(alpha, dtype=float))
    c = family.coeffs
    fwd = c * ph[:, None, None]
    bwd = c.conj().transpose(0, 2, 1) * ph.conj()[:, None, None]
    return fwd + bwd, 1j * (fwd - bwd)


@dataclass(frozen=True, eq=False)
class DerivativePack:
    family: BlochFamily
    alpha: np.ndarray
    band: int
    value: float
    vector: np.ndarray
    b: np.ndarray
    omega: np.ndarray
    w: np.ndarray
    gradient: np.ndarray
    hessian: np.ndarray
    a: np.ndarray
    s: np.ndarray
    q_basis: np.ndarray
    i_infty: int
    omega_plus: np.ndarray
    null_omega_projector: np.ndarray
    scale: float
    tol: float
    structured: bool                # single-crossing formulas apply
    omega_inertia: Inertia
    j_prime: tuple[int, ...] = ()
    j_double_prime: tuple[int, ...] = ()
    crossing_vanishing: tuple[int, ...] = ()
    jacobian: np.ndarray | None = None
    warnings: tuple[str, ...] = field(default=())

    @property
    def dimension(self) -> int:
        return self.omega.shape[0]

    @property
    def w_inertia(self) -> Inertia:
        return hm.inertia(self.w, self.tol)

    @property
    def a_inertia(self) -> Inertia:
        return hm.inertia(self.a, self.tol)

    @property
    def s_inertia(self) -> Inertia:
        return hm.inertia(self.s, self.tol) if self.s.shape[0] else Inertia(0, 0, 0)

    @property
    def bpb(self) -> np.ndarray:
        bp = self.b @ self.null_omega_projector
        return hm.hermitize(bp @ bp.conj().T)

    @property
    def bob(self) -> np.ndarray:
        return hm.hermitize(self.b @ self.omega_plus @ self.b.conj().T)


def _assemble(family, be: BandEigen, t, b, omega, structured, tol_rank, tol_zero,
              jacobian=None, extra_warnings=()) -> DerivativePack:
    f = be.vector
    n_dim = t.shape[0]
    scale = max(hm.spectral_norm(t), 1e-300)
    tol = tol_rank * scale
    a = hm.hermitize(t - be.value * np.eye(n_dim))
    w = hm.hermitize(omega - b.conj().T @ hm.pinv(a, tol) @ b)
    gradient = (b.conj().T @ f).real
    warnings = list(extra_warnings)
    d = omega.shape[0]

    j1: list[int] = []
    j2: list[int] = []
    vanish: list[int] = []
    if structured:
        fmax = np.abs(f).max()
        for e in family.crossing_edges():
            fu, fv = abs(f[e.u - 1]), abs(f[e.v - 1])
            zu, zv = fu <= tol_zero * fmax, fv <= tol_zero * fmax
            for x in (fu, fv):
                if tol_zero * fmax < x < 10 * tol_zero * fmax:
                    warnings.append(f"borderline_eigvec_component:gen{e.generator}")
            (j2 if (zu or zv) else j1).append(e.generator)
            if zu and zv:
                vanish.append(e.generator)
        pdiag = np.zeros(d)
        pdiag[[j - 1 for j in j2]] = 1.0
        proj = np.diag(pdiag).astype(complex)
        oplus = np.zeros((d, d), dtype=complex)
        om = np.real(np.diag(omega))
        for j in j1:
            oplus[j - 1, j - 1] = 1.0 / om[j - 1]
        signs = [om[j - 1] for j in j1]
        om_in = Inertia(sum(x > 0 for x in signs), sum(x < 0 for x in signs), len(j2))
    else:
        null = hm.null_space(omega, tol)
        proj = null @ null.conj().T
        oplus = hm.pinv(omega, tol)
        om_in = hm.inertia(omega, tol)

    bp = b @ proj
    i_inf, q = hm.svd_null(bp.conj().T, tol)
    bob = hm.hermitize(b @ oplus @ b.conj().T)
    s = hm.restrict(hm.hermitize(a - bob), q) if q.shape[1] else np.zeros((0, 0), complex)
    return DerivativePack(
        family=family, alpha=be.alpha, band=be.band, value=be.value, vector=f,
        b=b, omega=omega, w=w, gradient=gradient, hessian=2 * w.real,
        a=a, s=s, q_basis=q, i_infty=i_inf, omega_plus=oplus, null_omega_projector=proj,
        scale=scale, tol=tol, structured=structured, omega_inertia=om_in,
        j_prime=tuple(j1), j_double_prime=tuple(j2), crossing_vanishing=tuple(vanish),
        jacobian=jacobian, warnings=tuple(dict.fromkeys(warnings)))


def derivative_pack(family: BlochFamily, be: BandEigen, tol_rank: float = hm.EPS_RANK,
                    tol_zero: float = TAU_ZERO, verify: bool = False) -> DerivativePack:
    """B, Omega, W, S and the index data at ``be``.

    With ``verify`` the Hessian ``2 Re W`` is compared with finite differences of
    the band and a warning is attached when they disagree.
    """
    if not be.simple:
        raise DegenerateEigenvalueError(
            f"lambda_{be.band} is degenerate at alpha={be.alpha} (gap {be.gap:.2e}); "
            "band-touching points are outside the scope of this certifier")
    t = evaluate(family, be.alpha)
    tj, dtj = _phase_terms(family, be.alpha)
    f = be.vector
    b = np.column_stack([m @ f for m in dtj])
    omega = np.diag([-0.5 * np.real(f.conj() @ m @ f) for m in tj]).astype(complex)
    warnings = []
    if family.has_loops:
        warnings.append("loop_crossing_edge")
    pack = _assemble(family, be, t, b, omega, family.single_crossing, tol_rank, tol_zero,
                     extra_warnings=warnings)
    if verify:
        h_fd = fd_hessian(family, be.alpha, be.band)
        err = _relative_error(h_fd, pack.hessian, pack.scale)
        if err > FD_HESS_FLAG:
            pack = _with_warning(pack, f"hessian_fd_mismatch:{err:.2e}")
    return pack


def _with_warning(pack: DerivativePack, msg: str) -> DerivativePack:
    return replace(pack, warnings=pack.warnings + (msg,))


def _relative_error(approx, exact, scale: float, floor: float = 1e-6) -> float:
    approx, exact = np.asarray(approx), np.asarray(exact)
    den = max(np.abs(exact).max(initial=0.0), floor * scale)
    return float(np.abs(approx - exact).max(initial=0.0) / den)


def criticality_residual(pack: DerivativePack) -> float:
    """``2 max_j |Im(h_j e^{i alpha_j} f_v conj(f_u))|``; equals the gradient sup-norm."""
    f = pack.vector
    res = 0.0
    for e in pack.family.crossing_edges():
        z = e.weight * np.exp(1j * pack.alpha[e.generator - 1]) * f[e.v - 1] * np.conj(f[e.u - 1])
        res = max(res, 2 * abs(z.imag))
    return res


def is_critical(pack: DerivativePack, tol: float = 1e-8) -> bool:
    return float(np.abs(pack.gradient).max()) <= tol * pack.scale


class FormulaMismatch(AssertionError):
    pass


def _require_critical(pack: DerivativePack, what: str):
    if not pack.structured:
        raise PreconditionError(f"{what} needs a single-crossing family")
    if not is_critical(pack):
        raise PreconditionError(
            f"{what} requires a critical point (|grad| = {np.abs(pack.gradient).max():.2e})")


def bob_star(pack: DerivativePack, tol: float = 1e-9) -> np.ndarray:
    """``B Omega^+ B*``, cross-checked against the entrywise crossing-edge formula."""
    _require_critical(pack, "bob_star")
    f = pack.vector
    n = len(f)
    om = np.real(np.diag(pack.omega))
    ref = np.zeros((n, n), dtype=complex)
    for e in pack.family.crossing_edges():
        if e.generator not in pack.j_prime:
            continue
        u, v = e.u - 1, e.v - 1
        o = om[e.generator - 1]
        hph = e.weight * np.exp(1j * pack.alpha[e.generator - 1])
        ref[u, u] += o / abs(f[u]) ** 2
        ref[u, v] += hph
        ref[v, u] += np.conj(hph)
        ref[v, v] += o / abs(f[v]) ** 2
    got = pack.bob
    dev = np.abs(got - ref).max()
    if dev > tol * max(pack.scale, np.abs(ref).max()):
        raise FormulaMismatch(f"B Omega^+ B* differs from the edge formula by {dev:.2e}")
    return got


def bpb_star(pack: DerivativePack, tol: float = 1e-9) -> np.ndarray:
    """``B P B*``; checks the diagonal edge formula and the basis spanning its range."""
    _require_critical(pack, "bpb_star")
    f = pack.vector
    n = len(f)
    ref = np.zeros((n, n), dtype=complex)
    span = set()
    for e in pack.family.crossing_edges():
        if e.generator not in pack.j_double_prime:
            continue
        u, v = e.u - 1, e.v - 1
        ref[u, u] += abs(e.weight) ** 2 * abs(f[v]) ** 2
        ref[v, v] += abs(e.weight) ** 2 * abs(f[u]) ** 2
        fmax = np.abs(f).max()
        zu, zv = abs(f[u]) <= TAU_ZERO * fmax, abs(f[v]) <= TAU_ZERO * fmax
        if zu and not zv:
            span.add(u)
        if zv and not zu:
            span.add(v)
    got = pack.bpb
    scale = max(pack.scale ** 2, np.abs(ref).max())
    dev = np.abs(got - ref).max()
    if dev > tol * scale:
        raise FormulaMismatch(f"B P B* differs from the edge formula by {dev:.2e}")
    if len(span) != pack.i_infty:
        raise FormulaMismatch(f"range of B P B* has dimension {pack.i_infty}, "
                              f"edge basis has {len(span)} vectors")
    return got


@dataclass(frozen=True)
class IdentityRow:
    name: str
    lhs: int
    rhs: int
    terms: str

    @property
    def ok(self) -> bool:
        return self.lhs == self.rhs


@dataclass(frozen=True)
class IndexReport:
    rows: tuple[IdentityRow, ...]
    precondition_residual: float
    w: Inertia
    omega: Inertia
    s: Inertia
    a: Inertia
    i_infty: int

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)


def index_identities(pack: DerivativePack, precondition_tol: float = 1e-8) -> IndexReport:
    """Evaluate the four inertia identities relating W to Omega, S and A."""
    # Null(A) must sit inside Null(B*); at a simple eigenvalue that is B* f = 0
    resid = float(np.abs(pack.b.conj().T @ pack.vector).max())
    if resid > precondition_tol * pack.scale:
        raise PreconditionError(f"Null(A) is not inside Null(B*): |B* f| = {resid:.2e}")
    w, om, s, a, ii = pack.w_inertia, pack.omega_inertia, pack.s_inertia, pack.a_inertia, pack.i_infty
    rows = (
        IdentityRow("i-(W)", w.minus, om.minus + s.minus + ii - a.minus,
                    f"{om.minus} + {s.minus} + {ii} - {a.minus}"),
        IdentityRow("i0(W)", w.zero, om.zero + s.zero - ii - a.zero,
                    f"{om.zero} + {s.zero} - {ii} - {a.zero}"),
        IdentityRow("i+(W)", w.plus, om.plus + s.plus + ii - a.plus,
                    f"{om.plus} + {s.plus} + {ii} - {a.plus}"),
        IdentityRow("i+(W) renormalized", w.plus, om.plus - s.minus - s.zero + a.minus + a.zero,
                    f"{om.plus} - {s.minus} - {s.zero} + {a.minus} + {a.zero}"),
    )
    return IndexReport(rows, resid, w, om, s, a, ii)


class ReparameterizationError(ValueError):
    pass


def reparameterize(family: BlochFamily, be: BandEigen, jac, tol_rank: float = hm.EPS_RANK,
                   check_tol: float = 1e-9) -> DerivativePack:
    """Pack for ``T~(k) = T(alpha0 + J (k - k0))`` at ``k0``, differentiated in ``k``.

    The result is checked against the congruence ``W~ = J^T W J`` and the
    inertia of ``W``.
    """
    jac = np.asarray(jac, dtype=float)
    d = family.dimension
    if jac.shape != (d, d):
        raise ReparameterizationError(f"Jacobian must be {d}x{d}")
    if abs(np.linalg.det(jac)) <= 1e-10:
        raise ReparameterizationError("Jacobian is singular")
    base = derivative_pack(family, be, tol_rank)
    t = evaluate(family, be.alpha)
    tj, dtj = _phase_terms(family, be.alpha)
    f = be.vector
    # dT~/dk_m = sum_j J_jm dT/dalpha_j ; d2T~/dk_m dk_l = -sum_j J_jm J_jl T_j
    dk = np.einsum("jm,jab->mab", jac, dtj)
    b = np.column_stack([m @ f for m in dk])
    quad = np.array([np.real(f.conj() @ m @ f) for m in tj])
    omega = -0.5 * np.einsum("jm,j,jl->ml", jac, quad, jac).astype(complex)
    pack = _assemble(family, be, t, b, omega, False, tol_rank, TAU_ZERO, jacobian=jac)
    congr = jac.T @ base.w @ jac
    dev = float(np.abs(pack.w - congr).max())
    if dev > check_tol * max(pack.scale, 1.0) * max(1.0, np.abs(jac).max() ** 2):
        raise ReparameterizationError(f"W~ differs from J^T W J by {dev:.2e}")
    if is_critical(base) and pack.w_inertia != base.w_inertia:
        raise ReparameterizationError(
            f"inertia changed under reparameterization: {base.w_inertia} -> {pack.w_inertia}")
    return pack
