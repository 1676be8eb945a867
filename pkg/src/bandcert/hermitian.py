"""Dense complex-Hermitian linear algebra.

Eigendecomposition with deterministic bases, Moore-Penrose pseudoinverse,
inertia counting, restriction to subspaces and the generalized Haynsworth
inertia formula for block matrices with a singular leading block.

All rank/zero decisions share one relative threshold ``EPS_RANK`` so that
the index formulas downstream stay mutually consistent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPS_RANK = 1e-10
EPS_EIG = 1e-11
HERMITIAN_TOL = 1e-12
# clusters closer than this (relative) get a basis-independent post-rotation
CLUSTER_TOL = 1e-9


class NotHermitianError(ValueError):
    pass


class NumericalRankError(ArithmeticError):
    """Raised when an inertia identity fails, usually from a bad rank cut."""


@dataclass(frozen=True)
class Inertia:
    plus: int
    minus: int
    zero: int

    def __add__(self, other: "Inertia") -> "Inertia":
        return Inertia(self.plus + other.plus, self.minus + other.minus,
                       self.zero + other.zero)

    def __sub__(self, other: "Inertia") -> "Inertia":
        return Inertia(self.plus - other.plus, self.minus - other.minus,
                       self.zero - other.zero)

    @property
    def dim(self) -> int:
        return self.plus + self.minus + self.zero

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.plus, self.minus, self.zero)


@dataclass(frozen=True)
class EigenDecomposition:
    values: np.ndarray   # ascending
    vectors: np.ndarray  # columns paired with values


@dataclass(frozen=True)
class BlockMatrix:
    """Hermitian ``[[a, b], [b*, c]]``."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a, dtype=complex))
        c = np.atleast_2d(np.asarray(self.c, dtype=complex))
        b = np.asarray(self.b, dtype=complex).reshape(a.shape[0], c.shape[0])
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        check_hermitian(a)
        check_hermitian(c)

    def assemble(self) -> np.ndarray:
        return np.block([[self.a, self.b], [self.b.conj().T, self.c]])


@dataclass(frozen=True)
class HaynsworthResult:
    inertia_a: Inertia
    inertia_schur_on_q: Inertia
    i_infty: int
    q_basis: np.ndarray


def check_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotHermitianError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NotHermitianError("matrix has non-finite entries")
    scale = max(np.abs(m).max(initial=0.0), 1.0)
    dev = np.abs(m - m.conj().T).max(initial=0.0)
    if dev > tol * scale:
        raise NotHermitianError(f"matrix is not Hermitian (|M - M*| = {dev:.3e})")
    return m


def hermitize(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    return 0.5 * (m + m.conj().swapaxes(-1, -2))


def spectral_norm(m: np.ndarray) -> float:
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def default_tol(m: np.ndarray, eps: float = EPS_RANK) -> float:
    return eps * spectral_norm(m)


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate ``v`` so its largest-modulus entry (lowest index on ties) is real >= 0."""
    mags = np.abs(v)
    top = mags.max(initial=0.0)
    if top == 0.0:
        return v
    k = int(np.flatnonzero(mags >= top * (1 - 1e-12))[0])
    out = v * (abs(v[k]) / v[k])
    out[k] = abs(v[k])
    return out


def canonical_basis(v: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Deterministic orthonormal basis of ``span(v)``.

    Depends only on the subspace: Gram-Schmidt over the projections of the
    standard basis vectors e_1, e_2, ... keeping the first independent ones.
    """
    v = np.asarray(v, dtype=complex)
    n, k = v.shape
    if k == 0:
        return v
    proj = v @ v.conj().T
    out: list[np.ndarray] = []
    for i in range(n):
        w = proj[:, i].copy()
        for q in out:
            w -= q * (q.conj() @ w)
        nrm = np.linalg.norm(w)
        if nrm > tol:
            out.append(fix_phase(w / nrm))
            if len(out) == k:
                break
    return np.column_stack(out)


def eig_hermitian(m: np.ndarray) -> EigenDecomposition:
    """Ascending eigenvalues and an orthonormal eigenbasis.

    Backed by LAPACK ``zheevd``. Simple eigenvectors get the largest-entry phase
    convention; numerically degenerate clusters are re-expressed in
    :func:`canonical_basis` so the result does not depend on LAPACK's choice.
    """
    m = check_hermitian(m)
    vals, vecs = np.linalg.eigh(hermitize(m))
    scale = max(float(np.abs(vals).max(initial=0.0)), 1e-300)
    vecs = vecs.astype(complex)
    i = 0
    n = len(vals)
    while i < n:
        j = i + 1
        while j < n and vals[j] - vals[j - 1] <= CLUSTER_TOL * scale:
            j += 1
        if j - i == 1:
            vecs[:, i] = fix_phase(vecs[:, i])
        else:
            vecs[:, i:j] = canonical_basis(vecs[:, i:j])
        i = j
    return EigenDecomposition(values=vals, vectors=vecs)


def jacobi_eigh(m: np.ndarray, tol: float = 1e-15, max_sweeps: int = 60) -> EigenDecomposition:
    """Cyclic complex Jacobi eigensolver.

    Kept as an implementation independent of LAPACK; tests use it as an oracle
    for :func:`eig_hermitian`.
    """
    a = hermitize(check_hermitian(m)).copy()
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    fro = np.linalg.norm(a)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * max(fro, 1e-300):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                # phase on column q makes the pivot real, a plane rotation kills it
                phase = np.conj(apq) / abs(apq)
                theta = 0.5 * np.arctan2(2 * abs(apq), a[q, q].real - a[p, p].real)
                c, s = np.cos(theta), np.sin(theta)
                r = np.eye(n, dtype=complex)
                r[p, p], r[p, q] = c, s
                r[q, p], r[q, q] = -s * phase, c * phase
                a = r.conj().T @ a @ r
                v = v @ r
                a[p, q] = a[q, p] = 0.0
    vals = np.diag(a).real
    order = np.argsort(vals, kind="stable")
    return EigenDecomposition(values=vals[order], vectors=v[:, order])


def pinv(m: np.ndarray, tol: float | None = None) -> np.ndarray:
    m = check_hermitian(m)
    if tol is None:
        tol = default_tol(m)
    ed = eig_hermitian(m)
    keep = np.abs(ed.values) > tol
    v = ed.vectors[:, keep]
    return hermitize((v / ed.values[keep]) @ v.conj().T)


def inertia(m: np.ndarray, tol: float | None = None) -> Inertia:
    m = check_hermitian(m)
    if m.shape[0] == 0:
        return Inertia(0, 0, 0)
    if tol is None:
        tol = default_tol(m)
    vals = np.linalg.eigvalsh(hermitize(m))
    return inertia_from_values(vals, tol)


def inertia_from_values(vals: np.ndarray, tol: float) -> Inertia:
    vals = np.asarray(vals, dtype=float)
    plus = int(np.sum(vals > tol))
    minus = int(np.sum(vals < -tol))
    return Inertia(plus, minus, len(vals) - plus - minus)


def borderline(vals: np.ndarray, tol: float) -> bool:
    """True if some eigenvalue sits just outside the zero band (tol, 10 tol)."""
    a = np.abs(np.asarray(vals, dtype=float))
    return bool(np.any((a > tol) & (a < 10 * tol)))


def null_space(m: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Orthonormal, deterministic basis for the numerical null space of Hermitian ``m``."""
    m = check_hermitian(m)
    if tol is None:
        tol = default_tol(m)
    ed = eig_hermitian(m)
    v = ed.vectors[:, np.abs(ed.values) <= tol]
    return canonical_basis(v)


def range_projector(m: np.ndarray, tol: float | None = None) -> np.ndarray:
    m = check_hermitian(m)
    if tol is None:
        tol = default_tol(m)
    ed = eig_hermitian(m)
    v = ed.vectors[:, np.abs(ed.values) > tol]
    return v @ v.conj().T


def restrict(m: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """The compression ``basis* m basis`` of ``m`` to the span of ``basis``."""
    m = check_hermitian(m)
    basis = np.asarray(basis, dtype=complex)
    k = basis.shape[1]
    gram = basis.conj().T @ basis
    if np.abs(gram - np.eye(k)).max(initial=0.0) > EPS_EIG:
        raise ValueError("restriction basis is not orthonormal")
    return hermitize(basis.conj().T @ m @ basis)


def schur_complement(blk: BlockMatrix, tol: float | None = None) -> np.ndarray:
    """Generalized Schur complement ``C - B* A^+ B``."""
    return hermitize(blk.c - blk.b.conj().T @ pinv(blk.a, tol) @ blk.b)


def _block_tol(blk: BlockMatrix, tol: float | None) -> float:
    if tol is not None:
        return tol
    return EPS_RANK * max(spectral_norm(blk.assemble()), 1e-300)


def haynsworth_generalized(blk: BlockMatrix, tol: float | None = None,
                           check: bool = True) -> HaynsworthResult:
    """Inertia of a block Hermitian matrix via a possibly singular leading block.

    ``In(M) = In(A) + In_Q(M/A) + (i_inf, i_inf, -i_inf)`` with ``P`` the
    projector on ``Null(A)``, ``Q = Null(B* P B)`` and ``i_inf = rk(B* P B)``.
    With ``check`` the identity is compared against a direct inertia of the
    assembled matrix and a :class:`NumericalRankError` is raised on mismatch.
    """
    tol = _block_tol(blk, tol)
    in_a = inertia(blk.a, tol)
    null_a = null_space(blk.a, tol)
    # Null(B* P B) = Null(V0* B): rank cut on singular values, linear in B
    i_inf, q = svd_null(null_a.conj().T @ blk.b, tol)
    schur = schur_complement(blk, tol)
    in_q = inertia(restrict(schur, q), tol) if q.shape[1] else Inertia(0, 0, 0)
    res = HaynsworthResult(in_a, in_q, i_inf, q)
    if check:
        lhs = inertia(blk.assemble(), tol)
        rhs = in_a + in_q + Inertia(i_inf, i_inf, -i_inf)
        if lhs != rhs:
            raise NumericalRankError(
                f"generalized Haynsworth mismatch: In(M)={lhs.as_tuple()} vs "
                f"{rhs.as_tuple()} (In(A)={in_a.as_tuple()}, In_Q={in_q.as_tuple()}, "
                f"i_inf={i_inf}, tol={tol:.2e})")
    return res


def svd_null(x: np.ndarray, tol: float) -> tuple[int, np.ndarray]:
    """Rank of ``x`` and a canonical orthonormal basis of its null space."""
    k = x.shape[1]
    if x.shape[0] == 0:
        return 0, np.eye(k, dtype=complex)
    _, sv, vh = np.linalg.svd(x)
    rank = int(np.sum(sv > tol))
    return rank, canonical_basis(vh[rank:].conj().T)


def epsilon_schur(blk: BlockMatrix, eps: float, tol: float | None = None) -> np.ndarray:
    """``C - B* (A + eps P)^{-1} B`` with ``P`` the projector on ``Null(A)``."""
    tol = _block_tol(blk, tol)
    null_a = null_space(blk.a, tol)
    p = null_a @ null_a.conj().T
    shifted = blk.a + eps * p
    if abs(np.linalg.det(shifted)) == 0.0 or np.linalg.cond(shifted) > 1e14:
        raise np.linalg.LinAlgError(f"A + eps P is singular for eps={eps}")
    return hermitize(blk.c - blk.b.conj().T @ np.linalg.solve(shifted, blk.b))


def epsilon_schur_invariance_check(blk: BlockMatrix, eps_list, tol: float | None = None) -> float:
    """Largest pairwise deviation of ``(M/A_eps)_Q`` over ``eps_list``.

    The pseudoinverse complement ``(M/A)_Q`` is included in the comparison.
    """
    eps_list = list(eps_list)
    if any(e == 0 for e in eps_list):
        raise ValueError("eps must be nonzero")
    res = haynsworth_generalized(blk, tol, check=False)
    q = res.q_basis
    mats = [restrict(schur_complement(blk, tol), q)]
    mats += [restrict(epsilon_schur(blk, e, tol), q) for e in eps_list]
    dev = 0.0
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            dev = max(dev, float(np.abs(mats[i] - mats[j]).max(initial=0.0)))
    return dev


def han_fujiwara(b: np.ndarray, c: np.ndarray, tol: float | None = None) -> Inertia:
    """Inertia of ``[[0, B], [B*, C]]`` as ``In_{Null(B)}(C) + (rk B, rk B, m - rk B)``."""
    b = np.atleast_2d(np.asarray(b, dtype=complex))
    c = check_hermitian(np.atleast_2d(c))
    m = b.shape[0]
    if tol is None:
        tol = EPS_RANK * max(spectral_norm(b), spectral_norm(c), 1e-300)
    rk, z = svd_null(b, tol)
    in_c = inertia(restrict(c, z), tol) if z.shape[1] else Inertia(0, 0, 0)
    return in_c + Inertia(rk, rk, m - rk)
