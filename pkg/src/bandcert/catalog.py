"""Worked examples with their reference values.

Every reference carries a tolerance, a ``source`` (``published`` for numbers
reported with the example, ``structural`` for facts that follow from the
matrix shape, ``derived`` for values obtained here by an independent route)
and a probe that recomputes the quantity from the family.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import hermitian as hm
from .certify import (SearchConfig, Verdict, certify, find_critical_point, grid_scan_oracle,
                      is_corner)
from .dispersion import band_at, derivative_pack
from .lattice import (BlochFamily, CrossingEdge, IntraEdge, PeriodicGraphSpec, band_values_many,
                      build_bloch_family, canonicalize, grid_points, to_zero_two_pi,
                      torus_distance, validate_single_crossing)

SOURCES = ("published", "structural", "derived")

# rows are the lattice vectors a1, a2 of the triangular Bravais lattice
HONEYCOMB_LATTICE_JACOBIAN = np.array([[np.sqrt(3) / 2, 0.5], [np.sqrt(3) / 2, -0.5]])


@dataclass(frozen=True, eq=False)
class Reference:
    label: str
    value: Any
    tol: float
    source: str
    probe: Callable[[BlochFamily], Any] = field(repr=False)
    compare: str = "abs"            # abs | torus | equal

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f"unknown reference source {self.source!r}")
        if self.compare not in ("abs", "torus", "equal"):
            raise ValueError(f"unknown comparison {self.compare!r}")


@dataclass(frozen=True, eq=False)
class ReferenceCheck:
    label: str
    expected: Any
    observed: Any
    deviation: float
    tol: float
    source: str
    ok: bool


@dataclass(frozen=True, eq=False)
class NamedExample:
    name: str
    family: BlochFamily
    references: tuple[Reference, ...]
    params: dict = field(default_factory=dict)
    band: int = 1
    notes: tuple[str, ...] = ()

    def reference(self, label: str) -> Reference:
        for r in self.references:
            if r.label == label:
                return r
        raise KeyError(label)


def _deviation(ref: Reference, observed) -> float:
    if ref.compare == "equal":
        return 0.0 if _equal(ref.value, observed) else float("inf")
    if ref.compare == "torus":
        return torus_distance(np.asarray(ref.value, float), np.asarray(observed, float))
    exp = np.asarray(ref.value, dtype=complex)
    obs = np.asarray(observed, dtype=complex)
    if exp.shape != obs.shape:
        return float("inf")
    return float(np.abs(exp - obs).max(initial=0.0))


def _equal(a, b) -> bool:
    if isinstance(a, (list, tuple)) and isinstance(b, (list, tuple)):
        return len(a) == len(b) and all(_equal(x, y) for x, y in zip(a, b))
    return a == b


def check_reference(example: NamedExample, ref: Reference) -> ReferenceCheck:
    observed = ref.probe(example.family)
    dev = _deviation(ref, observed)
    return ReferenceCheck(ref.label, ref.value, observed, dev, ref.tol, ref.source, dev <= ref.tol)


def check_references(example: NamedExample) -> list[ReferenceCheck]:
    return [check_reference(example, r) for r in example.references]


# ---------------------------------------------------------------- probe helpers

def _crit(family, n, seed, mode):
    return find_critical_point(family, n, seed, SearchConfig(), mode=mode).eigen


def _pack_at(family, alpha, n):
    return derivative_pack(family, band_at(family, alpha, n))


def _w_eigs(family, alpha, n):
    return np.linalg.eigvalsh(_pack_at(family, alpha, n).w)


def _inertia_tuple(x: hm.Inertia) -> tuple[int, int, int]:
    return (x.plus, x.minus, x.zero)


# ---------------------------------------------------------------- honeycomb

def honeycomb_family(qa: float, qb: float) -> BlochFamily:
    spec = PeriodicGraphSpec(
        dimension=2, num_vertices=2, onsite=(qa, qb),
        intra_edges=(IntraEdge(1, 2, -1.0),),
        crossing_edges=(CrossingEdge(1, 1, 2, -1.0), CrossingEdge(2, 1, 2, -1.0)))
    return build_bloch_family(spec, name="honeycomb")


def honeycomb(qa: float = 0.0, qb: float = 1.0) -> NamedExample:
    fam = honeycomb_family(qa, qb)
    a0 = np.array([2 * np.pi / 3, -2 * np.pi / 3])
    refs = [
        Reference("single_crossing_violations", [], 0, "structural",
                  lambda f: validate_single_crossing(f), "equal"),
        Reference("alpha0_simple", qa != qb, 0, "published",
                  lambda f: band_at(f, a0, 1).simple, "equal"),
    ]
    notes = ()
    if qa < qb:
        delta = qb - qa
        w_ref = -np.array([[1, np.exp(1j * (a0[0] - a0[1]))],
                           [np.exp(-1j * (a0[0] - a0[1])), 1]]) / delta
        refs += [
            Reference("band1_max_location", a0, 1e-8, "published",
                      lambda f: _crit(f, 1, [2.0, -2.0], "max").alpha, "torus"),
            Reference("band1_max_value", qa, 1e-12, "derived",
                      lambda f: band_at(f, a0, 1).value),
            Reference("W_band1", w_ref, 1e-9, "published", lambda f: _pack_at(f, a0, 1).w),
            Reference("W_inertia_band1", (0, 1, 1), 0, "published",
                      lambda f: _inertia_tuple(_pack_at(f, a0, 1).w_inertia), "equal"),
            Reference("S_band1", np.zeros((1, 1)), 1e-12, "published", lambda f: _pack_at(f, a0, 1).s),
            Reference("i_infty_band1", 1, 0, "published", lambda f: _pack_at(f, a0, 1).i_infty, "equal"),
            Reference("dim_Q_band1", 1, 0, "published",
                      lambda f: _pack_at(f, a0, 1).q_basis.shape[1], "equal"),
            Reference("verdict_band1", Verdict.GLOBAL_MAX.value, 0, "published",
                      lambda f: certify(f, band_at(f, a0, 1)).verdict.value, "equal"),
            Reference("band2_min_location", a0, 1e-8, "published",
                      lambda f: _crit(f, 2, [2.0, -2.0], "min").alpha, "torus"),
        ]
    elif qa == qb:
        notes = ("q_A = q_B: the bands touch at alpha0 (Dirac point)",)
    return NamedExample("honeycomb", fam, tuple(refs), {"qa": qa, "qb": qb}, band=1, notes=notes)


# ---------------------------------------------------------------- Lieb

def lieb_family(qa: float, qb: float, qc: float) -> BlochFamily:
    spec = PeriodicGraphSpec(
        dimension=2, num_vertices=3, onsite=(qa, qb, qc),
        intra_edges=(IntraEdge(1, 2, -1.0), IntraEdge(1, 3, -1.0)),
        crossing_edges=(CrossingEdge(1, 1, 2, -1.0), CrossingEdge(2, 1, 3, -1.0)))
    return build_bloch_family(spec, name="lieb")


def lieb_closed_form(alpha) -> np.ndarray:
    """Bands of the Lieb family with on-site energies (1, -1, -1)."""
    alpha = np.atleast_2d(alpha)
    r = np.sqrt(5 + 2 * np.cos(alpha[:, 0]) + 2 * np.cos(alpha[:, 1]))
    return np.column_stack([-r, -np.ones_like(r), r])


def lieb(qa: float = 1.0, qb: float = -1.0, qc: float = -1.0) -> NamedExample:
    fam = lieb_family(qa, qb, qc)
    corner = np.array([np.pi, np.pi])
    refs = [Reference("single_crossing_violations", [], 0, "structural",
                      lambda f: validate_single_crossing(f), "equal")]
    if (qa, qb, qc) == (1.0, -1.0, -1.0):
        grid = grid_points(2, 41)
        refs += [
            Reference("closed_form_bands_41x41", lieb_closed_form(grid), 1e-10, "published",
                      lambda f: band_values_many(f, grid)),
            Reference("band3_value_at_corner", 1.0, 1e-12, "published",
                      lambda f: band_at(f, corner, 3).value),
            Reference("band3_vector_at_corner", np.array([1, 0, 0]), 1e-12, "published",
                      lambda f: band_at(f, corner, 3).vector),
            Reference("W_band3", np.diag([0.5, 0.5]), 1e-10, "published",
                      lambda f: _pack_at(f, corner, 3).w),
            Reference("BPB_band3", np.diag([0.0, 1.0, 1.0]), 1e-12, "published",
                      lambda f: _pack_at(f, corner, 3).bpb),
            Reference("i_infty_band3", 2, 0, "published",
                      lambda f: _pack_at(f, corner, 3).i_infty, "equal"),
            Reference("verdict_band3", Verdict.GLOBAL_MIN.value, 0, "published",
                      lambda f: certify(f, band_at(f, corner, 3)).verdict.value, "equal"),
            Reference("band2_flat_deviation_41x41", 0.0, 1e-12, "published",
                      lambda f: float(np.abs(band_values_many(f, grid)[:, 1] + 1).max())),
        ]
    return NamedExample("lieb", fam, tuple(refs), {"qa": qa, "qb": qb, "qc": qc}, band=3)


# ---------------------------------------------------------------- magnetic five-vertex example

HKS_GLOBAL_MAX_RAW = np.array([1.0632, 5.2200])
HKS_LOCAL_MAX_RAW = np.array([5.2534, 1.0298])
HKS_GLOBAL_MAX = canonicalize(HKS_GLOBAL_MAX_RAW)
HKS_LOCAL_MAX = canonicalize(HKS_LOCAL_MAX_RAW)


def hks_family(beta: float) -> BlochFamily:
    spec = PeriodicGraphSpec(
        dimension=2, num_vertices=5, onsite=(0.0,) * 5,
        intra_edges=(IntraEdge(1, 4, 1.0), IntraEdge(1, 5, 1.0 + 1j * beta), IntraEdge(2, 3, 1.0),
                     IntraEdge(2, 5, 1.0), IntraEdge(3, 4, 1.0), IntraEdge(4, 5, 1.0)),
        crossing_edges=(CrossingEdge(1, 1, 3, 1.0), CrossingEdge(2, 2, 4, 1.0)))
    return build_bloch_family(spec, name="hks-magnetic")


def _probe_hks_max(f, seed):
    be = _crit(f, 2, canonicalize(seed), "max")
    return be


def hks_magnetic(beta: float = 0.1) -> NamedExample:
    fam = hks_family(beta)
    refs = [Reference("single_crossing_violations", [], 0, "structural",
                      lambda f: validate_single_crossing(f), "equal")]
    if beta == 0.1:
        refs += [
            Reference("global_max_location_0_2pi", HKS_GLOBAL_MAX_RAW, 2e-3, "published",
                      lambda f: to_zero_two_pi(_probe_hks_max(f, HKS_GLOBAL_MAX_RAW).alpha), "torus"),
            Reference("local_max_location_0_2pi", HKS_LOCAL_MAX_RAW, 2e-3, "published",
                      lambda f: to_zero_two_pi(_probe_hks_max(f, HKS_LOCAL_MAX_RAW).alpha), "torus"),
            Reference("global_max_W_eigenvalues", np.array([-0.3433, -0.0095]), 2e-3, "published",
                      lambda f: _w_eigs(f, _probe_hks_max(f, HKS_GLOBAL_MAX_RAW).alpha, 2)),
            Reference("local_max_W_eigenvalues", np.array([-0.3240, 0.0097]), 2e-3, "published",
                      lambda f: _w_eigs(f, _probe_hks_max(f, HKS_LOCAL_MAX_RAW).alpha, 2)),
            Reference("global_max_verdict", Verdict.GLOBAL_MAX.value, 0, "published",
                      lambda f: certify(f, _probe_hks_max(f, HKS_GLOBAL_MAX_RAW)).verdict.value,
                      "equal"),
            Reference("local_max_verdict", Verdict.NO_CERTIFICATE.value, 0, "published",
                      lambda f: certify(f, _probe_hks_max(f, HKS_LOCAL_MAX_RAW)).verdict.value,
                      "equal"),
        ]
    if beta == 0.0:
        a0 = np.array([np.pi / 3, -np.pi / 3])
        refs += [
            Reference("band2_max_location", a0, 1e-8, "derived",
                      lambda f: _crit(f, 2, [1.0, -1.0], "max").alpha, "torus"),
            Reference("band2_max_mirror_location", -a0, 1e-8, "derived",
                      lambda f: _crit(f, 2, [-1.0, 1.0], "max").alpha, "torus"),
        ]
    return NamedExample("hks-magnetic", fam, tuple(refs), {"beta": beta}, band=2)


# ---------------------------------------------------------------- multiple crossing edges per generator

def multi_edge_family(t: float) -> BlochFamily:
    c0 = np.array([[-1.0, -1.0], [-1.0, 1.0]], dtype=complex)
    coeffs = np.zeros((2, 2, 2), dtype=complex)
    coeffs[0, 0, 1] = -1.0
    # generator 2 carries the hopping and the +-t cos(alpha_2) on-site terms
    coeffs[1] = [[t / 2, -1.0], [0.0, -t / 2]]
    return BlochFamily(c0, coeffs, name="multi-edge")


def multi_edge_closed_form(alpha, t: float = 4.0) -> np.ndarray:
    alpha = np.atleast_2d(alpha)
    a1, a2 = alpha[:, 0], alpha[:, 1]
    if t == 4.0:
        return -np.sqrt(2 * (6 + np.cos(a1) + np.cos(a1 - a2) - 3 * np.cos(a2) + 4 * np.cos(2 * a2)))
    off = np.abs(1 + np.exp(1j * a1) + np.exp(1j * a2)) ** 2
    return -np.sqrt((t * np.cos(a2) - 1) ** 2 + off)


def multi_edge_haldane_like(t: float = 4.0) -> NamedExample:
    fam = multi_edge_family(t)
    grid = grid_points(2, 41)
    zero = np.zeros(2)
    refs = [
        Reference("single_crossing", False, 0, "structural", lambda f: f.single_crossing, "equal"),
        Reference("verdict_at_origin", Verdict.HYPOTHESIS_FAILED.value, 0, "published",
                  lambda f: certify(f, band_at(f, zero, 1)).verdict.value, "equal"),
        Reference("closed_form_band1_41x41", multi_edge_closed_form(grid, t), 1e-10, "derived",
                  lambda f: band_values_many(f, grid)[:, 0]),
    ]
    if t == 4.0:
        refs += [
            Reference("origin_local_min_value", -np.sqrt(18.0), 1e-12, "published",
                      lambda f: band_at(f, zero, 1).value),
            Reference("origin_gradient", np.zeros(2), 1e-12, "structural",
                      lambda f: _pack_at(f, zero, 1).gradient),
            Reference("origin_ReW_negative_count", 0, 0, "published",
                      lambda f: hm.inertia(_pack_at(f, zero, 1).w.real).minus, "equal"),
            Reference("grid_min_below_origin_by_0.1", True, 0, "published",
                      lambda f: bool(grid_scan_oracle(f, 1, 101).min < band_at(f, zero, 1).value - 0.1),
                      "equal"),
        ]
    return NamedExample("multi-edge", fam, tuple(refs), {"t": t}, band=1)


# ---------------------------------------------------------------- random d = 4 example

D4_BASE = np.array([
    [2.556782, 0.104696, -0.000742, -0.049562, -0.072260],
    [0.104696, 3.69455, -0.436154, -0.126495, -0.571811],
    [-0.000742, -0.436154, 15.033535, 0.139015, -0.363838],
    [-0.049562, -0.126495, 0.139015, 2.146425, 0.298246],
    [-0.072260, -0.571811, -0.363838, 0.298246, 9.097398],
])
D4_SIGNS = (1.0, 1.0, -1.0, 1.0)
D4_INTERIOR = np.array([-1.488, -2.153, 1.553, -3.324])
D4_CORNER = np.array([np.pi, 0.0, np.pi, 0.0])


def d4_family() -> BlochFamily:
    coeffs = np.zeros((4, 5, 5), dtype=complex)
    for j, s in enumerate(D4_SIGNS):
        coeffs[j, 0, j + 1] = s
    return BlochFamily(D4_BASE.astype(complex), coeffs, name="d4-random")


def _d4_interior_max(f):
    return _crit(f, 1, D4_INTERIOR, "max")


def _d4_interior_critical(f):
    return _crit(f, 1, D4_INTERIOR, "any")


def d4_random_example() -> NamedExample:
    fam = d4_family()
    refs = [
        Reference("single_crossing_violations", [], 0, "structural",
                  lambda f: validate_single_crossing(f), "equal"),
        Reference("interior_local_max_value", 0.989459, 2e-3, "published",
                  lambda f: _d4_interior_max(f).value),
        Reference("interior_local_max_location", D4_INTERIOR, 2e-3, "published",
                  lambda f: _d4_interior_max(f).alpha, "torus"),
        Reference("interior_critical_W_indefinite", True, 0, "published",
                  lambda f: (lambda w: w.plus > 0 and w.minus > 0)(
                      derivative_pack(f, _d4_interior_critical(f)).w_inertia), "equal"),
        Reference("interior_critical_location", D4_INTERIOR, 2e-3, "published",
                  lambda f: _d4_interior_critical(f).alpha, "torus"),
        Reference("corner_value", 1.2467, 2e-3, "published", lambda f: band_at(f, D4_CORNER, 1).value),
        Reference("corner_verdict", Verdict.GLOBAL_MAX.value, 0, "published",
                  lambda f: certify(f, band_at(f, D4_CORNER, 1)).verdict.value, "equal"),
        Reference("corner_is_corner", True, 0, "structural", lambda f: is_corner(D4_CORNER), "equal"),
        Reference("band2_grid_min_21", 2.63496, 5e-3, "published",
                  lambda f: grid_scan_oracle(f, 2, 21).min),
    ]
    return NamedExample("d4-random", fam, tuple(refs), {}, band=1)


# ---------------------------------------------------------------- registry

EXAMPLES: dict[str, tuple[Callable[..., NamedExample], tuple[str, ...]]] = {
    "honeycomb": (honeycomb, ("qa", "qb")),
    "lieb": (lieb, ("qa", "qb", "qc")),
    "hks-magnetic": (hks_magnetic, ("beta",)),
    "multi-edge": (multi_edge_haldane_like, ("t",)),
    "d4-random": (d4_random_example, ()),
}


def get_example(name: str, **params) -> NamedExample:
    """Build a named example; parameters that are None or unknown to it are ignored."""
    if name not in EXAMPLES:
        raise KeyError(f"unknown example {name!r}; choose from {sorted(EXAMPLES)}")
    ctor, accepted = EXAMPLES[name]
    kwargs = {k: float(v) for k, v in params.items() if k in accepted and v is not None}
    return ctor(**kwargs)
