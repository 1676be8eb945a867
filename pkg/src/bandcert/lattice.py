"""Z^d-periodic graphs with one crossing edge per generator and their Bloch families.

A :class:`PeriodicGraphSpec` is the combinatorial input (1-based vertex
indices, as in the graph file).  :func:`build_bloch_family` turns it into a
:class:`BlochFamily`

    T(alpha) = C0 + sum_j (C_j e^{i alpha_j} + C_j^* e^{-i alpha_j}),

with ``C_j = h_j E[u_j, v_j]``.  Families can also be given directly as
matrices (raw family files), which is how the multi-edge and d = 4 catalog
examples are expressed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .hermitian import NotHermitianError, check_hermitian, hermitize

TAU_STRUCT = 1e-12


class GraphSpecError(ValueError):
    """Invalid graph or family input; the message names the offending record."""


def canonicalize(alpha) -> np.ndarray:
    """Reduce quasimomentum components to (-pi, pi]."""
    a = np.asarray(alpha, dtype=float)
    r = np.pi - np.mod(np.pi - a, 2 * np.pi)
    return np.where(r <= -np.pi, np.pi, r)


def to_zero_two_pi(alpha) -> np.ndarray:
    """Same point on the torus, reported in [0, 2 pi)."""
    return np.mod(np.asarray(alpha, dtype=float), 2 * np.pi)


def torus_distance(a, b) -> float:
    d = canonicalize(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
    return float(np.abs(d).max(initial=0.0))


@dataclass(frozen=True)
class IntraEdge:
    u: int
    v: int
    weight: complex


@dataclass(frozen=True)
class CrossingEdge:
    generator: int
    u: int
    v: int
    weight: complex


@dataclass(frozen=True)
class PeriodicGraphSpec:
    dimension: int
    num_vertices: int
    onsite: tuple[float, ...]
    intra_edges: tuple[IntraEdge, ...]
    crossing_edges: tuple[CrossingEdge, ...]

    def __post_init__(self):
        object.__setattr__(self, "onsite", tuple(float(x) for x in self.onsite))
        object.__setattr__(self, "intra_edges", tuple(self.intra_edges))
        object.__setattr__(self, "crossing_edges", tuple(self.crossing_edges))
        validate_spec(self)


def validate_spec(spec: PeriodicGraphSpec) -> None:
    d, n = spec.dimension, spec.num_vertices
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise GraphSpecError(f"dimension must be a positive integer, got {d!r}")
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise GraphSpecError(f"num_vertices must be a positive integer, got {n!r}")
    if len(spec.onsite) != n:
        raise GraphSpecError(f"onsite has {len(spec.onsite)} entries, expected {n}")

    def check_vertex(x, what):
        if not isinstance(x, (int, np.integer)) or not 1 <= x <= n:
            raise GraphSpecError(f"{what}: vertex index {x!r} out of range 1..{n}")

    seen_pairs = set()
    for k, e in enumerate(spec.intra_edges):
        what = f"intra_edges[{k}] {e}"
        check_vertex(e.u, what)
        check_vertex(e.v, what)
        if e.u == e.v:
            raise GraphSpecError(f"{what}: intra-cell edge must join distinct vertices")
        if e.weight == 0:
            raise GraphSpecError(f"{what}: zero weight")
        pair = frozenset((e.u, e.v))
        if pair in seen_pairs:
            raise GraphSpecError(f"{what}: duplicate intra-cell pair (merge weights upstream)")
        seen_pairs.add(pair)

    gens = []
    for k, e in enumerate(spec.crossing_edges):
        what = f"crossing_edges[{k}] {e}"
        if not isinstance(e.generator, (int, np.integer)) or not 1 <= e.generator <= d:
            raise GraphSpecError(f"{what}: generator index out of range 1..{d}")
        if e.generator in gens:
            raise GraphSpecError(f"{what}: duplicate generator {e.generator}")
        gens.append(e.generator)
        check_vertex(e.u, what)
        check_vertex(e.v, what)
        if e.weight == 0:
            raise GraphSpecError(f"{what}: zero weight")
    missing = sorted(set(range(1, d + 1)) - set(gens))
    if missing:
        raise GraphSpecError(f"missing crossing edge for generator(s) {missing}")

    parent = list(range(n + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in list(spec.intra_edges) + list(spec.crossing_edges):
        parent[find(e.u)] = find(e.v)
    roots = {find(x) for x in range(1, n + 1)}
    if len(roots) > 1:
        comps: dict[int, list[int]] = {}
        for x in range(1, n + 1):
            comps.setdefault(find(x), []).append(x)
        raise GraphSpecError(f"graph is disconnected: components {sorted(comps.values())}")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BlochFamily:
    """``T(alpha) = c0 + sum_j (coeffs[j] e^{i alpha_j} + h.c.)``."""

    c0: np.ndarray
    coeffs: np.ndarray  # shape (d, N, N)
    name: str = ""
    single_crossing: bool = field(init=False)
    time_reversal: bool = field(init=False)
    norm_bound: float = field(init=False, repr=False)   # >= ||T(alpha)||_2 for every alpha

    def __post_init__(self):
        c0 = np.atleast_2d(np.asarray(self.c0, dtype=complex))
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.ndim != 3 or coeffs.shape[1:] != c0.shape or coeffs.shape[0] < 1:
            raise GraphSpecError(
                f"coeffs must have shape (d, {c0.shape[0]}, {c0.shape[0]}), got {coeffs.shape}")
        try:
            check_hermitian(c0)
        except NotHermitianError as exc:
            raise GraphSpecError(f"c0: {exc}") from None
        if not (np.all(np.isfinite(c0)) and np.all(np.isfinite(coeffs))):
            raise GraphSpecError("family has non-finite entries")
        c0 = hermitize(c0)
        object.__setattr__(self, "c0", _frozen(c0))
        object.__setattr__(self, "coeffs", _frozen(coeffs))
        object.__setattr__(self, "single_crossing", not validate_single_crossing(self))
        scale = max(np.abs(c0).max(initial=0.0), np.abs(coeffs).max(initial=0.0), 1e-300)
        real = (np.abs(c0.imag).max(initial=0.0) <= TAU_STRUCT * scale
                and np.abs(coeffs.imag).max(initial=0.0) <= TAU_STRUCT * scale)
        object.__setattr__(self, "time_reversal", bool(real))
        bound = np.linalg.norm(c0, 2) + 2 * sum(np.linalg.norm(c, 2) for c in coeffs)
        object.__setattr__(self, "norm_bound", float(bound))

    @property
    def dimension(self) -> int:
        return self.coeffs.shape[0]

    @property
    def size(self) -> int:
        return self.c0.shape[0]

    def crossing_edges(self) -> list[CrossingEdge]:
        """The (u_j, v_j, h_j) records, 1-based; only for single-crossing families."""
        if not self.single_crossing:
            raise GraphSpecError(f"family {self.name!r} does not have one crossing edge per generator")
        out = []
        for j, c in enumerate(self.coeffs):
            u, v = np.unravel_index(int(np.argmax(np.abs(c))), c.shape)
            out.append(CrossingEdge(j + 1, int(u) + 1, int(v) + 1, complex(c[u, v])))
        return out

    @property
    def has_loops(self) -> bool:
        return self.single_crossing and any(e.u == e.v for e in self.crossing_edges())

    def evaluate(self, alpha) -> np.ndarray:
        return evaluate(self, alpha)

    def same_as(self, other: "BlochFamily") -> bool:
        """Bitwise equality of the defining matrices."""
        return (self.c0.shape == other.c0.shape and self.coeffs.shape == other.coeffs.shape
                and self.c0.tobytes() == other.c0.tobytes()
                and self.coeffs.tobytes() == other.coeffs.tobytes())


def build_bloch_family(spec: PeriodicGraphSpec, name: str = "") -> BlochFamily:
    validate_spec(spec)
    n, d = spec.num_vertices, spec.dimension
    c0 = np.zeros((n, n), dtype=complex)
    c0[np.diag_indices(n)] = spec.onsite
    for e in spec.intra_edges:
        c0[e.u - 1, e.v - 1] = e.weight
        c0[e.v - 1, e.u - 1] = np.conj(e.weight)
    coeffs = np.zeros((d, n, n), dtype=complex)
    for e in spec.crossing_edges:
        coeffs[e.generator - 1, e.u - 1, e.v - 1] = e.weight
    return BlochFamily(c0, coeffs, name=name)


def _check_alpha(family: BlochFamily, alpha) -> np.ndarray:
    a = np.asarray(alpha, dtype=float)
    if a.shape[-1:] != (family.dimension,):
        raise ValueError(f"quasimomentum has shape {a.shape}, family dimension is {family.dimension}")
    return a


def evaluate(family: BlochFamily, alpha) -> np.ndarray:
    """T(alpha), exactly Hermitian (averaged with its adjoint)."""
    a = canonicalize(_check_alpha(family, alpha))
    ph = np.exp(1j * a)
    t = np.tensordot(ph, family.coeffs, axes=1)
    return hermitize(family.c0 + t + t.conj().T)


def evaluate_many(family: BlochFamily, alphas) -> np.ndarray:
    """Stack of T(alpha) for an array of quasimomenta, shape (P, N, N)."""
    a = canonicalize(_check_alpha(family, alphas)).reshape(-1, family.dimension)
    ph = np.exp(1j * a)
    t = np.einsum("pd,dij->pij", ph, family.coeffs)
    t = t + t.conj().transpose(0, 2, 1)
    return family.c0[None] + t


def band_values_many(family: BlochFamily, alphas, chunk: int = 200_000) -> np.ndarray:
    """All eigenvalues (ascending) at each quasimomentum, shape (P, N)."""
    a = np.asarray(alphas, dtype=float).reshape(-1, family.dimension)
    out = np.empty((a.shape[0], family.size))
    for s in range(0, a.shape[0], chunk):
        out[s:s + chunk] = np.linalg.eigvalsh(evaluate_many(family, a[s:s + chunk]))
    return out


def validate_single_crossing(family: BlochFamily, tau: float = TAU_STRUCT) -> list[tuple[int, int]]:
    """Generators (1-based) whose coefficient matrix does not have exactly one nonzero entry."""
    out = []
    for j, c in enumerate(np.asarray(family.coeffs)):
        top = np.abs(c).max(initial=0.0)
        count = int(np.sum(np.abs(c) > tau * top)) if top > 0 else 0
        if count != 1:
            out.append((j + 1, count))
    return out


# ---------------------------------------------------------------------------
# file formats


def _complex(x, where: str) -> complex:
    if (not isinstance(x, (list, tuple)) or len(x) != 2
            or not all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in x)):
        raise GraphSpecError(f"{where}: expected [re, im] pair, got {x!r}")
    return complex(float(x[0]), float(x[1]))


def _int(x, where: str) -> int:
    if not isinstance(x, int) or isinstance(x, bool):
        raise GraphSpecError(f"{where}: expected integer, got {x!r}")
    return x


def _load_json(text) -> dict:
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphSpecError(f"JSON parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise GraphSpecError("top-level JSON value must be an object")
    return obj


def parse_graph_file(text) -> PeriodicGraphSpec:
    obj = _load_json(text)
    for key in ("dimension", "num_vertices", "onsite", "intra_edges", "crossing_edges"):
        if key not in obj:
            raise GraphSpecError(f"missing key {key!r}")
    d = _int(obj["dimension"], "dimension")
    n = _int(obj["num_vertices"], "num_vertices")
    onsite = obj["onsite"]
    if not isinstance(onsite, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in onsite):
        raise GraphSpecError("onsite: expected an array of real numbers")
    intra = []
    for k, rec in enumerate(obj["intra_edges"]):
        where = f"intra_edges[{k}]"
        if not isinstance(rec, dict) or set(rec) != {"u", "v", "w"}:
            raise GraphSpecError(f"{where}: expected keys u, v, w, got {rec!r}")
        intra.append(IntraEdge(_int(rec["u"], where + ".u"), _int(rec["v"], where + ".v"),
                               _complex(rec["w"], where + ".w")))
    cross = []
    for k, rec in enumerate(obj["crossing_edges"]):
        where = f"crossing_edges[{k}]"
        if not isinstance(rec, dict) or set(rec) != {"gen", "u", "v", "w"}:
            raise GraphSpecError(f"{where}: expected keys gen, u, v, w, got {rec!r}")
        cross.append(CrossingEdge(_int(rec["gen"], where + ".gen"), _int(rec["u"], where + ".u"),
                                  _int(rec["v"], where + ".v"), _complex(rec["w"], where + ".w")))
    return PeriodicGraphSpec(d, n, tuple(onsite), tuple(intra), tuple(cross))


def spec_to_dict(spec: PeriodicGraphSpec) -> dict:
    return {
        "dimension": spec.dimension,
        "num_vertices": spec.num_vertices,
        "onsite": list(spec.onsite),
        "intra_edges": [{"u": e.u, "v": e.v, "w": [e.weight.real, e.weight.imag]}
                        for e in spec.intra_edges],
        "crossing_edges": [{"gen": e.generator, "u": e.u, "v": e.v,
                            "w": [e.weight.real, e.weight.imag]} for e in spec.crossing_edges],
    }


def _matrix(rows, where: str) -> np.ndarray:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise GraphSpecError(f"{where}: expected a non-empty array of rows")
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise GraphSpecError(f"{where}: matrix must be square")
    return np.array([[_complex(x, f"{where}[{i}][{j}]") for j, x in enumerate(r)]
                     for i, r in enumerate(rows)])


def parse_family_file(text) -> BlochFamily:
    obj = _load_json(text)
    for key in ("c0", "coeffs"):
        if key not in obj:
            raise GraphSpecError(f"missing key {key!r}")
    c0 = _matrix(obj["c0"], "c0")
    if not isinstance(obj["coeffs"], list) or not obj["coeffs"]:
        raise GraphSpecError("coeffs: expected a non-empty array of matrices")
    coeffs = [_matrix(c, f"coeffs[{j}]") for j, c in enumerate(obj["coeffs"])]
    if any(c.shape != c0.shape for c in coeffs):
        raise GraphSpecError("coeffs: every coefficient matrix must match c0 in size")
    return BlochFamily(c0, np.array(coeffs), name=str(obj.get("name", "")))


def _matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def family_to_dict(family: BlochFamily) -> dict:
    return {
        "name": family.name,
        "dimension": family.dimension,
        "size": family.size,
        "c0": _matrix_to_json(family.c0),
        "coeffs": [_matrix_to_json(c) for c in family.coeffs],
    }


def family_to_json(family: BlochFamily) -> str:
    # repr-based float output is the shortest string that round-trips exactly
    return json.dumps(family_to_dict(family), indent=1)


def load_family(text, name: str = "") -> BlochFamily:
    """Parse either file format; graph files are detected by ``crossing_edges``."""
    obj = _load_json(text)
    if "crossing_edges" in obj:
        return build_bloch_family(parse_graph_file(text), name=name)
    fam = parse_family_file(text)
    if name and not fam.name:
        fam = BlochFamily(fam.c0, fam.coeffs, name=name)
    return fam


def grid_axes(points_per_axis: int) -> np.ndarray:
    """Closed uniform grid on [-pi, pi]; contains 0 and pi for odd counts."""
    if points_per_axis < 2:
        raise ValueError("points_per_axis must be >= 2")
    return np.linspace(-np.pi, np.pi, points_per_axis)


def grid_points(d: int, points_per_axis: int) -> np.ndarray:
    ax = grid_axes(points_per_axis)
    mesh = np.meshgrid(*([ax] * d), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def random_single_crossing_family(rng: np.random.Generator, n: int, d: int,
                                  real: bool = False, share_vertex: float = 0.3,
                                  loops: bool = False) -> BlochFamily:
    """A random connected single-crossing family (used by the property suites)."""
    onsite = tuple(rng.normal(size=n))
    edges = []
    # random spanning tree keeps the cell connected, then a few extra edges
    for v in range(2, n + 1):
        u = int(rng.integers(1, v))
        edges.append((u, v))
    for u in range(1, n + 1):
        for v in range(u + 1, n + 1):
            if (u, v) not in edges and rng.random() < 0.3:
                edges.append((u, v))

    def weight():
        w = rng.normal() + (0.0 if real else 1j * rng.normal())
        return complex(w if abs(w) > 0.2 else 0.5)

    intra = tuple(IntraEdge(u, v, weight()) for u, v in edges)
    cross = []
    prev = None
    for j in range(1, d + 1):
        if prev is not None and rng.random() < share_vertex:
            u = prev[0]
        else:
            u = int(rng.integers(1, n + 1))
        v = int(rng.integers(1, n + 1))
        if v == u and not loops and n > 1:
            v = u % n + 1
        prev = (u, v)
        cross.append(CrossingEdge(j, u, v, weight()))
    spec = PeriodicGraphSpec(d, n, onsite, intra, tuple(cross))
    return build_bloch_family(spec, name="random")

