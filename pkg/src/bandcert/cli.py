"""Command-line front end.

    bandcert bands   --example lieb --grid 101 --out lieb.csv
    bandcert certify --example d4-random --band 1 --seeds 32 --oracle grid=21
    bandcert verify  --random 50 --checks index,weyl
    bandcert example hks-magnetic --beta 0.1 --check

``certify`` exits 0 when at least one GlobalMin/GlobalMax/FlatBand certificate
was issued, 3 when a hypothesis failed and nothing was certified, 2 otherwise.
``verify`` and ``example --check`` exit 1 on any failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from importlib import resources

import numpy as np

from . import __version__
from . import hermitian as hm
from .catalog import EXAMPLES, check_references, get_example
from .certify import (GridBudgetError, SearchConfig, Verdict, conjecture_probe, grid_scan_oracle,
                      oracle_for, run_pipeline)
from .dispersion import TAU_GAP
from .lattice import (BlochFamily, GraphSpecError, band_values_many, canonicalize, family_to_dict,
                      grid_points, load_family, to_zero_two_pi)
from .suites import SUITES, run_suites

EXIT_OK, EXIT_FAIL, EXIT_NO_CERT, EXIT_HYPOTHESIS = 0, 1, 2, 3


@dataclass
class RunReport:
    input: dict
    command: str
    parameters: dict
    certificates: list = field(default_factory=list)
    timing: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    tool_version: str = __version__
    exit_code: int = 0
    results: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, allow_nan=False)


def report_schema() -> dict:
    text = resources.files("bandcert").joinpath("schemas/run_report.schema.json").read_text()
    return json.loads(text)


# ---------------------------------------------------------------- input handling

def _common(p: argparse.ArgumentParser):
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=0, help="RNG seed for random seeds and probes")
    g.add_argument("--threads", type=int, default=1)
    g.add_argument("--tol-gap", type=float, default=TAU_GAP,
                   help="relative gap below which an eigenvalue counts as degenerate")
    g.add_argument("--tol-rank", type=float, default=hm.EPS_RANK,
                   help="relative rank tolerance for pseudo-inverses and inertia")
    g.add_argument("--angle-convention", choices=("canonical", "0-2pi"), default="canonical",
                   help="report angles in (-pi, pi] or [0, 2pi)")
    g.add_argument("--out", default=None, help="output file (default: stdout)")


def _input_args(p: argparse.ArgumentParser):
    p.add_argument("input", nargs="?", help="graph or family JSON file, or '-' for stdin")
    p.add_argument("--example", choices=sorted(EXAMPLES))
    p.add_argument("--qa", type=float)
    p.add_argument("--qb", type=float)
    p.add_argument("--qc", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--t", type=float)


def _example_params(args) -> dict:
    return {k: getattr(args, k) for k in ("qa", "qb", "qc", "beta", "t") if getattr(args, k) is not None}


def load_input(args) -> tuple[BlochFamily, dict, int | None]:
    """The family, its identity record and the example's default band (if any)."""
    if args.example and args.input:
        raise ValueError("give either an input file or --example, not both")
    if args.example:
        ex = get_example(args.example, **_example_params(args))
        return ex.family, {"kind": "example", "name": ex.name, "params": ex.params}, ex.band
    if not args.input:
        raise ValueError("an input file, '-' or --example is required")
    if args.input == "-":
        data = sys.stdin.buffer.read()
        label = "<stdin>"
    else:
        with open(args.input, "rb") as fh:
            data = fh.read()
        label = args.input
    fam = load_family(data)
    return fam, {"kind": "file", "name": label, "sha256": hashlib.sha256(data).hexdigest()}, None


def _angles(alpha, convention: str) -> list[float]:
    a = to_zero_two_pi(alpha) if convention == "0-2pi" else canonicalize(alpha)
    return [float(x) for x in a]


def _cert_dict(cert, convention: str) -> dict:
    d = cert.to_dict()
    d["alpha_star"] = _angles(cert.alpha_star, convention)
    if d["oracle"] is not None:
        d["oracle"]["grid_argmin"] = _angles(cert.oracle.grid_argmin, convention)
        d["oracle"]["grid_argmax"] = _angles(cert.oracle.grid_argmax, convention)
    return d


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _parse_oracle(spec: str | None) -> int | None:
    if spec is None:
        return None
    key, _, val = spec.partition("=")
    if key != "grid" or not val.isdigit():
        raise ValueError(f"--oracle expects grid=K, got {spec!r}")
    return int(val)


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


# ---------------------------------------------------------------- commands

def cmd_bands(args) -> int:
    fam, _, _ = load_input(args)
    bands = _int_list(args.bands) if args.bands else list(range(1, fam.size + 1))
    if any(not 1 <= b <= fam.size for b in bands):
        raise ValueError(f"band indices must lie in 1..{fam.size}")
    if args.grid < 2:
        raise ValueError("--grid must be >= 2")
    if args.grid ** fam.dimension > 10 ** 7:
        raise GridBudgetError(f"{args.grid}^{fam.dimension} points exceed the grid budget")
    pts = grid_points(fam.dimension, args.grid)
    vals = band_values_many(fam, pts)[:, [b - 1 for b in bands]]
    if args.angle_convention == "0-2pi":
        pts = np.mod(pts, 2 * np.pi)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"alpha_{j + 1}" for j in range(fam.dimension)] + [f"lambda_{b}" for b in bands])
    for p, v in zip(pts, vals):
        w.writerow([f"{x:.12g}" for x in p] + [f"{x:.12g}" for x in v])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_certify(args) -> int:
    t0 = time.perf_counter()
    fam, ident, default_band = load_input(args)
    band = args.band or default_band or 1
    k = _parse_oracle(args.oracle)
    cfg = SearchConfig(random_seeds=args.seeds, corners_first=not args.no_corners,
                       mode=args.mode, tol_gap=args.tol_gap)
    res = run_pipeline(fam, band, cfg, seed=args.seed, threads=args.threads, tol_rank=args.tol_rank)
    certs = list(res.certificates)
    results: dict = {"flat_band": res.flat_band,
                     "searches": {"total": len(res.searches),
                                  "converged": sum(r.converged for r in res.searches)}}
    if k is not None:
        scan = grid_scan_oracle(fam, band, k)
        records = [oracle_for(c, fam, k, scan) for c in certs]
        certs = [c.with_oracle(o) for c, o in zip(certs, records)]
        if any(c.verdict == Verdict.NO_CERTIFICATE for c in certs):
            probe = conjecture_probe(fam, band, certs, k)
            results["conjecture_probe"] = [
                {"alpha": _angles(e.alpha, args.angle_convention), "value": e.value, "kind": e.kind,
                 "better_value": e.better_value,
                 "better_alpha": _angles(e.better_alpha, args.angle_convention),
                 "dominated": e.dominated} for e in probe.entries]
            results["probe_notes"] = list(probe.consistency)
    verdicts = {c.verdict for c in certs}
    if verdicts & {Verdict.GLOBAL_MIN, Verdict.GLOBAL_MAX, Verdict.FLAT_BAND}:
        code = EXIT_OK
    elif Verdict.HYPOTHESIS_FAILED in verdicts:
        code = EXIT_HYPOTHESIS
    else:
        code = EXIT_NO_CERT
    rep = RunReport(
        input=ident, command="certify",
        parameters={"band": band, "seeds": args.seeds, "corners": not args.no_corners,
                    "mode": args.mode, "oracle_grid": k, "seed": args.seed, "threads": args.threads,
                    "tol_gap": args.tol_gap, "tol_rank": args.tol_rank,
                    "angle_convention": args.angle_convention},
        certificates=[_cert_dict(c, args.angle_convention) for c in certs],
        timing={"seconds": time.perf_counter() - t0}, warnings=list(res.warnings),
        exit_code=code, results=results)
    _emit(rep.to_json(), args.out)
    return code


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    names = list(SUITES) if args.checks in (None, "all") else [c.strip() for c in args.checks.split(",")]
    families = None
    ident: dict = {"kind": "random", "name": f"random:{args.random}", "params": {}}
    if args.input or args.example:
        fam, ident, _ = load_input(args)
        families = [fam]
        if not fam.single_crossing:
            names = [n for n in names if n not in ("index", "weyl")]
    suites = run_suites(names, args.random, seed=args.seed, families=families, grid=args.grid)
    code = EXIT_OK if all(s.ok for s in suites) else EXIT_FAIL
    rep = RunReport(input=ident, command="verify",
                    parameters={"checks": names, "count": args.random, "seed": args.seed,
                                "grid": args.grid},
                    timing={"seconds": time.perf_counter() - t0}, exit_code=code,
                    results={"suites": [s.to_dict() for s in suites]})
    _emit(rep.to_json(), args.out)
    for s in suites:
        print(f"{s.name}: {s.passed}/{s.passed + s.failed} passed, worst residual {s.worst:.2e}",
              file=sys.stderr)
    return code


def _jsonable(x):
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return {"re": x.real.tolist(), "im": x.imag.tolist()}
        return x.tolist()
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, (list, tuple)):
        return [_jsonable(y) for y in x]
    if isinstance(x, float) and not np.isfinite(x):
        return None
    return x


def cmd_example(args) -> int:
    if args.list or not args.name:
        _emit("\n".join(f"{k}\t{', '.join(v[1]) or '-'}" for k, v in EXAMPLES.items()), args.out)
        return EXIT_OK
    ex = get_example(args.name, **_example_params(args))
    # the raw-family keys sit at top level so the output can be piped back in
    doc = family_to_dict(ex.family)
    doc["example"] = {"params": ex.params, "band": ex.band, "notes": list(ex.notes)}
    code = EXIT_OK
    if args.check:
        checks = check_references(ex)
        doc["example"]["references"] = [
            {"label": c.label, "expected": _jsonable(c.expected), "observed": _jsonable(c.observed),
             "deviation": _jsonable(c.deviation), "tol": c.tol, "source": c.source, "ok": c.ok}
            for c in checks]
        code = EXIT_OK if all(c.ok for c in checks) else EXIT_FAIL
    _emit(json.dumps(doc, indent=2), args.out)
    return code


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    _common(common)
    # global options live on each subcommand so they can follow it on the command line
    parser = argparse.ArgumentParser(prog="bandcert", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"bandcert {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bands", parents=[common], help="sample the bands on a uniform grid (CSV)")
    _input_args(p)
    p.add_argument("--grid", type=int, default=41, help="points per axis")
    p.add_argument("--bands", default=None, help="comma-separated 1-based band indices")
    p.set_defaults(func=cmd_bands)

    p = sub.add_parser("certify", parents=[common], help="search critical points and certify them")
    _input_args(p)
    p.add_argument("--band", type=int, default=None)
    p.add_argument("--seeds", type=int, default=8, help="number of random seeds")
    p.add_argument("--no-corners", action="store_true", help="skip the corner seeds")
    p.add_argument("--mode", choices=("both", "min", "max", "any"), default="both")
    p.add_argument("--oracle", default=None, help="grid=K: confirm certificates on a K^d grid")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("verify", parents=[common], help="run the randomized property suites")
    _input_args(p)
    p.add_argument("--random", type=int, default=20, metavar="K", help="cases per suite")
    p.add_argument("--checks", default="all", help=f"comma-separated subset of {','.join(SUITES)}")
    p.add_argument("--grid", type=int, default=41, help="points per axis for the Weyl bracket check")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("example", parents=[common], help="print a catalog example")
    p.add_argument("name", nargs="?", choices=sorted(EXAMPLES))
    p.add_argument("--list", action="store_true")
    p.add_argument("--check", action="store_true", help="recompute and compare its reference values")
    for k in ("qa", "qb", "qc", "beta", "t"):
        p.add_argument(f"--{k}", type=float)
    p.set_defaults(func=cmd_example)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, GraphSpecError, OSError, KeyError) as exc:
        print(f"bandcert {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
