"""Critical points of band 1 of the four-dimensional random example.

Runs the certification pipeline, then inspects the critical point near the
tabulated interior location: value, Re W and W spectra, and where Newton
ascent from that point ends up.
"""
import argparse

import numpy as np

from bandcert.catalog import D4_INTERIOR, d4_family
from bandcert.certify import SearchConfig, find_critical_point, grid_scan_oracle, is_corner, run_pipeline
from bandcert.dispersion import derivative_pack


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=64)
    ap.add_argument("--grid", type=int, default=21, help="points per axis for the grid scan")
    args = ap.parse_args(argv)
    fam = d4_family()

    res = run_pipeline(fam, 1, SearchConfig(random_seeds=args.seeds), extra_seeds=[D4_INTERIOR])
    print(f"pipeline: {len(res.certificates)} distinct critical points")
    for c in res.certificates:
        print(f"  {np.round(c.alpha_star, 4)}  value={c.value:.7f}  {c.verdict.value:<15} "
              f"W inertia={c.w_inertia}  codes={','.join(c.reason_codes)}")

    near = find_critical_point(fam, 1, D4_INTERIOR, mode="any")
    pack = derivative_pack(fam, near.eigen)
    print(f"\nnear tabulated point: alpha={np.round(near.eigen.alpha, 4)} value={near.eigen.value:.7f}")
    print(f"  Re W eigenvalues: {np.round(np.linalg.eigvalsh(pack.w.real), 6)}")
    print(f"  W eigenvalues:    {np.round(np.linalg.eigvalsh(pack.w), 6)}")

    up = find_critical_point(fam, 1, D4_INTERIOR, mode="max")
    print(f"\nascent from it: {np.round(up.eigen.alpha, 4)} value={up.eigen.value:.7f} "
          f"corner={is_corner(up.eigen.alpha, 1e-6)}")

    scan = grid_scan_oracle(fam, 1, args.grid)
    print(f"\n{args.grid}^4 grid: min {scan.min:.6f} at {np.round(scan.argmin, 3)}, "
          f"max {scan.max:.6f} at {np.round(scan.argmax, 3)}")


if __name__ == "__main__":
    main()
