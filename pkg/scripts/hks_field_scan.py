"""Band-2 maxima of the five-site magnetic example as the field strength varies.

For each beta the two mirror maxima of the beta = 0 family are followed by
Newton ascent and certified.  Two ways of inserting the field into the
(1,5) hopping are compared: 1 + i*beta and exp(i*beta).
"""
import argparse

import numpy as np

from bandcert.catalog import HKS_GLOBAL_MAX_RAW, HKS_LOCAL_MAX_RAW
from bandcert.certify import certify, find_critical_point
from bandcert.dispersion import derivative_pack
from bandcert.lattice import (CrossingEdge, IntraEdge, PeriodicGraphSpec, build_bloch_family,
                              canonicalize, to_zero_two_pi)


def family(w15: complex):
    spec = PeriodicGraphSpec(
        2, 5, (0.0,) * 5,
        (IntraEdge(1, 4, 1.0), IntraEdge(1, 5, w15), IntraEdge(2, 3, 1.0), IntraEdge(2, 5, 1.0),
         IntraEdge(3, 4, 1.0), IntraEdge(4, 5, 1.0)),
        (CrossingEdge(1, 1, 3, 1.0), CrossingEdge(2, 2, 4, 1.0)))
    return build_bloch_family(spec)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--betas", default="0,0.025,0.05,0.075,0.1,0.15,0.2")
    args = ap.parse_args(argv)
    print("insert      beta    alpha_1  alpha_2  value      W eigenvalues          verdict")
    for beta in map(float, args.betas.split(",")):
        for label, w15 in (("1+i*beta", 1 + 1j * beta), ("exp(i*beta)", np.exp(1j * beta))):
            fam = family(w15)
            for raw in (HKS_GLOBAL_MAX_RAW, HKS_LOCAL_MAX_RAW):
                res = find_critical_point(fam, 2, canonicalize(raw), mode="max")
                if not res.converged:
                    print(f"{label:<11} {beta:<7.3f} search {res.status}")
                    continue
                be = res.eigen
                pack = derivative_pack(fam, be)
                cert = certify(fam, be, pack)
                a = to_zero_two_pi(be.alpha)
                w = np.linalg.eigvalsh(pack.w)
                print(f"{label:<11} {beta:<7.3f} {a[0]:.4f}   {a[1]:.4f}   {be.value:.6f}  "
                      f"[{w[0]:+.4f}, {w[1]:+.4f}]     {cert.verdict.value}")


if __name__ == "__main__":
    main()
