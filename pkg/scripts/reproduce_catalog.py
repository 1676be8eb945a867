"""Recompute every catalog reference value and print a comparison table.

Usage: python3 scripts/reproduce_catalog.py [--names lieb,honeycomb]
"""
import argparse
import sys

import numpy as np

from bandcert.catalog import EXAMPLES, check_references, get_example


def fmt(x):
    a = np.asarray(x)
    if a.dtype.kind in "fc" and a.size > 4:
        return f"<{a.shape} array>"
    if a.dtype.kind in "fc":
        return np.array2string(np.round(a, 6), separator=",", max_line_width=400).replace("\n", "") if a.ndim else f"{complex(a).real:.6g}"
    return str(x)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--names", default=",".join(sorted(EXAMPLES)))
    args = ap.parse_args(argv)
    failures = 0
    for name in args.names.split(","):
        ex = get_example(name)
        print(f"== {name} {ex.params}")
        for note in ex.notes:
            print(f"   note: {note}")
        for c in check_references(ex):
            failures += not c.ok
            flag = "ok  " if c.ok else "FAIL"
            print(f"   {flag} {c.label:<40} [{c.source}] expected={fmt(c.expected)} "
                  f"observed={fmt(c.observed)} dev={c.deviation:.2e} tol={c.tol:.0e}")
    print(f"{failures} reference(s) outside tolerance")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
