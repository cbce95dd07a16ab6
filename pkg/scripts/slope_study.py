"""Betti total of the path space against the energy bound on the commuting example.

Fits the slope over the upper half of the s grid and compares it with the coarea
constant in both counting conventions.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from carnot_paths.coarea import MULTIPLICITY, slope_check, tau_commuting
from carnot_paths.core import J2, CarnotStructure


def commuting_example() -> CarnotStructure:
    def blk(a, b):
        M = np.zeros((4, 4))
        M[:2, :2], M[2:, 2:] = a * J2, b * J2
        return M

    return CarnotStructure.from_list([blk(1.0, 2.0), blk(2.0, 1.0)])


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--smax", type=float, default=200.0)
    ap.add_argument("--points", type=int, default=5)
    a = ap.parse_args()
    W, p = commuting_example(), np.array([0.0, 1.0])
    # energy bounds off the critical levels, which are multiples of 1/3 here
    S = 1.001 * a.smax * 2.0 ** -np.arange(a.points)[::-1]
    t0 = time.time()
    r = slope_check(W, p, S)
    tau = tau_commuting(W, p)
    print("s,total")
    for s, b in zip(r.s, r.totals):
        print(f"{s:g},{b}")
    print(f"# slope,{r.slope:.6f}")
    print(f"# tau,{tau:.6f}")
    print(f"# tau_single,{tau / MULTIPLICITY:.6f}")
    print(f"# rel_err,{r.rel_err:.4f}")
    print(f"# rel_err_single,{abs(r.slope - tau / MULTIPLICITY) / (tau / MULTIPLICITY):.4f}")
    print(f"# flags,{';'.join(r.flags) or '-'}")
    print(f"# seconds,{time.time() - t0:.1f}")
