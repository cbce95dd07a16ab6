"""Census, Morse-Bott polynomial and Betti total for a random corank-two structure."""
from __future__ import annotations

import argparse

import numpy as np

from carnot_paths.census import base_energy, census, morse_bott_polynomial, torus_rank_check
from carnot_paths.core import CarnotStructure
from carnot_paths.topology import betti_from_profile, index_profile_analytic

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--k", type=float, default=5.0, help="energy bound in units of the base energy")
    a = ap.parse_args()
    rng = np.random.default_rng(a.seed)
    B = rng.standard_normal((2, a.d, a.d))
    W = CarnotStructure.from_list(B - B.transpose(0, 2, 1))
    p = rng.standard_normal(2)
    E1 = base_energy(W, p)
    s = a.k * E1 * 1.0137
    rep = census(W, p, s)
    print("omega_1,omega_2,nu,energy,index,torus_ok")
    for m in rep.manifolds:
        print(f"{m.omega[0]:.9g},{m.omega[1]:.9g},{m.nu},{m.energy:.9g},{m.index},"
              f"{torus_rank_check(W, m).ok}")
    mb = morse_bott_polynomial(rep)
    bt = betti_from_profile(index_profile_analytic(W, p, s))
    print(f"# base_energy,{E1:.9g}")
    print(f"# s,{s:.9g}")
    print(f"# morse_bott,{mb}")
    print(f"# morse_bott_at_1,{mb(1)}")
    print(f"# betti_total,{bt.total}")
