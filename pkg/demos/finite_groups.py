"""Fourier analysis on S_3 and Z_16: Plancherel, Hausdorff-Young, and a multiplier family.

Run: python demos/finite_groups.py
"""
from __future__ import annotations

import numpy as np

from ncharm import finite


def main():
    rng = np.random.default_rng(0)
    G = finite.symmetric_group_s3()
    f = finite.FiniteGroupFunction(G, rng.normal(size=6))
    lhs, rhs = finite.plancherel_sides(f)
    print(f"S3 irreducible dimensions {G.dims}; Plancherel sides {lhs:.15f} {rhs:.15f}")
    for p in (1.0, 4 / 3, 2.0):
        print(f"  Hausdorff-Young p = {p:.3f}: ratio {finite.hausdorff_young_check(f, p)['ratio']:.6f}")

    k = finite.cyclic_word_length(16)
    print("\nZ_16, m = exp(-t|k|), p = 4/3, q = 4")
    print("     t     ||T_m||     ||m||_{2,inf}   ratio")
    for t in (0.1, 0.5, 1.0, 2.0, 5.0):
        res = finite.zhang_ratio(np.exp(-t * k), 4 / 3, 4.0, restarts=16)
        print(f"  {t:4.1f}   {res['operator_norm']:.6f}   {res['weak_norm']:.6f}        {res['ratio']:.6f}")


if __name__ == "__main__":
    main()
