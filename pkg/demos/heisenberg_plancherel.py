"""Plancherel identity and Fourier inversion for a Gaussian on the Heisenberg group.

Run: python demos/heisenberg_plancherel.py
"""
from __future__ import annotations

import math
import time

import numpy as np

from ncharm import heisenberg as H


def main():
    print("grid (n, Lambda, nodes)    relative error    seconds")
    for n, lam, nodes in [(32, 3.0, 65), (64, 6.0, 129)]:
        t0 = time.perf_counter()
        res = H.h_plancherel(H.HFunction.gaussian(1.0, 4.0, n), H.symmetric_lambda_grid(lam, nodes))
        print(f"({n:3d}, {lam:4.1f}, {nodes:3d})          {res['relative_error']:.3e}         "
              f"{time.perf_counter() - t0:.1f}")

    k = H.HFunction.gaussian()
    rng = np.random.default_rng(1)
    pts = [H.HPoint(*p) for p in rng.uniform(-1, 1, size=(5, 3))]
    rec = H.h_inverse(H.inversion_coefficients(k), pts, H.symmetric_lambda_grid(6.0, 129),
                      zero_density=H.zero_lambda_trace_density(k))
    print("\ninversion at random points")
    for p, v in zip(pts, rec):
        exact = math.exp(-math.pi * (p.a**2 + p.b**2 + p.c**2))
        print(f"  ({p.a:+.3f}, {p.b:+.3f}, {p.c:+.3f})  reconstructed {v.real:.8f}  exact {exact:.8f}")

    grid = H.Grid1D.symmetric(12.0, 1024)
    print("\nsub-Laplacian symbol at lambda = 1:", np.round(H.sublaplacian_eigenvalues(1.0, grid, 6), 6))
    exps = [H.weyl_exponent(np.logspace(a, a + 1, 9)) for a in (1, 2, 3)]
    print("Weyl counting exponent by decade:", [round(e, 6) for e in exps])


if __name__ == "__main__":
    main()
