"""Spherical functions on SL_2(R)/SO(2), the c-function, and inversion at the origin.

Run: python demos/spherical_inversion.py
"""
from __future__ import annotations

import math

from ncharm import spherical as S


def main():
    print("phi_lam(a_r):")
    for lam in (0.0, 1.0, 3.0):
        vals = [S.spherical_phi(lam, r).real for r in (0.0, 1.0, 3.0, 6.0)]
        print(f"  lam = {lam}: " + "  ".join(f"{v:+.6f}" for v in vals))

    print("\nasymptotic fit phi e^{r/2} ~ c e^{i lam r} + conj(c) e^{-i lam r} on r in [8, 16]")
    for lam in (0.5, 1.0, 2.5):
        fit = S.asymptotic_fit(lam)
        dens = fit["abs_c_plus"] ** -2
        print(f"  lam = {lam}: |c|^-2 = {dens:.8f}  (pi lam tanh(pi lam) = "
              f"{math.pi * lam * math.tanh(math.pi * lam):.8f}), residual {fit['residual']:.1e}")

    res = S.inversion_check()
    print(f"\ninversion: kappa {res['kappa']:.6f} (1/(2 pi^2) = {1 / (2 * math.pi**2):.6f}), "
          f"f(e) reconstructed {res['reconstruction']:.6f}, isometry error {res['isometry_error']:.1e}")


if __name__ == "__main__":
    main()
