"""The two-term Plancherel identity on the ax+b group with the Duflo-Moore operator D.

Run: python demos/axb_plancherel.py
"""
from __future__ import annotations

from ncharm import axb


def main():
    print("grid (n_a, n_b)   lhs              rhs              relative error")
    for n_a, n_b in [(41, 32), (81, 64), (161, 128)]:
        res = axb.axb_plancherel(axb.AxbFunction.product_bump(n_a=n_a, n_b=n_b))
        print(f"({n_a:3d}, {n_b:3d})        {res['lhs']:.12f}   {res['rhs']:.12f}   {res['relative_error']:.2e}")


if __name__ == "__main__":
    main()
