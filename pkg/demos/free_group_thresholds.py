"""Where the weak norm of the heat symbol exp(-t|g|) on a free group becomes finite.

The level sets are balls, so the weak norm is sup_k e^{-tk} B_k^{1/r}.  It is finite
from t = log(2n-1)/r on; the cruder count (2n)^{|log alpha|/t} only certifies
finiteness from t = log(2n)/r.

Run: python demos/free_group_thresholds.py
"""
from __future__ import annotations

import math

import numpy as np

from ncharm import freegrp


def main(n: int = 2, r: float = 1.0):
    exact, crude = freegrp.exact_threshold(n, r), math.log(2 * n) / r
    print(f"F_{n}, r = {r}: exact threshold {exact:.6f}, crude threshold {crude:.6f}\n")
    print("   t/crude   exact value   from (2n)^x bound")
    for f in np.linspace(0.7, 1.2, 11):
        t = f * crude
        ex = freegrp.weak_norm_counting(n, t, r)["value"]
        bd = freegrp.weak_norm_bound(n, t, r)["value"]
        print(f"   {f:5.2f}     {ex:11.6g}   {bd:g}")

    print("\nlevel-set sizes against the crude count at t = 1")
    for x in (1.0, 1.01, 2.0, 2.01, 3.0, 3.01):
        res = freegrp.distribution(n, 1.0, math.exp(-x))
        mark = "  <- exceeds" if res["count"] > res["bound"] else ""
        print(f"   |log alpha| = {x:5.2f}: count {res['count']:4d}, (2n)^x = {res['bound']:8.3f}{mark}")


if __name__ == "__main__":
    main()
