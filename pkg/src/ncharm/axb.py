"""The ``ax+b`` group: Haar measures, the two infinite-dimensional representations
and the adjusted operator-valued Fourier transform.

Elements ``(a, b)`` with ``a > 0`` act on the line by ``x -> a x + b``.  Functions
on the group are sampled on a grid uniform in ``alpha = log a`` and in ``b``;
the left Haar measure ``da db / a^2`` becomes ``e^{-alpha} d alpha db``.

The representations live on ``L^2`` of a half-line with Lebesgue measure,
``pi_sign(a, b) phi(t) = sqrt(a) e^{2 pi i b t} phi(a t)``, and ``D phi(s) = sqrt|s| phi(s)``.
Half-line grids are log-uniform so that dilations are index shifts.
"""
from __future__ import annotations

import csv
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline

from ._errors import Refusal
from .heisenberg import Grid1D, catmull_rom_weights, _threads


class AxbPoint(NamedTuple):
    a: float
    b: float

    @classmethod
    def make(cls, a: float, b: float) -> "AxbPoint":
        if not a > 0:
            raise ValueError(f"a must be positive, got {a}")
        return cls(float(a), float(b))


IDENTITY = AxbPoint(1.0, 0.0)


def axb_mul(g: AxbPoint, h: AxbPoint) -> AxbPoint:
    return AxbPoint(g.a * h.a, g.a * h.b + g.b)


def axb_inv(g: AxbPoint) -> AxbPoint:
    return AxbPoint(1.0 / g.a, -g.b / g.a)


def modular(g: AxbPoint) -> float:
    """``Delta(a, b) = 1/a``, relating right to left Haar measure."""
    return 1.0 / g.a


def _sign(sign) -> int:
    if sign in (1, "+", "plus"):
        return 1
    if sign in (-1, "-", "minus"):
        return -1
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


# --- sampled functions on the group ---------------------------------------------------------


@dataclass
class AxbFunction:
    """Samples ``values[i, j] = f(e^{alpha_i}, b_j)`` with ``alpha`` on ``[-A, A]`` and ``b`` on ``[-B, B]``.

    ``n_a`` must be odd so that ``alpha = 0`` is a node and ratios of half-line
    grid points land on the alpha lattice.
    """

    values: np.ndarray
    A: float
    B: float
    tail_tol: float = 1e-6
    family: str = "samples"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 2:
            raise ValueError("samples must be a 2-D array (alpha, b)")
        n_a, n_b = self.values.shape
        if n_a % 2 == 0:
            raise ValueError("the alpha grid needs an odd number of points")
        if min(n_a, n_b) < 8:
            raise ValueError("need at least 8 points per axis")
        v = np.abs(self.values)
        peak = v.max()
        if peak > 0:
            shell = max(v[0].max(), v[-1].max(), v[:, 0].max(), v[:, -1].max())
            if shell > self.tail_tol * peak:
                raise ValueError(f"function does not decay inside the box: boundary/peak = "
                                 f"{shell / peak:.3g}; enlarge A or B")

    @property
    def alpha_axis(self) -> Grid1D:
        return Grid1D.symmetric(self.A, self.values.shape[0])

    @property
    def b_axis(self) -> Grid1D:
        return Grid1D.symmetric(self.B, self.values.shape[1])

    @property
    def nyquist(self) -> float:
        return 0.5 / self.b_axis.step

    def haar_weights(self) -> np.ndarray:
        al = self.alpha_axis
        return np.outer(al.weights * np.exp(-al.points), self.b_axis.weights)

    def l2_norm_sq(self) -> float:
        return float(np.sum(self.haar_weights() * np.abs(self.values) ** 2))

    def integral(self) -> complex:
        return complex(np.sum(self.haar_weights() * self.values))

    def scaled(self, alpha: complex) -> "AxbFunction":
        return AxbFunction(alpha * self.values, self.A, self.B, self.tail_tol, self.family)

    def __add__(self, other: "AxbFunction") -> "AxbFunction":
        return AxbFunction(self.values + other.values, self.A, self.B, self.tail_tol)

    @classmethod
    def from_callable(cls, fn: Callable, A: float, B: float, n_a: int, n_b: int, **kw) -> "AxbFunction":
        al = np.linspace(-A, A, n_a)
        b = np.linspace(-B, B, n_b)
        AL, BB = np.meshgrid(al, b, indexing="ij")
        return cls(fn(np.exp(AL), BB), A, B, **kw)

    @classmethod
    def product_bump(cls, alpha_radius: float = 2.0, b_radius: float = 2.0, alpha_center: float = 0.0,
                     A: float = 2.5, B: float = 2.5, n_a: int = 81, n_b: int = 64) -> "AxbFunction":
        """``chi(log a) psi(b)`` with smooth compactly supported bumps."""
        def fn(a, b):
            return bump(np.log(a) - alpha_center, alpha_radius) * bump(b, b_radius)
        return cls.from_callable(fn, A, B, n_a, n_b,
                                 family=f"product_bump({alpha_radius}, {b_radius})")

    def to_csv(self, path) -> None:
        al, b = self.alpha_axis.points, self.b_axis.points
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["log_a", "b", "re", "im"])
            for i, x in enumerate(al):
                for j, y in enumerate(b):
                    v = self.values[i, j]
                    wr.writerow([repr(float(t)) for t in (x, y, v.real, v.imag)])

    @classmethod
    def from_csv(cls, path, **kw) -> "AxbFunction":
        rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        al, b = np.unique(rows[:, 0]), np.unique(rows[:, 1])
        if rows.shape[0] != len(al) * len(b):
            raise ValueError("CSV does not describe a full (log_a, b) grid")
        order = np.lexsort((rows[:, 1], rows[:, 0]))
        vals = (rows[order, 2] + 1j * rows[order, 3]).reshape(len(al), len(b))
        return cls(vals, float(al.max()), float(b.max()), **kw)


def bump(x, radius: float = 1.0):
    """``exp(1 - 1/(1 - (x/radius)^2))`` inside ``|x| < radius``, else 0."""
    x = np.asarray(x, dtype=float) / radius
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - x[inside] ** 2))
    return out


def left_haar_integral(fn: Callable, A: float, B: float, n_a: int, n_b: int) -> float:
    """``int fn(a, b) da db / a^2`` by the trapezoid rule in ``(log a, b)``."""
    f = AxbFunction.from_callable(fn, A, B, n_a, n_b, tail_tol=np.inf)
    return f.integral()


# --- half-line grids and the representations ------------------------------------------------


@dataclass(frozen=True)
class HalfLineGrid:
    """Points ``sign * exp(log_min + j * step)``, ``j = 0..m-1``."""

    sign: int
    log_min: float
    step: float
    m: int

    @property
    def logs(self) -> np.ndarray:
        return self.log_min + self.step * np.arange(self.m)

    @property
    def points(self) -> np.ndarray:
        return self.sign * np.exp(self.logs)

    @property
    def weights(self) -> np.ndarray:
        # dt = |t| d log|t|, trapezoid in log|t|
        w = self.step * np.exp(self.logs)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w

    @property
    def t_max(self) -> float:
        return float(np.exp(self.log_min + self.step * (self.m - 1)))

    def log_axis(self) -> Grid1D:
        return Grid1D(self.log_min, self.log_min + self.step * (self.m - 1), self.m)

    def as_dict(self) -> dict:
        return {"sign": self.sign, "t_min": float(np.exp(self.log_min)), "t_max": self.t_max,
                "log_step": self.step, "m": self.m}


def l2_norm(phi: np.ndarray, grid: HalfLineGrid) -> float:
    return float(np.sqrt(np.sum(grid.weights * np.abs(phi) ** 2)))


def _dilate(phi: np.ndarray, grid: HalfLineGrid, a: float) -> np.ndarray:
    """``t -> phi(a t)``: an index shift when ``log a`` is a multiple of the step."""
    shift = np.log(a) / grid.step
    k = int(round(shift))
    phi = np.asarray(phi)
    if abs(shift - k) < 1e-9:
        out = np.zeros_like(phi, dtype=complex)
        if k >= 0:
            out[: grid.m - k] = phi[k:] if k else phi
        else:
            out[-k:] = phi[: grid.m + k]
        return out
    x = grid.logs + np.log(a)
    spline = CubicSpline(grid.logs, phi.astype(complex), bc_type="natural", extrapolate=False)
    return np.nan_to_num(spline(x), nan=0.0)


def axb_rep(sign, g: AxbPoint, phi: np.ndarray, grid: HalfLineGrid) -> np.ndarray:
    """``pi_sign(g) phi`` sampled on ``grid`` (zero outside the grid)."""
    s = _sign(sign)
    if s != grid.sign:
        raise ValueError(f"representation sign {s:+d} does not match grid on sign {grid.sign:+d}")
    if not g.a > 0:
        raise ValueError("a must be positive")
    t = grid.points
    return np.sqrt(g.a) * np.exp(2j * np.pi * g.b * t) * _dilate(phi, grid, g.a)


def D_apply(phi: np.ndarray, grid: HalfLineGrid) -> np.ndarray:
    return np.sqrt(np.abs(grid.points)) * np.asarray(phi)


@dataclass
class HalfLineKernel:
    """``(K phi)(s) = int K(s, t) phi(t) dt`` on a half-line grid (same grid for ``s`` and ``t``)."""

    sign: int
    grid: HalfLineGrid
    kernel: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @property
    def weights(self) -> np.ndarray:
        return self.grid.weights

    def apply(self, phi: np.ndarray) -> np.ndarray:
        return self.kernel @ (self.weights * np.asarray(phi))

    def hs_norm_sq(self) -> float:
        w = self.weights
        return float(np.einsum("i,j,ij->", w, w, np.abs(self.kernel) ** 2))


def default_half_line_grid(f: AxbFunction, sign, nyquist_fraction: float = 0.95,
                           log_t_min: float = -20.0, oversample: int = 1) -> HalfLineGrid:
    """Log grid from ``e^{log_t_min}`` up to ``nyquist_fraction`` of the b-axis Nyquist frequency."""
    step = f.alpha_axis.step / oversample
    log_max = np.log(nyquist_fraction * f.nyquist)
    m = int(np.floor((log_max - log_t_min) / step)) + 1
    return HalfLineGrid(_sign(sign), log_max - step * (m - 1), step, m)


def axb_fourier(f: AxbFunction, sign, grid: HalfLineGrid | None = None) -> HalfLineKernel:
    """Kernel of ``pi_sign(f) D_sign``.

    ``K(s, t) = sqrt|s| / |t| * (F_2 f)(t/s, -s)``; the b-transform is a trapezoid sum,
    and ``t/s`` falls on the alpha lattice when the grid step divides the alpha step
    (otherwise Catmull-Rom interpolation in alpha is used).
    """
    sgn = _sign(sign)
    if grid is None:
        grid = default_half_line_grid(f, sgn)
    if grid.sign != sgn:
        raise ValueError("grid sign does not match the representation")
    if grid.t_max > f.nyquist:
        raise Refusal(f"|s| up to {grid.t_max:.4g} exceeds the b-axis Nyquist bound "
                      f"{f.nyquist:.4g}; shrink the half-line grid or refine b",
                      t_max=grid.t_max, nyquist=f.nyquist)
    s = grid.points
    al, bx = f.alpha_axis, f.b_axis
    # G[alpha, i] = (F_2 f)(e^alpha, -s_i) = int f(e^alpha, b) e^{2 pi i b s_i} db
    G = f.values @ (bx.weights[:, None] * np.exp(2j * np.pi * np.outer(bx.points, s)))
    logs = grid.logs
    diff = logs[None, :] - logs[:, None]  # log(t_j / s_i)
    ratio = diff / al.step
    lattice = np.allclose(ratio, np.round(ratio), atol=1e-9) and \
        abs(al.lo / al.step - round(al.lo / al.step)) < 1e-9
    m = grid.m
    if lattice:
        ell = np.round((diff - al.lo) / al.step).astype(int)
        inside = (ell >= 0) & (ell < al.m)
        vals = np.zeros((m, m), dtype=complex)
        rows = np.broadcast_to(np.arange(m)[:, None], (m, m))
        vals[inside] = G[ell[inside], rows[inside]]
    else:
        idx, w = catmull_rom_weights(al, diff.ravel())
        cols = np.repeat(np.arange(m), m)
        vals = np.einsum("pk,pk->p", w, G[idx, cols[:, None]]).reshape(m, m)
        vals[(diff < al.lo - al.step) | (diff > al.hi + al.step)] = 0.0
    K = np.sqrt(np.abs(s))[:, None] / np.abs(s)[None, :] * vals
    return HalfLineKernel(sgn, grid, K, {"alpha_lattice": bool(lattice)})


def axb_plancherel(f: AxbFunction, grids: dict | None = None, workers: int | None = None) -> dict:
    """``||f||_2^2`` (left Haar) against ``HS(f^(pi+))^2 + HS(f^(pi-))^2``."""
    t0 = time.perf_counter()
    grids = grids or {}

    def side(sign):
        return axb_fourier(f, sign, grids.get(sign)).hs_norm_sq()

    workers = workers or _threads()
    if workers > 1:
        with ThreadPoolExecutor(min(workers, 2)) as ex:
            plus, minus = ex.map(side, (1, -1))
    else:
        plus, minus = side(1), side(-1)
    lhs = f.l2_norm_sq()
    rhs = plus + minus
    rel = abs(lhs - rhs) / lhs if lhs > 0 else abs(rhs)
    g = grids.get(1) or default_half_line_grid(f, 1)
    return {
        "lhs": lhs, "rhs": rhs, "hs_plus": plus, "hs_minus": minus,
        "relative_error": rel,
        "grid": {"alpha_points": f.values.shape[0], "b_points": f.values.shape[1],
                 "A": f.A, "B": f.B, "half_line": g.as_dict()},
        "runtime_ms": 1e3 * (time.perf_counter() - t0),
    }


def direct_rep_of_f(f_callable: Callable, phi_callable: Callable, sign, t: np.ndarray,
                    A: float, B: float, n_a: int, n_b: int, with_D: bool = True) -> np.ndarray:
    """``(pi(f) [D] phi)(t)`` by direct 2-D left-Haar quadrature of the defining integral."""
    sgn = _sign(sign)
    al = Grid1D.symmetric(A, n_a)
    bx = Grid1D.symmetric(B, n_b)
    a = np.exp(al.points)
    F = f_callable(a[:, None], bx.points[None, :])
    wa = al.weights * np.exp(-al.points)
    out = []
    for tt in np.atleast_1d(t):
        if np.sign(tt) != sgn:
            raise ValueError("evaluation point on the wrong half-line")
        arg = a * tt
        ph = phi_callable(arg) * (np.sqrt(np.abs(arg)) if with_D else 1.0)
        inner = F @ (bx.weights * np.exp(2j * np.pi * bx.points * tt))
        out.append(np.sum(wa * np.sqrt(a) * ph * inner))
    return np.array(out)
