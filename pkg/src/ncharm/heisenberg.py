"""Fourier analysis on the Heisenberg group.

Coordinates ``(a, b, c)`` stand for the unitriangular matrix
``[[1, a, c], [0, 1, b], [0, 0, 1]]``.  The Schrodinger representations act on
``L^2(R)`` by ``pi_lam(a, b, c) f(t) = exp(2 pi i lam (c + b t)) f(t + a)`` and the
Fourier convention is ``F(f)(xi) = int f(u) exp(-2 pi i u xi) du`` throughout.

Operator-valued transforms are discretized as :class:`KernelOperator` objects on
a uniform grid; ``(K phi)(s) = int K(s, u) phi(u) du`` with trapezoid weights.
"""
from __future__ import annotations

import csv
import math
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, NamedTuple

import numpy as np
from scipy import linalg, sparse, special

from ._errors import Refusal


class HPoint(NamedTuple):
    a: float
    b: float
    c: float


class CoadjointPoint(NamedTuple):
    mu: float
    nu: float
    lam: float


IDENTITY = HPoint(0.0, 0.0, 0.0)


def h_mul(x: HPoint, y: HPoint) -> HPoint:
    return HPoint(x.a + y.a, x.b + y.b, x.c + y.c + x.a * y.b)


def h_inv(x: HPoint) -> HPoint:
    return HPoint(-x.a, -x.b, x.a * x.b - x.c)


def as_matrix(x: HPoint) -> np.ndarray:
    return np.array([[1.0, x.a, x.c], [0.0, 1.0, x.b], [0.0, 0.0, 1.0]])


def coadjoint(g: HPoint, ell: CoadjointPoint) -> CoadjointPoint:
    a, b, _ = g
    return CoadjointPoint(ell.mu + b * ell.lam, ell.nu - a * ell.lam, ell.lam)


def rep_flat(mu: float, nu: float, g: HPoint) -> complex:
    """One-dimensional character attached to the fixed point ``(mu, nu, 0)``."""
    return complex(np.exp(2j * np.pi * (g.a * mu + g.b * nu)))


# --- one-dimensional grids ------------------------------------------------------------------


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on ``[lo, hi]`` with ``m`` points and trapezoid weights."""

    lo: float
    hi: float
    m: int

    @classmethod
    def symmetric(cls, T: float, m: int) -> "Grid1D":
        return cls(-T, T, m)

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / (self.m - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.m)

    @property
    def weights(self) -> np.ndarray:
        w = np.full(self.m, self.step)
        w[0] = w[-1] = 0.5 * self.step
        return w

    @property
    def extent(self) -> float:
        return max(abs(self.lo), abs(self.hi))

    def as_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "m": self.m}


def catmull_rom_weights(grid: Grid1D, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Indices ``(len(x), 4)`` and weights for Catmull-Rom interpolation at ``x``.

    Indices falling outside the grid get weight 0, i.e. the function is taken to
    vanish off the grid.
    """
    x = np.asarray(x, dtype=float)
    u = (x - grid.lo) / grid.step
    i0 = np.floor(u).astype(int)
    s = u - i0
    s2, s3 = s * s, s * s * s
    w = np.stack([
        0.5 * (-s3 + 2 * s2 - s),
        0.5 * (3 * s3 - 5 * s2 + 2),
        0.5 * (-3 * s3 + 4 * s2 + s),
        0.5 * (s3 - s2),
    ], axis=-1)
    idx = i0[..., None] + np.arange(-1, 3)
    valid = (idx >= 0) & (idx < grid.m)
    return np.clip(idx, 0, grid.m - 1), np.where(valid, w, 0.0)


def shift_interpolate(grid: Grid1D, values: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Catmull-Rom evaluation of grid samples (along axis 0) at arbitrary points ``x``."""
    idx, w = catmull_rom_weights(grid, x)
    return np.einsum("pk,pk...->p...", w, np.asarray(values)[idx])


def rep_apply(lam: float, g: HPoint, phi: np.ndarray, grid: Grid1D) -> np.ndarray:
    """``pi_lam(g) phi`` on the grid; the translation by ``a`` uses Catmull-Rom interpolation."""
    if lam == 0:
        raise ValueError("rep_apply needs lam != 0; use rep_flat for the characters")
    t = grid.points
    shifted = shift_interpolate(grid, np.asarray(phi, dtype=complex), t + g.a)
    phase = np.exp(2j * np.pi * lam * (g.c + g.b * t))
    return phase.reshape(-1, *([1] * (shifted.ndim - 1))) * shifted


def l2_norm(phi: np.ndarray, grid: Grid1D) -> float:
    return float(np.sqrt(np.sum(grid.weights * np.abs(phi) ** 2)))


# --- functions on the group -----------------------------------------------------------------


@dataclass
class HFunction:
    """Samples of ``k(a, b, c)`` on the uniform grid ``[-R, R]^3`` with ``n`` points per axis."""

    values: np.ndarray
    R: float
    tail_tol: float = 1e-6
    family: str = "samples"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        n = self.values.shape[0]
        if self.values.shape != (n, n, n):
            raise ValueError(f"samples must be a cube, got {self.values.shape}")
        if n < 8:
            raise ValueError("need at least 8 points per axis")
        peak = np.abs(self.values).max()
        if peak > 0:
            v = np.abs(self.values)
            shell = max(v[0].max(), v[-1].max(), v[:, 0].max(), v[:, -1].max(),
                        v[:, :, 0].max(), v[:, :, -1].max())
            if shell > self.tail_tol * peak:
                raise ValueError(
                    f"function does not decay inside the box: boundary/peak = {shell / peak:.3g} "
                    f"> {self.tail_tol:g}; enlarge R")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def axis(self) -> Grid1D:
        return Grid1D.symmetric(self.R, self.n)

    @property
    def nyquist(self) -> float:
        return 0.5 / self.axis.step

    @classmethod
    def from_callable(cls, fn: Callable, R: float, n: int, **kw) -> "HFunction":
        x = np.linspace(-R, R, n)
        A, B, C = np.meshgrid(x, x, x, indexing="ij")
        return cls(fn(A, B, C), R, **kw)

    @classmethod
    def gaussian(cls, sigma: float = 1.0, R: float = 4.0, n: int = 64) -> "HFunction":
        """``exp(-pi (a^2 + b^2 + c^2) / sigma^2)``."""
        return cls.from_callable(lambda a, b, c: np.exp(-np.pi * (a * a + b * b + c * c) / sigma**2),
                                 R, n, family=f"gaussian(sigma={sigma})")

    @classmethod
    def bump(cls, radius: float = 2.0, R: float = 4.0, n: int = 64) -> "HFunction":
        """Smooth compactly supported ``exp(1 - 1/(1 - |x|^2/radius^2))``."""
        def fn(a, b, c):
            rho2 = (a * a + b * b + c * c) / radius**2
            out = np.zeros_like(rho2)
            inside = rho2 < 1
            out[inside] = np.exp(1.0 - 1.0 / (1.0 - rho2[inside]))
            return out
        return cls.from_callable(fn, R, n, family=f"bump(radius={radius})")

    def scaled(self, alpha: complex) -> "HFunction":
        return HFunction(alpha * self.values, self.R, self.tail_tol, self.family)

    def evaluate(self, points: Iterable[HPoint]) -> np.ndarray:
        """Trigonometric interpolation of the samples at arbitrary points inside the box."""
        pts = np.array([tuple(p) for p in points], dtype=float).reshape(-1, 3)
        E = [_trig_interp_matrix(self.axis, pts[:, j]) for j in range(3)]
        return np.einsum("pi,pj,pk,ijk->p", E[0], E[1], E[2], self.values)

    def l2_norm_sq(self) -> float:
        w = self.axis.weights
        return float(np.einsum("i,j,k,ijk->", w, w, w, np.abs(self.values) ** 2))

    def to_csv(self, path) -> None:
        x = self.axis.points
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["a", "b", "c", "re", "im"])
            for i, a in enumerate(x):
                for j, b in enumerate(x):
                    for k, c in enumerate(x):
                        v = self.values[i, j, k]
                        wr.writerow([repr(float(t)) for t in (a, b, c, v.real, v.imag)])

    @classmethod
    def from_csv(cls, path, **kw) -> "HFunction":
        rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        axis = np.unique(rows[:, 0])
        n = len(axis)
        if rows.shape[0] != n**3:
            raise ValueError("CSV does not describe a full cubic grid")
        order = np.lexsort((rows[:, 2], rows[:, 1], rows[:, 0]))
        vals = (rows[order, 3] + 1j * rows[order, 4]).reshape(n, n, n)
        return cls(vals, float(axis.max()), **kw)


# --- operator-valued Fourier transform -------------------------------------------------------


@dataclass
class KernelOperator:
    grid: Grid1D
    kernel: np.ndarray
    lam: float = float("nan")
    diagnostics: dict = field(default_factory=dict)

    def apply(self, phi: np.ndarray) -> np.ndarray:
        return self.kernel @ (self.grid.weights * np.asarray(phi))

    def hs_norm_sq(self) -> float:
        w = self.grid.weights
        return float(np.einsum("i,j,ij->", w, w, np.abs(self.kernel) ** 2))

    def trace(self) -> complex:
        return complex(np.sum(self.grid.weights * np.diag(self.kernel)))

    def compose(self, other: "KernelOperator") -> "KernelOperator":
        if self.grid != other.grid:
            raise ValueError("kernels live on different grids")
        return KernelOperator(self.grid, self.kernel @ (self.grid.weights[:, None] * other.kernel),
                              self.lam)

    def scaled(self, alpha: complex) -> "KernelOperator":
        return KernelOperator(self.grid, alpha * self.kernel, self.lam, dict(self.diagnostics))


def _trig_interp_matrix(axis: Grid1D, x: np.ndarray) -> np.ndarray:
    """Periodic trigonometric interpolation from the ``axis`` samples to points ``x``.

    The period is ``m * step``; adequate for samples that vanish near both ends.
    """
    m = axis.m
    period = m * axis.step
    delta = (np.asarray(x)[:, None] - axis.points[None, :]) / period
    kmax = (m - 1) // 2
    k = np.arange(1, kmax + 1)
    out = 1.0 + 2.0 * np.cos(2 * np.pi * delta[..., None] * k).sum(axis=-1)
    if m % 2 == 0:
        out += np.cos(np.pi * m * delta)
    return out / m


def _check_out_grid(k: HFunction, lam: float, grid: Grid1D):
    nyq = k.nyquist
    if abs(lam) * grid.extent > nyq:
        raise Refusal(
            f"|lam| * T = {abs(lam) * grid.extent:.4g} exceeds the b-axis Nyquist bound {nyq:.4g}; "
            f"reduce T below {nyq / abs(lam):.4g} or refine the sampling of k",
            lam=lam, T=grid.extent, nyquist=nyq)


def _kernel_band(k: HFunction, lam: float, grid: Grid1D) -> tuple[np.ndarray, int]:
    """Banded samples ``band[l + L, i] = K(s_i, s_i + l * step)`` for ``|l| <= L``.

    ``K(s, u) = (F_2 F_3 k)(u - s, -lam s, -lam)``: the b-frequency follows the output
    variable ``s`` and the c-frequency is ``-lam``, which is what the defining integral
    ``int k(a,b,c) e^{2 pi i lam (c + b s)} phi(s + a)`` produces.
    """
    axis = k.axis
    x, w = axis.points, axis.weights
    # F_3 at frequency -lam
    kc = np.einsum("ijk,k->ij", k.values, w * np.exp(2j * np.pi * lam * x))
    s = grid.points
    # F_2 at frequencies -lam * s
    fb = np.exp(2j * np.pi * lam * np.outer(x, s)) * w[:, None]
    gb = kc @ fb  # (n_a, m)
    L = int(np.floor(k.R / grid.step + 1e-9))
    shifts = np.arange(-L, L + 1) * grid.step
    band = _trig_interp_matrix(axis, shifts) @ gb
    return band, L


def _band_to_dense(band: np.ndarray, L: int, m: int) -> np.ndarray:
    K = np.zeros((m, m), dtype=complex)
    rows = np.arange(m)
    for ell in range(-L, L + 1):
        i = rows[(rows + ell >= 0) & (rows + ell < m)]
        K[i, i + ell] = band[ell + L, i]
    return K


def _band_hs_sq(band: np.ndarray, L: int, grid: Grid1D) -> float:
    m = grid.m
    w = grid.weights
    total = 0.0
    rows = np.arange(m)
    parts = []
    for ell in range(-L, L + 1):
        i = rows[(rows + ell >= 0) & (rows + ell < m)]
        parts.append(np.sum(np.abs(band[ell + L, i]) ** 2 * w[i] * w[i + ell]))
    total = float(np.sum(parts))
    return total


def default_out_grid(k: HFunction, lam: float, nyquist_fraction: float = 0.95,
                     oversample: float = 2.0, t_max: float = 1e3) -> Grid1D:
    """Output grid adapted to ``lam``: ``|lam| T`` just under the b-axis Nyquist bound.

    The step resolves both the a-sampling of ``k`` (``oversample`` points per sample)
    and the b-frequency sweep ``-lam s`` across the box.
    """
    lam = abs(lam)
    T = min(nyquist_fraction * k.nyquist / lam, t_max)
    step = min(k.axis.step / oversample, 1.0 / (2.0 * k.R * lam))
    m = int(np.ceil(2 * T / step)) + 1
    return Grid1D.symmetric(T, max(m, 9))


def h_fourier(k: HFunction, lam: float, out_grid: Grid1D | None = None) -> KernelOperator:
    """Kernel of ``pi_lam(k) = int k(g) pi_lam(g) dg`` on ``out_grid``.

    Refuses when ``|lam| T`` exceeds the Nyquist frequency of the b-sampling.
    A c-frequency ``|lam|`` above the Nyquist bound is flagged in ``diagnostics``
    (the value is then aliased, not refused, since it multiplies the whole kernel).
    """
    if lam == 0:
        raise ValueError("h_fourier needs lam != 0")
    grid = out_grid if out_grid is not None else default_out_grid(k, lam)
    _check_out_grid(k, lam, grid)
    band, L = _kernel_band(k, lam, grid)
    diag = {"c_frequency_aliased": bool(abs(lam) > k.nyquist), "band_halfwidth": L}
    return KernelOperator(grid, _band_to_dense(band, L, grid.m), lam, diag)


def symmetric_lambda_grid(Lam: float, count: int) -> np.ndarray:
    return np.linspace(-Lam, Lam, count)


def _trapezoid_weights(x: np.ndarray) -> np.ndarray:
    d = np.diff(x)
    w = np.zeros_like(x)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w


def _zero_lambda_density(k: HFunction) -> float:
    """``lim_{lam -> 0} |lam| ||pi_lam(k)||_HS^2 = int int |int k dc|^2 da db``."""
    w = k.axis.weights
    kab = np.einsum("ijk,k->ij", k.values, w)
    return float(np.einsum("i,j,ij->", w, w, np.abs(kab) ** 2))


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("NCHARM_THREADS", "1")))
    except ValueError:
        return 1


def h_plancherel(k: HFunction, lam_grid: np.ndarray, workers: int | None = None) -> dict:
    """Both sides of ``||k||_2^2 = int Tr[pi_lam(k)* pi_lam(k)] |lam| d lam``.

    The right side is a trapezoid rule over ``lam_grid``; at ``lam = 0`` the density
    ``|lam| ||pi_lam(k)||_HS^2`` is replaced by its limit, which is finite.
    """
    t0 = time.perf_counter()
    lam_grid = np.asarray(lam_grid, dtype=float)
    wl = _trapezoid_weights(lam_grid)

    def density(lam):
        if lam == 0:
            return _zero_lambda_density(k)
        grid = default_out_grid(k, lam)
        _check_out_grid(k, lam, grid)
        band, L = _kernel_band(k, lam, grid)
        return abs(lam) * _band_hs_sq(band, L, grid)

    workers = workers or _threads()
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            dens = np.array(list(ex.map(density, lam_grid)))
    else:
        dens = np.array([density(l) for l in lam_grid])
    lhs = k.l2_norm_sq()
    rhs = float(np.sum(wl * dens))
    rel = abs(lhs - rhs) / lhs if lhs > 0 else abs(rhs)
    return {
        "lhs": lhs,
        "rhs": rhs,
        "relative_error": rel,
        "grid": {"n": k.n, "R": k.R, "Lambda": float(np.abs(lam_grid).max()),
                 "lambda_nodes": len(lam_grid), "lambda_rule": "trapezoid",
                 "lambda_zero": "limit density int|int k dc|^2",
                 "out_grid": "|lam| T = 0.95 Nyquist(b)"},
        "c_aliased_nodes": int(np.sum(np.abs(lam_grid) > k.nyquist)),
        "density": dens,
        "runtime_ms": 1e3 * (time.perf_counter() - t0),
    }


def trace_against_rep(K: KernelOperator, g: HPoint) -> complex:
    """``Tr(pi_lam(g)* K)`` by quadrature of the diagonal of ``pi_lam(g^-1) K``.

    Only the diagonal entries are needed, so the Catmull-Rom shift of each column
    is evaluated at a single point.
    """
    grid, lam = K.grid, K.lam
    gi = h_inv(g)
    s = grid.points
    idx, w = catmull_rom_weights(grid, s + gi.a)
    cols = np.arange(grid.m)[:, None]
    shifted_diag = np.sum(K.kernel[idx, cols] * w, axis=1)
    phase = np.exp(2j * np.pi * lam * (gi.c + gi.b * s))
    return complex(np.sum(grid.weights * phase * shifted_diag))


def h_inverse(coeffs: Mapping[float, KernelOperator] | Callable[[float], KernelOperator],
              points: HPoint | Iterable[HPoint], lam_grid: np.ndarray | None = None,
              zero_density: Callable[[HPoint], complex] | None = None):
    """``f(x) = int Tr(pi_lam(x)* f^(pi_lam)) |lam| d lam`` on a lambda grid.

    ``coeffs`` is either a mapping ``lam -> KernelOperator`` or a callable building
    the operator lazily (so only one kernel is alive at a time).  The ``lam = 0``
    node has zero weight ``|lam|`` and is skipped unless ``zero_density`` supplies
    the limit of ``|lam| Tr(...)``.
    """
    single = isinstance(points, HPoint)
    pts = [points] if single else list(points)
    if lam_grid is None:
        if callable(coeffs):
            raise ValueError("lam_grid is required when coeffs is a callable")
        lam_grid = np.array(sorted(coeffs))
    lam_grid = np.asarray(lam_grid, dtype=float)
    wl = _trapezoid_weights(lam_grid)
    out = np.zeros(len(pts), dtype=complex)
    for lam, wt in zip(lam_grid, wl):
        if lam == 0:
            if zero_density is not None:
                out += wt * np.array([zero_density(p) for p in pts])
            continue
        K = coeffs(lam) if callable(coeffs) else coeffs[lam]
        out += wt * abs(lam) * np.array([trace_against_rep(K, p) for p in pts])
    return complex(out[0]) if single else out


def inversion_coefficients(k: HFunction, oversample: float = 4.0) -> Callable[[float], KernelOperator]:
    """Lazy ``lam -> h_fourier(k, lam)`` on grids fine enough for the Catmull-Rom trace."""
    def build(lam):
        return h_fourier(k, lam, default_out_grid(k, lam, oversample=oversample))
    return build


def zero_lambda_trace_density(k: HFunction) -> Callable[[HPoint], complex]:
    """``lim_{lam->0} |lam| Tr(pi_lam(x)* pi_lam(k))``.

    Since ``|lam| Tr pi_lam(a, b, c) = delta(a) delta(b) e^{2 pi i lam c}``, the density at
    ``x`` is ``int k(a_x, b_x, c') e^{2 pi i lam (c' - c_x)} dc'``, whose limit is the
    c-marginal of ``k`` at ``(a_x, b_x)``.
    """
    axis = k.axis
    w = axis.weights
    kab = np.einsum("ijk,k->ij", k.values, w)

    def density(p: HPoint) -> complex:
        ra = _trig_interp_matrix(axis, np.array([p.a]))
        rb = _trig_interp_matrix(axis, np.array([p.b]))
        return complex((ra @ kab @ rb.T)[0, 0])
    return density


# --- sub-Laplacian and Lie algebra ----------------------------------------------------------


def _second_difference(grid: Grid1D) -> sparse.csr_matrix:
    h2 = grid.step**2
    m = grid.m
    coeffs = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12.0 * h2)
    return sparse.diags([np.full(m - abs(o), c) for o, c in zip(range(-2, 3), coeffs)],
                        list(range(-2, 3)), format="csr")


def _first_difference(grid: Grid1D) -> sparse.csr_matrix:
    h = grid.step
    m = grid.m
    coeffs = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / (12.0 * h)
    return sparse.diags([np.full(m - abs(o), c) for o, c in zip(range(-2, 3), coeffs)],
                        list(range(-2, 3)), format="csr")


def sublaplacian_matrix(lam: float, grid: Grid1D) -> sparse.csr_matrix:
    """``|lam| (d^2/dt^2 - t^2)`` with a 5-point stencil and Dirichlet ends."""
    if lam == 0:
        raise ValueError("sub-Laplacian symbol needs lam != 0")
    if grid.m < 32:
        raise ValueError("grid too coarse: need m >= 32")
    t = grid.points
    return abs(lam) * (_second_difference(grid) - sparse.diags(t * t))


def sublaplacian_symbol(lam: float, phi: np.ndarray, grid: Grid1D) -> np.ndarray:
    return sublaplacian_matrix(lam, grid) @ np.asarray(phi)


def sublaplacian_eigenvalues(lam: float, grid: Grid1D, count: int = 10) -> np.ndarray:
    """The ``count`` eigenvalues of the discretized symbol closest to 0 (all negative)."""
    Lm = sublaplacian_matrix(lam, grid)
    m = grid.m
    # upper banded storage for eig_banded
    ab = np.zeros((3, m))
    for o in range(3):
        ab[2 - o, o:] = Lm.diagonal(o)
    ev = linalg.eig_banded(ab, eigvals_only=True, select="i", select_range=(m - count, m - 1))
    return np.sort(ev)[::-1]


class LieSymbols(NamedTuple):
    X: sparse.csr_matrix
    Y: sparse.csr_matrix
    Z: sparse.csr_matrix


def lie_symbols(lam: float, grid: Grid1D, convention: str = "paper") -> LieSymbols:
    """Discretized images of ``X, Y, Z`` under ``pi_lam``.

    ``convention="paper"``: ``X = sqrt|lam| d/dt``, ``Y = i sgn(lam) sqrt|lam| t``,
    ``Z = 2 pi i lam``; then ``X^2 + Y^2`` is the sub-Laplacian symbol but
    ``[X, Y] = i lam``.

    ``convention="exponent"``: the Schrodinger model rescaled so that ``[X, Y] = Z``
    with ``Z = 2 pi i lam``; here ``X = sqrt(2 pi |lam|) d/dt`` and
    ``Y = i sgn(lam) sqrt(2 pi |lam|) t``, so ``X^2 + Y^2 = 2 pi`` times the symbol.
    """
    if lam == 0:
        raise ValueError("lie_symbols needs lam != 0")
    scale = {"paper": np.sqrt(abs(lam)), "exponent": np.sqrt(2 * np.pi * abs(lam))}[convention]
    m = grid.m
    X = scale * _first_difference(grid)
    Y = sparse.diags(1j * np.sign(lam) * scale * grid.points)
    Z = sparse.identity(m, dtype=complex, format="csr") * (2j * np.pi * lam)
    return LieSymbols(X.astype(complex).tocsr(), Y.tocsr(), Z)


def oscillator_eigenvalues(count: int) -> np.ndarray:
    """Eigenvalues ``2k + 1`` of ``-d^2/dt^2 + t^2``."""
    return 2.0 * np.arange(count) + 1.0


def hermite_function(k: int, t: np.ndarray) -> np.ndarray:
    """Normalized Hermite function ``h_k``, by the stable three-term recurrence."""
    t = np.asarray(t, dtype=float)
    h0 = np.pi ** -0.25 * np.exp(-t * t / 2)
    if k == 0:
        return h0
    h1 = np.sqrt(2.0) * t * h0
    for j in range(2, k + 1):
        h0, h1 = h1, np.sqrt(2.0 / j) * t * h1 - np.sqrt((j - 1) / j) * h0
    return h1


# --- Weyl counting and the heat symbol ------------------------------------------------------


def _odd_reciprocal_square_sum(k_lo: int, k_hi: float) -> float:
    """``sum_{k_lo <= k < k_hi} 1/(2k+1)^2`` (``k_hi`` may be ``inf``)."""
    if k_hi <= k_lo:
        return 0.0
    head = float(special.polygamma(1, k_lo + 0.5)) / 4.0
    if np.isinf(k_hi):
        return head
    return head - float(special.polygamma(1, k_hi + 0.5)) / 4.0


def _levels_above(u: float, x: float) -> int:
    """``#{k >= 0 : u/(2k+1) > x}``."""
    if x <= 0:
        return np.iinfo(np.int64).max
    v = (u / x - 1.0) / 2.0
    return max(0, int(math.ceil(v))) if v > 0 else 0


def _radial_cell(u: float, alpha: float, beta: float) -> float:
    """``int_alpha^beta N(lam) lam d lam`` for ``0 < alpha < beta``, ``N`` the level count."""
    # k with u/(2k+1) >= beta contribute the full cell, the next ones a partial cell
    k_full = _levels_above(u, beta)
    k_part = _levels_above(u, alpha)
    full = k_full * (beta * beta - alpha * alpha) / 2.0
    # partial levels u/(2k+1) in (alpha, beta): int_alpha^{u/(2k+1)} lam d lam
    n_part = k_part - k_full
    part = 0.0
    if n_part > 0:
        part = (u * u * _odd_reciprocal_square_sum(k_full, k_part) - n_part * alpha * alpha) / 2.0
    return full + part


def weyl_count(u: float, lam_grid: np.ndarray | None = None, details: bool = False):
    """``int #{k : |lam|(2k+1) < u} |lam| d lam``.

    Counting is applied to the positive operator minus the symbol, whose spectrum is
    ``|lam|(2k+1)``.  The integral is split at the grid nodes; each cell and the two
    tails (``|lam|`` below the smallest nonzero node, above the largest) are
    integrated in closed form because the count is a step function of ``|lam|``.
    """
    if lam_grid is None:
        lam_grid = symmetric_lambda_grid(6.0, 129)
    if u <= 0:
        warnings.warn("weyl_count: u <= 0, returning 0 by convention", RuntimeWarning)
        return (0.0, {"flag": "u<=0"}) if details else 0.0
    lam = np.asarray(lam_grid, dtype=float)
    pos = np.unique(np.abs(lam[lam != 0]))
    if pos.size == 0:
        raise ValueError("lam_grid needs a nonzero node")
    sides = 2  # the count depends on |lam| only
    small = 0.0
    eps = pos[0]
    k_full = _levels_above(u, eps)
    small = (k_full * eps * eps + u * u * _odd_reciprocal_square_sum(k_full, np.inf)) / 2.0
    core = sum(_radial_cell(u, a, b) for a, b in zip(pos[:-1], pos[1:]))
    top = pos[-1]
    k_big = _levels_above(u, top)
    large = (u * u * _odd_reciprocal_square_sum(0, k_big) - k_big * top * top) / 2.0
    total = sides * (small + core + large)
    if details:
        return total, {"small_lambda_tail": sides * small, "grid_cells": sides * core,
                       "large_lambda_tail": sides * large}
    return total


def weyl_exponent(us: np.ndarray, lam_grid: np.ndarray | None = None) -> float:
    us = np.asarray(us, dtype=float)
    w = np.array([weyl_count(u, lam_grid) for u in us])
    return float(np.polyfit(np.log(us), np.log(w), 1)[0])


def heat_symbol_weak_norm(s: float, r: float, u_max: float = 1e6, points: int = 241,
                          lam_grid: np.ndarray | None = None, slope_tol: float = 0.01) -> dict:
    """``sup_u weyl_count(u)^(1/r) (1 + u)^(-s)`` on a log grid ``u in [1e-3, u_max]``.

    Declared divergent when the log-log slope of the supremand over the last decade
    exceeds ``slope_tol`` (it is still rising at ``u_max``).
    """
    if s < 0 or r <= 0:
        raise ValueError("need s >= 0 and r > 0")
    us = np.logspace(-3, np.log10(u_max), points)
    counts = np.array([weyl_count(u, lam_grid) for u in us])
    with np.errstate(divide="ignore"):
        log_sup = np.where(counts > 0, np.log(np.where(counts > 0, counts, 1.0)) / r, -np.inf) \
            - s * np.log1p(us)
    last = us >= u_max / 10
    slope = float(np.polyfit(np.log(us[last]), log_sup[last], 1)[0])
    exponent = float(np.polyfit(np.log(us[last]), np.log(counts[last]), 1)[0])
    finite = slope <= slope_tol
    i = int(np.argmax(log_sup))
    return {
        "s": s, "r": r,
        "value": float(np.exp(log_sup[i])) if finite else float("inf"),
        "sup_on_grid": float(np.exp(log_sup[i])),
        "argmax_u": float(us[i]),
        "finite": bool(finite),
        "tail_slope": slope,
        "count_exponent": exponent,
        "threshold_s_fitted": exponent / r,
        "threshold_s_stated": 1.5 / r,
    }
