"""Spherical analysis on ``SL_2(R)`` relative to ``K = SO(2)``.

Radial (K-biinvariant) functions are functions of the hyperbolic distance ``r``:
``a_r = diag(e^{r/2}, e^{-r/2})`` moves ``i`` to ``e^r i`` in the upper half-plane,
and Haar measure on ``G`` pushes forward to the area measure
``sinh r dr d theta`` on ``G/K`` (with ``K`` of total mass 1).  The half-sum
constant is ``rho = 1/2`` in this chart, and the radial operator
``L_rho = -(d^2/dr^2 + coth r d/dr) - rho^2`` satisfies ``L_rho phi_lam = lam^2 phi_lam``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import simpson

from ._errors import Refusal

RHO = 0.5
# area-measure constant of the radial reduction: int_G f = RADIAL_CONSTANT int f(r) sinh r dr;
# confirmed numerically by calibrate_radial_constant
RADIAL_CONSTANT = 2.0 * math.pi


# --- Iwasawa decomposition ------------------------------------------------------------------


class IwasawaTriple(NamedTuple):
    theta: float
    h: float
    u: float

    def k(self) -> np.ndarray:
        return rotation(self.theta)

    def a(self) -> np.ndarray:
        return np.diag([math.exp(self.h / 2), math.exp(-self.h / 2)])

    def n(self) -> np.ndarray:
        return np.array([[1.0, self.u], [0.0, 1.0]])

    def matrix(self) -> np.ndarray:
        return self.k() @ self.a() @ self.n()


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def a_of(r: float) -> np.ndarray:
    return np.diag([math.exp(r / 2), math.exp(-r / 2)])


def check_sl2(x: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (2, 2):
        raise ValueError("expected a 2x2 matrix")
    d = np.linalg.det(x)
    if abs(d - 1) > tol * max(1.0, np.abs(x).max() ** 2):
        raise ValueError(f"determinant {d!r} differs from 1")
    return x


def iwasawa(x: np.ndarray) -> IwasawaTriple:
    """``x = k(theta) a(h) n(u)`` from a QR factorization with positive diagonal."""
    x = check_sl2(x)
    q, r = np.linalg.qr(x)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    q = q * signs
    r = signs[:, None] * r
    if r[0, 0] <= 0:
        raise ValueError("degenerate first column")
    theta = math.atan2(q[1, 0], q[0, 0])
    return IwasawaTriple(theta, 2.0 * math.log(r[0, 0]), r[0, 1] / r[0, 0])


def H_of(x: np.ndarray) -> float:
    return iwasawa(x).h


def radius_of(x: np.ndarray) -> float:
    """Hyperbolic distance ``d(i, x i)``: ``2 cosh r = ||x||_F^2`` on ``SL_2``."""
    fro2 = float(np.sum(np.asarray(x) ** 2))
    return math.acosh(max(1.0, fro2 / 2.0))


# --- spherical functions --------------------------------------------------------------------


def _phi_integrand(lams: np.ndarray, r: float, psi: np.ndarray) -> np.ndarray:
    """Integrand after ``tan(theta) = e^{-r/2} tan(psi)``; periodic in ``psi`` with period ``pi``."""
    em = math.exp(-r)
    c2, s2 = np.cos(psi) ** 2, np.sin(psi) ** 2
    D = c2 + em * s2
    logbase = np.log(em * c2 + s2) - np.log(D)
    jac = math.exp(-r / 2) / D
    s = RHO + 1j * np.asarray(lams)[:, None]
    return np.exp(-s * logbase[None, :]) * jac[None, :]


def spherical_phi(lam, r: float, tol: float = 1e-13, max_nodes: int = 1 << 22,
                  return_nodes: bool = False):
    """``phi_lam(a_r) = int_K exp(-(i lam + rho) H(a_r^{-1} k)) dk``.

    On ``K`` the exponent is ``(e^{-r} cos^2 + e^{r} sin^2)^{-1/2 - i lam}``; after the
    substitution ``tan theta = e^{-r/2} tan psi`` the periodic trapezoid rule is
    doubled until two successive values agree to ``tol``.  ``lam`` may be an array.
    """
    lams = np.atleast_1d(np.asarray(lam, dtype=float))
    r = abs(float(r))
    if r == 0:
        # H vanishes on K, so the integrand is identically 1
        cur, N = np.ones(lams.shape, dtype=complex), 1
        out = cur if np.ndim(lam) else cur[0]
        return (out, N) if return_nodes else out
    N = 1 << max(5, int(math.ceil(math.log2(8 * math.exp(r / 2) + 16))))
    psi = np.pi * np.arange(N) / N
    prev = _phi_integrand(lams, r, psi).mean(axis=1)
    while True:
        if 2 * N > max_nodes:
            raise Refusal(f"circle quadrature did not converge at r={r} with {N} nodes; "
                          f"try max_nodes >= {4 * N}", suggested_nodes=4 * N, r=r)
        mid = np.pi * (np.arange(N) + 0.5) / N
        cur = 0.5 * (prev + _phi_integrand(lams, r, mid).mean(axis=1))
        N *= 2
        # the periodic trapezoid converges geometrically, so agreement of successive
        # levels bounds the error of the finer one
        if np.max(np.abs(cur - prev)) <= tol:
            break
        prev = cur
    out = cur if np.ndim(lam) else cur[0]
    return (out, N) if return_nodes else out


def spherical_phi_radial(lam, radii: np.ndarray, **kw) -> np.ndarray:
    """``phi_lam`` on a radial grid; shape ``(len(lam), len(radii))`` (or ``(len(radii),)``)."""
    lams = np.atleast_1d(np.asarray(lam, dtype=float))
    out = np.stack([spherical_phi(lams, float(r), **kw) for r in radii], axis=1)
    return out if np.ndim(lam) else out[0]


@dataclass
class SphericalSample:
    lam: float
    radii: np.ndarray
    values: np.ndarray

    @classmethod
    def compute(cls, lam: float, radii: np.ndarray) -> "SphericalSample":
        radii = np.asarray(radii, dtype=float)
        return cls(lam, radii, spherical_phi_radial(lam, radii))


def _fd_derivatives(values: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Fourth-order central first and second differences on interior points ``2..m-3``."""
    v = values
    d1 = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * h)
    d2 = (-v[:-4] + 16 * v[1:-3] - 30 * v[2:-2] + 16 * v[3:-1] - v[4:]) / (12 * h * h)
    return d1, d2


def radial_operator(values: np.ndarray, radii: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``L_rho`` applied by finite differences; returns (interior radii, values)."""
    radii = np.asarray(radii, dtype=float)
    h = radii[1] - radii[0]
    if not np.allclose(np.diff(radii), h):
        raise ValueError("radial grid must be uniform")
    d1, d2 = _fd_derivatives(np.asarray(values), h)
    rin = radii[2:-2]
    if np.any(rin <= 0):
        raise ValueError("radial grid must stay away from r = 0 for coth r")
    return rin, -(d2 + d1 / np.tanh(rin)) - RHO**2 * np.asarray(values)[2:-2]


def eigen_check(lam: float, r_lo: float = 0.5, r_hi: float = 4.0, m: int = 141) -> dict:
    radii = np.linspace(r_lo, r_hi, m)
    phi = spherical_phi_radial(lam, radii)
    rin, Lphi = radial_operator(phi, radii)
    target = lam**2 * phi[2:-2]
    scale = np.linalg.norm(phi[2:-2]) * max(1.0, lam**2)
    resid = float(np.linalg.norm(Lphi - target) / scale)
    return {"lam": lam, "residual": resid, "h": radii[1] - radii[0], "points": m,
            "eigenvalue": lam**2, "rho": RHO}


# --- spherical transform and convolution ----------------------------------------------------


@dataclass
class RadialFunction:
    """Samples ``f(r_j)`` of a radial function on a uniform grid starting at 0 (odd length)."""

    radii: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.radii = np.asarray(self.radii, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.radii[0] != 0 or not np.allclose(np.diff(self.radii), self.radii[1] - self.radii[0]):
            raise ValueError("radial grid must be uniform and start at r = 0")
        if np.abs(self.values[-1]) > 1e-12 * max(1.0, np.abs(self.values).max()):
            raise Refusal("function is not supported inside the radial grid; extend the grid",
                          r_max=float(self.radii[-1]))

    @classmethod
    def from_callable(cls, fn: Callable, r_max: float, m: int = 801) -> "RadialFunction":
        r = np.linspace(0.0, r_max, m)
        return cls(r, fn(r))

    @classmethod
    def bump(cls, support: float = 1.5, r_max: float | None = None, m: int = 801) -> "RadialFunction":
        return cls.from_callable(lambda r: radial_bump(r, support), r_max or support * 1.05, m)

    def l2_norm_sq(self) -> float:
        return float(RADIAL_CONSTANT * simpson(np.abs(self.values) ** 2 * np.sinh(self.radii), x=self.radii))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["r", "value"])
            for r, v in zip(self.radii, self.values.real):
                wr.writerow([repr(float(r)), repr(float(v))])

    @classmethod
    def from_csv(cls, path) -> "RadialFunction":
        rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(rows[:, 0], rows[:, 1])


def radial_bump(r, support: float = 1.5):
    x = np.asarray(r, dtype=float) / support
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - x[inside] ** 2))
    return out


def spherical_transform(f: RadialFunction, lams, constant: float = RADIAL_CONSTANT) -> np.ndarray:
    """``H(f)(lam) = int_G f(x) phi_lam(x^{-1}) dx = constant * int f(r) phi_lam(r) sinh r dr``.

    ``phi_lam(x^{-1}) = phi_lam(x)`` because ``x`` and ``x^{-1}`` are at the same distance.
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    phi = spherical_phi_radial(lams, f.radii)
    integrand = f.values[None, :] * phi * np.sinh(f.radii)[None, :]
    return constant * simpson(integrand, x=f.radii, axis=1)


def radial_convolve(f: Callable, g: Callable, radii: np.ndarray, f_support: float,
                    s_points: int = 401, theta_points: int = 256) -> np.ndarray:
    """``(f * g)(a_r)`` by direct quadrature over ``G/K`` with the area measure.

    ``(f*g)(x) = int f(y) g(y^{-1} x) dy`` and
    ``cosh d(y, x) = cosh s cosh r - sinh s sinh r cos theta`` for ``y`` at polar
    coordinates ``(s, theta)``.
    """
    s = np.linspace(0.0, f_support, s_points)
    th = 2 * np.pi * np.arange(theta_points) / theta_points
    fs = f(s) * np.sinh(s)
    out = []
    for r in np.atleast_1d(radii):
        ch = np.cosh(s)[:, None] * math.cosh(r) - np.sinh(s)[:, None] * math.sinh(r) * np.cos(th)[None, :]
        d = np.arccosh(np.maximum(ch, 1.0))
        inner = g(d).mean(axis=1) * 2 * np.pi
        out.append(simpson(fs * inner, x=s))
    return np.array(out)


def calibrate_radial_constant(f: Callable, g: Callable, f_support: float, g_support: float,
                              lams: np.ndarray, m: int = 801) -> float:
    """Constant ``c`` making ``H(f*g) = H(f) H(g)`` when ``H = c int . phi sinh r dr``.

    The convolution itself uses the area measure; the least-squares ``c`` then pins the
    radial normalization of Haar measure.
    """
    F = RadialFunction.from_callable(f, f_support * 1.05, m)
    Gf = RadialFunction.from_callable(g, g_support * 1.05, m)
    support = f_support + g_support
    radii = np.linspace(0.0, support * 1.02, m)
    conv = RadialFunction(radii, radial_convolve(f, g, radii, f_support))
    hf, hg = spherical_transform(F, lams, 1.0), spherical_transform(Gf, lams, 1.0)
    hc = spherical_transform(conv, lams, 1.0)
    prod = hf * hg
    return float(np.real(np.vdot(prod, hc) / np.vdot(prod, prod)))


# --- asymptotics and inversion ------------------------------------------------------------


def asymptotic_fit(lam: float, r_lo: float = 8.0, r_hi: float = 16.0, points: int = 65,
                   max_condition: float = 1e3) -> dict:
    """Least-squares fit ``phi_lam(a_r) e^{rho r} ~ c_+ e^{i lam r} + c_- e^{-i lam r}``."""
    if lam == 0:
        raise Refusal("asymptotic fit needs lam != 0 (the two exponentials coincide)")
    radii = np.linspace(r_lo, r_hi, points)
    A = np.stack([np.exp(1j * lam * radii), np.exp(-1j * lam * radii)], axis=1)
    cond = float(np.linalg.cond(A))
    if cond > max_condition:
        raise Refusal(f"fit ill-conditioned (cond {cond:.3g}); lam * (r_hi - r_lo) = "
                      f"{lam * (r_hi - r_lo):.3g} is too small", condition=cond)
    y = spherical_phi_radial(lam, radii) * np.exp(RHO * radii)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.linalg.norm(A @ coef - y) / np.linalg.norm(y))
    return {"lam": lam, "c_plus": complex(coef[0]), "c_minus": complex(coef[1]),
            "abs_c_plus": float(abs(coef[0])), "abs_c_minus": float(abs(coef[1])),
            "residual": resid, "condition": cond, "r_range": [r_lo, r_hi]}


def fitted_density(lams: np.ndarray, r_lo: float = 8.0, r_hi: float = 12.0, points: int = 41) -> dict:
    """``|c(lam)|^{-2}`` from asymptotic fits, vectorized over ``lam > 0``.

    Nodes where the fit is ill-conditioned get ``nan`` and are reported.
    """
    lams = np.asarray(lams, dtype=float)
    radii = np.linspace(r_lo, r_hi, points)
    vals = spherical_phi_radial(lams, radii) * np.exp(RHO * radii)[None, :]
    dens = np.full(lams.shape, np.nan)
    resid = np.full(lams.shape, np.nan)
    for i, lam in enumerate(lams):
        A = np.stack([np.exp(1j * lam * radii), np.exp(-1j * lam * radii)], axis=1)
        if lam <= 0 or np.linalg.cond(A) > 1e3:
            continue
        coef, *_ = np.linalg.lstsq(A, vals[i], rcond=None)
        c = 0.5 * (abs(coef[0]) + abs(coef[1]))
        dens[i] = c ** -2
        resid[i] = np.linalg.norm(A @ coef - vals[i]) / np.linalg.norm(vals[i])
    return {"lams": lams, "density": dens, "residual": resid}


def _fill_small_lambda(lams: np.ndarray, dens: np.ndarray) -> np.ndarray:
    """Replace unfittable small-``lam`` nodes by ``a lam^2`` matched at the first fitted node.

    The density is even and vanishes at 0; the quadratic is its leading behaviour there.
    """
    ok = np.isfinite(dens)
    if not ok.any():
        raise Refusal("no lambda node admits a well-conditioned asymptotic fit")
    j = np.argmax(ok)
    a = dens[j] / lams[j] ** 2
    out = dens.copy()
    out[~ok] = a * lams[~ok] ** 2
    return out


def inversion_at_origin(f: RadialFunction, lams: np.ndarray, density: np.ndarray,
                        kappa: float = 1.0) -> float:
    """``kappa int_0^Lam H(f)(lam) |c(lam)|^{-2} d lam`` (``phi_lam(e) = 1``)."""
    hf = spherical_transform(f, lams).real
    return float(kappa * simpson(hf * density, x=lams))


def plancherel_norm_sq(f: RadialFunction, lams: np.ndarray, density: np.ndarray,
                       kappa: float = 1.0) -> float:
    hf = spherical_transform(f, lams)
    return float(kappa * simpson(np.abs(hf) ** 2 * density, x=lams))


def calibrate_inversion(f: RadialFunction, lams: np.ndarray, density: np.ndarray) -> float:
    """``kappa`` such that the inversion formula returns ``f(e)`` for the calibration function."""
    return float(f.values[0].real / inversion_at_origin(f, lams, density, 1.0))


# --- invariant derivatives ------------------------------------------------------------------

SL2_BASIS = {
    "H": np.array([[1.0, 0.0], [0.0, -1.0]]),
    "E": np.array([[0.0, 1.0], [0.0, 0.0]]),
    "F": np.array([[0.0, 0.0], [1.0, 0.0]]),
}


def _exp(name: str, t: float) -> np.ndarray:
    if name == "H":
        return np.diag([math.exp(t), math.exp(-t)])
    if name == "E":
        return np.array([[1.0, t], [0.0, 1.0]])
    return np.array([[1.0, 0.0], [t, 1.0]])


def group_size(g: np.ndarray) -> float:
    """``|g| = max(||g - e||, ||g^{-1} - e||)`` with the operator norm."""
    e = np.eye(2)
    gi = np.linalg.inv(g)
    return float(max(np.linalg.norm(g - e, 2), np.linalg.norm(gi - e, 2)))


def _derivative(m: Callable, g: np.ndarray, word: tuple[str, ...], h: float) -> float:
    """Left-invariant derivative ``d/dt_1 ... d/dt_k m(g exp(t_1 X_1) ... exp(t_k X_k))`` at 0."""
    if not word:
        return float(m(g))
    if len(word) == 1:
        X = word[0]
        return float((m(g @ _exp(X, h)) - m(g @ _exp(X, -h))) / (2 * h))
    X, Y = word
    tot = 0.0
    for sx in (1, -1):
        for sy in (1, -1):
            tot += sx * sy * m(g @ _exp(X, sx * h) @ _exp(Y, sy * h))
    return float(tot / (4 * h * h))


def sample_group(radii: np.ndarray, angles: int = 5, seed: int = 0) -> list[np.ndarray]:
    """``k_alpha a_r k_beta`` at pseudo-random generic angles."""
    rng = np.random.default_rng(seed)
    out = []
    for r in radii:
        for _ in range(angles):
            al, be = rng.uniform(0, 2 * np.pi, 2)
            out.append(rotation(al) @ a_of(r) @ rotation(be))
    return out


def invariant_symbol_check(m: Callable[[np.ndarray], float], order: int = 2, r_max: float = 6.0,
                           radii_count: int = 25, angles: int = 5, h: float = 1e-3,
                           stability_tol: float = 1e-2, growth_tol: float = 0.1,
                           seed: int = 0) -> dict:
    """Estimate ``sup_g max_{|gamma| <= order} |g|^|gamma| |d^gamma m(g)|``.

    Derivatives are central differences along ``t -> g exp(t X)`` for ``X`` in
    ``{H, E, F}``.  Each sample is recomputed with step ``h/2``; samples whose value
    moves by more than ``stability_tol`` are unstable (typically kinks of ``m``); they
    are left out of the supremum, and more than 10% unstable samples is a refusal.  The supremum over ``r <= r_max`` is compared with the one
    over ``r <= r_max/2``; growth beyond ``growth_tol`` flags the symbol unbounded.
    """
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    names = list(SL2_BASIS)
    words: list[tuple[str, ...]] = [()]
    if order >= 1:
        words += [(x,) for x in names]
    if order >= 2:
        words += [(x, y) for x in names for y in names]
    radii = np.linspace(0.0, r_max, radii_count)
    samples = sample_group(radii, angles, seed)
    vals = np.zeros(len(samples))
    unstable = 0
    worst = [None] * len(samples)
    for i, g in enumerate(samples):
        size = group_size(g)
        best = 0.0
        stable = True
        for w in words:
            d1 = _derivative(m, g, w, h)
            d2 = _derivative(m, g, w, h / 2)
            if abs(d1 - d2) > stability_tol * max(abs(d2), 1e-8 * max(1.0, abs(m(g)))) \
                    and abs(d1 - d2) * size ** len(w) > 1e-8:
                stable = False
            v = size ** len(w) * abs(d2)
            if v > best:
                best, worst[i] = v, w
        unstable += not stable
        # a sample sitting on a kink of m has no derivative; keep it out of the sup
        vals[i] = best if stable else np.nan
    frac = unstable / len(samples)
    if frac > 0.1:
        raise Refusal(f"{unstable} of {len(samples)} samples change by more than "
                      f"{stability_tol:g} under step halving; reduce h or smooth m",
                      unstable_fraction=frac)
    r_of = np.repeat(radii, angles)
    full = float(np.nanmax(vals))
    half = float(np.nanmax(vals[r_of <= r_max / 2]))
    unbounded = full > (1 + growth_tol) * half
    return {"C_m": math.inf if unbounded else full, "sup_on_samples": full, "sup_half_radius": half,
            "finite": not unbounded, "unstable_fraction": frac, "unstable_samples": unstable,
            "order": order,
            "samples": len(samples), "h": h, "r_max": r_max}


def inversion_check(calibration_support: float = 2.0, test_support: float = 3.0,
                    Lam: float = 20.0, nodes: int = 101, r_fit: tuple[float, float] = (8.0, 12.0)) -> dict:
    """Calibrate ``kappa`` on one bump, then reconstruct ``f(e)`` and ``||f||_2^2`` of another.

    The integral runs over ``lam in [0, Lam]``; evenness of ``H(f)`` and of the density
    puts the factor for negative ``lam`` into ``kappa``.
    """
    lams = np.linspace(0.0, Lam, nodes)
    fit = fitted_density(lams, *r_fit)
    dens = _fill_small_lambda(lams, fit["density"])
    calib = RadialFunction.bump(calibration_support)
    test = RadialFunction.bump(test_support)
    kappa = calibrate_inversion(calib, lams, dens)
    recon = inversion_at_origin(test, lams, dens, kappa)
    norm_spec = plancherel_norm_sq(test, lams, dens, kappa)
    norm_direct = test.l2_norm_sq()
    return {
        "kappa": kappa,
        "reconstruction": recon,
        "target": float(test.values[0].real),
        "reconstruction_error": abs(recon - test.values[0].real) / abs(test.values[0].real),
        "norm_sq_spectral": norm_spec,
        "norm_sq_direct": norm_direct,
        "isometry_error": abs(norm_spec - norm_direct) / norm_direct,
        "filled_nodes": int(np.sum(~np.isfinite(fit["density"]))),
        "max_fit_residual": float(np.nanmax(fit["residual"])),
        "grid": {"Lambda": Lam, "nodes": nodes, "r_fit": list(r_fit)},
    }
