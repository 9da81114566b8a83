"""Command-line front end: ``ncharm <group> <command> [flags]``.

Every command writes a JSON report (stdout or ``--out``).  Exit codes: 0 success,
1 configuration error, 2 a tolerance check failed, 3 the computation refused.
Parameters come from defaults, then a ``key=value`` file given by ``--config``,
then explicit flags.
"""
from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import __version__
from . import axb, finite, freegrp, heisenberg, nclp, spherical
from ._errors import Refusal
from .report import Report


class ConfigError(Exception):
    pass


@dataclass
class Param:
    type: Callable
    default: object
    help: str = ""


@dataclass
class Command:
    group: str
    name: str
    params: dict
    run: Callable  # (cfg, report) -> bool | None
    selftest: Callable = field(default=lambda: [])
    help: str = ""


def _floats(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).split(",") if x.strip()]


def _float(text) -> float:
    s = str(text).strip()
    if "/" in s:
        num, den = s.split("/")
        return float(num) / float(den)
    return float(s)


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    s = str(text).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


COMMON = {
    "seed": Param(int, 0, "random seed"),
    "input": Param(str, "", "CSV input file (replaces the generated function)"),
}


# --- heisenberg -----------------------------------------------------------------------------

H_FUNC = {
    "family": Param(str, "gaussian", "gaussian | bump | file"),
    "sigma": Param(_float, 1.0, "gaussian width"),
    "radius": Param(_float, 2.0, "bump radius"),
    "n": Param(int, 64, "points per axis"),
    "R": Param(_float, 4.0, "box half-width"),
    "Lambda": Param(_float, 6.0, "lambda cutoff"),
    "lambda_nodes": Param(int, 129, "lambda grid nodes"),
}


def _h_function(cfg) -> heisenberg.HFunction:
    if cfg["input"] or cfg["family"] == "file":
        if not cfg["input"]:
            raise ConfigError("family=file needs --input")
        return heisenberg.HFunction.from_csv(cfg["input"])
    if cfg["family"] == "gaussian":
        return heisenberg.HFunction.gaussian(cfg["sigma"], cfg["R"], cfg["n"])
    if cfg["family"] == "bump":
        return heisenberg.HFunction.bump(cfg["radius"], cfg["R"], cfg["n"])
    raise ConfigError(f"unknown family {cfg['family']!r}")


def run_h_plancherel(cfg, rep: Report):
    k = _h_function(cfg)
    res = heisenberg.h_plancherel(k, heisenberg.symmetric_lambda_grid(cfg["Lambda"], cfg["lambda_nodes"]))
    rep.add("lhs", res["lhs"], "3-D trapezoid quadrature of |k|^2")
    rep.add("rhs", res["rhs"], "trapezoid in lambda of |lam| * Hilbert-Schmidt norm^2 of the kernel")
    rep.add("relative_error", res["relative_error"], "|lhs - rhs| / lhs")
    rep.add("grid", res["grid"], "configuration")
    if res["c_aliased_nodes"]:
        rep.note("lambda nodes beyond the c-axis Nyquist frequency (aliased c-transform)",
                 count=res["c_aliased_nodes"])
    return res["relative_error"] <= cfg["tol"]


def run_h_invert(cfg, rep: Report):
    k = _h_function(cfg)
    rng = np.random.default_rng(cfg["seed"])
    pts = [heisenberg.HPoint(*p) for p in rng.uniform(-cfg["box"], cfg["box"], (cfg["points"], 3))]
    lam = heisenberg.symmetric_lambda_grid(cfg["Lambda"], cfg["lambda_nodes"])
    rec = heisenberg.h_inverse(heisenberg.inversion_coefficients(k, cfg["oversample"]), pts, lam,
                               zero_density=heisenberg.zero_lambda_trace_density(k))
    ref = k.evaluate(pts)
    err = np.abs(rec - ref)
    rep.add("points", [list(p) for p in pts], "uniform in the box [-box, box]^3")
    rep.add("reconstructed", rec, "trapezoid in lambda of |lam| Tr(pi(x)* k^(pi_lam))")
    rep.add("reference", ref, "trigonometric interpolation of the samples")
    rep.add("max_error", float(err.max()), "max |reconstructed - reference|")
    return err.max() <= cfg["tol"]


def run_h_weyl(cfg, rep: Report):
    lam = heisenberg.symmetric_lambda_grid(cfg["Lambda"], cfg["lambda_nodes"])
    rows = []
    ok = True
    for u in _floats(cfg["u"]):
        val = heisenberg.weyl_count(u, lam)
        oracle = math.pi**2 * u * u / 8
        rel = abs(val - oracle) / oracle
        ok &= rel <= cfg["tol"]
        rows.append({"u": u, "weyl_count": val, "oracle": oracle, "relative_error": rel})
    rep.add("counts", rows, "cellwise exact integration with polygamma tails; oracle pi^2 u^2 / 8")
    exps = [heisenberg.weyl_exponent(np.logspace(a, a + 1, 9), lam) for a in (1, 2, 3)]
    rep.add("exponent_by_decade", exps, "log-log least squares over [10,1e2], [1e2,1e3], [1e3,1e4]")
    rep.add("exponent_stated", 1.5, "stated growth exponent")
    if abs(max(exps) - min(exps)) > 0.05:
        rep.note("fitted exponent varies by more than 0.05 across decades")
    if cfg["s"] > 0:
        hw = heisenberg.heat_symbol_weak_norm(cfg["s"], cfg["r"], lam_grid=lam)
        rep.add("heat_weak_norm", hw, "sup over a log grid of weyl_count(u)^(1/r) (1+u)^(-s)")
    return ok


def run_h_orbit(cfg, rep: Report):
    g = heisenberg.HPoint(cfg["a"], cfg["b"], cfg["c"])
    ell = heisenberg.CoadjointPoint(cfg["mu"], cfg["nu"], cfg["lam"])
    rep.add("image", list(heisenberg.coadjoint(g, ell)), "(mu + b lam, nu - a lam, lam)")
    rng = np.random.default_rng(cfg["seed"])
    gs = [heisenberg.HPoint(*x) for x in rng.normal(size=(cfg["samples"], 3))]
    imgs = np.array([heisenberg.coadjoint(x, ell) for x in gs])
    rep.add("orbit_kind", "point" if cfg["lam"] == 0 else "plane", "lam = 0 orbits are points")
    rep.add("lambda_spread", float(np.ptp(imgs[:, 2])), "max - min of lam over sampled orbit")
    rep.add("mu_nu_rank", int(np.linalg.matrix_rank(imgs[:, :2] - imgs[:, :2].mean(0), tol=1e-9)),
            "rank of centered (mu, nu) samples")
    h = gs[0]
    lhs = heisenberg.coadjoint(heisenberg.h_mul(g, h), ell)
    rhs = heisenberg.coadjoint(g, heisenberg.coadjoint(h, ell))
    rep.add("action_defect", float(np.max(np.abs(np.subtract(lhs, rhs)))), "coadjoint(gh) vs g.(h.l)")
    if cfg["lam"] == 0:
        rep.add("character", heisenberg.rep_flat(cfg["mu"], cfg["nu"], g), "exp(2 pi i (a mu + b nu))")
    return None


def selftest_heisenberg():
    H = heisenberg
    x = H.HPoint(0.3, -1.2, 2.0)
    checks = [
        ("x * e = x", H.h_mul(x, H.IDENTITY) == x),
        ("(1,0,0)(0,1,0) = (1,1,1)", H.h_mul(H.HPoint(1, 0, 0), H.HPoint(0, 1, 0)) == (1, 1, 1)),
        ("(0,1,0)(1,0,0) = (1,1,0)", H.h_mul(H.HPoint(0, 1, 0), H.HPoint(1, 0, 0)) == (1, 1, 0)),
        ("x x^-1 = e", np.allclose(H.h_mul(x, H.h_inv(x)), 0)),
        ("coadjoint((1,0,0),(0,0,1)) = (0,-1,1)",
         H.coadjoint(H.HPoint(1, 0, 0), H.CoadjointPoint(0, 0, 1)) == (0, -1, 1)),
        ("character at identity", H.rep_flat(0.4, 0.7, H.IDENTITY) == 1),
        ("character (1,1,5) at (1,0)", abs(H.rep_flat(1, 0, H.HPoint(1, 1, 5)) - 1) < 1e-12),
        ("weyl_count(0+) = 0", H.weyl_count(1e-9) < 1e-12),
    ]
    grid = H.Grid1D.symmetric(5, 101)
    phi = np.exp(-grid.points**2)
    checks.append(("rep_apply(e) = id", np.allclose(H.rep_apply(1.0, H.IDENTITY, phi, grid), phi)))
    checks.append(("sublaplacian(0) = 0", np.allclose(H.sublaplacian_symbol(1.0, 0 * phi, grid), 0)))
    return checks


# --- axb ------------------------------------------------------------------------------------

AXB_FUNC = {
    "alpha_radius": Param(_float, 2.0, "bump radius in log a"),
    "b_radius": Param(_float, 2.0, "bump radius in b"),
    "A": Param(_float, 2.5, "log a box half-width"),
    "B": Param(_float, 2.5, "b box half-width"),
    "n_a": Param(int, 81, "log a points (odd)"),
    "n_b": Param(int, 64, "b points"),
    "log_t_min": Param(_float, -20.0, "log of the smallest half-line point"),
}


def _axb_function(cfg) -> axb.AxbFunction:
    if cfg["input"]:
        return axb.AxbFunction.from_csv(cfg["input"])
    return axb.AxbFunction.product_bump(cfg["alpha_radius"], cfg["b_radius"], 0.0, cfg["A"], cfg["B"],
                                        cfg["n_a"], cfg["n_b"])


def run_axb_plancherel(cfg, rep: Report):
    f = _axb_function(cfg)
    grids = {s: axb.default_half_line_grid(f, s, log_t_min=cfg["log_t_min"]) for s in (1, -1)}
    res = axb.axb_plancherel(f, grids)
    rep.add("lhs", res["lhs"], "trapezoid quadrature of |f|^2 against da db / a^2")
    rep.add("rhs", res["rhs"], "HS(f^(pi+))^2 + HS(f^(pi-))^2")
    rep.add("hs_plus", res["hs_plus"], "Hilbert-Schmidt norm^2 of the + kernel")
    rep.add("hs_minus", res["hs_minus"], "Hilbert-Schmidt norm^2 of the - kernel")
    rep.add("relative_error", res["relative_error"], "|lhs - rhs| / lhs")
    rep.add("grid", res["grid"], "configuration")
    return res["relative_error"] <= cfg["tol"]


def run_axb_fourier(cfg, rep: Report):
    f = _axb_function(cfg)
    sign = cfg["sign"]
    grid = axb.default_half_line_grid(f, sign, log_t_min=cfg["log_t_min"])
    K = axb.axb_fourier(f, sign, grid)

    def phi(t):
        return np.exp(-np.log(np.abs(t)) ** 2)

    idx = np.linspace(0, grid.m - 1, 12).astype(int)[2:-1]
    via_kernel = K.apply(phi(grid.points))[idx]
    ok = None
    if not cfg["input"]:
        def fc(a, b):
            return axb.bump(np.log(a), cfg["alpha_radius"]) * axb.bump(b, cfg["b_radius"])
        direct = axb.direct_rep_of_f(fc, phi, sign, grid.points[idx], cfg["A"], cfg["B"], 801, 400)
        err = float(np.max(np.abs(direct - via_kernel)) / np.max(np.abs(direct)))
        rep.add("oracle_relative_error", err, "kernel vs direct 2-D left-Haar quadrature of pi(f) D phi")
        ok = err <= cfg["tol"]
    g = axb.AxbPoint(cfg["g_a"], cfg["g_b"])
    v = phi(grid.points)
    lhs = axb.D_apply(axb.axb_rep(sign, g, v, grid), grid)
    rhs = axb.modular(g) ** 0.5 * axb.axb_rep(sign, g, axb.D_apply(v, grid), grid)
    rep.add("intertwining_residual", float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(lhs))),
            "D pi(g) vs Delta(g)^(1/2) pi(g) D on a test vector")
    rep.add("hs_norm_sq", K.hs_norm_sq(), "Hilbert-Schmidt norm^2 of the kernel")
    rep.add("half_line_grid", grid.as_dict(), "configuration")
    rep.add("kernel_apply_samples", via_kernel, "(K phi)(s) at sample points")
    return ok


def selftest_axb():
    g, h = axb.AxbPoint(2.0, 7.0), axb.AxbPoint(0.5, -1.0)
    grid = axb.HalfLineGrid(1, -5.0, 0.05, 201)
    phi = np.exp(-np.log(grid.points) ** 2)
    return [
        ("modular(e) = 1", axb.modular(axb.IDENTITY) == 1),
        ("modular(2,7) = 0.5", axb.modular(g) == 0.5),
        ("modular multiplicative", abs(axb.modular(axb.axb_mul(g, h)) - axb.modular(g) * axb.modular(h)) < 1e-15),
        ("pi(e) = id", np.allclose(axb.axb_rep(1, axb.IDENTITY, phi, grid), phi)),
        ("pi(1,b) multiplies", np.allclose(axb.axb_rep(1, axb.AxbPoint(1, 0.3), phi, grid),
                                           np.exp(2j * np.pi * 0.3 * grid.points) * phi)),
    ]


# --- free groups ----------------------------------------------------------------------------


def run_free_weaknorm(cfg, rep: Report):
    n, t, r = cfg["n"], cfg["t"], cfg["r"]
    ex = freegrp.weak_norm_counting(n, t, r)
    rep.add("weak_norm", ex["value"], "sup_k e^{-tk} B_k^(1/r) over exact ball counts")
    rep.add("finite", ex["finite"], "term ratio e^{-t} (2n-1)^(1/r) <= 1")
    rep.add("term_ratio", ex["rho"], "e^{-t} (2n-1)^(1/r)")
    rep.add("threshold_exact", freegrp.exact_threshold(n, r), "log(2n-1)/r")
    bd = freegrp.weak_norm_bound(n, t, r)
    rep.add("weak_norm_from_bound", bd["value"], "using lambda(alpha) <= (2n)^(|log alpha|/t)")
    rep.add("threshold_stated", bd["threshold_t"], "log(2n)/r")
    if bd["finite"] != ex["finite"]:
        rep.note("exact level-set sum and the counting bound disagree on finiteness at this t")
    return None


def run_free_distribution(cfg, rep: Report):
    res = freegrp.distribution(cfg["n"], cfg["t"], cfg["alpha"])
    rep.add("count", res["count"], "enumeration of |g| < |log alpha| / t")
    rep.add("bound", res["bound"], "(2n)^(|log alpha|/t)")
    rep.add("radius", res["radius"], "largest word length in the level set")
    ok = res["count"] <= res["bound"] or cfg["alpha"] >= 1
    rep.add("bound_holds", bool(ok), "count <= bound")
    return ok


def run_free_multiplier(cfg, rep: Report):
    rng = np.random.default_rng(cfg["seed"])
    f = freegrp.BallFunction.random(cfg["n"], cfg["support"], rng)
    norms = freegrp.multiplier_norms(cfg["n"], cfg["L"], cfg["t"], f)
    rep.add("norm_f", norms["norm_f"], "operator norm of the truncated L_f")
    rep.add("norm_mf", norms["norm_mf"], "operator norm of the truncated L_{m_t f}")
    contraction = norms["norm_mf"] <= norms["norm_f"] * (1 + 1e-12)
    rep.add("contraction", bool(contraction), "norm_mf <= norm_f")
    M = freegrp.truncated_convolver(freegrp.truncated_multiplier(
        lambda w: freegrp.heat_symbol(cfg["t"], w), f), cfg["L"])
    tau = nclp.trace(M)
    rep.add("trace", tau, "normalized trace of L_{m f}")
    rep.add("m_e_f_e", f(freegrp.IDENTITY), "m(e) f(e)")
    rep.add("defect", freegrp.truncation_defect(f, cfg["L"]), "||f||_2^2 - tau(L_f* L_f)")
    return bool(contraction and abs(tau - f(freegrp.IDENTITY)) < 1e-10)


_HM_SYMBOLS = {
    "sum": lambda x: np.sum(x, axis=-1),
    "mikhlin": lambda x: 1.0 / (1.0 + np.sum(x * x, axis=-1)),
    "constant": lambda x: np.ones(x.shape[:-1]),
    "linear": lambda x: x[..., 0],
}


def run_free_hmlift(cfg, rep: Report):
    if cfg["symbol"] not in _HM_SYMBOLS:
        raise ConfigError(f"unknown symbol {cfg['symbol']!r}; choose from {sorted(_HM_SYMBOLS)}")
    m = _HM_SYMBOLS[cfg["symbol"]]
    w = freegrp.ReducedWord.parse(cfg["word"])
    rep.add("word", str(w), "reduced form")
    rep.add("lifted_value", float(np.real(hm_eval(m, w, cfg["d"]))),
            "m on the exponent vector (zero padded, first d exponents)")
    res = freegrp.hm_condition(m, cfg["d"], cfg["hm_extent"], cfg["hm_h"])
    rep.add("C_m", res["C_m"], "max over |alpha| <= d//2+1 of sup |xi|^|alpha| |d^alpha m| by central differences")
    rep.add("hm_detail", res, "finite-difference sweep")
    return None


def hm_eval(m, w, d):
    return freegrp.hm_lift(lambda v: m(v[None, :])[0], w, d)


def selftest_free():
    a, b = freegrp.generator(1), freegrp.generator(2)
    ab = a * b
    return [
        ("a a^-1 = e", a * a.inverse() == freegrp.IDENTITY),
        ("(ab)(b^-1 a) = a^2", ab * (b.inverse() * a) == freegrp.generator(1, 2)),
        ("ball L=0", len(freegrp.ball_enumerate(2, 0)) == 1),
        ("m_t(e) = 1", freegrp.heat_symbol(1.0, freegrp.IDENTITY) == 1),
        ("m_1(a) = e^-1", freegrp.heat_symbol(1.0, a) == math.exp(-1)),
        ("m_t(g^-1) = m_t(g)", freegrp.heat_symbol(0.7, ab) == freegrp.heat_symbol(0.7, ab.inverse())),
        ("distribution(alpha >= 1) = 0", freegrp.distribution(2, 1.0, 1.0)["count"] == 0),
        ("hm_lift(e) = m(0)", hm_eval(_HM_SYMBOLS["sum"], freegrp.IDENTITY, 3) == 0),
        ("r = inf weak norm = 1", freegrp.weak_norm_counting(2, 1.0, math.inf)["value"] == 1),
    ]


# --- finite groups --------------------------------------------------------------------------


def _random_function(G, rng):
    return finite.FiniteGroupFunction(G, rng.normal(size=G.order) + 1j * rng.normal(size=G.order))


def run_finite_plancherel(cfg, rep: Report):
    G = finite.group_from_tag(cfg["group"])
    rng = np.random.default_rng(cfg["seed"])
    pl = rt = cv = 0.0
    for _ in range(cfg["trials"]):
        f, g = _random_function(G, rng), _random_function(G, rng)
        lhs, rhs = finite.plancherel_sides(f)
        pl = max(pl, abs(lhs - rhs) / lhs)
        rt = max(rt, np.max(np.abs(finite.finite_inverse(finite.finite_fourier(f)).values - f.values)))
        fg = finite.finite_fourier(finite.convolve(f, g))
        prod = [a @ b for a, b in zip(finite.finite_fourier(f).blocks, finite.finite_fourier(g).blocks)]
        cv = max(cv, max(np.max(np.abs(x - y)) for x, y in zip(fg.blocks, prod)))
    rep.add("plancherel_max_relative_error", pl, "normalized counting vs sum d_pi Tr(f^ f^*)")
    rep.add("roundtrip_max_error", float(rt), "inverse(fourier(f)) - f")
    rep.add("convolution_max_error", float(cv), "(f*g)^ - f^ g^")
    rep.add("irreducible_dimensions", G.dims, "group tables")
    return max(pl, rt, cv) <= cfg["tol"]


def run_finite_hy(cfg, rep: Report):
    G = finite.group_from_tag(cfg["group"])
    rng = np.random.default_rng(cfg["seed"])
    rows = []
    ok = True
    for p in _floats_frac(cfg["p"]):
        worst = 0.0
        for _ in range(cfg["trials"]):
            res = finite.hausdorff_young_check(_random_function(G, rng), p)
            worst = max(worst, res["ratio"])
            ok &= res["holds"]
        rows.append({"p": p, "max_ratio": worst})
    rep.add("ratios", rows, "||f^||_{p'} / ||f||_p over random functions")
    return ok


def _floats_frac(text):
    return [_float(x) for x in str(text).split(",") if x.strip()]


def run_finite_zhang(cfg, rep: Report):
    N = cfg["N"]
    k = finite.cyclic_word_length(N)
    ts = np.linspace(cfg["t_min"], cfg["t_max"], cfg["t_count"])
    rows = []
    for t in ts:
        res = finite.zhang_ratio(np.exp(-t * k), cfg["p"], cfg["q"], cfg["restarts"], cfg["seed"])
        rows.append({"t": float(t), "ratio": res["ratio"], "operator_norm": res["operator_norm"],
                     "operator_norm_upper": res["operator_norm_upper"], "weak_norm": res["weak_norm"]})
    C = max(r["ratio"] for r in rows)
    rep.add("family", rows, "m = exp(-t |k|), |k| = min(k, N-k); ratio = ||T_m||_{p->q} / ||m||_{r,inf}")
    rep.add("sup_ratio", C, "largest ratio over the family (empirical constant)")
    rep.add("r", rows and 1.0 / (1.0 / cfg["p"] - 1.0 / cfg["q"]), "1/r = 1/p - 1/q")
    return bool(np.isfinite(C))


def run_finite_multnorm(cfg, rep: Report):
    G = finite.group_from_tag(cfg["group"])
    m = _floats(cfg["symbol"])
    A = finite.multiplier_matrix(m, G)
    est = finite.pq_operator_norm(A, cfg["p"], cfg["q"], cfg["restarts"], cfg["seed"])
    rep.add("norm", est.as_dict(), "L^p -> L^q operator norm (normalized counting measure)")
    return None


def selftest_finite():
    S3 = finite.symmetric_group_s3()
    Z = finite.cyclic_group(5)
    delta = finite.FiniteGroupFunction(Z, np.eye(5)[0])
    one = finite.FiniteGroupFunction(Z, np.ones(5))
    return [
        ("S3 dims 1,1,2", sorted(S3.dims) == [1, 1, 2]),
        ("Z5 has 5 characters", len(Z.dims) == 5),
        ("constant has only the trivial coefficient",
         np.allclose([np.abs(b).sum() for b in finite.finite_fourier(one).blocks], [1, 0, 0, 0, 0])),
        ("delta_e transform = 1/|G|", all(np.allclose(b, 0.2) for b in finite.finite_fourier(delta).blocks)),
        ("unit symbol is the identity", np.allclose(finite.multiplier_matrix([1] * 5, Z), np.eye(5))),
    ]


# --- spherical ------------------------------------------------------------------------------


def run_sph_phi(cfg, rep: Report):
    lam = cfg["lam"]
    radii = _floats(cfg["r"])
    vals = np.array([spherical.spherical_phi(lam, r) for r in radii])
    neg = np.array([spherical.spherical_phi(-lam, r) for r in radii])
    rep.add("phi", vals, "periodic trapezoid over K after tan(theta) = e^{-r/2} tan(psi)")
    rep.add("weyl_symmetry_max", float(np.max(np.abs(vals - neg))), "|phi_lam - phi_{-lam}|")
    rep.add("imag_max", float(np.max(np.abs(vals.imag))), "max |Im phi_lam|")
    eig = spherical.eigen_check(lam)
    rep.add("eigen_residual", eig["residual"], "||L_rho phi - lam^2 phi|| / ||phi|| by 4th-order differences")
    rep.add("rho", spherical.RHO, "half-sum constant in the a_r chart")
    return eig["residual"] <= cfg["tol"]


def run_sph_transform(cfg, rep: Report):
    lams = np.linspace(0.0, cfg["lam_max"], cfg["lam_count"])
    if cfg["input"]:
        f = spherical.RadialFunction.from_csv(cfg["input"])
        rep.add("transform", spherical.spherical_transform(f, lams), "2 pi int f phi_lam sinh r dr (Simpson)")
        return None
    sf, sg = cfg["f_support"], cfg["g_support"]

    def f(r):
        return spherical.radial_bump(r, sf)

    def g(r):
        return spherical.radial_bump(r, sg)

    c = spherical.calibrate_radial_constant(f, g, sf, sg, lams)
    F = spherical.RadialFunction.from_callable(f, sf * 1.05)
    G = spherical.RadialFunction.from_callable(g, sg * 1.05)
    radii = np.linspace(0.0, (sf + sg) * 1.02, 801)
    conv = spherical.RadialFunction(radii, spherical.radial_convolve(f, g, radii, sf))
    hf, hg, hc = (spherical.spherical_transform(x, lams) for x in (F, G, conv))
    err = float(np.max(np.abs(hc - hf * hg)) / np.max(np.abs(hf * hg)))
    even = float(np.max(np.abs(spherical.spherical_transform(F, -lams) - hf)))
    rep.add("radial_constant", c, "least-squares constant making H(f*g) = H(f) H(g)")
    rep.add("multiplicativity_error", err, "max |H(f*g) - H(f) H(g)| / max |H(f) H(g)|")
    rep.add("evenness_error", even, "max |H(f)(-lam) - H(f)(lam)|")
    rep.add("H_f", hf, "spherical transform of f on the lambda grid")
    return err <= cfg["tol"]


def run_sph_asymptotics(cfg, rep: Report):
    fit = spherical.asymptotic_fit(cfg["lam"], cfg["r_lo"], cfg["r_hi"], cfg["points"])
    rep.add("c_plus", fit["c_plus"], "least squares of phi e^{rho r} on e^{i lam r}")
    rep.add("c_minus", fit["c_minus"], "least squares of phi e^{rho r} on e^{-i lam r}")
    rep.add("residual", fit["residual"], "relative least-squares residual")
    rep.add("abs_ratio", fit["abs_c_plus"] / fit["abs_c_minus"], "|c(lam)| / |c(-lam)|")
    ok = fit["residual"] <= cfg["tol"]
    if cfg["inversion"]:
        inv = spherical.inversion_check(Lam=cfg["inv_Lambda"], nodes=cfg["inv_nodes"])
        rep.add("inversion", inv, "kappa calibrated on one bump, reconstruction of another at r = 0")
        ok = ok and inv["reconstruction_error"] <= 0.05
    return ok


_SPH_SYMBOLS = {
    "constant": lambda g: 1.0,
    "size": spherical.group_size,
    "mikhlin": lambda g: 1.0 / (1.0 + spherical.group_size(g) ** 2),
}


def run_sph_symbolcheck(cfg, rep: Report):
    if cfg["symbol"] not in _SPH_SYMBOLS:
        raise ConfigError(f"unknown symbol {cfg['symbol']!r}; choose from {sorted(_SPH_SYMBOLS)}")
    res = spherical.invariant_symbol_check(_SPH_SYMBOLS[cfg["symbol"]], cfg["order"], cfg["r_max"],
                                           h=cfg["h"], seed=cfg["seed"])
    rep.add("C_m", res["C_m"], "sup |g|^|gamma| |d^gamma m| by left-invariant central differences")
    rep.add("detail", res, "sample sweep")
    return None


def selftest_spherical():
    x = np.diag([math.e, 1 / math.e])
    return [
        ("iwasawa(e) = 0", np.allclose(spherical.iwasawa(np.eye(2)), 0)),
        ("iwasawa(diag(e, 1/e)).h = 2", abs(spherical.iwasawa(x).h - 2) < 1e-12),
        ("phi_lam(e) = 1", spherical.spherical_phi(2.3, 0.0) == 1),
        ("H(0) = 0", np.allclose(spherical.spherical_transform(
            spherical.RadialFunction(np.linspace(0, 1, 11), np.zeros(11)), [0.5]), 0)),
    ]


# --- nclp -----------------------------------------------------------------------------------


def _random_traced(cfg, rng):
    dims = [int(d) for d in _floats(cfg["dims"])]
    weights = _floats(cfg["weights"])
    if len(weights) != len(dims):
        raise ConfigError("dims and weights must have the same length")
    blocks = [rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)) for d in dims]
    return nclp.TracedElement(blocks, weights)


def run_nclp_norms(cfg, rep: Report):
    rng = np.random.default_rng(cfg["seed"])
    x, y = _random_traced(cfg, rng), _random_traced(cfg, rng)
    rows = []
    ok = True
    for p in _floats(cfg["p"]):
        nx = nclp.lp_norm(x, p)
        tri = nclp.lp_norm(x + y, p) <= nx + nclp.lp_norm(y, p) + 1e-10
        weak = nclp.weak_lp_norm(x, p) <= nx + 1e-10
        ok &= tri and weak
        rows.append({"p": p, "norm": nx, "weak_norm": nclp.weak_lp_norm(x, p),
                     "triangle": bool(tri), "weak_le_strong": bool(weak)})
    lhs, rhs = nclp.holder_pair(x, y)
    ok &= lhs <= rhs + 1e-10
    rep.add("norms", rows, "tau(|x|^p)^(1/p) from eigenvalues of x* x; weak norm sup_t t^(1/p) mu_t")
    rep.add("holder", {"lhs": lhs, "rhs": rhs}, "|tau(x* y)| <= ||x||_2 ||y||_2")
    return ok


def run_nclp_singular(cfg, rep: Report):
    rng = np.random.default_rng(cfg["seed"])
    x = _random_traced(cfg, rng)
    prof = nclp.singular_numbers(x)
    rep.add("breakpoints", prof.breakpoints, "cumulative trace weights W_k")
    rep.add("values", prof.values, "mu_t on (W_{k-1}, W_k]")
    rep.add("trace", nclp.trace(x), "sum_b w_b Tr(x_b)")
    return None


def selftest_nclp():
    x = nclp.TracedElement.diagonal([3.0, -1.0], [1.0, 2.0])
    return [
        ("||x||_1", abs(nclp.lp_norm(x, 1) - 5.0) < 1e-12),
        ("||x||_inf", abs(nclp.lp_norm(x, math.inf) - 3.0) < 1e-12),
        ("trace", abs(nclp.trace(x) - 1.0) < 1e-12),
        ("mu_t", np.allclose(nclp.singular_numbers(x)([0.5, 1.0, 2.0, 3.5]), [3, 3, 1, 0])),
    ]


# --- registry -------------------------------------------------------------------------------

P = Param
COMMANDS: dict[tuple[str, str], Command] = {}


def _register(group, name, params, run, selftest, help=""):
    COMMANDS[(group, name)] = Command(group, name, {**COMMON, **params}, run, selftest, help)


_register("heisenberg", "plancherel", {**H_FUNC, "tol": P(_float, 1e-3)}, run_h_plancherel,
          selftest_heisenberg, "Plancherel identity for a sampled function")
_register("heisenberg", "invert", {**H_FUNC, "tol": P(_float, 1e-3), "points": P(int, 20),
                                   "box": P(_float, 1.0), "oversample": P(_float, 4.0)},
          run_h_invert, selftest_heisenberg, "Fourier inversion at random points")
_register("heisenberg", "weyl", {"u": P(str, "10,100,1000"), "Lambda": P(_float, 6.0),
                                 "lambda_nodes": P(int, 129), "s": P(_float, 0.0), "r": P(_float, 1.0),
                                 "tol": P(_float, 1e-6)},
          run_h_weyl, selftest_heisenberg, "Weyl counting for the sub-Laplacian")
_register("heisenberg", "orbit", {"a": P(_float, 1.0), "b": P(_float, 0.0), "c": P(_float, 0.0),
                                  "mu": P(_float, 0.0), "nu": P(_float, 0.0), "lam": P(_float, 1.0),
                                  "samples": P(int, 200)},
          run_h_orbit, selftest_heisenberg, "coadjoint action and orbit sampling")
_register("axb", "plancherel", {**AXB_FUNC, "tol": P(_float, 1e-2)}, run_axb_plancherel, selftest_axb,
          "two-term Plancherel identity")
_register("axb", "fourier", {**AXB_FUNC, "sign": P(str, "+"), "g_a": P(_float, 1.7),
                             "g_b": P(_float, 0.3), "tol": P(_float, 1e-3)},
          run_axb_fourier, selftest_axb, "kernel of pi(f) D against direct quadrature")
_register("free", "weaknorm", {"n": P(int, 2), "t": P(_float, 1.0), "r": P(_float, 1.0)},
          run_free_weaknorm, selftest_free, "weak norm of the heat symbol")
_register("free", "distribution", {"n": P(int, 2), "t": P(_float, 1.0), "alpha": P(_float, 0.2)},
          run_free_distribution, selftest_free, "level-set count of the heat symbol")
_register("free", "multiplier", {"n": P(int, 2), "L": P(int, 3), "support": P(int, 2), "t": P(_float, 1.0)},
          run_free_multiplier, selftest_free, "truncated heat multiplier")
_register("free", "hmlift", {"word": P(str, "1^2.3^-1"), "d": P(int, 3), "symbol": P(str, "mikhlin"),
                             "hm_extent": P(_float, 4.0), "hm_h": P(_float, 0.1)},
          run_free_hmlift, selftest_free, "symbol lifted to a word, with its Mikhlin constant")
_register("finite", "plancherel", {"group": P(str, "S3"), "trials": P(int, 1000), "tol": P(_float, 1e-12)},
          run_finite_plancherel, selftest_finite, "Plancherel, inversion and convolution on random functions")
_register("finite", "hy", {"group": P(str, "Z16"), "p": P(str, "1,4/3,2"), "trials": P(int, 1000)},
          run_finite_hy, selftest_finite, "Hausdorff-Young on random functions")
_register("finite", "zhang", {"N": P(int, 16), "t_min": P(_float, 0.1), "t_max": P(_float, 5.0),
                              "t_count": P(int, 25), "p": P(_float, 4 / 3), "q": P(_float, 4.0),
                              "restarts": P(int, 32)},
          run_finite_zhang, selftest_finite, "multiplier bound over the heat family on Z_N")
_register("finite", "multnorm", {"group": P(str, "S3"), "symbol": P(str, "1,0.5,0.25"),
                                 "p": P(_float, 4 / 3), "q": P(_float, 4.0), "restarts": P(int, 32)},
          run_finite_multnorm, selftest_finite, "L^p -> L^q norm of a central multiplier")
_register("spherical", "phi", {"lam": P(_float, 1.0), "r": P(str, "0,0.5,1,2,5"), "tol": P(_float, 1e-4)},
          run_sph_phi, selftest_spherical, "spherical function values and eigen-relation")
_register("spherical", "transform", {"f_support": P(_float, 1.0), "g_support": P(_float, 0.7),
                                     "lam_max": P(_float, 6.0), "lam_count": P(int, 13),
                                     "tol": P(_float, 1e-3)},
          run_sph_transform, selftest_spherical, "spherical transform and multiplicativity")
_register("spherical", "asymptotics", {"lam": P(_float, 1.0), "r_lo": P(_float, 8.0), "r_hi": P(_float, 16.0),
                                       "points": P(int, 65), "inversion": P(_bool, False),
                                       "inv_Lambda": P(_float, 20.0), "inv_nodes": P(int, 101),
                                       "tol": P(_float, 1e-3)},
          run_sph_asymptotics, selftest_spherical, "c-function fit and inversion")
_register("spherical", "symbolcheck", {"symbol": P(str, "mikhlin"), "order": P(int, 2),
                                       "r_max": P(_float, 6.0), "h": P(_float, 1e-3)},
          run_sph_symbolcheck, selftest_spherical, "invariant-derivative symbol condition")
_register("nclp", "norms", {"dims": P(str, "2,3"), "weights": P(str, "1,0.5"), "p": P(str, "1,2,3,inf")},
          run_nclp_norms, selftest_nclp, "L^p and weak L^p norms of random traced elements")
_register("nclp", "singular", {"dims": P(str, "2,3"), "weights": P(str, "1,0.5")},
          run_nclp_singular, selftest_nclp, "generalized singular numbers")


# --- argument handling ----------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ncharm", description="Numerical harmonic analysis on groups")
    parser.add_argument("--version", action="version", version=f"ncharm {__version__}")
    groups = parser.add_subparsers(dest="cmd_group", required=True, parser_class=_Parser)
    sub = {}
    for (group, name), cmd in COMMANDS.items():
        if group not in sub:
            gp = groups.add_parser(group)
            sub[group] = gp.add_subparsers(dest="cmd_name", required=True, parser_class=_Parser)
        p = sub[group].add_parser(name, help=cmd.help, description=cmd.help)
        for key, par in cmd.params.items():
            p.add_argument("--" + key.replace("_", "-"), dest=key, default=None,
                           help=f"{par.help} (default {par.default})")
        p.add_argument("--config", default=None, help="key=value file")
        p.add_argument("--out", default=None, help="write the report here instead of stdout")
        p.add_argument("--selftest", action="store_true", help="run built-in sanity checks")
        p.add_argument("--omit-timing", action="store_true", help="write runtime_ms as null")
    return parser


def read_config(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out


def resolve_config(cmd: Command, args: argparse.Namespace) -> dict:
    raw = {}
    if args.config:
        raw = read_config(args.config)
        unknown = sorted(set(raw) - set(cmd.params))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    for key in cmd.params:
        v = getattr(args, key)
        if v is not None:
            raw[key] = v
    cfg = {}
    for key, par in cmd.params.items():
        try:
            cfg[key] = par.type(raw[key]) if key in raw else par.default
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {raw[key]!r} ({exc})") from None
    for key, v in cfg.items():
        if key.startswith("tol") and not v > 0:
            raise ConfigError("tolerances must be positive")
    return cfg


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cmd = COMMANDS[(args.cmd_group, args.cmd_name)]
    if args.selftest:
        checks = cmd.selftest()
        for name, ok in checks:
            sys.stdout.write(f"{'PASS' if ok else 'FAIL'} {name}\n")
        return 0 if all(ok for _, ok in checks) else 2
    try:
        cfg = resolve_config(cmd, args)
    except (ConfigError, OSError) as exc:
        sys.stderr.write(f"ncharm: config error: {exc}\n")
        return 1
    rep = Report(f"{cmd.group} {cmd.name}", cfg, version=__version__)
    t0 = time.perf_counter()
    code = 0
    try:
        passed = cmd.run(cfg, rep)
        if passed is False:
            code = 2
            rep.note("tolerance check failed")
        rep.add("passed", passed, "tolerance check (null when the command has none)")
    except Refusal as exc:
        code = 3
        rep.note(f"refused: {exc}", **{k: v for k, v in exc.details.items()})
    except ConfigError as exc:
        sys.stderr.write(f"ncharm: config error: {exc}\n")
        return 1
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"ncharm: invalid input: {exc}\n")
        return 1
    rep.runtime_ms = None if args.omit_timing else round(1e3 * (time.perf_counter() - t0), 3)
    _emit(rep.to_json(), args.out)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
