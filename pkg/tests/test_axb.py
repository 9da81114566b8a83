from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ncharm import Refusal
from ncharm import axb
from ncharm.axb import AxbFunction, AxbPoint, HalfLineGrid

pos = st.floats(0.05, 20.0)
real = st.floats(-10, 10)
group_points = st.builds(AxbPoint, pos, real)


def smooth(alpha, b, ca=0.3, cb=-0.2):
    return axb.bump(alpha - ca, 2.0) * axb.bump(b - cb, 1.8) * (1 + 0.5j * np.sin(b))


def probe_vector(t):
    # smooth, decaying at 0 and infinity on either half-line
    x = np.log(np.abs(t))
    return np.exp(-x * x / 2) * (1 + 0.3j * x)


def oracle_pi_f_D(fn, phi, sign, t, A=2.5, B=2.5, n_a=1601, n_b=801):
    """``int int f(a, b) sqrt(a) e^{2 pi i b t} (D phi)(a t) da db / a^2`` by a fine
    trapezoid rule in ``(log a, b)``; exact enough for compactly supported smooth ``f``."""
    alpha = np.linspace(-A, A, n_a)
    b = np.linspace(-B, B, n_b)
    da, db = alpha[1] - alpha[0], b[1] - b[0]
    a = np.exp(alpha)
    F = fn(alpha[:, None], b[None, :])
    out = []
    for tt in t:
        Dphi = np.sqrt(np.abs(a * tt)) * phi(a * tt)
        inner = F @ np.exp(2j * np.pi * b * tt) * db
        # da / a^2 = e^{-alpha} d alpha
        out.append(np.sum(np.exp(-alpha) * np.sqrt(a) * Dphi * inner) * da)
    return np.array(out)


class TestGroup:
    def test_modular_examples(self):
        assert axb.modular(axb.IDENTITY) == 1
        assert axb.modular(AxbPoint(2.0, 7.0)) == 0.5

    @settings(max_examples=100)
    @given(group_points, group_points)
    def test_modular_multiplicative(self, g, h):
        assert axb.modular(axb.axb_mul(g, h)) == pytest.approx(axb.modular(g) * axb.modular(h), rel=1e-14)

    @settings(max_examples=100)
    @given(group_points, group_points)
    def test_law_matches_affine_matrices(self, g, h):
        def M(x):
            return np.array([[x.a, x.b], [0.0, 1.0]])
        np.testing.assert_allclose(M(axb.axb_mul(g, h)), M(g) @ M(h), rtol=1e-12, atol=1e-12)

    @settings(max_examples=100)
    @given(group_points)
    def test_inverse(self, g):
        np.testing.assert_allclose(axb.axb_mul(g, axb.axb_inv(g)), axb.IDENTITY, atol=1e-12)

    def test_make_validates(self):
        with pytest.raises(ValueError):
            AxbPoint.make(-1.0, 0.0)


class TestHaar:
    def fn(self, a, b):
        alpha = np.log(a)
        return np.exp(-4 * alpha**2 - b * b)

    @pytest.mark.parametrize("g0", [AxbPoint(1.3, 0.4), AxbPoint(0.6, -0.7)])
    def test_left_invariance(self, g0):
        gi = axb.axb_inv(g0)
        base = axb.left_haar_integral(self.fn, 6.0, 9.0, 1201, 1201)

        def moved(a, b):
            # f(g0^-1 g)
            return self.fn(gi.a * a, gi.a * b + gi.b)

        assert axb.left_haar_integral(moved, 6.0, 9.0, 1201, 1201) == pytest.approx(base, rel=1e-6)

    def test_right_translation_picks_up_modular(self):
        h = AxbPoint(1.7, 0.3)
        base = axb.left_haar_integral(self.fn, 6.0, 9.0, 1201, 1201)

        def moved(a, b):
            # f(g h)
            return self.fn(a * h.a, a * h.b + b)

        val = axb.left_haar_integral(moved, 6.0, 9.0, 1201, 1201)
        assert val == pytest.approx(base / axb.modular(h), rel=1e-6)


@pytest.fixture
def grid_plus():
    return HalfLineGrid(1, -12.0, 0.02, 1101)


class TestRepresentation:
    def test_identity(self, grid_plus):
        phi = probe_vector(grid_plus.points)
        np.testing.assert_allclose(axb.axb_rep("+", axb.IDENTITY, phi, grid_plus), phi)

    def test_pure_translation(self, grid_plus):
        phi = probe_vector(grid_plus.points)
        out = axb.axb_rep("+", AxbPoint(1.0, 0.37), phi, grid_plus)
        np.testing.assert_allclose(out, np.exp(2j * np.pi * 0.37 * grid_plus.points) * phi)

    @pytest.mark.parametrize("a", [np.exp(0.2), 1.234, 0.5])
    @pytest.mark.parametrize("sign", [1, -1])
    def test_unitary(self, a, sign):
        grid = HalfLineGrid(sign, -12.0, 0.02, 1101)
        phi = probe_vector(grid.points)
        out = axb.axb_rep(sign, AxbPoint(a, 0.8), phi, grid)
        assert axb.l2_norm(out, grid) == pytest.approx(axb.l2_norm(phi, grid), abs=1e-6)

    def test_matches_analytic_dilation(self, grid_plus):
        t = grid_plus.points
        g = AxbPoint(1.234, -0.4)
        out = axb.axb_rep(1, g, probe_vector(t), grid_plus)
        exact = np.sqrt(g.a) * np.exp(2j * np.pi * g.b * t) * probe_vector(g.a * t)
        inside = t * g.a < grid_plus.t_max
        assert np.abs(out - exact)[inside].max() < 1e-6

    def test_homomorphism(self, grid_plus):
        phi = probe_vector(grid_plus.points)
        g, h = AxbPoint(1.3, 0.2), AxbPoint(0.7, -0.5)
        lhs = axb.axb_rep(1, g, axb.axb_rep(1, h, phi, grid_plus), grid_plus)
        rhs = axb.axb_rep(1, axb.axb_mul(g, h), phi, grid_plus)
        # away from large t, where the phase e^{2 pi i b t} is under-resolved in log t
        low = grid_plus.points < 5.0
        assert np.abs(lhs - rhs)[low].max() < 1e-4

    def test_sign_mismatch(self, grid_plus):
        with pytest.raises(ValueError):
            axb.axb_rep("-", axb.IDENTITY, np.zeros(grid_plus.m), grid_plus)

    @pytest.mark.parametrize("sign", ["+", "-"])
    @pytest.mark.parametrize("g", [AxbPoint(np.exp(0.4), 0.3), AxbPoint(1.7, -0.9), AxbPoint(0.35, 2.0)])
    def test_D_intertwining(self, sign, g):
        s = axb._sign(sign)
        grid = HalfLineGrid(s, -12.0, 0.02, 1101)
        v = probe_vector(grid.points)
        lhs = axb.D_apply(axb.axb_rep(s, g, v, grid), grid)
        rhs = axb.modular(g) ** 0.5 * axb.axb_rep(s, g, axb.D_apply(v, grid), grid)
        assert np.abs(lhs - rhs).max() <= 1e-4 * np.abs(lhs).max()


class TestFunctionIO:
    def test_requires_odd_alpha(self):
        with pytest.raises(ValueError):
            AxbFunction(np.zeros((10, 10)), 1.0, 1.0)

    def test_decay_validated(self):
        with pytest.raises(ValueError, match="decay"):
            AxbFunction(np.ones((11, 10)), 1.0, 1.0)

    def test_csv_round_trip(self, tmp_path):
        f = AxbFunction.product_bump(n_a=21, n_b=16).scaled(2 - 1j)
        f.to_csv(tmp_path / "f.csv")
        back = AxbFunction.from_csv(tmp_path / "f.csv")
        assert (back.A, back.B) == (f.A, f.B)
        np.testing.assert_array_equal(back.values, f.values)


class TestFourier:
    def test_zero(self):
        f = AxbFunction(np.zeros((21, 16)), 2.0, 2.0)
        assert np.all(axb.axb_fourier(f, "+").kernel == 0)

    def test_linearity(self):
        f = AxbFunction.product_bump()
        g = AxbFunction.from_callable(lambda a, b: smooth(np.log(a), b), 2.5, 2.5, 81, 64)
        grid = axb.default_half_line_grid(f, 1)
        lhs = axb.axb_fourier(f.scaled(2.0) + g.scaled(-1j), 1, grid).kernel
        rhs = 2 * axb.axb_fourier(f, 1, grid).kernel - 1j * axb.axb_fourier(g, 1, grid).kernel
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    @pytest.mark.parametrize("sign", ["+", "-"])
    @pytest.mark.parametrize("shape,tol", [((81, 64), 5e-3), ((161, 128), 1e-6)])
    def test_against_direct_quadrature(self, sign, shape, tol):
        f = AxbFunction.from_callable(lambda a, b: smooth(np.log(a), b), 2.5, 2.5, *shape)
        K = axb.axb_fourier(f, sign)
        t = K.grid.points
        got = K.apply(probe_vector(t))
        probe = np.flatnonzero((np.abs(t) > 0.05) & (np.abs(t) < 2.0))[::25]
        ref = oracle_pi_f_D(smooth, probe_vector, sign, t[probe])
        assert np.abs(got[probe] - ref).max() <= tol * np.abs(ref).max()

    def test_off_lattice_grid(self):
        f = AxbFunction.product_bump()
        step = f.alpha_axis.step
        grid = HalfLineGrid(1, -20.0 + 0.37 * step, step * 0.9, int(21.0 / (0.9 * step)))
        K = axb.axb_fourier(f, 1, grid)
        assert not K.diagnostics["alpha_lattice"]
        lat = axb.axb_fourier(f, 1)
        assert K.hs_norm_sq() == pytest.approx(lat.hs_norm_sq(), rel=1e-2)

    def test_refuses_beyond_nyquist(self):
        f = AxbFunction.product_bump()
        with pytest.raises(Refusal):
            axb.axb_fourier(f, 1, HalfLineGrid(1, -5.0, f.alpha_axis.step, 400))


class TestPlancherel:
    def test_zero(self):
        res = axb.axb_plancherel(AxbFunction(np.zeros((21, 16)), 2.0, 2.0))
        assert res["lhs"] == 0 and res["rhs"] == 0

    def test_scaling(self):
        f = AxbFunction.product_bump()
        a, b = axb.axb_plancherel(f), axb.axb_plancherel(f.scaled(3.0))
        assert b["lhs"] == pytest.approx(9 * a["lhs"], rel=1e-12)
        assert b["rhs"] == pytest.approx(9 * a["rhs"], rel=1e-12)

    def test_lhs_exact_for_product(self):
        # int chi(alpha)^2 e^{-alpha} d alpha * int psi(b)^2 db, each by adaptive quadrature
        from scipy import integrate
        ia = integrate.quad(lambda x: axb.bump(x, 2.0) ** 2 * np.exp(-x), -2, 2, limit=200)[0]
        ib = integrate.quad(lambda x: axb.bump(x, 2.0) ** 2, -2, 2, limit=200)[0]
        assert AxbFunction.product_bump().l2_norm_sq() == pytest.approx(ia * ib, rel=1e-8)

    def test_default_and_refined(self):
        coarse = axb.axb_plancherel(AxbFunction.product_bump())
        fine = axb.axb_plancherel(AxbFunction.product_bump(n_a=161, n_b=128))
        assert coarse["relative_error"] <= 1e-2
        assert fine["relative_error"] <= 3e-3
        assert fine["relative_error"] < coarse["relative_error"]

    @pytest.mark.slow
    def test_two_refinements(self):
        errs = [axb.axb_plancherel(AxbFunction.product_bump(n_a=na, n_b=nb))["relative_error"]
                for na, nb in [(41, 32), (81, 64), (161, 128)]]
        assert errs[0] > errs[1] > errs[2]

    def test_asymmetric_function(self):
        f = AxbFunction.from_callable(lambda a, b: smooth(np.log(a), b), 2.5, 2.5, 81, 64)
        res = axb.axb_plancherel(f)
        assert res["relative_error"] <= 1e-2
        # the two signs see different halves of the b-spectrum
        assert res["hs_plus"] != pytest.approx(res["hs_minus"], rel=1e-3)

    def test_workers_deterministic(self):
        f = AxbFunction.product_bump()
        assert axb.axb_plancherel(f, workers=1)["rhs"] == axb.axb_plancherel(f, workers=2)["rhs"]
