import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from wsingular.errors import ArgumentError, ConvergenceError
from wsingular.kernels import periodic_kernel
from wsingular.periodic import (PeriodicGrid, build_weights_closed_form, build_weights_exact,
                                eval_Kf, gamma_constant, gamma_dyadic, kf_reference)

FOUR_PI2 = 4 * math.pi ** 2
# dyadic-annulus values, frozen from gamma_dyadic(lam, levels=60, order=32)
GAMMA_FROZEN = {0.25: 42.853909880666556, 0.5: 50.759947737193606, 0.75: 75.844119607861660}


class TestGrid:
    @pytest.mark.parametrize("n", [1, 2, 7, 64])
    def test_nodes_and_midpoints(self, n):
        g = PeriodicGrid(n)
        assert g.nodes[0] == 0.0 and g.nodes[-1] == 2 * math.pi
        assert np.all(np.diff(g.midpoints) > 0)
        np.testing.assert_allclose(g.midpoints, (2 * np.arange(n) + 1) * math.pi / n, rtol=1e-15)

    def test_rejects_bad_size(self):
        with pytest.raises(ArgumentError):
            PeriodicGrid(0)

    def test_cell_of_wraps(self):
        g = PeriodicGrid(8)
        assert g.cell_of((0.1, 2 * math.pi + 0.1)) == (0, 0)
        assert g.cell_of((2 * math.pi - 1e-9, -0.1)) == (7, 7)


class TestGamma:
    @pytest.mark.parametrize("lam", sorted(GAMMA_FROZEN))
    def test_against_frozen_dyadic_values(self, lam):
        assert gamma_constant(lam, 1e-10) == pytest.approx(GAMMA_FROZEN[lam], rel=1e-9)

    @pytest.mark.parametrize("lam", [0.1, 0.5, 0.9])
    def test_against_dyadic_oracle(self, lam):
        assert gamma_constant(lam, 1e-6) == pytest.approx(gamma_dyadic(lam), rel=1e-6)

    def test_small_exponent_limit(self):
        assert gamma_constant(1e-3, 1e-8) == pytest.approx(FOUR_PI2, rel=1e-3)

    def test_monotone_in_exponent(self):
        assert gamma_constant(0.3) < gamma_constant(0.6)

    def test_unreachable_tolerance(self):
        with pytest.raises(ConvergenceError) as info:
            gamma_constant(0.5, 1e-16)
        assert info.value.estimate == pytest.approx(GAMMA_FROZEN[0.5], rel=1e-12)

    @pytest.mark.parametrize("lam, tol", [(0.0, 1e-6), (1.0, 1e-6), (0.5, 0.0), (0.5, -1.0)])
    def test_invalid_arguments(self, lam, tol):
        with pytest.raises(ArgumentError):
            gamma_constant(lam, tol)


class TestExactWeights:
    def test_sum_approximates_gamma(self):
        rule = build_weights_exact(PeriodicGrid(16), 0.5, (3, 5))
        assert rule.total_weight == pytest.approx(GAMMA_FROZEN[0.5], rel=0.02)
        assert rule.total_weight == pytest.approx(GAMMA_FROZEN[0.5], rel=1e-6)

    def test_two_by_two_symmetry(self):
        w = build_weights_exact(PeriodicGrid(2), 0.5, (0, 0)).weights
        assert w[1, 0] == pytest.approx(w[0, 1], rel=1e-12)
        for i in range(2):
            for j in range(2):
                other = build_weights_exact(PeriodicGrid(2), 0.5, (i, j)).weights
                np.testing.assert_allclose(np.roll(w, (i, j), axis=(0, 1)), other, rtol=1e-12)

    def test_antipodal_cell_against_adaptive(self):
        g = PeriodicGrid(4)
        rule = build_weights_exact(g, 0.5, (0, 0))
        x = g.nodes
        ref, _ = integrate.dblquad(lambda y, s: float(periodic_kernel(np.array([s, y]), rule.target, 0.5)),
                                   x[2], x[3], x[2], x[3], epsabs=0, epsrel=1e-13)
        assert rule.weights[2, 2] == pytest.approx(ref, rel=1e-10)

    @pytest.mark.parametrize("shift", [1, 3, 5])
    def test_translation_covariance(self, shift):
        g = PeriodicGrid(8)
        base = build_weights_exact(g, 0.5, (1, 2)).weights
        moved = build_weights_exact(g, 0.5, ((1 + shift) % 8, (2 + shift) % 8)).weights
        np.testing.assert_allclose(np.roll(base, (shift, shift), axis=(0, 1)), moved, rtol=1e-10)

    def test_arbitrary_target_keeps_total(self):
        g = PeriodicGrid(16)
        rule = build_weights_exact(g, 0.5, (15, 0), target=(6.2, 0.01))
        assert rule.total_weight == pytest.approx(GAMMA_FROZEN[0.5], rel=1e-5)

    def test_arbitrary_target_outside_cell(self):
        with pytest.raises(ArgumentError):
            build_weights_exact(PeriodicGrid(8), 0.5, (0, 0), target=(3.0, 3.0))

    def test_bad_cell(self):
        with pytest.raises(ArgumentError):
            build_weights_exact(PeriodicGrid(4), 0.5, (4, 0))

    @settings(max_examples=20, deadline=None)
    @given(st.floats(0.02, 0.98), st.integers(2, 12), st.integers(0, 11), st.integers(0, 11))
    def test_positive(self, lam, n, i, j):
        rule = build_weights_exact(PeriodicGrid(n), lam, (i % n, j % n))
        assert np.all(rule.weights > 0)

    def test_weights_are_read_only(self):
        rule = build_weights_exact(PeriodicGrid(4), 0.5, (0, 0))
        with pytest.raises(ValueError):
            rule.weights[0, 0] = 1.0


class TestClosedFormWeights:
    def test_off_diagonal_formula(self):
        g = PeriodicGrid(8)
        rule = build_weights_closed_form(g, 0.3, (2, 5))
        mid = g.midpoints
        for k, l in [(0, 0), (7, 1), (4, 4)]:
            expect = periodic_kernel(np.array([mid[k], mid[l]]), np.array([mid[2], mid[5]]), 0.3)
            assert rule.weights[k, l] * 64 / FOUR_PI2 == pytest.approx(expect, rel=1e-14)

    def test_same_row(self):
        g = PeriodicGrid(8)
        rule = build_weights_closed_form(g, 0.5, (2, 5))
        mid = g.midpoints
        expect = FOUR_PI2 / 64 * (math.sin((mid[1] - mid[5]) / 2) ** 2) ** -0.5
        assert rule.weights[2, 1] == pytest.approx(expect, rel=1e-14)

    def test_diagonal_matches_exact(self):
        g = PeriodicGrid(8)
        a = build_weights_closed_form(g, 0.5, (2, 5)).weights[2, 5]
        b = build_weights_exact(g, 0.5, (2, 5)).weights[2, 5]
        assert a == pytest.approx(b, rel=1e-12)

    @pytest.mark.parametrize("n", [4, 8, 16, 32])
    def test_close_to_exact(self, n):
        g = PeriodicGrid(n)
        diff = build_weights_closed_form(g, 0.5, (1, 2)).weights - build_weights_exact(g, 0.5, (1, 2)).weights
        # cellwise gap shrinks like 1/n
        assert n * np.abs(diff).max() < 0.6

    @settings(max_examples=20, deadline=None)
    @given(st.floats(0.02, 0.98), st.integers(2, 16))
    def test_positive(self, lam, n):
        assert np.all(build_weights_closed_form(PeriodicGrid(n), lam, (0, n - 1)).weights > 0)


class TestEvalKf:
    def test_constant_gives_total(self):
        rule = build_weights_exact(PeriodicGrid(8), 0.5, (1, 1))
        assert eval_Kf(lambda p: np.ones(p.shape[:-1]), rule) == pytest.approx(rule.total_weight, rel=1e-14)

    def test_zero(self):
        rule = build_weights_exact(PeriodicGrid(8), 0.5, (1, 1))
        assert eval_Kf(lambda p: np.zeros(p.shape[:-1]), rule) == 0.0

    def test_scalar_function_broadcasts(self):
        rule = build_weights_exact(PeriodicGrid(4), 0.5, (0, 1))
        assert eval_Kf(lambda p: 2.0, rule) == pytest.approx(2 * rule.total_weight)

    def test_kernel_cancelling_density(self):
        # f = kernel^-1 at the target (pi, pi) makes the integrand 1
        def f(p):
            return (np.sin(0.5 * (p[..., 0] - math.pi)) ** 2
                    + np.sin(0.5 * (p[..., 1] - math.pi)) ** 2) ** 0.5

        errs = []
        for n in (7, 15, 31):
            rule = build_weights_exact(PeriodicGrid(n), 0.5, ((n - 1) // 2, (n - 1) // 2))
            assert rule.target == pytest.approx([math.pi, math.pi])
            errs.append(abs(eval_Kf(f, rule) / FOUR_PI2 - 1))
        assert errs[0] > errs[1] > errs[2] and errs[2] < 1e-4

    @pytest.mark.slow
    def test_smooth_density_against_adaptive_reference(self):
        f = lambda p: np.cos(p[..., 0]) + 0.5 * np.sin(2 * p[..., 1]) + 2.0
        s = np.array([PeriodicGrid(32).midpoints[5], PeriodicGrid(32).midpoints[20]])
        ref = kf_reference(f, s, 0.5, tol=1e-9)
        rule = build_weights_exact(PeriodicGrid(32), 0.5, (5, 20))
        assert eval_Kf(f, rule) == pytest.approx(ref, rel=2e-3)
