import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from wsingular.errors import ArgumentError
from wsingular.gauss_quad import select_regularization
from wsingular.kernels import planar_kernel
from wsingular.planar import (UNIT_SQUARE_NEWTON, Mode, PlanarGrid, build_planar_weights,
                              eval_Tf, kernel_mass)

ONE = lambda p: np.ones(p.shape[:-1])


def shifted_square_integral(h):
    """Integral of 1/(|x| + h) over [-1, 1]^2, radially in closed form."""
    def ray(theta):
        R = 1.0 / math.cos(theta)
        return R - h * math.log1p(R / h)
    val, _ = integrate.quad(ray, 0.0, math.pi / 4, epsabs=0, epsrel=1e-13)
    return 8.0 * val


class TestGrid:
    def test_nodes(self):
        g = PlanarGrid(4)
        np.testing.assert_array_equal(g.nodes, [-1.0, -0.5, 0.0, 0.5, 1.0])
        np.testing.assert_array_equal(g.midpoints, [-0.75, -0.25, 0.25, 0.75])

    @pytest.mark.parametrize("x, k", [(-1.0, 0), (-0.5, 0), (-0.49, 1), (0.0, 1), (1e-12, 2), (1.0, 3)])
    def test_ties_go_to_lower_cell(self, x, k):
        assert PlanarGrid(4).index_of(x) == k

    @pytest.mark.parametrize("cell, size", [((3, 4), 9), ((0, 4), 6), ((0, 0), 4), ((7, 7), 4)])
    def test_neighbourhood_truncated_at_boundary(self, cell, size):
        rows, cols = PlanarGrid(8).neighbourhood(cell)
        assert len(rows) * len(cols) == size


class TestWeights:
    def test_two_by_two_at_centre(self):
        rule = build_planar_weights(PlanarGrid(2), 0.5, (0.0, 0.0))
        w = rule.weights
        assert np.ptp(w) < 1e-12 * w.max()
        h = select_regularization(2, 0.5, 0.5).h
        assert rule.total_weight == pytest.approx(shifted_square_integral(h), rel=1e-8)
        # the shift h = 2^-6 is large at n = 2
        assert rule.total_weight == pytest.approx(UNIT_SQUARE_NEWTON, rel=0.07)

    def test_far_cell_against_adaptive(self):
        t = np.array([-1.0, -1.0])
        rule = build_planar_weights(PlanarGrid(8), 0.5, t)
        ref, _ = integrate.dblquad(lambda y, x: float(planar_kernel(np.array([x, y]), t, 0.5)),
                                   0.75, 1.0, 0.75, 1.0, epsabs=0, epsrel=1e-13)
        assert rule.weights[7, 7] == pytest.approx(ref, rel=1e-10)

    @pytest.mark.parametrize("t", [(0.3, -0.7), (0.1, 0.1), (-1.0, 0.45)])
    def test_reflection(self, t):
        g = PlanarGrid(8)
        a = build_planar_weights(g, 0.5, t).weights
        b = build_planar_weights(g, 0.5, -np.asarray(t)).weights
        np.testing.assert_allclose(a, b[::-1, ::-1], rtol=1e-10)

    @pytest.mark.parametrize("n", [16, 32, 64])
    @pytest.mark.parametrize("t", [(0.0, 0.0), (0.3, -0.7), (1.0, 1.0), (-1.0, 0.2)])
    def test_constants_exact(self, n, t):
        rule = build_planar_weights(PlanarGrid(n), 0.5, t)
        assert rule.total_weight == pytest.approx(kernel_mass(t, 0.5), rel=1e-6)

    def test_kernel_mass_closed_form(self):
        assert kernel_mass((0.0, 0.0), 0.5) == pytest.approx(UNIT_SQUARE_NEWTON, rel=1e-14)
        # corner: a quarter of the square of half-width 2
        assert kernel_mass((1.0, 1.0), 0.5) == pytest.approx(UNIT_SQUARE_NEWTON / 2, rel=1e-12)

    def test_total_maximal_at_centre(self):
        g = PlanarGrid(8)
        pts = np.linspace(-1, 1, 5)
        totals = {(x, y): build_planar_weights(g, 0.5, (x, y)).total_weight for x in pts for y in pts}
        assert max(totals, key=totals.get) == (0.0, 0.0)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.02, 0.98), st.integers(1, 10), st.floats(-1, 1), st.floats(-1, 1),
           st.sampled_from(list(Mode)))
    def test_nonnegative(self, lam, n, x, y, mode):
        w = build_planar_weights(PlanarGrid(n), lam, (x, y), mode=mode).weights
        if mode is Mode.PER_CELL:
            assert np.all(w > 0)
        else:
            assert np.all(w >= 0) and w.sum() > 0

    @pytest.mark.parametrize("t", [(2.0, 0.0), (0.0, -1.01)])
    def test_target_outside_square(self, t):
        with pytest.raises(ArgumentError):
            build_planar_weights(PlanarGrid(4), 0.5, t)


class TestMergedMode:
    @pytest.mark.parametrize("t, cells", [((0.1, -0.3), 9), ((1.0, 0.0), 6), ((-1.0, -1.0), 4)])
    def test_structure(self, t, cells):
        g = PlanarGrid(8)
        per = build_planar_weights(g, 0.5, t)
        merged = build_planar_weights(g, 0.5, t, mode="merged_near_field")
        i, j = merged.target_cell
        rows, cols = g.neighbourhood((i, j))
        block = np.zeros_like(per.weights, dtype=bool)
        block[rows.start:rows.stop, cols.start:cols.stop] = True
        assert block.sum() == cells
        assert merged.weights[i, j] == pytest.approx(per.weights[block].sum(), rel=1e-14)
        assert np.count_nonzero(merged.weights[block]) == 1
        np.testing.assert_array_equal(merged.weights[~block], per.weights[~block])

    def test_equal_on_functions_constant_near_target(self):
        g = PlanarGrid(16)
        t = (0.2, 0.3)
        f = lambda p: np.where(np.hypot(p[..., 0] - 0.2, p[..., 1] - 0.3) < 0.4, 3.0,
                               1.0 + p[..., 0] ** 2)
        a = eval_Tf(f, build_planar_weights(g, 0.5, t))
        b = eval_Tf(f, build_planar_weights(g, 0.5, t, mode=Mode.MERGED_NEAR_FIELD))
        assert a == pytest.approx(b, rel=1e-12)


class TestEvalTf:
    def test_constant_at_centre(self):
        rule = build_planar_weights(PlanarGrid(32), 0.5, (0.0, 0.0))
        assert eval_Tf(ONE, rule) == pytest.approx(7.0509893, rel=1e-6)

    def test_zero(self):
        assert eval_Tf(lambda p: 0.0 * p[..., 0], build_planar_weights(PlanarGrid(4), 0.5, (0, 0))) == 0.0

    def test_smooth_density_against_adaptive(self):
        f = lambda p: 1.0 + p[..., 0] - 0.5 * p[..., 1] ** 2
        t = np.array([0.3, -0.2])

        def integrand(y, x):
            return (1.0 + x - 0.5 * y * y) * float(planar_kernel(np.array([x, y]), t, 0.5))

        ref = 0.0
        for x0, x1 in ((-1, 0.3), (0.3, 1)):
            for y0, y1 in ((-1, -0.2), (-0.2, 1)):
                ref += integrate.dblquad(integrand, x0, x1, y0, y1, epsabs=0, epsrel=1e-10)[0]
        # the error depends on where t sits inside its cell, so it is not
        # monotone in n; compare a coarse and a fine grid
        errs = [abs(eval_Tf(f, build_planar_weights(PlanarGrid(n), 0.5, t)) - ref) for n in (8, 64)]
        assert errs[1] < errs[0] / 10 and errs[1] / abs(ref) < 1e-4
