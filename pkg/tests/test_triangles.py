import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from wsingular.mesh import triangulate_sphere
from wsingular.triangles import potential_gradient, potential_integral, self_potential, solid_angle

TRI = np.array([[0.0, 0.0, 0.0], [1.0, 0.2, 0.0], [0.3, 0.9, 0.0]])


def brute_potential(p, tri, epsrel=1e-11):
    """Integral of 1/|p - t| over the triangle in barycentric coordinates."""
    a, b, c = tri
    jac = np.linalg.norm(np.cross(b - a, c - a))

    def f(v, u):
        x = a + u * (b - a) + v * (c - a)
        return 1.0 / np.linalg.norm(p - x)

    val, _ = integrate.dblquad(f, 0, 1, 0, lambda u: 1 - u, epsabs=0, epsrel=epsrel)
    return jac * val


class TestPotential:
    @pytest.mark.parametrize("p", [(0.4, 0.3, 0.5), (2.0, -1.0, 0.1), (0.4, 0.3, -1e-3),
                                   (1.5, 1.5, 0.0), (-0.3, 0.1, 0.0), (0.5, 0.5, 3.0)])
    def test_against_adaptive(self, p):
        p = np.array(p)
        assert potential_integral(p, TRI) == pytest.approx(brute_potential(p, TRI), rel=1e-7)

    def test_equilateral_from_centre(self):
        a = 1.3
        tri = np.array([[0, 0, 0], [a, 0, 0], [a / 2, a * math.sqrt(3) / 2, 0]])
        centre = tri.mean(axis=0)
        exact = math.sqrt(3) * a * math.log(2 + math.sqrt(3))
        assert potential_integral(centre, tri) == pytest.approx(exact, rel=1e-12)
        assert self_potential(tri, centre) == pytest.approx(exact, rel=1e-12)

    def test_self_potential_of_sliver(self):
        tri = np.array([[0, 0, 0], [1.0, 0, 0], [0.5, 1e-3, 0]])
        p = tri.mean(axis=0)
        pieces = sum(potential_integral(p, np.array(s)) for s in (
            (tri[0], tri[1], p), (tri[1], tri[2], p), (tri[2], tri[0], p)))
        assert self_potential(tri, p) == pytest.approx(pieces, rel=1e-10)

    def test_vectorised_broadcast(self):
        pts = np.array([[0.4, 0.3, 0.5], [2.0, -1.0, 0.1]])
        vals = potential_integral(pts, np.broadcast_to(TRI, (2, 3, 3)))
        assert vals.shape == (2,)
        assert vals[1] == pytest.approx(potential_integral(pts[1], TRI))


class TestSolidAngle:
    def test_closed_surface(self):
        mesh = triangulate_sphere(12, 8)
        c = mesh.corners
        assert solid_angle(np.array([0.1, -0.2, 0.3]), c).sum() == pytest.approx(4 * math.pi, rel=1e-12)
        assert solid_angle(np.array([0.0, 3.0, 0.5]), c).sum() == pytest.approx(0.0, abs=1e-12)
        face = c[5].mean(axis=0)
        others = np.delete(c, 5, axis=0)
        assert solid_angle(face, others).sum() == pytest.approx(2 * math.pi, rel=1e-12)

    def test_sign_convention(self):
        # right-hand normal +z; observer below sees a positive angle
        assert solid_angle(np.array([0.3, 0.3, -1.0]), TRI) > 0
        assert solid_angle(np.array([0.3, 0.3, 1.0]), TRI) < 0

    def test_octant(self):
        tri = np.eye(3)
        assert solid_angle(np.zeros(3), tri) == pytest.approx(math.pi / 2, rel=1e-14)


class TestGradient:
    @settings(max_examples=40, deadline=None)
    @given(st.floats(-1, 2), st.floats(-1, 2), st.floats(0.05, 2).map(lambda z: z) | st.floats(-2, -0.05))
    def test_finite_differences(self, x, y, z):
        p = np.array([x, y, z])
        g = potential_gradient(p, TRI)
        eps = 1e-5
        fd = np.array([(potential_integral(p + eps * e, TRI) - potential_integral(p - eps * e, TRI)) / (2 * eps)
                       for e in np.eye(3)])
        np.testing.assert_allclose(g, fd, rtol=1e-5, atol=1e-7)

    def test_normal_part_is_solid_angle(self):
        p = np.array([0.2, 0.4, 0.7])
        assert potential_gradient(p, TRI)[2] == pytest.approx(solid_angle(p, TRI), rel=1e-12)
