"""Closed-form integrals over flat triangles.

``potential_integral`` is the integral of 1/|p - t| over a triangle and
``solid_angle`` the signed solid angle it subtends; both are exact for any
observation point, including points in the plane of the triangle.  They give
the exact cubature weights for piecewise-constant densities.
"""

import numpy as np


def potential_integral(p, corners):
    """Integral of 1/|p - t| dt over each triangle.

    ``p``: (..., 3) points, ``corners``: (..., 3, 3) triangles (broadcast).
    Edge decomposition after Wilton et al.; stable for in-plane points.
    """
    p = np.asarray(p, dtype=float)
    corners = np.asarray(corners, dtype=float)
    v0, v1, v2 = corners[..., 0, :], corners[..., 1, :], corners[..., 2, :]
    nrm = np.cross(v1 - v0, v2 - v0)
    nrm = nrm / np.linalg.norm(nrm, axis=-1, keepdims=True)
    w = np.sum((p - v0) * nrm, axis=-1)
    aw = np.abs(w)
    p0 = p - w[..., None] * nrm
    total = 0.0
    for a, b in ((v0, v1), (v1, v2), (v2, v0)):
        e = b - a
        le = np.linalg.norm(e, axis=-1)
        s_hat = e / le[..., None]
        m_hat = np.cross(s_hat, nrm)
        t0 = np.sum((a - p0) * m_hat, axis=-1)
        s_minus = np.sum((a - p) * s_hat, axis=-1)
        s_plus = s_minus + le
        r_minus = np.linalg.norm(p - a, axis=-1)
        r_plus = np.linalg.norm(p - b, axis=-1)
        r0 = np.sqrt(t0 * t0 + w * w)
        safe = r0 > 1e-300
        r0s = np.where(safe, r0, 1.0)
        log_term = np.where(safe, np.arcsinh(s_plus / r0s) - np.arcsinh(s_minus / r0s), 0.0)
        ang = (np.arctan2(t0 * s_plus, r0 * r0 + aw * r_plus)
               - np.arctan2(t0 * s_minus, r0 * r0 + aw * r_minus))
        total = total + t0 * log_term - aw * ang
    return total


def solid_angle(p, corners):
    """Signed solid angle of each triangle seen from ``p``.

    Positive when ``p`` lies on the side opposite to the right-hand normal of
    the vertex order, so a closed outward-oriented surface gives ``4 pi`` for
    interior points, ``2 pi`` on a face and 0 outside.
    """
    p = np.asarray(p, dtype=float)
    corners = np.asarray(corners, dtype=float)
    r1 = corners[..., 0, :] - p
    r2 = corners[..., 1, :] - p
    r3 = corners[..., 2, :] - p
    l1 = np.linalg.norm(r1, axis=-1)
    l2 = np.linalg.norm(r2, axis=-1)
    l3 = np.linalg.norm(r3, axis=-1)
    num = np.sum(r1 * np.cross(r2, r3), axis=-1)
    den = (l1 * l2 * l3 + np.sum(r1 * r2, axis=-1) * l3
           + np.sum(r1 * r3, axis=-1) * l2 + np.sum(r2 * r3, axis=-1) * l1)
    return 2.0 * np.arctan2(num, den)


def self_potential(corners, p):
    """Integral of 1/|p - t| over the triangle containing ``p``.

    The triangle is split 4-fold at its edge midpoints and every sub-triangle
    is integrated in closed form; the sum is exact (the split only keeps each
    edge decomposition well conditioned for slivers).
    """
    corners = np.asarray(corners, dtype=float)
    a, b, c = corners[..., 0, :], corners[..., 1, :], corners[..., 2, :]
    ab, bc, ca = 0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)
    subs = [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
    return sum(potential_integral(p, np.stack(s, axis=-2)) for s in subs)


def potential_gradient(p, corners):
    """Gradient with respect to ``p`` of :func:`potential_integral`.

    In-plane part from the edge logarithms, normal part from the solid
    angle; singular only on the triangle's edges.
    """
    p = np.asarray(p, dtype=float)
    corners = np.asarray(corners, dtype=float)
    v0, v1, v2 = corners[..., 0, :], corners[..., 1, :], corners[..., 2, :]
    nrm = np.cross(v1 - v0, v2 - v0)
    nrm = nrm / np.linalg.norm(nrm, axis=-1, keepdims=True)
    w = np.sum((p - v0) * nrm, axis=-1)
    p0 = p - w[..., None] * nrm
    grad = solid_angle(p, corners)[..., None] * nrm
    for a, b in ((v0, v1), (v1, v2), (v2, v0)):
        e = b - a
        le = np.linalg.norm(e, axis=-1)
        s_hat = e / le[..., None]
        m_hat = np.cross(s_hat, nrm)
        t0 = np.sum((a - p0) * m_hat, axis=-1)
        s_minus = np.sum((a - p) * s_hat, axis=-1)
        r0 = np.sqrt(t0 * t0 + w * w)
        safe = r0 > 1e-300
        r0s = np.where(safe, r0, 1.0)
        log_term = np.where(safe, np.arcsinh((s_minus + le) / r0s) - np.arcsinh(s_minus / r0s), 0.0)
        grad = grad - log_term[..., None] * m_hat
    return grad
