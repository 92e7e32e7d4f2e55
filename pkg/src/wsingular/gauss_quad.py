"""Gauss-Legendre rules and cubature weights over squares.

Far from the singularity a cell integral of the kernel is a smooth integral
and the tensor Gauss rule is used as is.  On cells that touch the target the
kernel is replaced by the shifted kernel ``1 / (d^(2 lam) + h)``, which is
smooth, and integrated with the tensor rule on a mesh graded geometrically
towards the target down to the scale where the shift dominates.
"""

from dataclasses import dataclass
from functools import lru_cache
import math
from typing import NamedTuple

import numpy as np
from scipy import integrate

from .errors import ArgumentError
from .kernels import check_lambda

FAR_FIELD_ORDER = 8
M_CAP = 64
H_FLOOR = 1e-14
GRADING_RATIO = 0.25


class Rect(NamedTuple):
    """Axis-aligned rectangle [x0, x1] x [y0, y1]."""

    x0: float
    x1: float
    y0: float
    y1: float

    @property
    def area(self):
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    @property
    def center(self):
        return np.array([0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1)])

    def contains(self, t):
        return self.x0 <= t[0] <= self.x1 and self.y0 <= t[1] <= self.y1


@dataclass(frozen=True)
class GaussRule1D:
    m: int
    nodes: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True)
class RegularizationParams:
    h: float
    m: int
    alpha: float
    lam: float


def _legendre_and_derivative(m, x):
    p0, p1 = np.ones_like(x), x
    for k in range(2, m + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    # p1 = P_m, p0 = P_{m-1}
    dp = m * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


@lru_cache(maxsize=None)
def gauss_legendre(m):
    """Nodes and weights of the m-point Gauss-Legendre rule on [-1, 1].

    Roots of P_m by Newton iteration from Chebyshev-like initial guesses.
    """
    if not isinstance(m, (int, np.integer)) or not 1 <= m <= 128:
        raise ArgumentError(f"Gauss order must be an integer in [1, 128], got {m!r}")
    m = int(m)
    if m == 1:
        nodes, weights = np.array([0.0]), np.array([2.0])
    else:
        k = np.arange(1, m // 2 + 1)
        x = np.cos(np.pi * (k - 0.25) / (m + 0.5))
        for _ in range(100):
            p, dp = _legendre_and_derivative(m, x)
            dx = p / dp
            x = x - dx
            if np.max(np.abs(dx)) < 1e-15:
                break
        p, dp = _legendre_and_derivative(m, x)
        w = 2.0 / ((1.0 - x * x) * dp * dp)
        if m % 2:
            _, dp0 = _legendre_and_derivative(m, np.array([0.0]))
            mid_x, mid_w = [0.0], [2.0 / dp0[0] ** 2]
        else:
            mid_x, mid_w = [], []
        nodes = np.concatenate([-x, mid_x, x[::-1]])
        weights = np.concatenate([w, mid_w, w[::-1]])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return GaussRule1D(m, nodes, weights)


def _mapped(m, a, b):
    rule = gauss_legendre(m)
    half = 0.5 * (b - a)
    return a + half * (rule.nodes + 1.0), half * rule.weights


def integrate_square(f, square, m):
    """Tensor-product Gauss rule for ``f`` over a rectangle.

    ``f`` takes an ``(..., 2)`` array of points and returns ``(...)`` values.
    """
    square = Rect(*square)
    x, wx = _mapped(m, square.x0, square.x1)
    y, wy = _mapped(m, square.y0, square.y1)
    pts = np.stack(np.meshgrid(x, y, indexing="ij"), axis=-1)
    return float(wx @ np.asarray(f(pts), dtype=float) @ wy)


def select_regularization(n, lam, alpha, m_cap=M_CAP, h_floor=H_FLOOR):
    """Kernel shift h and Gauss order m for an n x n grid.

    h = n^(-2(2 lam + alpha)/(1 - lam)) and
    m = max(floor(n^((8 lam + 4 alpha)/(1 - lam) + alpha - 3)), 1), clamped to
    [1, m_cap]; h is floored at ``h_floor``.
    """
    lam = check_lambda(lam)
    if n < 2:
        raise ArgumentError(f"grid size must be >= 2, got {n}")
    if not 0 < alpha <= 1:
        raise ArgumentError(f"Hölder exponent must lie in (0, 1], got {alpha}")
    h_exp = -2.0 * (2.0 * lam + alpha) / (1.0 - lam)
    h = max(math.exp(h_exp * math.log(n)), h_floor)
    m_exp = (8.0 * lam + 4.0 * alpha) / (1.0 - lam) + alpha - 3.0
    if m_exp * math.log(n) > math.log(m_cap) + 1.0:
        m = m_cap
    else:
        # float power, not exp(log), so that integral powers stay exact
        m = max(1, min(int(math.floor(float(n) ** m_exp)), m_cap))
    return RegularizationParams(h=h, m=m, alpha=float(alpha), lam=lam)


def kernel_base(kind, dx, dy):
    """Squared-distance-like base whose power -lam is the kernel."""
    if kind == "planar":
        return dx * dx + dy * dy
    if kind == "periodic":
        return np.sin(0.5 * dx) ** 2 + np.sin(0.5 * dy) ** 2
    raise ArgumentError(f"unknown kernel family {kind!r}")


def shifted_kernel(kind, dx, dy, lam, h):
    return 1.0 / (kernel_base(kind, dx, dy) ** lam + h)


def _gauss_rect(kind, rect, t, lam, h, m):
    x, wx = _mapped(m, rect[0], rect[1])
    y, wy = _mapped(m, rect[2], rect[3])
    vals = shifted_kernel(kind, x[:, None] - t[0], y[None, :] - t[1], lam, h)
    return float(wx @ vals @ wy)


def _corner_graded(kind, x0, x1, y0, y1, t, lam, h, m):
    """Integral over a rectangle whose corner (x0, y0) is the target.

    Signs of x1 - x0 and y1 - y0 may be negative.  The square part next to
    the target is cut into L-shaped shells shrinking geometrically towards
    it; any elongated remainder is cut into pieces growing geometrically
    away from it, so every piece is about as far from the target as it is
    long.
    """
    ax, ay = x1 - x0, y1 - y0
    if ax == 0.0 or ay == 0.0:
        return 0.0
    short = min(abs(ax), abs(ay))
    sx, sy = math.copysign(short, ax), math.copysign(short, ay)

    def rect(xa, xb, ya, yb):
        return (min(xa, xb), max(xa, xb), min(ya, yb), max(ya, yb))

    # below this distance the shift h dominates the kernel and the shifted
    # integrand is smooth on the remaining square
    floor = (0.1 * h) ** (1.0 / (2.0 * lam)) if h > 0 else 0.0
    total = 0.0
    q = 1.0
    while short * q > floor and q > 1e-300:
        q_in = q * GRADING_RATIO
        a_out, b_out = x0 + q * sx, y0 + q * sy
        a_in, b_in = x0 + q_in * sx, y0 + q_in * sy
        total += _gauss_rect(kind, rect(a_in, a_out, y0, b_out), t, lam, h, m)
        total += _gauss_rect(kind, rect(x0, a_in, b_in, b_out), t, lam, h, m)
        q = q_in
    total += _gauss_rect(kind, rect(x0, x0 + q * sx, y0, y0 + q * sy), t, lam, h, m)
    # elongated remainder beyond the square
    length = max(abs(ax), abs(ay))
    lo = short
    while lo < length * (1.0 - 1e-15):
        hi = min(2.0 * lo, length)
        if abs(ax) >= abs(ay):
            r = rect(x0 + math.copysign(lo, ax), x0 + math.copysign(hi, ax), y0, y0 + sy)
        else:
            r = rect(x0, x0 + sx, y0 + math.copysign(lo, ay), y0 + math.copysign(hi, ay))
        total += _gauss_rect(kind, r, t, lam, h, m)
        lo = hi
    return total


def _near_order(params):
    # the graded pieces need a few points even when the selected order is 1
    return max(params.m, FAR_FIELD_ORDER)


def near_field_weight(square, t, params, kind="planar"):
    """Integral of the h-shifted kernel centred at ``t`` over ``square``.

    Targets inside (or on the boundary of) the square split it into up to
    four rectangles meeting at ``t``, each graded towards that corner.  For a
    target outside, the split point is the point of the square nearest to
    ``t``, where the integrand peaks.
    """
    square = Rect(*square)
    t = np.asarray(t, dtype=float)
    lam, h, m = params.lam, params.h, _near_order(params)
    # split at the point of the square nearest to t (t itself when inside)
    p = np.clip(t, [square.x0, square.y0], [square.x1, square.y1])
    total = 0.0
    for xe in (square.x0, square.x1):
        for ye in (square.y0, square.y1):
            total += _corner_graded(kind, p[0], xe, p[1], ye, t, lam, h, m)
    return total


def polar_square_integral(square, t, lam, kind="planar", epsrel=1e-12):
    """Debug oracle: unshifted kernel integral by adaptive polar quadrature.

    The square is cut into triangles with apex ``t``; the radial integral is
    done in closed form for the planar kernel and adaptively otherwise.
    """
    lam = check_lambda(lam)
    square = Rect(*square)
    t = np.asarray(t, dtype=float)
    corners = [(square.x0, square.y0), (square.x1, square.y0),
               (square.x1, square.y1), (square.x0, square.y1)]
    if not square.contains(t):
        # split into two triangles through a far point is messy; use two
        # nested adaptive integrals instead (integrand is smooth here)
        val, _ = integrate.dblquad(
            lambda y, x: kernel_base(kind, x - t[0], y - t[1]) ** (-lam),
            square.x0, square.x1, square.y0, square.y1, epsabs=0, epsrel=epsrel)
        return val
    total = 0.0
    for a, b in zip(corners, corners[1:] + corners[:1]):
        a = np.asarray(a) - t
        b = np.asarray(b) - t
        edge = b - a
        le = np.hypot(*edge)
        dist = abs(a[0] * edge[1] - a[1] * edge[0]) / le
        if dist < 1e-15:
            continue
        th_a = math.atan2(a[1], a[0])
        th_b = math.atan2(b[1], b[0])
        dth = (th_b - th_a) % (2 * math.pi)
        nvec = np.array([edge[1], -edge[0]]) / le
        if nvec @ a < 0:
            nvec = -nvec
        th_n = math.atan2(nvec[1], nvec[0])

        def radius(th):
            return dist / math.cos(th - th_n)

        if kind == "planar":
            def g(th):
                return radius(th) ** (2 - 2 * lam) / (2 - 2 * lam)
        else:
            def g(th):
                c, s = math.cos(th), math.sin(th)
                inner, _ = integrate.quad(
                    lambda r: r * kernel_base(kind, r * c, r * s) ** (-lam),
                    0.0, radius(th), epsabs=0, epsrel=epsrel, limit=200)
                return inner
        val, _ = integrate.quad(g, th_a, th_a + dth, epsabs=0, epsrel=epsrel, limit=200)
        total += val
    return total


def cell_integrals(kind, x_cells, y_cells, t, lam, m=FAR_FIELD_ORDER):
    """Gauss-rule integrals of the unshifted kernel over every grid cell.

    ``x_cells`` and ``y_cells`` are (n, 2) arrays of cell intervals.  Returns
    an (n_x, n_y) array; cells containing the target give meaningless values
    and must be overwritten.
    """
    rule = gauss_legendre(m)
    t = np.asarray(t, dtype=float)

    def nodes(cells):
        cells = np.asarray(cells, dtype=float)
        half = 0.5 * (cells[:, 1] - cells[:, 0])
        pts = cells[:, :1] + half[:, None] * (rule.nodes + 1.0)
        return pts, half[:, None] * rule.weights

    xs, wx = nodes(x_cells)
    ys, wy = nodes(y_cells)
    base = kernel_base(kind, xs.reshape(-1)[:, None] - t[0], ys.reshape(-1)[None, :] - t[1])
    with np.errstate(divide="ignore"):
        vals = base ** (-lam)
    vals = vals.reshape(xs.shape[0], m, ys.shape[0], m)
    return np.einsum("ka,kalb,lb->kl", wx, vals, wy)
