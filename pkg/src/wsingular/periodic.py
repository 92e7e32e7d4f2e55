"""Midpoint cubature for the doubly periodic weakly singular integral

    Kf(s) = integral over [0, 2 pi]^2 of f(sigma) / (sin^2((sigma1 - s1)/2) + sin^2((sigma2 - s2)/2))^lam

on an n x n grid of equal cells, with f sampled at the cell midpoints.
"""

from dataclasses import dataclass
from functools import cached_property
import logging
import math

import numpy as np
from scipy import integrate

from .errors import ArgumentError, ConvergenceError
from .gauss_quad import (FAR_FIELD_ORDER, cell_integrals, gauss_legendre, near_field_weight,
                         select_regularization)
from .kernels import check_lambda, periodic_kernel

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
FOUR_PI2 = 4.0 * math.pi ** 2


@dataclass(frozen=True)
class PeriodicGrid:
    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ArgumentError(f"grid size must be a positive integer, got {self.n!r}")

    @cached_property
    def nodes(self):
        x = TWO_PI * np.arange(self.n + 1) / self.n
        x[-1] = TWO_PI
        x.setflags(write=False)
        return x

    @cached_property
    def midpoints(self):
        x = self.nodes
        mid = 0.5 * (x[1:] + x[:-1])
        mid.setflags(write=False)
        return mid

    @property
    def cell_size(self):
        return TWO_PI / self.n

    def cell_of(self, s):
        """Index pair of the cell containing the point ``s`` (taken mod 2 pi)."""
        s = np.mod(np.asarray(s, dtype=float), TWO_PI)
        idx = np.minimum(np.floor(s / self.cell_size).astype(int), self.n - 1)
        return int(idx[0]), int(idx[1])

    def sample(self, f):
        """f at every midpoint pair, as an (n, n) array; ``f`` takes (..., 2) points."""
        mid = self.midpoints
        pts = np.stack(np.meshgrid(mid, mid, indexing="ij"), axis=-1)
        return np.broadcast_to(np.asarray(f(pts), dtype=float), (self.n, self.n))


@dataclass(frozen=True)
class PeriodicCubature:
    grid: PeriodicGrid
    lam: float
    weights: np.ndarray
    target_cell: tuple
    target: np.ndarray
    method: str

    @property
    def total_weight(self):
        return float(self.weights.sum())


def _check_cell(grid, target_cell):
    i, j = target_cell
    if not (0 <= i < grid.n and 0 <= j < grid.n):
        raise ArgumentError(f"target cell {target_cell} outside a {grid.n}x{grid.n} grid")
    return int(i), int(j)


def _wrapped_cells(grid, centre):
    """Cell intervals shifted by multiples of 2 pi to lie nearest ``centre``."""
    x = grid.nodes
    lo, hi = x[:-1].copy(), x[1:].copy()
    shift = TWO_PI * np.round((0.5 * (lo + hi) - centre) / TWO_PI)
    return np.stack([lo - shift, hi - shift], axis=1)


def build_weights_exact(grid, lam, target_cell, alpha=0.5, target=None, far_order=FAR_FIELD_ORDER):
    """Weights I_kl = integral over cell (k, l) of the kernel centred at the target.

    By default the kernel is centred at the midpoint of ``target_cell``.
    Passing ``target`` (a point in that cell) centres it there instead.  Cells
    sharing a point with the target cell get the graded h-shifted rule,
    others a tensor Gauss rule of order ``far_order``.
    """
    lam = check_lambda(lam)
    i, j = _check_cell(grid, target_cell)
    mid = grid.midpoints
    if target is None:
        t = np.array([mid[i], mid[j]])
    else:
        t = np.asarray(target, dtype=float)
        if grid.cell_of(t) != (i, j) and not _on_cell(grid, t, i, j):
            raise ArgumentError(f"target {t} is not in cell {(i, j)}")
    n = grid.n
    params = select_regularization(max(n, 2), lam, alpha)
    xc = _wrapped_cells(grid, t[0])
    yc = _wrapped_cells(grid, t[1])
    w = cell_integrals("periodic", xc, yc, t, lam, m=far_order)
    near = sorted({(i + di) % n for di in (-1, 0, 1)}), sorted({(j + dj) % n for dj in (-1, 0, 1)})
    for k in near[0]:
        for l in near[1]:
            w[k, l] = near_field_weight((*xc[k], *yc[l]), t, params, kind="periodic")
    w.setflags(write=False)
    return PeriodicCubature(grid, lam, w, (i, j), t, "exact")


def _on_cell(grid, t, i, j):
    x = grid.nodes
    return x[i] <= t[0] % TWO_PI <= x[i + 1] and x[j] <= t[1] % TWO_PI <= x[j + 1]


def build_weights_closed_form(grid, lam, target_cell, alpha=0.5):
    """Weights (4 pi^2 / n^2) * kernel(midpoints) off the target cell.

    The target cell keeps the regularised integral of the kernel over the
    cell centred at its singularity.
    """
    lam = check_lambda(lam)
    i, j = _check_cell(grid, target_cell)
    mid = grid.midpoints
    t = np.array([mid[i], mid[j]])
    pts = np.stack(np.meshgrid(mid, mid, indexing="ij"), axis=-1)
    d2 = np.sin(0.5 * (pts[..., 0] - t[0])) ** 2 + np.sin(0.5 * (pts[..., 1] - t[1])) ** 2
    d2[i, j] = 1.0
    w = (FOUR_PI2 / grid.n ** 2) * d2 ** (-lam)
    half = 0.5 * grid.cell_size
    params = select_regularization(max(grid.n, 2), lam, alpha)
    w[i, j] = near_field_weight((t[0] - half, t[0] + half, t[1] - half, t[1] + half), t, params,
                                kind="periodic")
    w.setflags(write=False)
    return PeriodicCubature(grid, lam, w, (i, j), t, "closed_form")


def eval_Kf(f, rule):
    """Sum of w_kl f(x'_k, x'_l); ``f`` takes (..., 2) arrays of points."""
    return float(np.sum(rule.weights * rule.grid.sample(f)))


def _check_tol(tol):
    if not tol > 0:
        raise ArgumentError(f"tolerance must be positive, got {tol}")


def gamma_constant(lam, tol=1e-8):
    """Integral of the periodic kernel over the full period square.

    The square is recentred on the singularity, reduced by symmetry to the
    triangle 0 <= y <= x <= pi and integrated in polar coordinates with the
    radius substitution r ~ u^(1 / (2 - 2 lam)), which makes the integrand
    smooth.  Raises :class:`ConvergenceError` (with the best estimate) when
    the quadrature cannot certify ``tol``.
    """
    lam = check_lambda(lam)
    _check_tol(tol)
    p = 2.0 - 2.0 * lam
    # quadpack refuses relative tolerances near machine precision
    inner_tol = max(0.1 * tol, 1e-13)

    def inner(theta):
        c, s = math.cos(theta), math.sin(theta)
        R = math.pi / c

        def g(u):
            r = R * u ** (1.0 / p)
            # base / r^2 with sinc to avoid 0/0 at the origin
            q = 0.25 * (c * c * np.sinc(r * c / TWO_PI) ** 2 + s * s * np.sinc(r * s / TWO_PI) ** 2)
            return q ** (-lam)

        val, err = integrate.quad(g, 0.0, 1.0, epsabs=0.0, epsrel=inner_tol, limit=200)
        return R ** p / p * val

    val, err, info = integrate.quad(inner, 0.0, 0.25 * math.pi, epsabs=0.0, epsrel=inner_tol,
                                    limit=200, full_output=True)[:3]
    gamma = 8.0 * val
    if not err <= tol * abs(val):
        raise ConvergenceError(f"gamma quadrature error {err:.3g} exceeds tolerance", estimate=gamma)
    return gamma


def gamma_dyadic(lam, levels=48, order=24):
    """Independent estimate of the same integral by dyadic annuli.

    The square [-pi, pi]^2 is peeled into square annuli of half-widths
    pi * 2^-k, each tiled by 12 squares carrying a tensor Gauss rule.  The
    innermost square uses the leading-order kernel 4^lam r^(-2 lam), whose
    integral is known up to a one-dimensional angular integral.
    """
    lam = check_lambda(lam)
    rule = gauss_legendre(order)
    total = 0.0
    a = math.pi
    for _ in range(levels):
        b = 0.5 * a
        edges = np.array([-a, -b, 0.0, b, a])
        for ix in range(4):
            for iy in range(4):
                if 1 <= ix <= 2 and 1 <= iy <= 2:
                    continue
                x0, x1, y0, y1 = edges[ix], edges[ix + 1], edges[iy], edges[iy + 1]
                hx, hy = 0.5 * (x1 - x0), 0.5 * (y1 - y0)
                x = x0 + hx * (rule.nodes + 1.0)
                y = y0 + hy * (rule.nodes + 1.0)
                base = np.sin(0.5 * x[:, None]) ** 2 + np.sin(0.5 * y[None, :]) ** 2
                total += hx * hy * float(rule.weights @ base ** (-lam) @ rule.weights)
        a = b
    th = 0.125 * math.pi * (rule.nodes + 1.0)
    ang = 0.125 * math.pi * float(rule.weights @ np.cos(th) ** (2.0 * lam - 2.0))
    p = 2.0 - 2.0 * lam
    total += 4.0 ** lam * 8.0 * a ** p / p * ang
    return total


def kf_reference(f, s, lam, tol=1e-8):
    """Adaptive reference value of Kf(s) for smooth-enough f (slow; for tests)."""
    lam = check_lambda(lam)
    s = np.asarray(s, dtype=float)

    def integrand(y, x):
        pt = np.array([x, y])
        return float(f(pt)) * float(periodic_kernel(pt, s, lam))

    total = 0.0
    # split at the singularity so that it only sits at subdomain corners
    xs = sorted({0.0, s[0] % TWO_PI, TWO_PI})
    ys = sorted({0.0, s[1] % TWO_PI, TWO_PI})
    for x0, x1 in zip(xs, xs[1:]):
        for y0, y1 in zip(ys, ys[1:]):
            val, _ = integrate.dblquad(integrand, x0, x1, y0, y1, epsabs=0.0, epsrel=tol)
            total += val
    return total
