"""Midpoint cubature for the planar weakly singular integral

    Tf(t) = integral over [-1, 1]^2 of f(tau) / |tau - t|^(2 lam)

with f sampled at the midpoints of an n x n grid of equal cells.
"""

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
import logging
import math

import numpy as np
from scipy import integrate

from .errors import ArgumentError
from .gauss_quad import FAR_FIELD_ORDER, cell_integrals, near_field_weight, select_regularization
from .kernels import check_lambda

logger = logging.getLogger(__name__)

# integral of 1/|tau| over [-1, 1]^2
UNIT_SQUARE_NEWTON = 8.0 * math.log(1.0 + math.sqrt(2.0))


class Mode(Enum):
    PER_CELL = "per_cell"
    MERGED_NEAR_FIELD = "merged_near_field"


@dataclass(frozen=True)
class PlanarGrid:
    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ArgumentError(f"grid size must be a positive integer, got {self.n!r}")

    @cached_property
    def nodes(self):
        x = -1.0 + 2.0 * np.arange(self.n + 1) / self.n
        x[-1] = 1.0
        x.setflags(write=False)
        return x

    @cached_property
    def midpoints(self):
        x = self.nodes
        mid = 0.5 * (x[1:] + x[:-1])
        mid.setflags(write=False)
        return mid

    @cached_property
    def cells(self):
        x = self.nodes
        c = np.stack([x[:-1], x[1:]], axis=1)
        c.setflags(write=False)
        return c

    def index_of(self, x):
        """Cell index along one axis; points on a shared edge go to the lower cell."""
        k = math.ceil((x + 1.0) * self.n / 2.0) - 1
        return min(max(k, 0), self.n - 1)

    def cell_of(self, t):
        return self.index_of(float(t[0])), self.index_of(float(t[1]))

    def neighbourhood(self, cell):
        """Index ranges of the target cell and the cells touching it."""
        i, j = cell
        return (range(max(i - 1, 0), min(i + 2, self.n)),
                range(max(j - 1, 0), min(j + 2, self.n)))

    def sample(self, f):
        mid = self.midpoints
        pts = np.stack(np.meshgrid(mid, mid, indexing="ij"), axis=-1)
        return np.broadcast_to(np.asarray(f(pts), dtype=float), (self.n, self.n))


@dataclass(frozen=True)
class PlanarCubature:
    grid: PlanarGrid
    lam: float
    target: np.ndarray
    target_cell: tuple
    weights: np.ndarray
    mode: Mode

    @property
    def total_weight(self):
        return float(self.weights.sum())


def build_planar_weights(grid, lam, t, mode=Mode.PER_CELL, alpha=0.5, far_order=FAR_FIELD_ORDER):
    """Cell weights of the kernel centred at ``t``.

    Cells in the neighbourhood of the target cell use the graded h-shifted
    rule, the others a tensor Gauss rule.  In merged mode the neighbourhood
    weights are summed onto the target cell and zeroed elsewhere.
    """
    lam = check_lambda(lam)
    mode = Mode(mode)
    t = np.asarray(t, dtype=float)
    if t.shape != (2,) or np.any(np.abs(t) > 1.0):
        raise ArgumentError(f"target must be a point of [-1, 1]^2, got {t}")
    cells = grid.cells
    w = cell_integrals("planar", cells, cells, t, lam, m=far_order)
    params = select_regularization(max(grid.n, 2), lam, alpha)
    cell = grid.cell_of(t)
    rows, cols = grid.neighbourhood(cell)
    for k in rows:
        for l in cols:
            w[k, l] = near_field_weight((*cells[k], *cells[l]), t, params, kind="planar")
    if mode is Mode.MERGED_NEAR_FIELD:
        merged = float(w[rows.start:rows.stop, cols.start:cols.stop].sum())
        w[rows.start:rows.stop, cols.start:cols.stop] = 0.0
        w[cell] = merged
    w.setflags(write=False)
    return PlanarCubature(grid, lam, t, cell, w, mode)


def eval_Tf(f, rule):
    """Sum of w_kl f(x'_k, x'_l); ``f`` takes (..., 2) arrays of points."""
    return float(np.sum(rule.weights * rule.grid.sample(f)))


def kernel_mass(t, lam):
    """Integral of |tau - t|^(-2 lam) over [-1, 1]^2, by exact radial integration.

    The square is split into four triangles with apex ``t``; along each ray
    the radial integral is elementary.
    """
    lam = check_lambda(lam)
    t = np.asarray(t, dtype=float)
    p = 2.0 - 2.0 * lam
    total = 0.0
    corners = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
    for a, b in zip(corners, corners[1:] + corners[:1]):
        a = np.asarray(a) - t
        b = np.asarray(b) - t
        e = b - a
        le = math.hypot(*e)
        dist = abs(a[0] * e[1] - a[1] * e[0]) / le
        if dist < 1e-15:
            continue
        nvec = np.array([e[1], -e[0]]) / le
        if nvec @ a < 0:
            nvec = -nvec
        th_n = math.atan2(nvec[1], nvec[0])
        th_a = math.atan2(a[1], a[0])
        dth = (math.atan2(b[1], b[0]) - th_a) % (2.0 * math.pi)
        val, _ = integrate.quad(lambda th: (dist / math.cos(th - th_n)) ** p / p,
                                th_a, th_a + dth, epsabs=0.0, epsrel=1e-13, limit=200)
        total += val
    return total
