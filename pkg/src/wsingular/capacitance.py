"""Iterative capacitance of a conductor bounded by a closed triangulated surface.

The density iteration is ``delta_{k+1} = -A delta_k`` with ``delta_0 = 1`` and
the total charge held at the surface area, where

    (A delta)(s) = 1/(2 pi) * integral of delta(t) d/dN_s (1/|s - t|) dt

with ``N_s`` the outward normal at the observation point.  Each iterate
gives the capacitance estimate

    C_k = 4 pi eps0 S^2 / (integral over s of integral of delta_k(t)/|s - t| dt)

and ``C_0 = 4 pi eps0 S^2 / J`` is a lower bound.

Discretisation: densities are constant on each triangle and sampled at its
collocation point.  The cubature weight of a triangle is the integral of the
kernel over that triangle.  Near the observation point it is computed in
closed form, and farther away with the one-point rule.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import logging
import math
import os

import numpy as np
from scipy import special

from .errors import ArgumentError, DivergenceError
from .mesh import Ellipsoid, ScaledShape, Sphere
from .triangles import potential_gradient, potential_integral, self_potential, solid_angle

logger = logging.getLogger(__name__)

FOUR_PI = 4.0 * math.pi
TWO_PI = 2.0 * math.pi
# pairs closer than NEAR_FIELD_FACTOR * (larger panel diameter) get exact weights
NEAR_FIELD_FACTOR = 3.0
ROW_BLOCK = 256
QUADRATURES = ("hybrid", "midpoint")
OPERATORS = ("adjoint", "double_layer")


@dataclass
class DensityField:
    mesh: object
    values: np.ndarray

    def total(self):
        """Discrete integral of the density over the surface."""
        return float(self.mesh.areas @ self.values)

    def normalized(self):
        """Rescaled so that the total equals the surface area."""
        return DensityField(self.mesh, self.values * (self.mesh.total_area / self.total()))


@dataclass
class CapacitanceRun:
    n: int
    m: int
    N: int
    epsilon0: float
    capacitances: list = field(default_factory=list)
    density_min: list = field(default_factory=list)
    density_max: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    converged: bool = False
    operator: str = "adjoint"
    density: np.ndarray = None

    @property
    def capacitance(self):
        return self.capacitances[-1]

    @property
    def iterations(self):
        return len(self.capacitances) - 1

    @property
    def q_hat(self):
        """Last ratio of successive capacitance differences (None if undefined)."""
        return self.ratios[-1] if self.ratios else None

    def to_dict(self):
        return {
            "n": self.n, "m": self.m, "N": self.N, "epsilon0": self.epsilon0,
            "operator": self.operator,
            "iterations": self.iterations,
            "converged": self.converged,
            "capacitance": self.capacitance,
            "q_hat": self.q_hat,
            "sequence": [
                {"k": k, "capacitance": c, "density_min": lo, "density_max": hi}
                for k, (c, lo, hi) in enumerate(zip(self.capacitances, self.density_min,
                                                    self.density_max))
            ],
        }


def _row_blocks(N, fill, threads):
    blocks = [(j0, min(N, j0 + ROW_BLOCK)) for j0 in range(0, N, ROW_BLOCK)]
    if threads is None:
        threads = os.cpu_count() or 1
    if threads <= 1 or len(blocks) == 1:
        for b in blocks:
            fill(*b)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda b: fill(*b), blocks))


def _near_mask(mesh, j0, j1, r):
    diam = mesh.diameters
    return r < NEAR_FIELD_FACTOR * np.maximum(diam[None, :], diam[j0:j1, None])


def _check_quadrature(quadrature):
    if quadrature not in QUADRATURES:
        raise ArgumentError(f"quadrature must be one of {QUADRATURES}, got {quadrature!r}")


def single_layer_matrix(mesh, quadrature="hybrid", threads=None):
    """G[j, k] ~ integral over triangle k of 1/|tau_j - t| dt."""
    _check_quadrature(quadrature)
    N, tau, areas, corners = mesh.N, mesh.collocation, mesh.areas, mesh.corners
    G = np.empty((N, N))

    def fill(j0, j1):
        d = tau[j0:j1, None, :] - tau[None, :, :]
        r = np.sqrt(np.einsum("jkx,jkx->jk", d, d))
        idx = np.arange(j0, j1)
        r[idx - j0, idx] = 1.0
        block = areas[None, :] / r
        if quadrature == "hybrid":
            jj, kk = np.nonzero(_near_mask(mesh, j0, j1, r))
            jj = jj + j0
            block[jj - j0, kk] = potential_integral(tau[jj], corners[kk])
        block[idx - j0, idx] = self_potential(corners[j0:j1], tau[j0:j1])
        G[j0:j1] = block

    _row_blocks(N, fill, threads)
    return G


def double_layer_matrix(mesh, quadrature="hybrid", closure=True, threads=None):
    """D[j, k] ~ 1/(2 pi) * integral over triangle k of d/dN_t (1/|tau_j - t|) dt.

    The normal is that of the source triangle.  Far weights use the one-point
    rule, near weights the exact (negative) solid angle.  With ``closure`` the
    diagonal is set so that every row sums to -1 (the discrete Gauss
    identity); otherwise the flat self-panel contributes 0.
    """
    _check_quadrature(quadrature)
    N, tau, areas, corners, nrm = mesh.N, mesh.collocation, mesh.areas, mesh.corners, mesh.normals
    D = np.empty((N, N))

    def fill(j0, j1):
        d = tau[None, :, :] - tau[j0:j1, None, :]  # t - s
        r2 = np.einsum("jkx,jkx->jk", d, d)
        idx = np.arange(j0, j1)
        r2[idx - j0, idx] = 1.0
        nd = np.einsum("kx,jkx->jk", nrm, d)
        block = -nd / (r2 * np.sqrt(r2)) * areas[None, :] / TWO_PI
        if quadrature == "hybrid":
            jj, kk = np.nonzero(_near_mask(mesh, j0, j1, np.sqrt(r2)))
            off = jj + j0 != kk
            jj, kk = jj[off] + j0, kk[off]
            block[jj - j0, kk] = -solid_angle(tau[jj], corners[kk]) / TWO_PI
        block[idx - j0, idx] = 0.0
        D[j0:j1] = block

    _row_blocks(N, fill, threads)
    if closure:
        idx = np.arange(N)
        D[idx, idx] = -1.0 - D.sum(axis=1)
    return D


def adjoint_matrix(mesh, quadrature="hybrid", closure=True, threads=None):
    """A[j, k] ~ 1/(2 pi) * integral over triangle k of d/dN_s (1/|s - t|) dt at s = tau_j.

    ``N_s`` is the smooth-surface normal at the collocation point (see
    ``TriangulatedSurface.observation_normals``).  Near weights are
    ``N_s . grad`` of the exact triangle potential.  With ``closure`` the
    diagonal makes the area-weighted column sums equal -area, the discrete
    form of ``integral of A delta = -integral of delta``, so the iteration
    conserves total charge.
    """
    _check_quadrature(quadrature)
    N, tau, areas, corners = mesh.N, mesh.collocation, mesh.areas, mesh.corners
    obs = mesh.observation_normals
    A = np.empty((N, N))

    def fill(j0, j1):
        d = tau[j0:j1, None, :] - tau[None, :, :]  # s - t
        r2 = np.einsum("jkx,jkx->jk", d, d)
        idx = np.arange(j0, j1)
        r2[idx - j0, idx] = 1.0
        nd = np.einsum("jx,jkx->jk", obs[j0:j1], d)
        block = -nd / (r2 * np.sqrt(r2)) * areas[None, :] / TWO_PI
        if quadrature == "hybrid":
            jj, kk = np.nonzero(_near_mask(mesh, j0, j1, np.sqrt(r2)))
            off = jj + j0 != kk
            jj, kk = jj[off] + j0, kk[off]
            g = potential_gradient(tau[jj], corners[kk])
            block[jj - j0, kk] = np.einsum("px,px->p", obs[jj], g) / TWO_PI
        block[idx - j0, idx] = 0.0
        A[j0:j1] = block

    _row_blocks(N, fill, threads)
    if closure:
        idx = np.arange(N)
        A[idx, idx] = -1.0 - (areas @ A) / areas
    return A


def apply_A(mesh, delta, quadrature="hybrid", closure=True, D=None):
    """Double-layer operator (source normals) applied to a density.

    For ``delta = 1`` each entry is -1 exactly when ``closure`` is on.
    """
    values = delta.values if isinstance(delta, DensityField) else np.asarray(delta, dtype=float)
    if D is None:
        D = double_layer_matrix(mesh, quadrature=quadrature, closure=closure)
    return DensityField(mesh, D @ values)


def apply_adjoint(mesh, delta, quadrature="hybrid", A=None):
    """The operator of the capacitance iteration applied to a density."""
    values = delta.values if isinstance(delta, DensityField) else np.asarray(delta, dtype=float)
    if A is None:
        A = adjoint_matrix(mesh, quadrature=quadrature)
    return DensityField(mesh, A @ values)


def _capacitance_from(mesh, G, values, epsilon0):
    denom = float(mesh.areas @ (G @ values))
    S = mesh.total_area
    return FOUR_PI * epsilon0 * S * S / denom, denom


def capacitance_zeroth(mesh, epsilon0=1.0, G=None, quadrature="hybrid"):
    """Lower bound 4 pi eps0 S^2 / J for the unit density."""
    if G is None:
        G = single_layer_matrix(mesh, quadrature=quadrature)
    return _capacitance_from(mesh, G, np.ones(mesh.N), epsilon0)[0]


def iterate_capacitance(mesh, epsilon0=1.0, max_iter=100, stop_tol=1e-8,
                        operator="adjoint", quadrature="hybrid", threads=None,
                        G=None, A=None):
    """Run the density iteration and return the capacitance sequence.

    Stops when successive estimates differ by at most ``stop_tol`` relative,
    or after ``max_iter`` steps.  ``operator="double_layer"`` iterates the
    source-normal operator instead, for which the unit density is an exact
    fixed point, so every estimate equals the zeroth one.
    """
    if max_iter < 0:
        raise ArgumentError("max_iter must be >= 0")
    if operator not in OPERATORS:
        raise ArgumentError(f"operator must be one of {OPERATORS}, got {operator!r}")
    if G is None:
        G = single_layer_matrix(mesh, quadrature=quadrature, threads=threads)
    if A is None and max_iter > 0:
        if operator == "adjoint":
            A = adjoint_matrix(mesh, quadrature=quadrature, threads=threads)
        else:
            A = double_layer_matrix(mesh, quadrature=quadrature, threads=threads)

    run = CapacitanceRun(mesh.n, mesh.m, mesh.N, float(epsilon0), operator=operator)
    areas, S = mesh.areas, mesh.total_area
    delta = np.ones(mesh.N)

    def record(values):
        c, denom = _capacitance_from(mesh, G, values, epsilon0)
        if not denom > 0 or not np.isfinite(c):
            run.density = values
            raise DivergenceError(f"non-positive denominator at step {len(run.capacitances)}",
                                  run=run)
        run.capacitances.append(c)
        run.density_min.append(float(values.min()))
        run.density_max.append(float(values.max()))
        cs = run.capacitances
        if len(cs) >= 3 and cs[-2] != cs[-3]:
            run.ratios.append(abs(cs[-1] - cs[-2]) / abs(cs[-2] - cs[-3]))

    record(delta)
    for k in range(1, max_iter + 1):
        delta = -(A @ delta)
        total = areas @ delta
        if not total > 0:
            run.density = delta
            raise DivergenceError(f"density total {total:g} not positive at step {k}", run=run)
        delta *= S / total
        assert abs(areas @ delta - S) <= 1e-10 * S
        record(delta)
        prev, cur = run.capacitances[-2], run.capacitances[-1]
        if abs(cur - prev) <= stop_tol * abs(cur):
            run.converged = True
            break
    run.density = delta
    logger.debug("capacitance run N=%d: %d iterations, C=%.10g", mesh.N, run.iterations,
                 run.capacitance)
    return run


def exact_capacitance(shape, epsilon0=1.0):
    """Closed-form capacitance of a sphere or ellipsoid (None otherwise).

    Uses 4 pi eps0 / R_F(a^2, b^2, c^2), which reduces to
    4 pi eps0 sqrt(a^2 - c^2) / arccos(c / a) for oblate spheroids a = b > c.
    """
    factor = 1.0
    while isinstance(shape, ScaledShape):
        factor *= shape.factor
        shape = shape.base
    if isinstance(shape, Sphere):
        return FOUR_PI * epsilon0 * shape.a * factor
    if isinstance(shape, Ellipsoid):
        a, b, c = shape.a, shape.b, shape.c
        if a == b and c < a:
            val = oblate_spheroid_capacitance(a, c, epsilon0)
        elif a == b == c:
            val = FOUR_PI * epsilon0 * a
        else:
            val = FOUR_PI * epsilon0 / float(special.elliprf(a * a, b * b, c * c))
        return val * factor
    return None


def oblate_spheroid_capacitance(a, c, epsilon0=1.0):
    """4 pi eps0 sqrt(a^2 - c^2) / arccos(c / a) for a > c > 0."""
    if not a > c > 0:
        raise ArgumentError("oblate spheroid needs a > c > 0")
    return FOUR_PI * epsilon0 * math.sqrt(a * a - c * c) / math.acos(c / a)


def disc_capacitance(a, epsilon0=1.0):
    """Capacitance 8 a eps0 of a thin disc of radius a."""
    return 8.0 * a * epsilon0
