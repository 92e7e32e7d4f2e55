"""Weakly singular kernels.

Every function accepts scalars or broadcastable arrays with the coordinate
axis last, and raises :class:`KernelDomainError` when any evaluation pair is
closer than ``sqrt(COINCIDENCE_TOL2)``.  Cubature code relies on that: an
infinite weight must never be consumed silently.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, KernelDomainError

COINCIDENCE_TOL2 = 1e-28
TWO_PI = 2.0 * np.pi


def check_lambda(lam, allow_zero=False):
    lam = float(lam)
    lo_ok = lam >= 0.0 if allow_zero else lam > 0.0
    if not (lo_ok and lam < 1.0):
        raise ArgumentError(f"singular exponent must lie in (0, 1), got {lam}")
    return lam


def _check_separated(d2, what):
    if np.any(np.asarray(d2) < COINCIDENCE_TOL2):
        raise KernelDomainError(f"{what}: coincident points")


def _wrap(d):
    """Map angle differences into [-pi, pi)."""
    return np.mod(np.asarray(d, dtype=float) + np.pi, TWO_PI) - np.pi


def periodic_base(sigma, s):
    """sin^2((sigma1-s1)/2) + sin^2((sigma2-s2)/2), no coincidence check."""
    d = np.asarray(sigma, dtype=float) - np.asarray(s, dtype=float)
    return np.sin(0.5 * d[..., 0]) ** 2 + np.sin(0.5 * d[..., 1]) ** 2


def periodic_kernel(sigma, s, lam):
    """(sin^2((sigma1-s1)/2) + sin^2((sigma2-s2)/2))^(-lam), 2pi-periodic."""
    lam = check_lambda(lam)
    w = _wrap(np.asarray(sigma, dtype=float) - np.asarray(s, dtype=float))
    _check_separated(np.sum(w * w, axis=-1), "periodic_kernel")
    return periodic_base(sigma, s) ** (-lam)


def planar_kernel(tau, t, lam):
    """((tau1-t1)^2 + (tau2-t2)^2)^(-lam)."""
    lam = check_lambda(lam)
    d = np.asarray(tau, dtype=float) - np.asarray(t, dtype=float)
    d2 = np.sum(d * d, axis=-1)
    _check_separated(d2, "planar_kernel")
    return d2 ** (-lam)


def newton_kernel(s, t):
    """1 / |s - t| for points in R^3."""
    d = np.asarray(s, dtype=float) - np.asarray(t, dtype=float)
    d2 = np.sum(d * d, axis=-1)
    _check_separated(d2, "newton_kernel")
    return 1.0 / np.sqrt(d2)


@dataclass(frozen=True)
class SurfacePoint:
    """A point on a surface with its outward unit normal (arrays allowed)."""

    position: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float)
        nrm = np.asarray(self.normal, dtype=float)
        if np.any(np.abs(np.linalg.norm(nrm, axis=-1) - 1.0) > 1e-12):
            raise ArgumentError("surface normal must have unit length")
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "normal", nrm)


def dipole_kernel(t, s):
    """Normal derivative at ``t`` of 1/|s - t|: ``-N_t . (t - s) / r^3``.

    ``t`` is a :class:`SurfacePoint` carrying the outward normal.  For two
    points on a sphere of radius ``a`` this equals ``-1 / (2 a r)``.
    """
    d = t.position - np.asarray(s, dtype=float)
    d2 = np.sum(d * d, axis=-1)
    _check_separated(d2, "dipole_kernel")
    nd = np.sum(t.normal * d, axis=-1)
    return -nd / (d2 * np.sqrt(d2))
