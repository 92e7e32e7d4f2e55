"""Triangulated star-shaped surfaces.

A structured triangulation of the unit sphere (``n`` azimuthal steps, ``m``
polar steps, polar fans at both poles) is projected radially onto a
star-shaped surface ``r = rho(direction)``.  The result keeps the sphere's
connectivity, so the triangle count is always ``2 n (m - 1)``.
"""

from dataclasses import dataclass, field
from functools import cached_property
import logging

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import ArgumentError, MeshError, MeshParseError

logger = logging.getLogger(__name__)

# Circumcenters closer than this (in barycentric coordinates) to an edge are
# treated as outside the triangle.
CIRCUMCENTER_MARGIN = 0.1
COLLOCATION_RULES = ("centroid", "circumcenter")


class StarShape:
    """Surface given by a radial function of the unit direction.

    Subclasses implement :meth:`radius`, which maps an ``(..., 3)`` array of
    unit vectors to positive radii.
    """

    name = "star"

    def radius(self, directions):
        raise NotImplementedError

    def __call__(self, directions):
        return self.radius(directions)

    def point(self, directions):
        u = np.asarray(directions, dtype=float)
        return u * self.radius(u)[..., None]

    def surface_normal(self, directions, eps=1e-6):
        """Outward unit normal at the surface point in each direction.

        Central differences of the radial map along two tangent directions.
        """
        u = np.asarray(directions, dtype=float)
        u = u / np.linalg.norm(u, axis=-1, keepdims=True)
        helper = np.where(np.abs(u[..., 2:3]) < 0.9, [0.0, 0.0, 1.0], [1.0, 0.0, 0.0])
        e1 = np.cross(u, helper)
        e1 /= np.linalg.norm(e1, axis=-1, keepdims=True)
        e2 = np.cross(u, e1)

        def x(v):
            return self.point(v / np.linalg.norm(v, axis=-1, keepdims=True))

        t1 = x(u + eps * e1) - x(u - eps * e1)
        t2 = x(u + eps * e2) - x(u - eps * e2)
        nrm = np.cross(t1, t2)
        nrm /= np.linalg.norm(nrm, axis=-1, keepdims=True)
        return np.where(np.sum(nrm * u, axis=-1, keepdims=True) < 0, -nrm, nrm)


@dataclass(frozen=True)
class Sphere(StarShape):
    a: float = 1.0
    name = "sphere"

    def radius(self, directions):
        return np.full(np.shape(directions)[:-1], float(self.a))

    def surface_normal(self, directions):
        u = np.asarray(directions, dtype=float)
        return u / np.linalg.norm(u, axis=-1, keepdims=True)


@dataclass(frozen=True)
class Ellipsoid(StarShape):
    """x^2/a^2 + y^2/b^2 + z^2/c^2 = 1."""

    a: float = 1.0
    b: float = 1.0
    c: float = 1.0
    name = "ellipsoid"

    def __post_init__(self):
        if min(self.a, self.b, self.c) <= 0:
            raise ArgumentError("ellipsoid semi-axes must be positive")

    def radius(self, directions):
        u = np.asarray(directions, dtype=float)
        q = (u[..., 0] / self.a) ** 2 + (u[..., 1] / self.b) ** 2 + (u[..., 2] / self.c) ** 2
        return 1.0 / np.sqrt(q)

    def surface_normal(self, directions):
        x = self.point(np.asarray(directions, dtype=float)
                       / np.linalg.norm(directions, axis=-1, keepdims=True))
        g = x / np.array([self.a, self.b, self.c]) ** 2
        return g / np.linalg.norm(g, axis=-1, keepdims=True)


@dataclass(frozen=True)
class ScaledShape(StarShape):
    base: StarShape
    factor: float
    name = "scaled"

    def radius(self, directions):
        return self.factor * self.base.radius(directions)

    def surface_normal(self, directions):
        return self.base.surface_normal(directions)


class TabulatedShape(StarShape):
    """Radial function sampled on a (phi, theta) grid, bilinear in between.

    ``table[i, j]`` is the radius at ``phi[i]``, ``theta[j]``; ``phi`` must
    cover ``[0, 2 pi)`` (the first column is repeated at ``2 pi``) and
    ``theta`` must run from 0 to pi.  Pole rows have to be constant in phi.
    """

    name = "table"

    def __init__(self, phi, theta, table):
        phi = np.asarray(phi, dtype=float)
        theta = np.asarray(theta, dtype=float)
        table = np.asarray(table, dtype=float)
        if table.shape != (phi.size, theta.size):
            raise ArgumentError("table shape must be (len(phi), len(theta))")
        if not (np.isclose(theta[0], 0.0) and np.isclose(theta[-1], np.pi)):
            raise ArgumentError("theta samples must span [0, pi]")
        if np.ptp(table[:, 0]) > 1e-12 * np.max(np.abs(table[:, 0])) or \
                np.ptp(table[:, -1]) > 1e-12 * np.max(np.abs(table[:, -1])):
            raise ArgumentError("radius must be single-valued at the poles")
        if not np.all(np.isfinite(table)) or np.any(table <= 0):
            raise ArgumentError("radius must be positive and finite")
        phi_ext = np.append(phi, phi[0] + 2 * np.pi)
        table_ext = np.vstack([table, table[:1]])
        self._interp = RegularGridInterpolator((phi_ext, theta), table_ext)

    def radius(self, directions):
        u = np.asarray(directions, dtype=float)
        theta = np.arccos(np.clip(u[..., 2], -1.0, 1.0))
        phi = np.mod(np.arctan2(u[..., 1], u[..., 0]), 2 * np.pi)
        pts = np.stack([phi, theta], axis=-1)
        return self._interp(pts.reshape(-1, 2)).reshape(theta.shape)


@dataclass(eq=False)
class TriangulatedSurface:
    """Flat-triangle surface with per-triangle collocation geometry.

    ``n`` and ``m`` are the sphere parameters the mesh was built from (0 for
    meshes read from arbitrary files).  ``shape`` is the exact surface the
    vertices lie on, when known; it supplies smooth normals at the
    collocation points.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    n: int = 0
    m: int = 0
    meta: dict = field(default_factory=dict)
    shape: StarShape = None
    collocation_rule: str = "centroid"

    def __post_init__(self):
        if self.collocation_rule not in COLLOCATION_RULES:
            raise ArgumentError(f"collocation rule must be one of {COLLOCATION_RULES}")
        self.vertices = np.ascontiguousarray(self.vertices, dtype=float)
        self.triangles = np.ascontiguousarray(self.triangles, dtype=np.int64)
        self.vertices.setflags(write=False)
        self.triangles.setflags(write=False)
        self._check()

    def _check(self):
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise MeshError("vertices must be an (V, 3) array")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise MeshError("triangles must be an (N, 3) array")
        if self.triangles.size and (self.triangles.min() < 0
                                    or self.triangles.max() >= len(self.vertices)):
            raise MeshError("triangle index out of range")
        scale = np.max(np.abs(self.vertices)) if self.vertices.size else 1.0
        bad = np.flatnonzero(self.areas <= 1e-24 * scale**2)
        if bad.size:
            raise MeshError(f"degenerate triangle {bad[0]} (zero area)", triangle=int(bad[0]))

    @property
    def N(self):
        return len(self.triangles)

    @cached_property
    def corners(self):
        """(N, 3, 3) array of triangle vertex coordinates."""
        return self.vertices[self.triangles]

    @cached_property
    def _cross(self):
        p = self.corners
        return np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])

    @cached_property
    def areas(self):
        return 0.5 * np.linalg.norm(self._cross, axis=1)

    @cached_property
    def normals(self):
        return self._cross / (2.0 * self.areas[:, None])

    @cached_property
    def centroids(self):
        return self.corners.mean(axis=1)

    @cached_property
    def diameters(self):
        p = self.corners
        e = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 1], p[:, 0] - p[:, 2]], axis=1)
        return np.linalg.norm(e, axis=2).max(axis=1)

    @cached_property
    def circumcenters(self):
        """Point equidistant from the vertices, or the centroid when that
        circumcenter is outside (or hugging an edge of) the triangle."""
        bary = circumcenter_barycentric(self.corners)
        inside = np.all(bary >= CIRCUMCENTER_MARGIN, axis=1)
        cc = np.einsum("ni,nij->nj", bary, self.corners)
        return np.where(inside[:, None], cc, self.centroids)

    @property
    def collocation(self):
        if self.collocation_rule == "circumcenter":
            return self.circumcenters
        return self.centroids

    @cached_property
    def vertex_normals(self):
        acc = np.zeros_like(self.vertices)
        for i in range(3):
            np.add.at(acc, self.triangles[:, i], self._cross)
        return acc / np.linalg.norm(acc, axis=1, keepdims=True)

    @cached_property
    def observation_normals(self):
        """Smooth-surface normals at the collocation points.

        Exact normals of ``shape`` at the radial image of each collocation
        point; without a shape, the mean of the three vertex normals.
        """
        if self.shape is not None:
            return self.shape.surface_normal(self.collocation)
        nrm = self.vertex_normals[self.triangles].sum(axis=1)
        return nrm / np.linalg.norm(nrm, axis=1, keepdims=True)

    @property
    def total_area(self):
        return float(self.areas.sum())

    def scaled(self, factor):
        shape = None if self.shape is None else ScaledShape(self.shape, factor)
        return TriangulatedSurface(self.vertices * factor, self.triangles, self.n, self.m,
                                   dict(self.meta), shape, self.collocation_rule)

    def with_collocation(self, rule):
        return TriangulatedSurface(self.vertices, self.triangles, self.n, self.m,
                                   dict(self.meta), self.shape, rule)

    def edge_use_counts(self):
        """Map each undirected edge to the number of triangles using it."""
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        e.sort(axis=1)
        uniq, counts = np.unique(e, axis=0, return_counts=True)
        return dict(zip(map(tuple, uniq.tolist()), counts.tolist()))

    def is_closed(self):
        return all(c == 2 for c in self.edge_use_counts().values())

    def is_consistently_oriented(self):
        """Every directed edge appears once, so neighbours agree on winding."""
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        return len(np.unique(e, axis=0)) == len(e)


def circumcenter_barycentric(corners):
    """Barycentric coordinates of the circumcenter of each triangle."""
    a = corners[:, 0]
    b = corners[:, 1]
    c = corners[:, 2]
    la = np.sum((b - c) ** 2, axis=1)
    lb = np.sum((c - a) ** 2, axis=1)
    lc = np.sum((a - b) ** 2, axis=1)
    w = np.stack([la * (lb + lc - la), lb * (lc + la - lb), lc * (la + lb - lc)], axis=1)
    return w / w.sum(axis=1, keepdims=True)


def sphere_connectivity(n, m):
    """Vertex directions and triangles of the structured sphere mesh."""
    if n < 3:
        raise ArgumentError(f"n must be >= 3, got {n}")
    if m < 2 or m % 2:
        raise ArgumentError(f"m must be an even integer >= 2, got {m}")
    phi = 2 * np.pi * np.arange(n) / n
    theta = np.pi * np.arange(1, m) / m
    st, ct = np.sin(theta), np.cos(theta)
    ring = np.stack([np.outer(st, np.cos(phi)), np.outer(st, np.sin(phi)),
                     np.repeat(ct[:, None], n, axis=1)], axis=-1).reshape(-1, 3)
    north, south = 0, 1 + (m - 1) * n
    dirs = np.vstack([[0.0, 0.0, 1.0], ring, [0.0, 0.0, -1.0]])

    k = np.arange(n)
    k1 = (k + 1) % n

    def vid(l, kk):  # ring l in 1..m-1
        return 1 + (l - 1) * n + kk

    tris = [np.stack([np.full(n, north), vid(1, k), vid(1, k1)], axis=1)]
    for l in range(1, m - 1):
        a, b = vid(l, k), vid(l, k1)
        c, d = vid(l + 1, k1), vid(l + 1, k)
        band = np.empty((2 * n, 3), dtype=np.int64)
        band[0::2] = np.stack([a, d, c], axis=1)
        band[1::2] = np.stack([a, c, b], axis=1)
        tris.append(band)
    tris.append(np.stack([np.full(n, south), vid(m - 1, k1), vid(m - 1, k)], axis=1))
    return dirs, np.vstack(tris)


def triangulate_sphere(n, m):
    """Unit-sphere mesh with N = 2 n (m - 1) triangles."""
    dirs, tris = sphere_connectivity(n, m)
    return TriangulatedSurface(dirs, tris, n=n, m=m, meta={"shape": "sphere:1"},
                               shape=Sphere(1.0))


def project_to_surface(sphere_mesh, shape):
    """Move every vertex along its ray from the origin onto ``shape``."""
    v = sphere_mesh.vertices
    dirs = v / np.linalg.norm(v, axis=1, keepdims=True)
    r = np.asarray(shape.radius(dirs), dtype=float)
    bad = np.flatnonzero(~np.isfinite(r) | (r <= 0))
    if bad.size:
        tri = int(np.flatnonzero(np.any(np.isin(sphere_mesh.triangles, bad), axis=1))[0])
        raise MeshError(f"shape radius not positive at vertex {bad[0]} (triangle {tri})",
                        triangle=tri)
    return TriangulatedSurface(dirs * r[:, None], sphere_mesh.triangles,
                               n=sphere_mesh.n, m=sphere_mesh.m,
                               meta=dict(sphere_mesh.meta, shape=getattr(shape, "name", "star")),
                               shape=shape, collocation_rule=sphere_mesh.collocation_rule)


def build_surface(shape, n, m, collocation="centroid"):
    return project_to_surface(triangulate_sphere(n, m).with_collocation(collocation), shape)


def write_mesh(mesh, path):
    lines = ["wsmesh 1", f"{len(mesh.vertices)} {len(mesh.triangles)}"]
    lines += ["v {:.17g} {:.17g} {:.17g}".format(*p) for p in mesh.vertices.tolist()]
    lines += ["t {} {} {}".format(*t) for t in mesh.triangles.tolist()]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_mesh(path):
    with open(path) as fh:
        rows = fh.read().split("\n")
    if not rows or not rows[0].strip():
        raise MeshParseError("empty file", line=1)
    if rows[0].split() != ["wsmesh", "1"]:
        raise MeshParseError("expected header 'wsmesh 1'", line=1)
    try:
        nv, nt = (int(x) for x in rows[1].split())
    except (IndexError, ValueError):
        raise MeshParseError("expected '<vertex_count> <triangle_count>'", line=2) from None
    if nv < 0 or nt < 0:
        raise MeshParseError("negative count", line=2)
    if len(rows) < 2 + nv + nt:
        raise MeshParseError("file truncated", line=len(rows))
    verts = np.empty((nv, 3))
    tris = np.empty((nt, 3), dtype=np.int64)
    for i in range(nv):
        lineno = 3 + i
        parts = rows[2 + i].split()
        if len(parts) != 4 or parts[0] != "v":
            raise MeshParseError("expected 'v x y z'", line=lineno)
        try:
            verts[i] = [float(x) for x in parts[1:]]
        except ValueError:
            raise MeshParseError("bad coordinate", line=lineno) from None
    for i in range(nt):
        lineno = 3 + nv + i
        parts = rows[2 + nv + i].split()
        if len(parts) != 4 or parts[0] != "t":
            raise MeshParseError("expected 't i j k'", line=lineno)
        try:
            idx = [int(x) for x in parts[1:]]
        except ValueError:
            raise MeshParseError("bad vertex index", line=lineno) from None
        if min(idx) < 0 or max(idx) >= nv:
            raise MeshParseError(f"vertex index out of range (vertex count {nv})", line=lineno)
        tris[i] = idx
    for j, extra in enumerate(rows[2 + nv + nt:], start=3 + nv + nt):
        if extra.strip():
            raise MeshParseError("unexpected trailing content", line=j)
    return TriangulatedSurface(verts, tris)


def read_triangle_soup(path):
    """Import whitespace-separated lines of nine coordinates (one triangle each).

    Shared vertices are merged by exact coordinate match.
    """
    try:
        data = np.loadtxt(path, ndmin=2)
    except ValueError as exc:
        raise MeshParseError(f"triangle soup: {exc}") from exc
    if data.shape[1] != 9:
        raise MeshParseError("triangle soup needs 9 columns per line")
    pts = data.reshape(-1, 3)
    verts, inverse = np.unique(pts, axis=0, return_inverse=True)
    return TriangulatedSurface(verts, inverse.reshape(-1, 3))
