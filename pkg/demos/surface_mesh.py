# # Triangulated star-shaped surfaces
#
# A sphere is cut into n longitudes and m latitude bands, giving
# N = 2 n (m - 1) triangles, then projected radially onto the target shape.

# %%
import math
import tempfile
from pathlib import Path

import numpy as np

from wsingular.mesh import Ellipsoid, build_surface, read_mesh, triangulate_sphere, write_mesh

# %%
for n, m in [(40, 30), (50, 40), (60, 50)]:
    mesh = triangulate_sphere(n, m)
    print(f"(n, m)=({n}, {m})  N={mesh.N}  area error {mesh.total_area / (4 * math.pi) - 1:+.2e}")

# %% [markdown]
# A flattened spheroid.  Vertices land on the surface to rounding error and
# every face normal points outward.

# %%
mesh = build_surface(Ellipsoid(1.0, 1.0, 0.1), 40, 30)
v = mesh.vertices
print("max surface residual", np.max(np.abs(v[:, 0] ** 2 + v[:, 1] ** 2 + v[:, 2] ** 2 / 0.01 - 1)))
print("closed", mesh.is_closed(), " outward", bool(np.all((mesh.normals * mesh.centroids).sum(1) > 0)))
print("smallest / largest triangle", mesh.areas.min(), mesh.areas.max())

# %% [markdown]
# The text format stores coordinates with 17 significant digits, so a round
# trip is exact.

# %%
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "spheroid.wsmesh"
    write_mesh(mesh, path)
    back = read_mesh(path)
    print("identical after round trip:", np.array_equal(back.vertices, mesh.vertices))
    print(path.read_text().splitlines()[:3])
