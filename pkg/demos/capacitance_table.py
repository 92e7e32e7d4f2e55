# # Capacitance of oblate spheroids
#
# The iteration starts from a uniform charge density, applies the
# normal-derivative operator of the Newton potential, and rescales the total
# charge after each step.  Each iterate yields a capacitance estimate; the
# first is a lower bound.

# %%
import time

from wsingular.capacitance import exact_capacitance, iterate_capacitance
from wsingular.mesh import Ellipsoid, Sphere, build_surface

# %%
print(f"{'c':>8} {'N':>6} {'exact':>10} {'C0':>10} {'C':>10} {'rel err':>8} {'iters':>5} {'time':>6}")
for c in (0.9, 0.5, 0.1, 0.01, 0.001):
    shape = Ellipsoid(1.0, 1.0, c)
    start = time.perf_counter()
    run = iterate_capacitance(build_surface(shape, 40, 30), stop_tol=1e-7)
    exact = exact_capacitance(shape)
    print(f"{c:8g} {run.N:6d} {exact:10.6f} {run.capacitances[0]:10.6f} {run.capacitance:10.6f} "
          f"{run.capacitance / exact - 1:+8.2%} {run.iterations:5d} {time.perf_counter() - start:5.1f}s")

# %% [markdown]
# On a sphere the uniform density is already the equilibrium density, so
# every iterate gives nearly the same value.

# %%
run = iterate_capacitance(build_surface(Sphere(1.0), 40, 30), max_iter=5, stop_tol=0.0)
print([round(c, 6) for c in run.capacitances], "exact", round(exact_capacitance(Sphere(1.0)), 6))
