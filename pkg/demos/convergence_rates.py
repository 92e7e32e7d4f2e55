# # Empirical convergence orders
#
# The sup error over a fixed sample of singularity locations is measured
# against the same rule on a much finer grid, and the order is the slope of
# log error against log n.

# %%
from wsingular.analysis import make_holder, measure_rate

# %% [markdown]
# A single cusp |x|^alpha is smoother than the worst function of its Hölder
# class, and the rules converge at about 1 + alpha.

# %%
for kind in ("periodic", "planar"):
    r = measure_rate(kind, make_holder(kind, 0.5), seed=1, n_targets=8)
    print(kind, "cusp", [f"{e:.2e}" for e in r.errors], f"order {r.order:.2f}")

# %% [markdown]
# Lacunary cosine series are rough at every scale.  Their terms alias exactly
# on dyadic grids, which exposes the worst-case rate n^(-alpha).

# %%
for alpha in (0.3, 0.5, 0.8):
    f = make_holder("lacunary", alpha, {"domain": "periodic"})
    r = measure_rate("periodic", f, seed=1, n_targets=8)
    print(f"alpha={alpha}: order {r.order:.2f}")
