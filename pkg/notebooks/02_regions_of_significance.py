"""Johnson-Neyman regions of significance for a single gene and environment."""

import numpy as np

from legitgxe import GxEDataset, fit_legit, regions_of_significance, simple_slope

#%%
rng = np.random.default_rng(2)
n = 800
g = rng.binomial(1, 0.3, n).astype(float)
e = rng.beta(2, 2, n)
y = 3 + (e - 0.6) + 2 * (e - 0.6) * g + rng.normal(scale=0.6, size=n)
model = fit_legit(GxEDataset(y, g, e))

#%%
# Simple slope of the gene at a few environment values
for value in (0.0, 0.25, 0.5, 0.75, 1.0):
    s = simple_slope(model, value)
    print(f"e = {value:4.2f}: slope {s.slope:+.3f}  t {s.t_stat:+.2f}")

#%%
ros = regions_of_significance(model, e[:, None])
print(f"L = {ros.lower:.3f}, U = {ros.upper:.3f} on observed range "
      f"({ros.observable_range[0]:.3f}, {ros.observable_range[1]:.3f})")
print("label:", ros.label)

#%%
# A stricter alpha widens the band where the slopes do not differ.
for alpha in (0.05, 0.01, 1e-4):
    r = regions_of_significance(model, e[:, None], alpha=alpha)
    print(f"alpha {alpha:g}: ({r.lower}, {r.upper}) -> {r.label}")
