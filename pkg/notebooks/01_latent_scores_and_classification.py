"""Fit latent gene/environment scores and classify the interaction pattern."""

import numpy as np

from legitgxe import GxEDataset, classify, crossover_interval, fit_competitive_set, fit_legit

#%%
# Four genetic variants and three environmental measures.  The true scores
# weight the variables unequally; the outcome follows a differential
# susceptibility pattern with the crossover at e = .5.
rng = np.random.default_rng(1)
n = 1500
G = rng.binomial(1, 0.3, size=(n, 4)).astype(float)
E = rng.beta(2, 2, size=(n, 3))
p = np.array([0.4, 0.3, -0.2, 0.1])
q = np.array([0.5, 0.3, 0.2])
g, e = G @ p, E @ q
y = 3 + (e - 0.5) + 4 * (e - 0.5) * g + rng.normal(scale=0.4, size=n)
data = GxEDataset(y, G, E)

#%%
# Standard parametrization: y = b0 + be e + bg g + beg e g
model = fit_legit(data)
print("iterations:", model.iterations_used, "converged:", model.converged)
print("p =", np.round(model.gene_weights, 3), " q =", np.round(model.env_weights, 3))
print("R2 trace:", np.round(model.r2_trace, 5))

#%%
# The same model written around its crossover point.
free = fit_legit(data, "free")
print("crossover %.3f, 95%% CI (%.3f, %.3f)" % (free.crossover, *crossover_interval(free)))
print("implied by standard form: %.3f" % (-model.beta_g / model.beta_eg))

#%%
# Let the six pattern models compete against four models without interaction.
# The environments live on [0, 1], so those are the expected bounds.
models = fit_competitive_set(data, env_min=0.0, env_max=1.0)
result = classify(models, data)
print(result.format_table())
print()
print("label:", result.label, "(%s)" % result.strength)
print("proportion affected: %.3f" % result.proportion_affected)
