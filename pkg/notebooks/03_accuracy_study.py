"""A small Monte Carlo accuracy study of both classification approaches."""

from legitgxe import Scenario, run_study
from legitgxe.simulation import NULL_MODEL

#%%
# One gene and one environment, Beta(2, 2) environment, crossover at .5.
cells = [Scenario(1, 1, n, 2.0, 0.5, "large") for n in (250, 1000)]
tables = run_study(cells, replicates=10, seed=1)
for t in tables:
    print(f"N={t.scenario.sample_size:5d} {t.method:12s} accuracy {t.accuracy:.2f}  "
          f"false positives {t.false_positive_rate:.2f}")

#%%
# Confusion counts: rows are the true pattern, columns the assigned one.
t = tables[0]
codes = ("vs", "ds", "dst", "none", "error")
print("true\\pred " + " ".join(f"{c:>5s}" for c in codes))
for truth in ("vs", "ds", "dst", "none"):
    print(f"{truth:9s} " + " ".join(f"{t.count(truth, c):5d}" for c in codes))

#%%
# False positives only: data without any interaction, four genes and three
# environments.  The competitive approach should almost never bite.
null = Scenario(4, 3, 500, effect_size="medium", generative_model=NULL_MODEL)
for t in run_study([null], replicates=20, seed=2):
    print(f"{t.method:12s} false positive rate {t.false_positive_rate:.2f}")
