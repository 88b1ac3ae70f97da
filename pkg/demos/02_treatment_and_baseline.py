"""
Treatment levels and the forecast baseline
==========================================

Spending growth is binned at minus one standard deviation, zero, and plus
one standard deviation. The baseline forecasts log output from last
quarter's macro vector only, so it cannot contain this quarter's spending.
"""

import numpy as np

from fiscalipw import CLASS_NAMES, assemble_panel, classify, fit_baseline, fixture_path, load_csv
from fiscalipw.baseline import response_a1, response_a2

panel = assemble_panel(load_csv(fixture_path()))
assignment = classify(panel.g)
print(f"sigma of spending growth: {assignment.sigma:.5f}")
for name, count in zip(CLASS_NAMES, assignment.counts):
    print(f"  {name:<26} {count:3d} quarters")

full = fit_baseline(panel)
expanding = fit_baseline(panel, "expanding")
print("in-sample baseline R^2:", round(full.projection.r_squared, 4))

# The two dependent variables: improvement over the forecast, and plain growth.
# In-sample residuals average to zero, so the overall means coincide; they
# differ class by class.
a2 = response_a2(panel, full)
a1 = response_a1(panel)
print("mean A2 response:", a2.mean().round(5), " mean A1 response:", a1.mean().round(5))

# Shuffling spending growth leaves the baseline untouched.
shuffled = panel.replace(g=np.random.default_rng(0).permutation(panel.g))
print("baseline unchanged after shuffling g:",
      np.array_equal(fit_baseline(shuffled).fitted, full.fitted),
      np.array_equal(fit_baseline(shuffled, "expanding").fitted, expanding.fitted))
