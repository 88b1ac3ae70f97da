"""
Generalized propensity scores
=============================

A multinomial logit of the treatment level on lagged covariates gives each
quarter a probability for every level. Probabilities below the floor are
raised to it and the rest of the row is rescaled; the weight of a quarter
is one over the probability of the level it actually received.
"""

import numpy as np

from fiscalipw import assemble_panel, check_no_empty_cell, classify, fit_gps, fixture_path, load_csv

panel = assemble_panel(load_csv(fixture_path()))
assignment = classify(panel.g)
prop = fit_gps(panel.x, assignment, e_min=0.01)

print(f"Newton iterations: {prop.model.iterations}, log-likelihood {prop.model.log_likelihood:.3f}")
print("coefficients (rows: levels 2..4, columns: intercept, x):")
print(np.round(prop.model.coefficients, 3))

report = check_no_empty_cell(prop)
print(report.to_text())

# With an intercept in the logit, fitted probabilities add up to the class counts.
print("sum of fitted probs:", prop.raw_probs.sum(axis=0).round(6))
print("class counts:       ", assignment.counts)

# A stricter floor clips more and caps weights lower.
for e_min in (0.01, 0.05, 0.1):
    p = fit_gps(panel.x, assignment, e_min)
    print(f"e_min {e_min:<5} clipped {p.clipped_count:3d}  max weight {p.weights.max():7.2f}")
