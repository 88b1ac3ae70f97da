"""
The treatment-effect table
==========================

Three regressions of the response on treatment dummies: weighted with the
forecast-based response, unweighted with the same response, and weighted
with plain output growth. Both dummy codings are shown; they carry the
same information.
"""

from fiscalipw import (assemble_panel, classify, estimate_all, fit_baseline, fit_gps, fixture_path,
                       load_csv, render_table)

panel = assemble_panel(load_csv(fixture_path()))
assignment = classify(panel.g)
baseline = fit_baseline(panel)
prop = fit_gps(panel.x, assignment)

reference = estimate_all(panel, baseline, prop)
print(render_table(reference, "text"))

cells = estimate_all(panel, baseline, prop, parameterization="cell_means")
print(render_table(cells, "text"))

# Intercept plus offset equals the cell mean.
ref, cell = reference[0], cells[0]
print("offset check:", [float(ref.betas[0] + (ref.betas[j] if j else 0) - cell.betas[j]) for j in range(4)])

print(render_table(reference[:1], "csv"))
