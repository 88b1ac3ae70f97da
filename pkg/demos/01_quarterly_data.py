"""
Loading quarterly macro data
============================

The bundled CSV covers 1992Q1 to 2019Q4. Loading checks that quarters are
consecutive and every value is finite; transforms are small expressions
such as ``diff(log(rgdp))``.
"""

from fiscalipw import assemble_panel, fixture_path, load_csv, transform

table = load_csv(fixture_path())
print(len(table.dates), "quarters,", table.dates[0], "to", table.dates[-1])

# Derived columns are added and the leading quarter, where a difference is
# undefined, is trimmed.
derived = transform(table, ["diff(log(rgdp))", "diff(log(gov_spend))", "lag(ted)"])
print("after transform:", derived.dates[0], "to", derived.dates[-1])
for name in derived.names:
    values = derived[name]
    print(f"  {name:<22} mean {values.mean(): .5f}  sd {values.std(ddof=1):.5f}")

# The estimation panel drops quarters lacking a lag or the one-quarter lead.
panel = assemble_panel(table)
print("panel rows:", panel.n)
print("covariates x_{t-1}:", panel.x_names)
print("forecaster inputs z_{t-1}:", panel.z_names)
