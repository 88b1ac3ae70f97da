"""Synthetic US-like quarterly dataset, 1992Q1-2019Q4.

Stands in for the public series (real GDP, real government spending, TED
spread, a commodity price index, the unemployment rate) when those cannot
be downloaded. The generator is a small structural simulation:

* spending growth leans against lagged output growth and rising unemployment,
  so treatment assignment is confounded by the lagged covariates;
* output growth is persistent, includes the government share of current
  spending growth, a lagged spending effect, commodity and funding-stress
  drags, and a 2008-09 recession shock;
* unemployment follows Okun's law in logs; the TED spread is mean reverting
  with a 2007-08 stress episode.

Values are rounded to the precision statistical agencies publish.
"""

from __future__ import annotations

import numpy as np
import pandas as pd

from .data import MacroTable, write_csv

START, END = "1992Q1", "2019Q4"
SEED = 1992
_BURN_IN = 40


def generate(seed: int = SEED) -> MacroTable:
    rng = np.random.default_rng(seed)
    dates = pd.period_range(START, END, freq="Q")
    total = len(dates) + _BURN_IN
    crisis = {str(p): i + _BURN_IN for i, p in enumerate(dates)}
    recession = {crisis[q]: s for q, s in
                 (("2008Q3", -0.012), ("2008Q4", -0.020), ("2009Q1", -0.012), ("2009Q2", -0.003))}
    stress = {crisis[q] for q in ("2007Q3", "2007Q4", "2008Q1", "2008Q2", "2008Q3", "2008Q4")}

    dy = np.full(total, 0.006)
    g = np.full(total, 0.004)
    lu = np.full(total, np.log(5.5))
    ted = np.full(total, 0.35)
    dlc = np.zeros(total)
    for t in range(1, total):
        dlu_prev = lu[t - 1] - lu[t - 2] if t > 1 else 0.0
        g[t] = (0.004 + 0.3 * (g[t - 1] - 0.004) - 0.35 * (dy[t - 1] - 0.006)
                + 0.04 * dlu_prev + 0.007 * rng.standard_normal())
        ted[t] = 0.35 + 0.75 * (ted[t - 1] - 0.35) + 0.08 * rng.standard_normal()
        if t in stress:
            ted[t] += 0.6
        ted[t] = max(ted[t], 0.05)
        dlc[t] = 0.006 + 0.4 * (dy[t - 1] - 0.006) + 0.05 * rng.standard_normal()
        dy[t] = (0.006 + 0.3 * (dy[t - 1] - 0.006) + 0.17 * (g[t] - 0.004)
                 + 0.15 * (g[t - 1] - 0.004) - 0.02 * dlc[t - 1] - 0.004 * (ted[t - 1] - 0.35)
                 + recession.get(t, 0.0) + 0.005 * rng.standard_normal())
        lu[t] = (lu[t - 1] - 5.0 * (dy[t] - 0.006) - 0.03 * (lu[t - 1] - np.log(5.5))
                 + 0.03 * rng.standard_normal())

    keep = slice(_BURN_IN, total)
    # Spending and output levels anchored at plausible 1992Q1 values.
    rgdp = 10000.0 * np.exp(np.cumsum(dy[keep]) - dy[keep][0])
    gov = 2900.0 * np.exp(np.cumsum(g[keep]) - g[keep][0])
    unemp = np.exp(lu[keep])
    commodity = 100.0 * np.exp(np.cumsum(dlc[keep]) - dlc[keep][0])
    return MacroTable(dates, {
        "rgdp": np.round(rgdp, 1),
        "gov_spend": np.round(gov, 1),
        "ted": np.round(ted[keep], 2),
        "commodity": np.round(commodity, 2),
        "unemp": np.round(unemp, 1),
    })


def write_fixture(path, seed: int = SEED) -> MacroTable:
    table = generate(seed)
    write_csv(table, path)
    return table
