"""Multi-category fiscal policy treatment effects by inverse probability weighting."""

from .baseline import BaselineFit, fit_baseline, response_a1, response_a2
from .config import RunConfig, fixture_path
from .data import MacroTable, Panel, PanelConfig, assemble_panel, load_csv, transform, write_csv
from .effects import EstimationResult, estimate, estimate_all, render_table, stars
from .mc import DgpSpec, McReport, run_experiment, simulate_dgp, true_effects
from .propensity import PropensityFit, check_no_empty_cell, fit_gps
from .regress import FitResult, MnlFit, mnl_fit, mnl_predict, ols_fit, wls_fit
from .treatment import CLASS_NAMES, TreatmentAssignment, classify, dummies

__version__ = "0.1.0"
