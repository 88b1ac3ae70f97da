"""Counterfactual output baseline: projection of y_t on the lagged macro vector.

The forecaster only ever sees ``panel.z`` (dated t-1) and ``panel.y``; it
never reads the policy growth or the treatment labels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Panel
from .errors import InsufficientRowsError
from .regress import FitResult, ols_fit

FIRST_WINDOW = 20
MODES = ("full_sample", "expanding")


@dataclass(frozen=True)
class BaselineFit:
    projection: FitResult
    fitted: np.ndarray
    in_sample: bool
    mode: str


def _design(z):
    return np.column_stack([np.ones(z.shape[0]), z])


def fit_baseline(panel: Panel, mode: str = "full_sample", first_window: int = FIRST_WINDOW) -> BaselineFit:
    """Fit y_t on (1, z_{t-1}).

    ``full_sample`` returns in-sample fitted values from one regression.
    ``expanding`` forecasts row i from a fit on rows ``0..i-1``; the first
    ``first_window`` rows get in-sample values from the first window.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if panel.n == 0:
        raise InsufficientRowsError("empty panel")
    Z = _design(panel.z)
    if mode == "full_sample":
        fit = ols_fit(Z, panel.y)
        return BaselineFit(fit, fit.fitted.copy(), True, mode)

    if panel.n <= first_window or first_window <= Z.shape[1]:
        raise InsufficientRowsError(
            f"expanding baseline needs more than {first_window} rows and a first window "
            f"larger than {Z.shape[1]} parameters (panel has {panel.n})")
    fitted = np.empty(panel.n)
    fit = ols_fit(Z[:first_window], panel.y[:first_window])
    fitted[:first_window] = fit.fitted
    for i in range(first_window, panel.n):
        fit = ols_fit(Z[:i], panel.y[:i])
        fitted[i] = Z[i] @ fit.coefficients
    return BaselineFit(fit, fitted, False, mode)


def response_a2(panel: Panel, fit: BaselineFit) -> np.ndarray:
    """y_{t+1} - yhat_t: one-quarter improvement over the baseline."""
    if len(fit.fitted) != panel.n:
        raise ValueError("baseline was fitted on a different panel")
    return panel.y_next - fit.fitted


def response_a1(panel: Panel) -> np.ndarray:
    """y_{t+1} - y_t: realised one-quarter growth."""
    return panel.y_next - panel.y
