"""Dummy regressions of the response on treatment level, and table output."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal

import numpy as np
from scipy import stats

from .baseline import BaselineFit, response_a1, response_a2
from .data import Panel
from .errors import EmptyCellError
from .propensity import PropensityFit
from .regress import ols_fit, wls_fit
from .treatment import CLASS_NAMES

VARIANTS = ("WLS_A2", "OLS_A2", "WLS_A1")
PARAMETERIZATIONS = ("reference_coded", "cell_means")
VARIANT_LABELS = {"WLS_A2": "WLS (A2)", "OLS_A2": "OLS (A2)", "WLS_A1": "WLS (A1)"}

JSON_SCHEMA = {
    "type": "object",
    "required": ["parameterization", "results"],
    "properties": {
        "parameterization": {"enum": list(PARAMETERIZATIONS)},
        "results": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["variant", "terms", "betas", "std_errors", "p_values", "stars",
                             "r_squared", "n"],
                "properties": {
                    "variant": {"enum": list(VARIANTS)},
                    "terms": {"type": "array", "items": {"type": "string"}},
                    "betas": {"type": "array", "items": {"type": "number"}},
                    "std_errors": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
                    "p_values": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}},
                    "stars": {"type": "array", "items": {"enum": ["", "*", "**", "***"]}},
                    "r_squared": {"type": "number"},
                    "n": {"type": "integer", "minimum": 1},
                },
            },
        },
    },
}


def stars(p: float) -> str:
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


@dataclass(frozen=True)
class EstimationResult:
    variant: str
    parameterization: str
    terms: tuple[str, ...]
    betas: np.ndarray
    std_errors: np.ndarray
    p_values: np.ndarray
    stars: tuple[str, ...]
    r_squared: float
    n: int

    def as_dict(self) -> dict:
        return {
            "variant": self.variant,
            "parameterization": self.parameterization,
            "terms": list(self.terms),
            "betas": [float(v) for v in self.betas],
            "std_errors": [float(v) for v in self.std_errors],
            "p_values": [float(v) for v in self.p_values],
            "stars": list(self.stars),
            "r_squared": float(self.r_squared),
            "n": int(self.n),
        }


def _terms(J, parameterization):
    names = list(CLASS_NAMES) if J == 4 else [f"Class {j}" for j in range(1, J + 1)]
    if parameterization == "reference_coded":
        names[0] = f"{names[0]} (Intercept)"
    return tuple(names)


def design_matrix(labels, n_classes: int, parameterization: str = "reference_coded") -> np.ndarray:
    """Exclusive dummies (cell means) or intercept plus dummies for classes 2..J."""
    if parameterization not in PARAMETERIZATIONS:
        raise ValueError(f"parameterization must be one of {PARAMETERIZATIONS}")
    D = (np.asarray(labels)[:, None] == np.arange(1, n_classes + 1)).astype(float)
    if parameterization == "cell_means":
        return D
    D[:, 0] = 1.0
    return D


def estimate(panel: Panel, baseline: BaselineFit | None, prop: PropensityFit, variant: str = "WLS_A2",
             parameterization: str = "reference_coded", robust: bool = False) -> EstimationResult:
    """Regress the response on treatment dummies.

    A2 variants use y_{t+1} - yhat_t, WLS_A1 uses y_{t+1} - y_t. WLS variants
    weight by ``prop.weights``; OLS_A2 is unweighted. p-values are two-sided
    from a t distribution with n - J degrees of freedom.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    assignment = prop.assignment
    J = assignment.n_classes
    if len(assignment.labels) != panel.n:
        raise ValueError("propensity fit and panel have different lengths")
    counts = assignment.counts
    if np.any(counts == 0):
        raise EmptyCellError(f"no observations in treatment class(es) {[int(j) + 1 for j in np.flatnonzero(counts == 0)]}")

    if variant == "WLS_A1":
        response = response_a1(panel)
    else:
        if baseline is None:
            raise ValueError(f"{variant} needs a baseline fit")
        response = response_a2(panel, baseline)

    X = design_matrix(assignment.labels, J, parameterization)
    if variant == "OLS_A2":
        fit = ols_fit(X, response, robust=robust)
    else:
        fit = wls_fit(X, response, prop.weights, robust=robust)

    se = fit.std_errors
    tstat = fit.coefficients / se
    p = 2 * stats.t.sf(np.abs(tstat), fit.dof)
    return EstimationResult(
        variant=variant,
        parameterization=parameterization,
        terms=_terms(J, parameterization),
        betas=fit.coefficients,
        std_errors=se,
        p_values=p,
        stars=tuple(stars(v) for v in p),
        r_squared=fit.r_squared,
        n=panel.n,
    )


def estimate_all(panel, baseline, prop, variants=VARIANTS, parameterization="reference_coded",
                 robust=False) -> list[EstimationResult]:
    return [estimate(panel, baseline, prop, v, parameterization, robust) for v in variants]


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def fmt4(x: float) -> str:
    """Four decimals, round-half-even on the shortest decimal repr of ``x``."""
    d = Decimal(repr(float(x))).quantize(Decimal("0.0001"), rounding=ROUND_HALF_EVEN)
    if d == 0:
        d = abs(d)
    return f"{d:.4f}"


def render_table(results, format: str = "text") -> str:
    results = list(results)
    if not results:
        raise ValueError("no results to render")
    params = {r.parameterization for r in results}
    if len(params) > 1:
        raise ValueError(f"mixed parameterizations: {sorted(params)}")
    if len({r.n for r in results}) > 1:
        raise ValueError("results have different numbers of observations")
    if format == "text":
        return _render_text(results)
    if format == "csv":
        return _render_csv(results)
    if format == "json":
        doc = {"parameterization": results[0].parameterization,
               "results": [r.as_dict() for r in results]}
        return json.dumps(doc, indent=2) + "\n"
    raise ValueError(f"unknown format {format!r}")


def _render_text(results):
    terms = results[0].terms
    label_w = max(len("Independent variable"), *(len(t) for t in terms), len("Number of observations"))
    col_w = 14
    header = "Independent variable".ljust(label_w) + "".join(
        VARIANT_LABELS[r.variant].rjust(col_w) for r in results)
    rule = "-" * len(header)
    lines = [rule, header, rule]
    for i, term in enumerate(terms):
        lines.append(term.ljust(label_w) + "".join(
            f"{fmt4(r.betas[i])} {r.stars[i]:<3}".rjust(col_w) for r in results))
        lines.append(" " * label_w + "".join(
            f"({fmt4(r.std_errors[i])})    ".rjust(col_w) for r in results))
    lines.append(rule)
    lines.append("Number of observations".ljust(label_w) + "".join(
        f"{r.n}    ".rjust(col_w) for r in results))
    lines.append("R^2".ljust(label_w) + "".join(f"{fmt4(r.r_squared)}    ".rjust(col_w) for r in results))
    lines.append(rule)
    lines.append("Standard errors in parentheses. *** p<0.001, ** p<0.01, * p<0.05.")
    return "\n".join(lines) + "\n"


def _render_csv(results):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["term"]
    for r in results:
        header += [f"{r.variant}_beta", f"{r.variant}_se", f"{r.variant}_p", f"{r.variant}_stars"]
    writer.writerow(header)
    for i, term in enumerate(results[0].terms):
        row = [term]
        for r in results:
            row += [repr(float(r.betas[i])), repr(float(r.std_errors[i])),
                    repr(float(r.p_values[i])), r.stars[i]]
        writer.writerow(row)
    writer.writerow(["n"] + sum(([str(r.n), "", "", ""] for r in results), []))
    writer.writerow(["r_squared"] + sum(([repr(float(r.r_squared)), "", "", ""] for r in results), []))
    return buf.getvalue()
