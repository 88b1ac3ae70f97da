"""Generalized propensity score and inverse probability weights."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import EmptyCellError
from .regress import MnlFit, mnl_fit, mnl_predict, require_converged
from .treatment import TreatmentAssignment

DEFAULT_E_MIN = 0.01


@dataclass(frozen=True)
class PropensityFit:
    model: MnlFit | None
    raw_probs: np.ndarray
    probs: np.ndarray
    e_min: float
    clipped_count: int
    weights: np.ndarray
    assignment: TreatmentAssignment


def clip_probs(probs, e_min: float) -> tuple[np.ndarray, int]:
    """Raise entries below ``e_min`` to the floor and rescale the rest of the row.

    Rescaling can push another entry under the floor, so the loop repeats
    until every entry is at least ``e_min``. Rows with nothing to clip are
    returned untouched, which makes the operation idempotent.
    Returns the clipped matrix and the number of entries held at the floor.
    """
    P = np.array(probs, dtype=float)
    J = P.shape[1]
    if not 0 < e_min < 1 / J:
        raise ValueError(f"e_min must lie in (0, 1/J) = (0, {1 / J:.4g}), got {e_min}")
    count = 0
    for i in np.flatnonzero((P < e_min).any(axis=1)):
        row = P[i]
        fixed = row < e_min
        while True:
            free = ~fixed
            scaled = row[free] * (1 - e_min * fixed.sum()) / row[free].sum()
            low = scaled < e_min
            if not low.any():
                break
            idx = np.flatnonzero(free)[low]
            fixed[idx] = True
        out = np.full(J, e_min)
        out[free] = scaled
        P[i] = out
        count += int(fixed.sum())
    return P, count


def propensity_from_probs(raw_probs, assignment: TreatmentAssignment, e_min: float = DEFAULT_E_MIN,
                          model: MnlFit | None = None) -> PropensityFit:
    """Build weights from a given probability matrix (fitted or known)."""
    raw = np.asarray(raw_probs, dtype=float)
    if raw.shape != (len(assignment.labels), assignment.n_classes):
        raise ValueError(f"probabilities have shape {raw.shape}, expected "
                         f"({len(assignment.labels)}, {assignment.n_classes})")
    probs, clipped = clip_probs(raw, e_min)
    own = probs[np.arange(len(assignment.labels)), assignment.labels - 1]
    return PropensityFit(model, raw, probs, e_min, clipped, 1.0 / own, assignment)


def fit_gps(x_lagged, assignment: TreatmentAssignment, e_min: float = DEFAULT_E_MIN) -> PropensityFit:
    """Multinomial logit of the treatment level on (1, x_{t-1}), then clipped IPW weights."""
    J = assignment.n_classes
    if not 0 < e_min < 1 / J:
        raise ValueError(f"e_min must lie in (0, 1/J) = (0, {1 / J:.4g}), got {e_min}")
    counts = assignment.counts
    if np.any(counts == 0):
        empty = [int(j) + 1 for j in np.flatnonzero(counts == 0)]
        raise EmptyCellError(f"no observations in treatment class(es) {empty}")
    model = require_converged(mnl_fit(x_lagged, assignment.labels, J))
    return propensity_from_probs(mnl_predict(model, x_lagged), assignment, e_min, model)


@dataclass(frozen=True)
class OverlapReport:
    min_prob: tuple[float, ...]
    below_floor: int
    clipped_count: int
    max_weight: float
    e_min: float
    violation: bool

    def as_dict(self) -> dict:
        return {
            "e_min": self.e_min,
            "violation": self.violation,
            "below_floor": self.below_floor,
            "clipped_count": self.clipped_count,
            "max_weight": self.max_weight,
            "min_prob": list(self.min_prob),
        }

    def to_text(self) -> str:
        lines = [f"no-empty-cell check (e_min = {self.e_min:g}): "
                 + ("VIOLATED" if self.violation else "ok")]
        for j, p in enumerate(self.min_prob, start=1):
            lines.append(f"  class {j}: min fitted probability {p:.4f}")
        lines.append(f"  entries below floor: {self.below_floor} (clipped {self.clipped_count})")
        lines.append(f"  max weight: {self.max_weight:.4f}")
        return "\n".join(lines)

    def to_keyvalue(self) -> str:
        items = {k: v for k, v in self.as_dict().items() if k != "min_prob"}
        lines = [f"{k}={json.dumps(v)}" for k, v in items.items()]
        lines += [f"min_prob_{j}={p!r}" for j, p in enumerate(self.min_prob, start=1)]
        return "\n".join(lines)


def check_no_empty_cell(fit: PropensityFit, e_min: float | None = None) -> OverlapReport:
    """Overlap diagnostics on the pre-clip probabilities. Never raises."""
    floor = fit.e_min if e_min is None else e_min
    raw = fit.raw_probs
    below = int((raw < floor).sum())
    return OverlapReport(
        min_prob=tuple(float(v) for v in raw.min(axis=0)),
        below_floor=below,
        clipped_count=fit.clipped_count,
        max_weight=float(fit.weights.max()),
        e_min=floor,
        violation=below > 0,
    )
