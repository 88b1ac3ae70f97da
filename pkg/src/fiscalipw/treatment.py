"""Four-level classification of policy growth and indicator regressors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CLASS_NAMES = (
    "Large fiscal contraction",
    "Small fiscal contraction",
    "Small fiscal expansion",
    "Large fiscal expansion",
)


@dataclass(frozen=True)
class TreatmentAssignment:
    labels: np.ndarray
    sigma: float | None
    thresholds: tuple[float, ...]
    n_classes: int = 4

    @property
    def dummies(self) -> np.ndarray:
        return dummies(self)

    @property
    def counts(self) -> np.ndarray:
        return np.bincount(self.labels - 1, minlength=self.n_classes)

    @classmethod
    def from_labels(cls, labels, n_classes: int) -> "TreatmentAssignment":
        """Assignment with externally given labels (no growth-rate thresholds)."""
        labels = np.asarray(labels, dtype=int)
        if labels.size and (labels.min() < 1 or labels.max() > n_classes):
            raise ValueError(f"labels must lie in 1..{n_classes}")
        return cls(labels, None, (), n_classes)


def classify(g, sigma: float | None = None) -> TreatmentAssignment:
    """Bin growth rates at (-sigma, 0, sigma).

    Class 1 is ``g <= -sigma``, class 2 ``-sigma < g <= 0``, class 3
    ``0 < g <= sigma`` and class 4 ``g > sigma``. ``sigma`` defaults to the
    sample standard deviation of ``g`` (divisor n-1); pass it explicitly to
    test the interval logic alone.
    """
    g = np.asarray(g, dtype=float)
    if g.ndim != 1:
        raise ValueError("g must be one-dimensional")
    if not np.all(np.isfinite(g)):
        raise ValueError("g contains non-finite values")
    if sigma is None:
        if g.size < 2:
            raise ValueError("need at least two growth rates to estimate sigma")
        sigma = float(np.std(g, ddof=1))
        if sigma == 0:
            raise ValueError("growth rates have zero variance; bins are degenerate")
    elif not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    labels = np.select([g <= -sigma, g <= 0, g <= sigma], [1, 2, 3], default=4)
    return TreatmentAssignment(labels.astype(int), sigma, (-sigma, 0.0, sigma), 4)


def dummies(assignment: TreatmentAssignment) -> np.ndarray:
    """n x J indicator matrix; column j is 1 where the label is j + 1."""
    return (assignment.labels[:, None] == np.arange(1, assignment.n_classes + 1)).astype(float)
