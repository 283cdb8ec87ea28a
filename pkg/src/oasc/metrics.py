"""Agreement between found clusters and ground truth."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from sklearn.metrics import adjusted_rand_score

from .exceptions import ValidationError

DEFAULT_MIN_ARI = 0.9


@dataclass
class EvalReport:
    """``L_found`` counts clusters owning at least one evaluated point.

    ``L_truth`` is None and ``ari`` is None for data without ground truth.
    """

    L_found: int
    L_truth: int | None
    ari: float | None
    n_points: int
    skipped_samples: int = 0

    def to_dict(self):
        return asdict(self)


def adjusted_rand_index(pred, truth) -> float:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise ValidationError("label sequences must be 1-D and of equal length")
    if len(pred) < 2:
        raise ValidationError("need at least two labeled points")
    return float(adjusted_rand_score(truth, pred))


def evaluate(pred, truth=None, skipped_samples=0) -> EvalReport:
    pred = np.asarray(pred)
    L_found = len(np.unique(pred))
    if truth is None:
        return EvalReport(L_found, None, None, len(pred), skipped_samples)
    truth = np.asarray(truth)
    return EvalReport(L_found, len(np.unique(truth)), adjusted_rand_index(pred, truth),
                      len(pred), skipped_samples)


def success(report: EvalReport, min_ari: float = DEFAULT_MIN_ARI) -> bool:
    """Correct cluster count and ARI at least ``min_ari``.

    Without ground truth a single cluster counts as success.
    """
    if report.L_truth is None:
        return report.L_found == 1
    return report.L_found == report.L_truth and report.ari >= min_ari
