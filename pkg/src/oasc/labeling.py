"""Cluster labels from thresholded correlations, and point labeling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ValidationError


@dataclass(frozen=True)
class LabelAssignment:
    """Per-Gaussian labels in 1..L (label ``m`` first appears before ``m + 1``)."""

    y: np.ndarray
    L: int
    tau: float


def default_tau() -> float:
    return 1 / 9


def _check_tau(tau):
    if not (0 < tau <= 1):
        raise ValidationError(f"tau must lie in (0, 1], got {tau!r}")


def assign_labels(R, tau: float) -> LabelAssignment:
    """Flood-fill over the graph with an edge wherever R[k, l] > tau.

    Equivalent to the recursive formulation: an unassigned Gaussian opens a
    new label in index order and every Gaussian reachable from it through
    above-threshold correlations takes that label. An explicit stack
    replaces the recursion.

    ``R`` may be a :class:`~oasc.correlation.CorrelationMatrix` or a plain
    K×K array.
    """
    _check_tau(tau)
    R = np.asarray(getattr(R, "R", R), dtype=np.float64)
    K = R.shape[0]
    if R.shape != (K, K):
        raise ValidationError("R must be square")
    adjacent = R > tau
    y = np.zeros(K, dtype=np.int64)
    L = 0
    for k in range(K):
        if y[k]:
            continue
        L += 1
        y[k] = L
        stack = [k]
        while stack:
            i = stack.pop()
            for j in np.flatnonzero(adjacent[i] & (y == 0)):
                y[j] = L
                stack.append(j)
    return LabelAssignment(y, L, float(tau))


def nearest_center(centers, X) -> np.ndarray:
    """Index of the closest center for each row of X (ties → smallest index)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    diff = X[:, None, :] - centers[None, :, :]
    return np.argmin(np.einsum("nkd,nkd->nk", diff, diff), axis=1)


def label_points(bank, assignment: LabelAssignment, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != bank.D:
        raise ValidationError(f"expected points of dimension {bank.D}, got {X.shape[1]}")
    if len(assignment.y) != bank.K:
        raise ValidationError("assignment does not match the bank")
    return assignment.y[nearest_center(bank.centers, X)]


def label_point(bank, assignment: LabelAssignment, x) -> int:
    """Label of the Gaussian whose center is nearest to ``x``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (bank.D,):
        raise ValidationError(f"expected a point of dimension {bank.D}, got shape {x.shape}")
    return int(label_points(bank, assignment, x[None, :])[0])
