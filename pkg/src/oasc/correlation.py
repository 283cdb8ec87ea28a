"""Co-activation accumulator Q and the uncentered correlation matrix R."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import EmptyAccumulatorError, ValidationError

# samples whose normalizer falls below this are skipped
UNDERFLOW_FLOOR = 1e-300


def parse_norm_mode(text):
    """Parse ``"none"``, ``"inf"`` or a positive number into a norm mode."""
    if text is None:
        return None
    if isinstance(text, (int, float)):
        value = float(text)
    else:
        t = str(text).strip().lower()
        if t in ("none", "no", "off"):
            return None
        if t in ("inf", "infinity", "max"):
            return math.inf
        if "/" in t:
            num, den = t.split("/", 1)
            value = float(num) / float(den)
        else:
            value = float(t)
    if not value > 0:
        raise ValidationError(f"norm mode must be positive, inf or none, got {text!r}")
    return value


def format_norm_mode(p):
    if p is None:
        return "none"
    if math.isinf(p):
        return "inf"
    return repr(float(p))


def normalizer(f, p) -> float:
    """Squared p-norm of the activation vector (1 when ``p`` is None).

    Finite ``p < 1`` uses the same formula, i.e. the quasi-norm.
    """
    f = np.asarray(f, dtype=np.float64)
    if p is None:
        return 1.0
    if math.isinf(p):
        m = float(f.max()) if f.size else 0.0
        return m * m
    norm = float(np.sum(f**p)) ** (1.0 / p)
    return norm * norm


@dataclass
class CorrelationAccumulator:
    K: int
    p: float | None = math.inf
    Q: np.ndarray = field(default=None, repr=False)
    samples_seen: int = 0
    skipped: int = 0

    def __post_init__(self):
        if self.Q is None:
            self.Q = np.zeros((self.K, self.K))
        else:
            self.Q = np.array(self.Q, dtype=np.float64)
            if self.Q.shape != (self.K, self.K):
                raise ValidationError(f"Q must be {self.K}×{self.K}")

    def accumulate(self, f):
        """Add the normalized outer product of ``f``; skip degenerate samples."""
        f = np.asarray(f, dtype=np.float64)
        if f.shape != (self.K,):
            raise ValidationError(f"expected {self.K} activations, got shape {f.shape}")
        z = normalizer(f, self.p)
        if not z >= UNDERFLOW_FLOOR:
            self.skipped += 1
            return self
        self.Q += np.outer(f, f) / z
        self.samples_seen += 1
        return self

    def reset(self):
        self.Q[:] = 0.0
        self.samples_seen = 0
        self.skipped = 0

    def copy(self):
        return CorrelationAccumulator(self.K, self.p, self.Q.copy(), self.samples_seen, self.skipped)


def accumulate(acc: CorrelationAccumulator, f) -> CorrelationAccumulator:
    return acc.accumulate(f)


@dataclass
class CorrelationMatrix:
    R: np.ndarray
    dead_mask: np.ndarray

    @property
    def K(self):
        return self.R.shape[0]


def correlation_from_q(Q) -> CorrelationMatrix:
    """R = Q_kl / (sqrt(Q_kk) sqrt(Q_ll)); zero-diagonal Gaussians are flagged dead."""
    Q = np.asarray(Q, dtype=np.float64)
    diag = np.diag(Q).copy()
    dead = diag <= 0.0
    if dead.all():
        raise EmptyAccumulatorError()
    root = np.sqrt(np.where(dead, 1.0, diag))
    R = Q / np.outer(root, root)
    R[dead, :] = 0.0
    R[:, dead] = 0.0
    np.fill_diagonal(R, 1.0)
    return CorrelationMatrix(R, dead)


def correlation_matrix(acc: CorrelationAccumulator) -> CorrelationMatrix:
    if acc.samples_seen < 1:
        raise EmptyAccumulatorError()
    return correlation_from_q(acc.Q)


def write_matrix_csv(matrix, path):
    """Row-major, headerless CSV with round-trip float precision."""
    np.savetxt(path, np.asarray(matrix, dtype=np.float64), delimiter=",", fmt="%.17g")


def read_matrix_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)
