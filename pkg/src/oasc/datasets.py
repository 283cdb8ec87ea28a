"""Toy datasets of the scikit-learn clustering comparison, plus CSV I/O.

Cluster layouts are fixed to the comparison's choices; the seed only drives
sampling. Points are optionally standardized per coordinate, then scaled.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple

import numpy as np
from sklearn import datasets as skd

from .exceptions import ValidationError

KINDS = ("circles", "moons", "blobs", "aniso", "varied", "none", "csv")

# comparison-suite centers: make_blobs(random_state=8) and make_blobs(random_state=170)
BLOB_CENTERS = np.array([
    [7.4685880558363245, 9.37081325641864],
    [7.383890804278398, 0.617113831111979],
    [-5.345433440454186, -9.772023914451403],
])
SKEWED_CENTERS = np.array([
    [-8.947091648044037, -5.462764348304834],
    [-4.5893898890314855, 0.08876178234712206],
    [1.938754323521918, 0.5051361256709956],
])
ANISO_SHEAR = np.array([[0.6, -0.6], [-0.4, 0.8]])
VARIED_STDS = (1.0, 2.5, 0.5)

# scale factors of the reference figures, keyed by kind in comparison order
PAPER_SCALES = {
    "circles": 11 / 10,
    "moons": 1.0,
    "varied": 1 / 4,
    "aniso": 1 / 2,
    "blobs": 1 / 8,
    "none": 2.0,
}


class LabeledPoint(NamedTuple):
    x: np.ndarray
    truth: int | None


@dataclass
class Dataset:
    name: str
    X: np.ndarray
    truth: np.ndarray | None = None

    def __post_init__(self):
        self.X = np.array(self.X, dtype=np.float64, ndmin=2)
        if not np.all(np.isfinite(self.X)):
            raise ValidationError("dataset coordinates must be finite")
        if self.truth is not None:
            self.truth = np.asarray(self.truth, dtype=np.int64)
            if self.truth.shape != (len(self.X),):
                raise ValidationError("truth labels must match the number of points")

    def __len__(self):
        return len(self.X)

    def __iter__(self) -> Iterator[LabeledPoint]:
        for i, x in enumerate(self.X):
            yield LabeledPoint(x, None if self.truth is None else int(self.truth[i]))

    @property
    def D(self):
        return self.X.shape[1]

    @property
    def n_truth(self):
        return None if self.truth is None else len(np.unique(self.truth))


@dataclass
class DatasetSpec:
    kind: str = "moons"
    n_points: int = 1500
    noise: float = 0.05
    scale: float = 1.0
    seed: int = 0
    standardize: bool = False
    path: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown dataset kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "csv" and not self.path:
            raise ValidationError("kind 'csv' needs a path")
        if int(self.n_points) != self.n_points or self.n_points < 1:
            raise ValidationError(f"n_points must be a positive integer, got {self.n_points!r}")
        if not (self.noise >= 0):
            raise ValidationError(f"noise must be nonnegative, got {self.noise!r}")
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise ValidationError(f"scale must be positive, got {self.scale!r}")
        if int(self.seed) != self.seed or not (0 <= self.seed < 2**64):
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")


def parse_scale(text, kind=None) -> float:
    """Accept ``1.5``, ``"11/10"`` or ``"paper"`` (the kind's reference factor)."""
    if isinstance(text, (int, float)):
        return float(text)
    t = str(text).strip().lower()
    if t == "paper":
        if kind not in PAPER_SCALES:
            raise ValidationError(f"no reference scale for kind {kind!r}")
        return PAPER_SCALES[kind]
    try:
        return float(Fraction(t))
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"invalid scale {text!r}") from None


def _random_state(seed):
    return np.random.RandomState(np.random.MT19937(np.random.SeedSequence(int(seed))))


def _raw(kind, n, noise, rs):
    if kind == "circles":
        return skd.make_circles(n, factor=0.5, noise=noise, random_state=rs)
    if kind == "moons":
        return skd.make_moons(n, noise=noise, random_state=rs)
    if kind == "blobs":
        return skd.make_blobs(n, centers=BLOB_CENTERS, random_state=rs)
    if kind == "aniso":
        X, y = skd.make_blobs(n, centers=SKEWED_CENTERS, random_state=rs)
        return X @ ANISO_SHEAR, y
    if kind == "varied":
        return skd.make_blobs(n, centers=SKEWED_CENTERS, cluster_std=VARIED_STDS, random_state=rs)
    if kind == "none":
        return rs.uniform(0.0, 1.0, size=(n, 2)), None
    raise ValidationError(f"unknown dataset kind {kind!r}")


def standardize(X):
    """Zero mean, unit (population) variance per coordinate; constant columns are only centered."""
    X = np.asarray(X, dtype=np.float64)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0] = 1.0
    return (X - mean) / std


def generate(spec: DatasetSpec) -> Dataset:
    spec.validate()
    if spec.kind == "csv":
        data = read_csv(spec.path)
        X, truth = data.X, data.truth
    else:
        X, truth = _raw(spec.kind, int(spec.n_points), spec.noise, _random_state(spec.seed))
    if spec.standardize:
        X = standardize(X)
    return Dataset(spec.kind, X * spec.scale, truth)


def stream_indices(n, steps, rng: np.random.Generator, shuffled_epochs=False) -> np.ndarray:
    """Row indices of a ``steps``-long stream over ``n`` points."""
    if n < 1:
        raise ValidationError("cannot stream from an empty dataset")
    if steps < 0:
        raise ValidationError("steps must be nonnegative")
    if not shuffled_epochs:
        return rng.integers(0, n, size=steps)
    epochs = -(-steps // n)
    order = np.concatenate([rng.permutation(n) for _ in range(epochs)]) if epochs else np.empty(0, np.int64)
    return order[:steps]


def stream(dataset: Dataset, steps: int, rng: np.random.Generator, shuffled_epochs=False):
    """Yield ``steps`` points drawn uniformly with replacement (or in shuffled epochs)."""
    for i in stream_indices(len(dataset), steps, rng, shuffled_epochs):
        yield dataset.X[i]


def write_csv(dataset: Dataset, path_or_file):
    """Header ``x0,...,x{D-1},truth``; truth is empty when absent."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{d}" for d in range(dataset.D)] + ["truth"])
        for i, x in enumerate(dataset.X):
            t = "" if dataset.truth is None else str(int(dataset.truth[i]))
            w.writerow([repr(float(v)) for v in x] + [t])
    finally:
        if own:
            fh.close()


def read_csv(path) -> Dataset:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValidationError(f"{path}: empty CSV")
    header = [h.strip() for h in rows[0]]
    coords = [i for i, h in enumerate(header) if h.startswith("x")]
    if not coords:
        raise ValidationError(f"{path}: no coordinate columns")
    t_col = header.index("truth") if "truth" in header else None
    X, truth = [], []
    for line, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            X.append([float(row[i]) for i in coords])
        except (ValueError, IndexError):
            raise ValidationError(f"{path}:{line}: malformed row") from None
        cell = row[t_col].strip() if t_col is not None and t_col < len(row) else ""
        truth.append(int(cell) if cell else None)
    if not X:
        raise ValidationError(f"{path}: no points")
    if all(t is None for t in truth):
        labels = None
    elif any(t is None for t in truth):
        raise ValidationError(f"{path}: truth column partially filled")
    else:
        labels = np.array(truth)
    return Dataset("csv", np.array(X), labels)
