"""Bank of Gaussian functions: activation and the online center update."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import NumericalBlowupError, ValidationError

INF = math.inf


@dataclass
class HyperParams:
    """Scalar knobs of a run. Defaults are the values used for every
    experiment in the reference setup (λ = 1/2 as in most of them).

    ``p`` selects the normalization of the accumulator update: ``None``
    for no normalization, ``math.inf`` for the max-norm, or a finite
    positive exponent.
    """

    K: int = 20
    D: int = 2
    sigma: float = 0.1
    eta: float = 0.02
    lam: float = 0.5
    p: float | None = INF
    tau: float = 1 / 9
    steps: int = 100_000
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if int(self.K) != self.K or self.K < 1:
            raise ValidationError(f"K must be a positive integer, got {self.K!r}")
        if int(self.D) != self.D or self.D < 1:
            raise ValidationError(f"D must be a positive integer, got {self.D!r}")
        for name in ("sigma", "eta", "lam"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be positive and finite, got {value!r}")
        if not (0 < self.tau <= 1):
            raise ValidationError(f"tau must lie in (0, 1], got {self.tau!r}")
        if self.p is not None and not (self.p > 0):
            raise ValidationError(f"p must be positive, inf or None, got {self.p!r}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValidationError(f"steps must be a positive integer, got {self.steps!r}")
        if int(self.seed) != self.seed or not (0 <= self.seed < 2**64):
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")


@dataclass
class GaussianBank:
    """K Gaussian functions in R^D sharing one width ``sigma``."""

    centers: np.ndarray
    sigma: float

    def __post_init__(self):
        self.centers = np.array(self.centers, dtype=np.float64, ndmin=2)
        if self.centers.ndim != 2:
            raise ValidationError("centers must be a K×D matrix")
        if not np.all(np.isfinite(self.centers)):
            raise ValidationError("centers must be finite")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ValidationError(f"sigma must be positive, got {self.sigma!r}")
        self.sigma = float(self.sigma)

    @property
    def K(self):
        return self.centers.shape[0]

    @property
    def D(self):
        return self.centers.shape[1]

    def copy(self):
        return GaussianBank(self.centers.copy(), self.sigma)


def init_bank(params: HyperParams, rng: np.random.Generator) -> GaussianBank:
    """Draw every center coordinate uniformly from [-1/2, 1/2)."""
    params.validate()
    centers = rng.uniform(-0.5, 0.5, size=(params.K, params.D))
    return GaussianBank(centers, params.sigma)


def _check_point(bank, x):
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (bank.D,):
        raise ValidationError(f"expected a point of dimension {bank.D}, got shape {x.shape}")
    return x


def activate(bank: GaussianBank, x) -> np.ndarray:
    """Outputs exp(-||x - mu_i||^2 / sigma) of all K Gaussians."""
    x = _check_point(bank, x)
    diff = x - bank.centers
    return np.exp(-np.einsum("kd,kd->k", diff, diff) / bank.sigma)


def repulsion_kernel(bank: GaussianBank, i: int, j: int) -> float:
    """Output of Gaussian ``i`` evaluated at the center of Gaussian ``j``."""
    diff = bank.centers[j] - bank.centers[i]
    return math.exp(-float(diff @ diff) / bank.sigma)


def pairwise_kernel(bank: GaussianBank) -> np.ndarray:
    """K×K matrix of repulsion kernels with a zero diagonal."""
    return _kernel_and_diffs(bank.centers, bank.sigma)[0]


def _kernel_and_diffs(mu, sigma):
    # explicit differences (not the |a|^2 + |b|^2 - 2ab expansion) keep g exactly symmetric
    diff = mu[None, :, :] - mu[:, None, :]  # diff[i, j] = mu_j - mu_i
    g = np.exp(-np.einsum("ijd,ijd->ij", diff, diff) / sigma)
    np.fill_diagonal(g, 0.0)
    return g, diff


def center_deltas(bank: GaussianBank, x, params: HyperParams, f=None) -> np.ndarray:
    """Center increments for input ``x``, all computed from the current centers.

    ``f`` may carry precomputed activations of ``x`` to avoid re-evaluating them.
    """
    x = _check_point(bank, x)
    if f is None:
        f = activate(bank, x)
    mu = bank.centers
    with np.errstate(over="ignore", invalid="ignore"):
        attraction = f[:, None] * (x - mu)
        g, diff = _kernel_and_diffs(mu, bank.sigma)
        repulsion = np.einsum("ij,ijd->id", g, diff)
        delta = (params.eta / bank.sigma) * (attraction - 2.0 * params.lam * repulsion)
    bad = ~np.all(np.isfinite(delta), axis=1)
    if bad.any():
        raise NumericalBlowupError(int(np.flatnonzero(bad)[0]))
    return delta


def update_centers(bank: GaussianBank, x, params: HyperParams, f=None) -> GaussianBank:
    """Apply one simultaneous center update in place and return the bank."""
    delta = center_deltas(bank, x, params, f)
    with np.errstate(over="ignore", invalid="ignore"):
        new = bank.centers + delta
    bad = ~np.all(np.isfinite(new), axis=1)
    if bad.any():
        raise NumericalBlowupError(int(np.flatnonzero(bad)[0]))
    bank.centers = new
    return bank
