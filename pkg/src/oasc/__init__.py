"""Online arbitrary-shaped clustering with correlated Gaussian functions."""

from .correlation import (
    CorrelationAccumulator,
    CorrelationMatrix,
    accumulate,
    correlation_matrix,
    normalizer,
)
from .datasets import PAPER_SCALES, Dataset, DatasetSpec, generate, stream
from .engine import RunConfig, RunReport, run, sweep_lambda, sweep_thresholds
from .exceptions import EmptyAccumulatorError, NumericalBlowupError, ValidationError
from .labeling import LabelAssignment, assign_labels, default_tau, label_point
from .metrics import EvalReport, adjusted_rand_index, success
from .model import GaussianBank, HyperParams, activate, init_bank, repulsion_kernel, update_centers

__version__ = "0.1.0"
