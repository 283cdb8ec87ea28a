"""The online loop, snapshot labeling, evaluation and hyperparameter sweeps."""

from __future__ import annotations

import csv
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import _kernel
from .correlation import (
    UNDERFLOW_FLOOR,
    CorrelationAccumulator,
    correlation_from_q,
    format_norm_mode,
    parse_norm_mode,
)
from .datasets import DatasetSpec, generate, stream_indices
from .exceptions import EmptyAccumulatorError, NumericalBlowupError, ValidationError
from .labeling import LabelAssignment, assign_labels, nearest_center
from .metrics import DEFAULT_MIN_ARI, EvalReport, evaluate, success
from .model import GaussianBank, HyperParams, activate, init_bank, update_centers

log = logging.getLogger(__name__)

PAPER_NORM_MODES = (None, 0.5, 1.0, 2.0, 4.0, math.inf)


@dataclass
class RunConfig:
    hyperparams: HyperParams = field(default_factory=HyperParams)
    dataset: DatasetSpec = field(default_factory=DatasetSpec)
    snapshot_every: int | None = None
    reset_q_on_snapshot: bool = False
    eval_points: int = 2000
    min_ari: float = DEFAULT_MIN_ARI
    shuffled_epochs: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self):
        self.hyperparams.validate()
        self.dataset.validate()
        if self.snapshot_every is not None and (
                int(self.snapshot_every) != self.snapshot_every or self.snapshot_every < 1):
            raise ValidationError("snapshot_every must be a positive integer or None")
        if int(self.eval_points) != self.eval_points or self.eval_points < 1:
            raise ValidationError("eval_points must be a positive integer")

    def to_dict(self):
        d = asdict(self)
        d["hyperparams"]["p"] = format_norm_mode(self.hyperparams.p)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        hp = dict(d.pop("hyperparams", {}))
        if "p" in hp:
            hp["p"] = parse_norm_mode(hp["p"])
        ds = dict(d.pop("dataset", {}))
        return cls(HyperParams(**hp), DatasetSpec(**ds), **d)


@dataclass(frozen=True)
class Snapshot:
    step: int
    L: int
    L_found: int
    ari: float | None


@dataclass
class RunReport:
    config: RunConfig
    bank: GaussianBank
    assignment: LabelAssignment
    evaluation: EvalReport
    history: list
    samples_seen: int
    skipped: int
    duration: float
    Q: np.ndarray = field(repr=False, default=None)

    @property
    def success(self):
        return success(self.evaluation, self.config.min_ari)

    def to_dict(self, timing=True):
        d = {
            "config": self.config.to_dict(),
            "sigma": self.bank.sigma,
            "centers": self.bank.centers.tolist(),
            "y": self.assignment.y.tolist(),
            "L": self.assignment.L,
            "tau": self.assignment.tau,
            "L_found": self.evaluation.L_found,
            "L_truth": self.evaluation.L_truth,
            "ari": self.evaluation.ari,
            "success": self.success,
            "eval_points": self.evaluation.n_points,
            "samples_seen": self.samples_seen,
            "skipped_samples": self.skipped,
            "history": [asdict(s) for s in self.history],
        }
        if timing:
            d["duration_s"] = self.duration
        return d

    @classmethod
    def from_dict(cls, d):
        try:
            config = RunConfig.from_dict(d["config"])
            bank = GaussianBank(np.array(d["centers"], dtype=np.float64), d["sigma"])
            y = np.array(d["y"], dtype=np.int64)
            assignment = LabelAssignment(y, int(d["L"]), float(d["tau"]))
            ev = EvalReport(d["L_found"], d["L_truth"], d["ari"], d["eval_points"],
                            d["skipped_samples"])
            history = [Snapshot(**s) for s in d["history"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed run report: {exc}") from None
        if len(y) != bank.K:
            raise ValidationError("malformed run report: label count does not match centers")
        return cls(config, bank, assignment, ev, history, d["samples_seen"],
                   d["skipped_samples"], d.get("duration_s", 0.0))


def _derived_seed(seed, tag):
    ss = np.random.SeedSequence(int(seed), spawn_key=(tag,))
    return int(ss.generate_state(1, np.uint64)[0])


def eval_dataset(config: RunConfig, train=None):
    """Fresh points from the dataset spec under a derived seed.

    Imported CSV data has no generator, so its own points are evaluated.
    """
    spec = config.dataset
    if spec.kind == "csv":
        return train if train is not None else generate(spec)
    return generate(replace(spec, n_points=config.eval_points, seed=_derived_seed(spec.seed, 1)))


class _Trainer:
    """Mutable state of one online run."""

    def __init__(self, config: RunConfig, data, backend):
        hp = config.hyperparams
        if data.D != hp.D:
            raise ValidationError(f"dataset dimension {data.D} does not match D={hp.D}")
        if backend not in ("numba", "numpy"):
            raise ValidationError(f"unknown backend {backend!r}")
        init_ss, stream_ss = np.random.SeedSequence(int(hp.seed)).spawn(2)
        self.hp = hp
        self.X = np.ascontiguousarray(data.X)
        self.bank = init_bank(hp, np.random.default_rng(init_ss))
        self.acc = CorrelationAccumulator(hp.K, hp.p)
        self.order = stream_indices(len(data), hp.steps, np.random.default_rng(stream_ss),
                                    config.shuffled_epochs)
        self.backend = backend
        self.pos = 0
        self.total_skipped = 0

    def advance(self, stop):
        """Consume stream positions up to ``stop`` (exclusive)."""
        hp = self.hp
        if self.backend == "numba":
            mode, p = _kernel.norm_code(hp.p)
            seen, skipped, bad_pos, bad_i = _kernel.train_span(
                self.X, self.order, self.pos, stop, self.bank.centers, self.acc.Q,
                hp.sigma, hp.eta, hp.lam, mode, p, UNDERFLOW_FLOOR)
            self.acc.samples_seen += seen
            self.acc.skipped += skipped
            self.total_skipped += skipped
            if bad_pos >= 0:
                raise NumericalBlowupError(int(bad_i), step=int(bad_pos) + 1)
        else:
            for pos in range(self.pos, stop):
                x = self.X[self.order[pos]]
                f = activate(self.bank, x)
                before = self.acc.skipped
                self.acc.accumulate(f)
                self.total_skipped += self.acc.skipped - before
                try:
                    update_centers(self.bank, x, hp, f)
                except NumericalBlowupError as exc:
                    raise NumericalBlowupError(exc.index, pos + 1) from None
        self.pos = stop

    def reset_q(self):
        self.acc.reset()

    def correlations(self):
        if self.acc.samples_seen < 1:
            raise EmptyAccumulatorError(step=self.pos)
        try:
            return correlation_from_q(self.acc.Q)
        except EmptyAccumulatorError:
            raise EmptyAccumulatorError(step=self.pos) from None


def _label_eval(bank, R, tau, X_eval, truth, skipped):
    assignment = assign_labels(R, tau)
    pred = assignment.y[nearest_center(bank.centers, X_eval)]
    return assignment, evaluate(pred, truth, skipped)


def _checkpoints(steps, every):
    if every is None:
        return [steps]
    points = list(range(every, steps, every))
    return points + [steps]


def run(config: RunConfig, backend="numba") -> RunReport:
    """Train on a stream drawn from the dataset, labeling at each snapshot.

    Each input is activated once against the pre-update centers; the same
    activations feed the accumulator and the center update.
    """
    config.validate()
    started = time.perf_counter()
    data = generate(config.dataset)
    ev = eval_dataset(config, data)
    hp = config.hyperparams
    trainer = _Trainer(config, data, backend)
    history = []
    assignment = report = None
    for step in _checkpoints(hp.steps, config.snapshot_every):
        trainer.advance(step)
        R = trainer.correlations()
        assignment, report = _label_eval(trainer.bank, R, hp.tau, ev.X, ev.truth,
                                         trainer.total_skipped)
        history.append(Snapshot(step, assignment.L, report.L_found, report.ari))
        log.debug("step %d: L=%d L_found=%d ari=%s", step, assignment.L, report.L_found, report.ari)
        if config.reset_q_on_snapshot and step != hp.steps:
            trainer.reset_q()
    return RunReport(config, trainer.bank, assignment, report, history,
                     trainer.acc.samples_seen, trainer.total_skipped,
                     time.perf_counter() - started, trainer.acc.Q.copy())


def tau_grid(start=0.01, stop=0.30, step=0.01):
    """Arithmetic grid ``start, start+step, ..., <= stop`` rounded to 10 decimals."""
    if not (step > 0):
        raise ValidationError("tau step must be positive")
    if stop < start:
        raise ValidationError("empty tau grid")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    grid = [round(start + i * step, 10) for i in range(n)]
    _check_taus(grid)
    return grid


def _check_taus(taus):
    if len(taus) == 0:
        raise ValidationError("empty tau grid")
    for t in taus:
        if not (0 < t <= 1):
            raise ValidationError(f"tau {t!r} outside (0, 1]")


@dataclass(frozen=True)
class ThresholdRow:
    norm_mode: float | None
    tau: float
    L: int
    L_found: int
    ari: float | None
    success: bool


@dataclass
class ThresholdSweep:
    taus: list
    norm_modes: list
    rows: list
    runs: dict  # format_norm_mode(p) -> RunReport of that training

    def passing(self, p):
        return [r.tau for r in self.rows if r.norm_mode == p and r.success]

    def longest_run(self, p):
        """Maximal contiguous run of passing grid values (earliest on ties)."""
        ok = {r.tau for r in self.rows if r.norm_mode == p and r.success}
        best, cur = [], []
        for t in self.taus:
            cur = cur + [t] if t in ok else []
            if len(cur) > len(best):
                best = cur
        return best

    def write_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["norm_mode", "tau", "L_found", "ari", "success"])
        for r in self.rows:
            w.writerow([format_norm_mode(r.norm_mode), repr(r.tau), r.L_found,
                        "" if r.ari is None else repr(r.ari), str(r.success).lower()])


def _map(fn, items, threads):
    if threads and threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def sweep_thresholds(config: RunConfig, norm_modes=PAPER_NORM_MODES, taus=None,
                     threads=1, backend="numba") -> ThresholdSweep:
    """Train once per norm mode, then label the final correlations at every tau."""
    taus = list(tau_grid() if taus is None else taus)
    _check_taus(taus)
    norm_modes = list(norm_modes)
    if not norm_modes:
        raise ValidationError("no norm modes given")
    ev = eval_dataset(config)

    def branch(p):
        return run(replace(config, hyperparams=replace(config.hyperparams, p=p)), backend)

    reports = _map(branch, norm_modes, threads)
    rows = []
    for p, rep in zip(norm_modes, reports):
        R = correlation_from_q(rep.Q)
        for tau in taus:
            assignment, ev_report = _label_eval(rep.bank, R, tau, ev.X, ev.truth, rep.skipped)
            rows.append(ThresholdRow(p, tau, assignment.L, ev_report.L_found, ev_report.ari,
                                     success(ev_report, config.min_ari)))
    runs = {format_norm_mode(p): rep for p, rep in zip(norm_modes, reports)}
    return ThresholdSweep(taus, norm_modes, rows, runs)


@dataclass(frozen=True)
class LambdaRow:
    lam: float
    L: int
    L_found: int
    ari: float | None
    success: bool


def sweep_lambda(config: RunConfig, lambdas, threads=1, backend="numba"):
    """One full run per repulsion strength, everything else fixed."""
    lambdas = [float(v) for v in lambdas]
    if not lambdas:
        raise ValidationError("empty lambda grid")
    for v in lambdas:
        if not (v > 0 and math.isfinite(v)):
            raise ValidationError(f"lambda must be positive, got {v!r}")

    def branch(lam):
        return run(replace(config, hyperparams=replace(config.hyperparams, lam=lam)), backend)

    reports = _map(branch, lambdas, threads)
    return [LambdaRow(lam, r.assignment.L, r.evaluation.L_found, r.evaluation.ari, r.success)
            for lam, r in zip(lambdas, reports)]


def write_lambda_csv(rows, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["lambda", "L_found", "ari", "success"])
    for r in rows:
        w.writerow([repr(r.lam), r.L_found, "" if r.ari is None else repr(r.ari),
                    str(r.success).lower()])
