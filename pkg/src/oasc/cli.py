"""Command-line front end: ``gen``, ``run``, ``sweep`` and ``plot``.

Exit codes: 0 success, 1 runtime or I/O failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace

from .correlation import correlation_from_q, format_norm_mode, parse_norm_mode, write_matrix_csv
from .datasets import KINDS, DatasetSpec, generate, parse_scale, read_csv, write_csv
from .engine import (
    PAPER_NORM_MODES,
    RunConfig,
    RunReport,
    run,
    sweep_lambda,
    sweep_thresholds,
    tau_grid,
    write_lambda_csv,
)
from .exceptions import EmptyAccumulatorError, NumericalBlowupError, ValidationError
from .plot import PlotSpec, render_svg, subsample


class UsageError(Exception):
    pass


def _float_list(text):
    items = [t for t in (s.strip() for s in text.split(",")) if t]
    return [float(parse_scale(t)) for t in items]


def _dataset_flags(p, gen=False):
    g = p.add_argument_group("dataset")
    kinds = [k for k in KINDS if k != "csv"]
    if gen:
        g.add_argument("--kind", choices=kinds, default="moons")
    else:
        g.add_argument("--dataset", choices=kinds, help="generated dataset kind")
        g.add_argument("--csv", metavar="PATH", help="import points from a CSV file instead")
    g.add_argument("--n", type=int, help="number of generated points")
    g.add_argument("--noise", type=float)
    g.add_argument("--scale", help="positive factor, fraction like 11/10, or 'paper'")
    g.add_argument("--standardize", action="store_true", default=None,
                   help="standardize each coordinate before scaling")
    if not gen:
        g.add_argument("--data-seed", type=int, help="dataset seed (defaults to --seed)")


def _run_flags(p):
    _dataset_flags(p)
    g = p.add_argument_group("model")
    g.add_argument("--config", metavar="JSON", help="config file (flags override it)")
    g.add_argument("--K", type=int)
    g.add_argument("--sigma", type=float)
    g.add_argument("--eta", type=float)
    g.add_argument("--lambda", dest="lam", type=float)
    g.add_argument("--p", help="norm mode: none, inf, or a positive number")
    g.add_argument("--tau", type=float)
    g.add_argument("--steps", type=int)
    g.add_argument("--seed", type=int)
    g = p.add_argument_group("run")
    g.add_argument("--snapshot-every", type=int)
    g.add_argument("--reset-q", action="store_true", default=None,
                   help="reset the accumulator after each snapshot")
    g.add_argument("--eval-points", type=int)
    g.add_argument("--min-ari", type=float)
    g.add_argument("--epochs", action="store_true", default=None,
                   help="stream shuffled epochs instead of sampling with replacement")
    g.add_argument("--backend", choices=("numba", "numpy"), default="numba")


def build_config(args) -> RunConfig:
    """Defaults, overridden by the config file, overridden by flags."""
    if args.config:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"invalid config JSON: {exc}") from None
        raw = raw.get("config", raw)  # a run report echoes its config
        config = RunConfig.from_dict(raw)
    else:
        config = RunConfig()
    hp, ds = config.hyperparams, config.dataset

    hp_over = {k: getattr(args, a) for k, a in
               [("K", "K"), ("sigma", "sigma"), ("eta", "eta"), ("lam", "lam"),
                ("tau", "tau"), ("steps", "steps"), ("seed", "seed")]
               if getattr(args, a) is not None}
    if args.p is not None:
        hp_over["p"] = parse_norm_mode(args.p)
    hp = replace(hp, **hp_over)

    ds_over = {}
    if args.csv:
        ds_over.update(kind="csv", path=args.csv)
    elif args.dataset:
        ds_over.update(kind=args.dataset, path=None)
    if args.n is not None:
        ds_over["n_points"] = args.n
    if args.noise is not None:
        ds_over["noise"] = args.noise
    if args.standardize is not None:
        ds_over["standardize"] = True
    if args.data_seed is not None:
        ds_over["seed"] = args.data_seed
    elif args.seed is not None:
        ds_over["seed"] = args.seed
    kind = ds_over.get("kind", ds.kind)
    if args.scale is not None:
        ds_over["scale"] = parse_scale(args.scale, kind)
    ds = replace(ds, **ds_over)
    if ds.kind == "csv":
        try:
            hp = replace(hp, D=read_csv(ds.path).D)
        except OSError as exc:
            raise UsageError(f"cannot read {ds.path}: {exc}") from None

    run_over = {k: getattr(args, a) for k, a in
                [("snapshot_every", "snapshot_every"), ("reset_q_on_snapshot", "reset_q"),
                 ("eval_points", "eval_points"), ("min_ari", "min_ari"),
                 ("shuffled_epochs", "epochs")]
                if getattr(args, a) is not None}
    return replace(config, hyperparams=hp, dataset=ds, **run_over)


def _open_out(path):
    return sys.stdout if path in (None, "-") else open(path, "w", newline="")


def cmd_gen(args):
    try:
        scale = parse_scale(args.scale if args.scale is not None else 1.0, args.kind)
        spec = DatasetSpec(args.kind, n_points=args.n if args.n is not None else 1500,
                           noise=args.noise if args.noise is not None else 0.05,
                           scale=scale, seed=args.seed, standardize=bool(args.standardize))
    except ValidationError as exc:
        raise UsageError(str(exc)) from None
    data = generate(spec)
    fh = _open_out(args.output)
    try:
        write_csv(data, fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_run(args):
    try:
        config = build_config(args)
    except ValidationError as exc:
        raise UsageError(str(exc)) from None
    report = run(config, backend=args.backend)
    ev = report.evaluation
    ari = "n/a" if ev.ari is None else f"{ev.ari:.4f}"
    print(f"L_found={ev.L_found} L={report.assignment.L} ari={ari} "
          f"success={str(report.success).lower()} skipped={report.skipped}")
    if args.output:
        with open(args.output, "w") as fh:
            json.dump(report.to_dict(), fh, indent=1)
            fh.write("\n")
    if args.assignments:
        with open(args.assignments, "w", newline="") as fh:
            D = report.bank.D
            fh.write(",".join(["gaussian"] + [f"x{d}" for d in range(D)] + ["label"]) + "\n")
            for k, (c, y) in enumerate(zip(report.bank.centers, report.assignment.y)):
                fh.write(",".join([str(k)] + [repr(float(v)) for v in c] + [str(int(y))]) + "\n")
    if args.q_csv:
        write_matrix_csv(report.Q, args.q_csv)
    if args.r_csv:
        write_matrix_csv(correlation_from_q(report.Q).R, args.r_csv)
    return 0


def cmd_sweep(args):
    try:
        config = build_config(args)
        if args.mode == "tau":
            if args.taus is not None:
                taus = _float_list(args.taus)
                if not taus:
                    raise ValidationError("empty tau grid")
            else:
                taus = tau_grid(args.tau_min, args.tau_max, args.tau_step)
            modes = ([parse_norm_mode(m) for m in args.norm_modes.split(",") if m.strip()]
                     if args.norm_modes else list(PAPER_NORM_MODES))
            if not modes:
                raise ValidationError("empty norm mode list")
        else:
            lambdas = _float_list(args.lambdas) if args.lambdas else [0.01, 0.5, 5.0]
            if not lambdas:
                raise ValidationError("empty lambda grid")
    except ValidationError as exc:
        raise UsageError(str(exc)) from None

    fh = _open_out(args.output)
    try:
        if args.mode == "tau":
            sweep = sweep_thresholds(config, modes, taus, threads=args.threads, backend=args.backend)
            sweep.write_csv(fh)
            for p in modes:
                best = sweep.longest_run(p)
                span = f"{best[0]}..{best[-1]}" if best else "-"
                print(f"{format_norm_mode(p)}: {len(sweep.passing(p))} passing, "
                      f"longest run {span}", file=sys.stderr)
        else:
            rows = sweep_lambda(config, lambdas, threads=args.threads, backend=args.backend)
            write_lambda_csv(rows, fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_plot(args):
    try:
        spec = PlotSpec(args.report, args.output, args.width, args.height, args.points)
    except ValidationError as exc:
        raise UsageError(str(exc)) from None
    with open(spec.report) as fh:
        try:
            report = RunReport.from_dict(json.load(fh))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed run report: {exc}") from None
    data = generate(report.config.dataset)
    pts = subsample(data.X, spec.points, report.config.dataset.seed)
    svg = render_svg(report.bank, report.assignment, pts, spec.width, spec.height,
                     title=f"{report.config.dataset.kind}: L_found={report.evaluation.L_found}")
    with open(spec.output, "w") as fh:
        fh.write(svg)
    return 0


def make_parser():
    parser = argparse.ArgumentParser(prog="oasc", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a dataset as CSV")
    _dataset_flags(p, gen=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="train, label and evaluate once")
    _run_flags(p)
    p.add_argument("-o", "--output", help="write the JSON run report here")
    p.add_argument("--assignments", metavar="CSV", help="write per-Gaussian centers and labels")
    p.add_argument("--q-csv", metavar="CSV", help="write the accumulator Q")
    p.add_argument("--r-csv", metavar="CSV", help="write the correlation matrix R")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="threshold or lambda sweep as CSV")
    _run_flags(p)
    p.add_argument("--mode", choices=("tau", "lambda"), default="tau")
    p.add_argument("--taus", help="comma-separated thresholds (overrides the grid flags)")
    p.add_argument("--tau-min", type=float, default=0.01)
    p.add_argument("--tau-max", type=float, default=0.30)
    p.add_argument("--tau-step", type=float, default=0.01)
    p.add_argument("--norm-modes", help="comma-separated, default none,0.5,1,2,4,inf")
    p.add_argument("--lambdas", help="comma-separated, default 0.01,0.5,5")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("-o", "--output", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("plot", help="render a run report as SVG")
    p.add_argument("--report", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--width", type=int, default=480)
    p.add_argument("--height", type=int, default=480)
    p.add_argument("--points", type=int, default=500, help="number of inputs drawn")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"oasc: error: {exc}", file=sys.stderr)
        return 2
    except (NumericalBlowupError, EmptyAccumulatorError) as exc:
        print(f"oasc: {exc}", file=sys.stderr)
        return 1
    except (ValidationError, OSError) as exc:
        print(f"oasc: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
