"""Command-line entry point.

Subcommands: ``select``, ``eval``, ``cv``, ``sweep-beta``, ``pareto`` and
``graph``. Exit status is 0 on success, 1 on a usage error, 2 on a data or
I/O error and 3 when a solver fails to converge under ``--strict``.
"""

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import __version__
from .dataset import (
    LabeledDataset,
    kfold_split,
    load_distance_matrix,
    load_ucr_tsv,
    load_vector_csv,
)
from .distance import DEFAULT_WINDOW, build_matrix
from .errors import DimensionMismatch, IoError, NotConverged, RepsError
from .evaluation import (
    EvalRecord,
    beta_sweep,
    emit_report,
    export_nn_graph,
    holdout_errors,
    nops_error,
    pareto_rank,
    read_report_csv,
)
from .knn import evaluate_error
from .problem import SOLVERS, RepsConfig
from .ranking import write_ranks
from .selection import fit_reps, select_by_cv, size_for_fraction

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NOT_CONVERGED = 3

DEFAULT_FRACTIONS = tuple(round(0.05 * i, 2) for i in range(1, 21))
DEFAULT_BETAS = (1.5, 2.0, 3.0, 4.0)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _float_list(text):
    try:
        values = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _add_input(p, test=False):
    g = p.add_argument_group("input")
    g.add_argument("--input", required=True, help="training data file")
    if test:
        g.add_argument("--test", help="held-out test file of the same kind (ucr/vectors)")
    g.add_argument(
        "--kind",
        choices=("vectors", "ucr", "distmatrix"),
        default="vectors",
        help="input format (default: vectors)",
    )
    g.add_argument(
        "--label-col",
        type=int,
        default=-1,
        help="label column for vector CSV, negative counts from the end (default: -1)",
    )
    g.add_argument("--skip-header", action="store_true", help="skip one header line of a vector CSV")
    g.add_argument(
        "--metric",
        choices=("euclidean", "dtw"),
        help="dissimilarity (default: euclidean for vectors, dtw for ucr)",
    )
    g.add_argument(
        "--window",
        type=int,
        help=f"Sakoe-Chiba band half-width for dtw (default: {DEFAULT_WINDOW})",
    )
    g.add_argument("--threads", type=int, help="worker threads for the distance matrix")


def _add_config(p):
    g = p.add_argument_group("model")
    g.add_argument("--beta", type=float, default=2.0, help="exponential base, > 1 (default: 2)")
    g.add_argument("--C", type=float, default=0.001, help="hinge trade-off (default: 0.001)")
    g.add_argument("--epsilon", type=float, default=1e-4, help="cutting-plane tolerance (default: 1e-4)")
    g.add_argument("--solver", choices=SOLVERS, default="projected_gradient", help="QP solver")
    g.add_argument("--max-iterations", type=int, help="gradient steps or cuts (default: 10000 / 1000)")
    g.add_argument("--weight-floor", type=float, default=1e-12, help="floor before log (default: 1e-12)")
    g.add_argument(
        "--keep-lowest",
        action="store_true",
        help="keep the lowest scores instead of the highest",
    )
    g.add_argument("--strict", action="store_true", help="exit 3 if the solver does not converge")


def _add_size(p, required=False):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--k", type=int, help="number of prototypes to keep")
    g.add_argument("--fraction", type=float, help="fraction of the training set to keep")


def _add_cv(p, folds=True):
    if folds:
        p.add_argument("--folds", type=int, default=5, help="cross-validation folds (default: 5)")
    p.add_argument("--seed", type=int, default=0, help="fold seed (default: 0)")


def build_parser():
    parser = _Parser(
        prog="reps",
        description="Large-margin prototype selection for 1-nearest-neighbor classification.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("select", help="fit on a dataset and select prototypes")
    _add_input(p)
    _add_config(p)
    _add_size(p, required=True)
    _add_cv(p, folds=False)
    p.add_argument("--out", required=True, help="solution JSON path")
    p.add_argument("--indices-out", help="also write selected indices, one per line")
    p.add_argument("--dump-ranks", help="write the rank matrix as CSV (debugging)")

    p = sub.add_parser("eval", help="compare REPS with plain 1-NN")
    _add_input(p, test=True)
    _add_config(p)
    _add_size(p)
    _add_cv(p)
    p.add_argument(
        "--fractions",
        type=_float_list,
        default=list(DEFAULT_FRACTIONS),
        help="candidate fractions for internal CV when no size is given (default: 0.05..1.0)",
    )
    p.add_argument("--report-json", help="write records as JSON")
    p.add_argument("--report-csv", help="write records as CSV")

    p = sub.add_parser("cv", help="choose the prototype fraction by cross validation")
    _add_input(p)
    _add_config(p)
    _add_cv(p)
    p.add_argument(
        "--fractions",
        type=_float_list,
        default=list(DEFAULT_FRACTIONS),
        help="candidate fractions (default: 0.05..1.0)",
    )
    p.add_argument("--out", required=True, help="result JSON path")

    p = sub.add_parser("sweep-beta", help="error and log odds ratio across beta")
    _add_input(p)
    _add_config(p)
    _add_cv(p)
    p.add_argument(
        "--betas",
        type=_float_list,
        default=list(DEFAULT_BETAS),
        help="comma-separated bases (default: 1.5,2,3,4)",
    )
    p.add_argument("--fraction", type=float, default=0.5, help="selection rate (default: 0.5)")
    p.add_argument("--out", required=True, help="CSV table path")

    p = sub.add_parser("pareto", help="append Pareto ranks to a records CSV")
    p.add_argument("--records", required=True, help="CSV with method,dataset,err,slr columns")
    p.add_argument("--out", help="output CSV (default: stdout)")

    p = sub.add_parser("graph", help="export the nearest-neighbor relation graph as DOT")
    _add_input(p)
    _add_config(p)
    _add_size(p)
    p.add_argument("--out", required=True, help="DOT file path")
    return parser


def _check_flags(args):
    if getattr(args, "kind", None) == "distmatrix":
        if args.metric is not None or args.window is not None:
            raise UsageError("--metric and --window do not apply to distmatrix input")
        if getattr(args, "test", None):
            raise UsageError("--test is not supported for distmatrix input")
    if getattr(args, "kind", None) in ("vectors", "ucr"):
        expected = "euclidean" if args.kind == "vectors" else "dtw"
        if args.metric is None:
            args.metric = expected
        elif args.metric != expected:
            raise UsageError(f"--metric {args.metric} does not apply to {args.kind} input")
        if args.window is not None and args.metric != "dtw":
            raise UsageError("--window applies to dtw only")
    if getattr(args, "k", None) is not None and args.k < 1:
        raise UsageError("--k must be positive")
    frac = getattr(args, "fraction", None)
    if frac is not None and not 0 < frac <= 1:
        raise UsageError("--fraction must lie in (0, 1]")
    if getattr(args, "folds", None) is not None and args.folds < 2:
        raise UsageError("--folds must be at least 2")
    if getattr(args, "threads", None) is not None and args.threads < 1:
        raise UsageError("--threads must be positive")
    for name in ("fractions",):
        for f in getattr(args, name, None) or ():
            if not 0 < f <= 1:
                raise UsageError("--fractions entries must lie in (0, 1]")
    if hasattr(args, "beta"):
        try:
            _config(args)
        except ValueError as exc:
            raise UsageError(str(exc)) from None


def _config(args):
    return RepsConfig(
        beta=args.beta,
        C=args.C,
        epsilon=args.epsilon,
        solver=args.solver,
        max_iterations=args.max_iterations,
        weight_floor=args.weight_floor,
        keep_highest_scores=not args.keep_lowest,
    )


def _load(args, path, classes=None):
    if args.kind == "vectors":
        return load_vector_csv(path, args.label_col, args.skip_header, classes=classes), None
    if args.kind == "ucr":
        return load_ucr_tsv(path, classes=classes), None
    D, ds = load_distance_matrix(path)
    return ds, D


def _matrix(args, ds):
    window = args.window if args.window is not None else DEFAULT_WINDOW
    return build_matrix(ds, args.metric, window, n_jobs=args.threads)


def _load_with_matrix(args):
    ds, D = _load(args, args.input)
    if D is None:
        D = _matrix(args, ds)
    return ds, D


def _size(args, n):
    if args.k is not None:
        if args.k > n:
            raise UsageError(f"--k {args.k} exceeds the {n} training instances")
        return args.k
    if args.fraction is not None:
        return size_for_fraction(args.fraction, n)
    return None


def _check_converged(args, solution):
    if args.strict and not solution.converged:
        raise NotConverged(
            f"{solution.solver} solver stopped after {solution.iterations} iterations"
        )


def _write_json(path, payload):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _floats(a):
    return [float(x) for x in np.asarray(a).ravel()]


def cmd_select(args, out):
    ds, D = _load_with_matrix(args)
    config = _config(args)
    k = _size(args, ds.n)
    fit = fit_reps(D, ds.labels, config)
    _check_converged(args, fit.solution)
    chosen = fit.select(k)
    sol = fit.solution
    payload = {
        "dataset": ds.name,
        "n": ds.n,
        "k": chosen.k,
        "seed": args.seed,
        "config": config.as_dict(),
        "selected": [int(i) for i in chosen.selected],
        "w": _floats(sol.w),
        "alpha": _floats(sol.alpha),
        "xi": _floats(sol.xi),
        "scores": _floats(fit.scores),
        "objective": sol.objective,
        "iterations": sol.iterations,
        "converged": sol.converged,
        "solver": sol.solver,
    }
    _write_json(args.out, payload)
    if args.indices_out:
        _write_text(args.indices_out, "".join(f"{int(i)}\n" for i in chosen.selected))
    if args.dump_ranks:
        write_ranks(args.dump_ranks, fit.ranks)
    out.write(f"selected {chosen.k} of {ds.n} prototypes -> {args.out}\n")


def _write_text(path, text):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _merge(train, test):
    """One dataset holding the training instances followed by the test ones."""
    if train.instances.shape[1:] != test.instances.shape[1:]:
        raise DimensionMismatch(
            f"train instances have shape {train.instances.shape[1:]}, "
            f"test {test.instances.shape[1:]}"
        )
    return LabeledDataset(
        name=train.name,
        kind=train.kind,
        instances=np.vstack([train.instances, test.instances]),
        labels=np.concatenate([train.labels, test.labels]),
        classes=test.classes,
    )


def cmd_eval(args, out):
    config = _config(args)
    records = []
    if args.test:
        train_ds, _ = _load(args, args.input)
        test_ds, _ = _load(args, args.test, classes=train_ds.classes)
        both = _merge(train_ds, test_ds)
        D = np.asarray(_matrix(args, both))
        train = np.arange(train_ds.n)
        test = np.arange(train_ds.n, both.n)
        k = _size(args, train_ds.n)
        if k is None:
            chosen = select_by_cv(
                train_ds, D[np.ix_(train, train)], config, args.fractions, args.folds, args.seed
            )
            k = chosen.k
        err, err_nops, k, fit = holdout_errors(D, both.labels, train, test, config, k / train_ds.n)
        _check_converged(args, fit.solution)
        n_train = train_ds.n
        slr = k / n_train
        name = train_ds.name
    else:
        ds, D = _load_with_matrix(args)
        D = np.asarray(D)
        errs, slrs = [], []
        for tr, te in kfold_split(ds, args.folds, args.seed).folds():
            k = _size(args, tr.size)
            sub = ds.subset(tr)
            Dtr = D[np.ix_(tr, tr)]
            if k is None:
                k = select_by_cv(sub, Dtr, config, args.fractions, args.folds, args.seed).k
            fit = fit_reps(Dtr, ds.labels[tr], config)
            _check_converged(args, fit.solution)
            chosen = tr[fit.select(k).selected]
            errs.append(evaluate_error(D, chosen, ds.labels, te))
            slrs.append(k / tr.size)
        err = float(np.mean(errs))
        slr = float(np.mean(slrs))
        err_nops = nops_error(ds, D, args.folds, args.seed)
        n_train = ds.n
        k = None
        name = ds.name
    meta = dict(beta=config.beta, C=config.C, solver=config.solver, seed=args.seed, n_train=n_train)
    records.append(EvalRecord("NoPS", name, err_nops, 1.0, k=n_train if args.test else None, **meta))
    records.append(EvalRecord("REPS", name, err, slr, k=k, **meta))
    emit_report(records, args.report_json, args.report_csv)
    out.write(f"NoPS  ERR {err_nops:.4f}  SLR 1.0000\n")
    out.write(f"REPS  ERR {err:.4f}  SLR {slr:.4f}\n")


def cmd_cv(args, out):
    ds, D = _load_with_matrix(args)
    config = _config(args)
    chosen = select_by_cv(ds, D, config, args.fractions, args.folds, args.seed)
    payload = {
        "dataset": ds.name,
        "n": ds.n,
        "folds": args.folds,
        "seed": args.seed,
        "config": config.as_dict(),
        "fraction": chosen.fraction,
        "k": chosen.k,
        "cv_errors": [{"fraction": f, "err": e} for f, e in sorted(chosen.cv_errors.items())],
        "selected": [int(i) for i in chosen.selected],
        "scores": _floats(chosen.scores),
    }
    _write_json(args.out, payload)
    out.write(f"fraction {chosen.fraction} (k={chosen.k}) -> {args.out}\n")


SWEEP_FIELDS = ("dataset", "beta", "err", "slr", "err_nops", "lor", "lor_status")


def cmd_sweep(args, out):
    ds, D = _load_with_matrix(args)
    config = _config(args)
    rows = beta_sweep(ds, D, config, args.betas, args.fraction, args.folds, args.seed)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_FIELDS)
    for row in rows:
        writer.writerow(
            [
                row["dataset"],
                "%.17g" % row["beta"],
                "%.17g" % row["err"],
                "%.17g" % row["slr"],
                "%.17g" % row["err_nops"],
                "" if row["lor"] is None else "%.17g" % row["lor"],
                "ok" if row["lor_defined"] else "undefined",
            ]
        )
    _write_text(args.out, buf.getvalue())
    for row in rows:
        lor = "undefined" if row["lor"] is None else f"{row['lor']:.4f}"
        out.write(f"beta {row['beta']:<4g} ERR {row['err']:.4f}  LOR {lor}\n")


def cmd_pareto(args, out):
    records, header, rows = read_report_csv(args.records)
    groups = {}
    for i, r in enumerate(records):
        groups.setdefault(r.dataset, []).append(i)
    ranks = [0] * len(records)
    for idx in groups.values():
        for i, q in zip(idx, pareto_rank([records[i] for i in idx]).ranks):
            ranks[i] = q
    if "pareto_rank" in header:
        col = header.index("pareto_rank")
        new_header = header
        new_rows = [cells[:col] + [str(q)] + cells[col + 1 :] for cells, q in zip(rows, ranks)]
    else:
        new_header = header + ["pareto_rank"]
        new_rows = [cells + [str(q)] for cells, q in zip(rows, ranks)]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(new_header)
    writer.writerows(new_rows)
    if args.out:
        _write_text(args.out, buf.getvalue())
    else:
        out.write(buf.getvalue())


def cmd_graph(args, out):
    ds, D = _load_with_matrix(args)
    config = _config(args)
    k = _size(args, ds.n)
    if k is None or k == ds.n:
        selected = np.arange(ds.n)
    else:
        fit = fit_reps(D, ds.labels, config)
        _check_converged(args, fit.solution)
        selected = fit.select(k).selected
    export_nn_graph(D, ds.labels, selected, args.out, class_names=ds.classes)
    out.write(f"{ds.n} nodes, {len(selected)} selected -> {args.out}\n")


COMMANDS = {
    "select": cmd_select,
    "eval": cmd_eval,
    "cv": cmd_cv,
    "sweep-beta": cmd_sweep,
    "pareto": cmd_pareto,
    "graph": cmd_graph,
}


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _check_flags(args)
        COMMANDS[args.command](args, out)
    except UsageError as exc:
        err.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except NotConverged as exc:
        err.write(f"error: NotConverged: {exc}\n")
        return EXIT_NOT_CONVERGED
    except RepsError as exc:
        err.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_DATA
    except SystemExit as exc:
        # --help and --version
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
