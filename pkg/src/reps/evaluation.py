"""Evaluation measures, Pareto ranking, reports and the NN relation graph."""

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .dataset import kfold_split
from .errors import (
    DataError,
    DatasetMismatch,
    EmptyInput,
    InvalidK,
    IoError,
    ParseError,
    UndefinedLOR,
)
from .knn import evaluate_error, nearest_prototypes
from .problem import RepsConfig
from .selection import fit_reps, size_for_fraction

__all__ = [
    "EvalRecord",
    "ParetoRanking",
    "REPORT_FIELDS",
    "selection_rate",
    "nops_error",
    "fsr_error",
    "holdout_errors",
    "log_odds_ratio",
    "beta_sweep",
    "dominates",
    "pareto_rank",
    "nn_graph_dot",
    "export_nn_graph",
    "emit_report",
    "read_report_csv",
]

REPORT_FIELDS = (
    "method",
    "dataset",
    "err",
    "slr",
    "pareto_rank",
    "beta",
    "C",
    "solver",
    "seed",
    "k",
    "n_train",
)


@dataclass(frozen=True)
class EvalRecord:
    """Error and selection rate of one method on one dataset.

    The remaining fields echo the run that produced the record and may be
    ``None`` for records that come from elsewhere (e.g. a baseline).
    """

    method: str
    dataset: str
    err: float
    slr: float
    beta: float = None
    C: float = None
    solver: str = None
    seed: int = None
    k: int = None
    n_train: int = None

    def __post_init__(self):
        err, slr = float(self.err), float(self.slr)
        if not (math.isfinite(err) and 0.0 <= err <= 1.0):
            raise DataError(f"err must lie in [0, 1], got {self.err}")
        if not (math.isfinite(slr) and 0.0 < slr <= 1.0):
            raise DataError(f"slr must lie in (0, 1], got {self.slr}")
        object.__setattr__(self, "err", err)
        object.__setattr__(self, "slr", slr)


@dataclass(frozen=True)
class ParetoRanking:
    """``ranks[i]`` is the Pareto rank (1 = frontier) of ``records[i]``."""

    records: tuple
    ranks: tuple

    def rank_of(self, record):
        return self.ranks[self.records.index(record)]

    def fronts(self):
        """Records grouped by rank, rank 1 first."""
        out = []
        for r in range(1, max(self.ranks) + 1):
            out.append([rec for rec, q in zip(self.records, self.ranks) if q == r])
        return out


def selection_rate(k, n_train):
    """``k / n_train``."""
    if not 1 <= k <= n_train:
        raise InvalidK(f"k must satisfy 1 <= k <= {n_train}, got {k}")
    return k / n_train


def nops_error(ds, D, folds=5, seed=0):
    """Mean cross-validated 1-NN error with every training instance kept."""
    D = np.asarray(D)
    errs = [
        evaluate_error(D, train, ds.labels, test)
        for train, test in kfold_split(ds, folds, seed).folds()
    ]
    return float(np.mean(errs))


def fsr_error(ds, D, config=None, target_slr=1.0, folds=5, seed=0):
    """Mean cross-validated error with the prototype count forced to
    ``max(1, round(target_slr * n_train))`` in every fold."""
    if not 0 < target_slr <= 1:
        raise InvalidK(f"target_slr must lie in (0, 1], got {target_slr}")
    config = config or RepsConfig()
    D = np.asarray(D)
    errs = []
    for train, test in kfold_split(ds, folds, seed).folds():
        k = size_for_fraction(target_slr, train.size)
        fit = fit_reps(D[np.ix_(train, train)], ds.labels[train], config)
        chosen = train[fit.select(k).selected]
        errs.append(evaluate_error(D, chosen, ds.labels, test))
    return float(np.mean(errs))


def holdout_errors(D, labels, train, test, config=None, target_slr=1.0):
    """REPS and plain 1-NN test errors for a fixed train/test split.

    ``D`` covers both parts; ``train`` and ``test`` index into it.
    Returns ``(err_reps, err_nops, k, fit)``.
    """
    config = config or RepsConfig()
    D = np.asarray(D)
    labels = np.asarray(labels)
    train = np.asarray(train, dtype=np.int64)
    test = np.asarray(test, dtype=np.int64)
    k = size_for_fraction(target_slr, train.size)
    fit = fit_reps(D[np.ix_(train, train)], labels[train], config)
    chosen = train[fit.select(k).selected]
    err = evaluate_error(D, chosen, labels, test)
    err_nops = evaluate_error(D, train, labels, test)
    return err, err_nops, k, fit


def _odds(p):
    return p / (1.0 - p)


def log_odds_ratio(err, slr, err_nops):
    """``ln(O(slr) * O(err) / O(err - err_nops))`` with ``O(p) = p / (1 - p)``.

    Raises UndefinedLOR unless every odds argument lies strictly inside
    (0, 1), which in particular requires ``err > err_nops``.
    """
    diff = err - err_nops
    for name, p in (("slr", slr), ("err", err), ("err - err_nops", diff)):
        if not 0.0 < p < 1.0:
            raise UndefinedLOR(f"{name} = {p!r} is outside (0, 1)")
    return math.log(_odds(slr) * _odds(err) / _odds(diff))


def beta_sweep(ds, D, config=None, betas=(1.5, 2.0, 3.0, 4.0), target_slr=0.5, folds=5, seed=0):
    """ERR, SLR and LOR for each base ``beta`` on identical folds.

    Rows where the LOR is undefined carry ``lor=None`` and
    ``lor_defined=False``.
    """
    config = config or RepsConfig()
    err_nops = nops_error(ds, D, folds, seed)
    n_train = [train.size for train, _ in kfold_split(ds, folds, seed).folds()]
    slr = float(np.mean([size_for_fraction(target_slr, m) / m for m in n_train]))
    rows = []
    for beta in betas:
        err = fsr_error(ds, D, config.with_(beta=float(beta)), target_slr, folds, seed)
        try:
            lor = log_odds_ratio(err, slr, err_nops)
        except UndefinedLOR:
            lor = None
        rows.append(
            {
                "dataset": ds.name,
                "beta": float(beta),
                "err": err,
                "slr": slr,
                "err_nops": err_nops,
                "lor": lor,
                "lor_defined": lor is not None,
            }
        )
    return rows


def _check_same_dataset(records):
    names = {r.dataset for r in records}
    if len(names) > 1:
        raise DatasetMismatch(f"records span several datasets: {sorted(names)}")


def dominates(a, b):
    """True when ``a`` is no worse than ``b`` in both ERR and SLR and
    strictly better in at least one (smaller is better)."""
    if a.dataset != b.dataset:
        raise DatasetMismatch(f"{a.dataset!r} vs {b.dataset!r}")
    return a.err <= b.err and a.slr <= b.slr and (a.err < b.err or a.slr < b.slr)


def pareto_rank(records):
    """Rank records by repeatedly peeling off the non-dominated front."""
    records = tuple(records)
    if not records:
        raise EmptyInput("pareto_rank needs at least one record")
    _check_same_dataset(records)
    err = np.array([r.err for r in records])
    slr = np.array([r.slr for r in records])
    # dom[i, j]: record i dominates record j
    dom = (
        (err[:, None] <= err[None, :])
        & (slr[:, None] <= slr[None, :])
        & ((err[:, None] < err[None, :]) | (slr[:, None] < slr[None, :]))
    )
    ranks = np.zeros(len(records), dtype=np.int64)
    remaining = np.ones(len(records), dtype=bool)
    level = 0
    while remaining.any():
        level += 1
        beaten = dom[remaining][:, remaining].any(axis=0)
        front = np.flatnonzero(remaining)[~beaten]
        ranks[front] = level
        remaining[front] = False
    return ParetoRanking(records=records, ranks=tuple(int(r) for r in ranks))


_PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#ff7f0e",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
    "#bcbd22",
    "#17becf",
)


def _dot_quote(text):
    return '"' + str(text).replace("\\", "\\\\").replace('"', '\\"') + '"'


def nn_graph_dot(D, labels, selected, class_names=None, name="nn"):
    """DOT text for the leave-one-out nearest-neighbor graph.

    Nodes are numbered ``0..n-1``, filled by class, and drawn dashed when
    pruned. Each node has one edge to its nearest other instance.
    """
    D = np.asarray(D)
    labels = np.asarray(labels)
    n = D.shape[0]
    if n < 2:
        raise DataError("the graph needs at least 2 instances")
    keep = np.zeros(n, dtype=bool)
    keep[np.asarray(selected, dtype=np.int64)] = True
    nn = nearest_prototypes(D, np.arange(n), np.arange(n))
    out = io.StringIO()
    out.write(f"digraph {_dot_quote(name)} {{\n")
    out.write("  node [shape=circle, style=filled];\n")
    for i in range(n):
        c = int(labels[i])
        cls = class_names[c] if class_names is not None else c
        style = "filled" if keep[i] else "dashed"
        color = _PALETTE[c % len(_PALETTE)]
        out.write(
            f"  {i} [label={_dot_quote(i)}, class={_dot_quote(cls)}, "
            f"style={style}, color={_dot_quote(color)}, "
            f"selected={'true' if keep[i] else 'false'}];\n"
        )
    for i in range(n):
        out.write(f"  {i} -> {int(nn[i])};\n")
    out.write("}\n")
    return out.getvalue()


def export_nn_graph(D, labels, selected, path, class_names=None, name="nn"):
    """Write :func:`nn_graph_dot` to ``path``."""
    text = nn_graph_dot(D, labels, selected, class_names, name)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _report_rows(records, ranking):
    rows = []
    for rec, rank in zip(records, ranking):
        row = asdict(rec)
        row["pareto_rank"] = rank
        rows.append({f: row.get(f) for f in REPORT_FIELDS})
    return rows


def _ranks_by_dataset(records):
    ranks = [0] * len(records)
    groups = {}
    for i, r in enumerate(records):
        groups.setdefault(r.dataset, []).append(i)
    for idx in groups.values():
        ranking = pareto_rank([records[i] for i in idx])
        for i, q in zip(idx, ranking.ranks):
            ranks[i] = q
    return ranks


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def emit_report(records, json_path=None, csv_path=None):
    """Write records with their per-dataset Pareto ranks as JSON and/or CSV.

    Returns the list of row dicts that was written.
    """
    records = list(records)
    if not records:
        raise EmptyInput("no records to report")
    rows = _report_rows(records, _ranks_by_dataset(records))
    try:
        if json_path is not None:
            with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
                json.dump(rows, fh, indent=2)
                fh.write("\n")
        if csv_path is not None:
            with open(csv_path, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(REPORT_FIELDS)
                for row in rows:
                    writer.writerow([_csv_cell(row[f]) for f in REPORT_FIELDS])
    except OSError as exc:
        raise IoError(f"cannot write report: {exc}") from exc
    return rows


_CONVERT = {
    "err": float,
    "slr": float,
    "beta": float,
    "C": float,
    "seed": int,
    "k": int,
    "n_train": int,
}


def read_report_csv(path):
    """Parse a records CSV (only ``method, dataset, err, slr`` required).

    Returns ``(records, header, rows)`` where ``rows`` keep the raw cells
    so the file can be written back with extra columns.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            table = list(csv.reader(fh))
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if not table:
        raise EmptyInput(f"{path} is empty")
    header = [h.strip() for h in table[0]]
    for need in ("method", "dataset", "err", "slr"):
        if need not in header:
            raise ParseError(f"missing column {need!r}", row=1)
    known = {f.name for f in fields(EvalRecord)}
    records, rows = [], []
    for r, cells in enumerate(table[1:], start=2):
        if not any(c.strip() for c in cells):
            continue
        if len(cells) != len(header):
            raise ParseError(
                f"expected {len(header)} fields, found {len(cells)}", row=r
            )
        kwargs = {}
        for c, (key, cell) in enumerate(zip(header, cells), start=1):
            if key not in known:
                continue
            cell = cell.strip()
            if cell == "":
                kwargs[key] = None
                continue
            try:
                kwargs[key] = _CONVERT.get(key, str)(cell)
            except ValueError:
                raise ParseError(f"cannot parse {cell!r} as {key}", row=r, column=c) from None
        try:
            records.append(EvalRecord(**kwargs))
        except DataError as exc:
            raise ParseError(str(exc), row=r) from None
        rows.append(cells)
    if not records:
        raise EmptyInput(f"{path} holds no records")
    return records, header, rows
