"""Loading labeled data and producing stratified cross-validation splits.

Three input forms are supported:

* vector CSV: one instance per row, one column holds the class token;
* UCR text: one time series per line, first token is the class;
* distance-matrix CSV: row label followed by that row of a square
  dissimilarity matrix.

Class tokens are interned to ``0..c-1`` in order of first appearance.
No normalization or imputation is performed on features.
"""

import csv
import re
from pathlib import Path
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateData, InvalidFoldCount, IoError, ParseError

__all__ = [
    "LabeledDataset",
    "SplitPlan",
    "load_vector_csv",
    "load_ucr_tsv",
    "load_distance_matrix",
    "write_vector_csv",
    "write_ucr_tsv",
    "write_distance_matrix",
    "kfold_split",
]

KINDS = ("vectors", "series", "index")

_UCR_SPLIT = re.compile(r"[,\s]+")


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LabeledDataset:
    """Instances with interned integer class labels.

    ``instances`` is a 2-D float array for ``vectors`` and ``series``
    (one row per instance) and a 1-D integer array of ids for ``index``
    datasets, whose distances come precomputed. ``classes[c]`` is the
    original token of label ``c``.
    """

    name: str
    kind: str
    instances: np.ndarray
    labels: np.ndarray
    classes: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown dataset kind {self.kind!r}")
        dtype = np.int64 if self.kind == "index" else np.float64
        object.__setattr__(self, "instances", _frozen(self.instances, dtype))
        object.__setattr__(self, "labels", _frozen(self.labels, np.int64))
        if len(self.instances) != len(self.labels):
            raise DegenerateData(
                f"{len(self.instances)} instances but {len(self.labels)} labels"
            )
        if not self.classes:
            n_classes = int(self.labels.max()) + 1 if len(self.labels) else 0
            object.__setattr__(
                self, "classes", tuple(str(c) for c in range(n_classes))
            )
        else:
            object.__setattr__(self, "classes", tuple(self.classes))

    @property
    def n(self):
        return len(self.labels)

    @property
    def n_classes(self):
        return len(np.unique(self.labels))

    def subset(self, indices, name=None):
        indices = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(
            name=name or self.name,
            kind=self.kind,
            instances=self.instances[indices],
            labels=self.labels[indices],
            classes=self.classes,
        )


@dataclass(frozen=True)
class SplitPlan:
    """Assignment of every instance to one of ``k`` folds."""

    fold_of: np.ndarray
    k: int
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "fold_of", _frozen(self.fold_of, np.int64))

    def test_indices(self, fold):
        return np.flatnonzero(self.fold_of == fold)

    def train_indices(self, fold):
        return np.flatnonzero(self.fold_of != fold)

    def folds(self):
        """Yield ``(train, test)`` index arrays for each fold in order."""
        for f in range(self.k):
            yield self.train_indices(f), self.test_indices(f)


class _Interner:
    def __init__(self, classes=None):
        self.tokens = list(classes or ())
        self.index = {t: i for i, t in enumerate(self.tokens)}

    def __call__(self, token):
        if token not in self.index:
            self.index[token] = len(self.tokens)
            self.tokens.append(token)
        return self.index[token]


def _read_lines(path):
    try:
        with open(path, newline="") as fh:
            return fh.read().splitlines()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


def _parse_float(token, row, column):
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"non-numeric value {token!r}", row, column) from None
    if not np.isfinite(value):
        raise ParseError(f"non-finite value {token!r}", row, column)
    return value


def _check_classes(labels, name, test_split):
    if test_split:
        if len(labels) == 0:
            raise DegenerateData(f"{name}: no instances")
        return
    if len(labels) < 2:
        raise DegenerateData(f"{name}: need at least 2 instances, got {len(labels)}")
    if len(set(labels)) < 2:
        raise DegenerateData(f"{name}: only one class present")


def load_vector_csv(path, label_column=-1, skip_header=False, name=None, classes=None):
    """Load a comma-delimited file of feature rows.

    ``label_column`` may be negative (counted from the end). Pass the
    ``classes`` of a training set to intern a test set consistently; in
    that case single-class files are accepted.
    """
    name = name or Path(path).stem
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh)]
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if skip_header and rows:
        rows = rows[1:]
        offset = 2
    else:
        offset = 1
    interner = _Interner(classes)
    feats, labels = [], []
    width = None
    for r, row in enumerate(rows):
        lineno = r + offset
        if not row or all(not t.strip() for t in row):
            continue
        if width is None:
            width = len(row)
            if width < 2:
                raise ParseError("need a label and at least one feature", lineno)
            col = label_column if label_column >= 0 else width + label_column
            if not 0 <= col < width:
                raise ParseError(f"label column {label_column} out of range", lineno)
        elif len(row) != width:
            raise ParseError(
                f"ragged row: {len(row)} fields, expected {width}", lineno
            )
        values = []
        for c, token in enumerate(row):
            if c == col:
                continue
            values.append(_parse_float(token.strip(), lineno, c + 1))
        feats.append(values)
        labels.append(interner(row[col].strip()))
    _check_classes(labels, name, classes is not None)
    return LabeledDataset(
        name=name,
        kind="vectors",
        instances=np.array(feats, dtype=np.float64),
        labels=labels,
        classes=tuple(interner.tokens),
    )


def load_ucr_tsv(path, name=None, classes=None):
    """Load UCR-style series: label then values, tab/comma/space delimited."""
    name = name or Path(path).stem
    interner = _Interner(classes)
    series, labels = [], []
    length = None
    for r, line in enumerate(_read_lines(path)):
        line = line.strip()
        if not line:
            continue
        tokens = _UCR_SPLIT.split(line)
        if len(tokens) < 2:
            raise ParseError("series has no values", r + 1)
        values = [_parse_float(t, r + 1, c + 2) for c, t in enumerate(tokens[1:])]
        if length is None:
            length = len(values)
        elif len(values) != length:
            raise ParseError(
                f"ragged series: length {len(values)}, expected {length}", r + 1
            )
        series.append(values)
        labels.append(interner(tokens[0]))
    _check_classes(labels, name, classes is not None)
    return LabeledDataset(
        name=name,
        kind="series",
        instances=np.array(series, dtype=np.float64),
        labels=labels,
        classes=tuple(interner.tokens),
    )


def load_distance_matrix(path, name=None, rtol=1e-9):
    """Load a labeled square distance matrix.

    Returns ``(DistanceMatrix, LabeledDataset)``; the dataset has kind
    ``index`` and carries the interned labels. Entries asymmetric by at
    most ``rtol`` (relative) are averaged.
    """
    from .distance import DistanceMatrix

    name = name or Path(path).stem
    interner = _Interner()
    rows, labels = [], []
    for r, line in enumerate(_read_lines(path)):
        if not line.strip():
            continue
        tokens = [t.strip() for t in line.split(",")]
        labels.append(interner(tokens[0]))
        rows.append([_parse_float(t, r + 1, c + 2) for c, t in enumerate(tokens[1:])])
    n = len(rows)
    for r, row in enumerate(rows):
        if len(row) != n:
            raise ParseError(f"matrix is not square: {len(row)} fields, expected {n}", r + 1)
    _check_classes(labels, name, False)
    values = np.array(rows, dtype=np.float64)
    D = DistanceMatrix.from_array(values, rtol=rtol)
    ds = LabeledDataset(
        name=name,
        kind="index",
        instances=np.arange(n),
        labels=labels,
        classes=tuple(interner.tokens),
    )
    return D, ds


def _fmt(x):
    return "%.17g" % x


def _write(path, lines):
    try:
        with open(path, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def write_vector_csv(path, ds, label_column=-1):
    width = ds.instances.shape[1] + 1
    col = label_column if label_column >= 0 else width + label_column
    lines = []
    for x, y in zip(ds.instances, ds.labels):
        fields = [_fmt(v) for v in x]
        fields.insert(col, ds.classes[y])
        lines.append(",".join(fields))
    _write(path, lines)


def write_ucr_tsv(path, ds, delimiter="\t"):
    lines = [
        delimiter.join([ds.classes[y]] + [_fmt(v) for v in x])
        for x, y in zip(ds.instances, ds.labels)
    ]
    _write(path, lines)


def write_distance_matrix(path, D, ds):
    """Write ``D`` in the labeled distance-matrix CSV format."""
    values = np.asarray(D)
    lines = [
        ",".join([ds.classes[y]] + [_fmt(v) for v in row])
        for row, y in zip(values, ds.labels)
    ]
    _write(path, lines)


def kfold_split(ds, k, seed=0):
    """Stratified, seeded assignment of instances to ``k`` folds.

    Members of each class are shuffled, classes are laid end to end and
    positions are dealt to folds round-robin. Per-class fold counts then
    differ by at most one and every fold is nonempty whenever ``k <= n``.
    """
    labels = ds.labels if isinstance(ds, LabeledDataset) else np.asarray(ds)
    n = len(labels)
    if not isinstance(k, (int, np.integer)) or not 2 <= k <= n:
        raise InvalidFoldCount(f"fold count must satisfy 2 <= k <= n={n}, got {k}")
    rng = np.random.default_rng(np.uint64(seed))
    order = np.concatenate(
        [rng.permutation(np.flatnonzero(labels == c)) for c in np.unique(labels)]
    )
    fold_of = np.empty(n, dtype=np.int64)
    fold_of[order] = np.arange(n) % k
    return SplitPlan(fold_of=fold_of, k=int(k), seed=int(seed))
