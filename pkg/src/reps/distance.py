"""Pairwise dissimilarities: Euclidean for feature rows, banded DTW for series."""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import (
    AsymmetryError,
    DimensionMismatch,
    EmptySeries,
    MatchInfeasible,
    MetricMismatch,
    NegativeDistance,
    NonzeroDiagonal,
)

__all__ = ["DistanceMatrix", "euclidean", "dtw", "build_matrix", "default_threads"]

DEFAULT_WINDOW = 5
_CHUNK = 4096


class DistanceMatrix:
    """Read-only symmetric, nonnegative, zero-diagonal ``n x n`` matrix.

    Instances convert to a numpy array through ``np.asarray``.
    """

    __slots__ = ("_values",)

    def __init__(self, values):
        values = np.array(values, dtype=np.float64)
        _validate(values)
        values.setflags(write=False)
        self._values = values

    @classmethod
    def from_array(cls, values, rtol=1e-9):
        """Validate ``values``, averaging asymmetry within ``rtol`` (relative)."""
        values = np.array(values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise DimensionMismatch(f"distance matrix must be square, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise NegativeDistance("distance matrix contains non-finite entries")
        diag = np.diagonal(values)
        if np.any(diag != 0):
            i = int(np.flatnonzero(diag != 0)[0])
            raise NonzeroDiagonal(f"D[{i}][{i}] = {diag[i]!r}, expected 0")
        if np.any(values < 0):
            i, j = np.argwhere(values < 0)[0]
            raise NegativeDistance(f"D[{i}][{j}] = {values[i, j]!r} is negative")
        gap = np.abs(values - values.T)
        scale = np.maximum(np.abs(values), np.abs(values.T))
        bad = gap > rtol * scale
        if np.any(bad):
            i, j = np.argwhere(bad)[0]
            raise AsymmetryError(
                f"D[{i}][{j}] = {values[i, j]!r} but D[{j}][{i}] = {values[j, i]!r}"
            )
        values = 0.5 * (values + values.T)
        return cls(values)

    @property
    def values(self):
        return self._values

    @property
    def n(self):
        return self._values.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._values
        return self._values.astype(dtype)

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, DistanceMatrix):
            return NotImplemented
        return np.array_equal(self._values, other._values)

    def __repr__(self):
        return f"DistanceMatrix(n={self.n})"

    def take(self, indices):
        """Square submatrix over ``indices`` (in the given order)."""
        indices = np.asarray(indices, dtype=np.int64)
        return DistanceMatrix(self._values[np.ix_(indices, indices)])

    def scaled(self, factor):
        return DistanceMatrix(self._values * factor)


def _validate(values):
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise DimensionMismatch(f"distance matrix must be square, got {values.shape}")
    if not np.all(np.isfinite(values)):
        raise NegativeDistance("distance matrix contains non-finite entries")
    if np.any(np.diagonal(values) != 0):
        raise NonzeroDiagonal("distance matrix has a nonzero diagonal entry")
    if np.any(values < 0):
        raise NegativeDistance("distance matrix has a negative entry")
    if not np.array_equal(values, values.T):
        raise AsymmetryError("distance matrix is not symmetric")


def _euclidean_rows(A, B):
    diff = A - B
    return np.sqrt(np.sum(diff * diff, axis=1))


def euclidean(a, b):
    """Euclidean distance between two feature rows."""
    a = np.asarray(a, dtype=np.float64).reshape(1, -1)
    b = np.asarray(b, dtype=np.float64).reshape(1, -1)
    if a.shape != b.shape:
        raise DimensionMismatch(f"dimensions differ: {a.shape[1]} vs {b.shape[1]}")
    return float(_euclidean_rows(a, b)[0])


def _dtw_rows(A, B, window):
    # A: (m, la), B: (m, lb); one alignment per row. Two rolling rows of the
    # cumulative-cost table, laid out (lb + 1, m) so each cell is contiguous.
    m, la = A.shape
    lb = B.shape[1]
    At = np.ascontiguousarray(A.T)
    Bt = np.ascontiguousarray(B.T)
    prev = np.full((lb + 1, m), np.inf)
    prev[0] = 0.0
    cur = np.empty_like(prev)
    for i in range(1, la + 1):
        cur.fill(np.inf)
        lo = max(1, i - window)
        hi = min(lb, i + window)
        a = At[i - 1]
        for j in range(lo, hi + 1):
            d = a - Bt[j - 1]
            best = np.minimum(np.minimum(prev[j], cur[j - 1]), prev[j - 1])
            cur[j] = d * d + best
        prev, cur = cur, prev
    return np.sqrt(prev[lb])


def _check_series(a, b, window):
    if a.size == 0 or b.size == 0:
        raise EmptySeries("DTW needs nonempty series")
    if window < 0:
        raise ValueError(f"window must be nonnegative, got {window}")
    if abs(a.size - b.size) > window:
        raise MatchInfeasible(
            f"lengths {a.size} and {b.size} cannot be aligned within window {window}"
        )


def dtw(a, b, window=DEFAULT_WINDOW):
    """Dynamic time warping distance under a Sakoe-Chiba band.

    Local cost is the squared difference; the square root of the minimum
    cumulative cost over paths with ``|i - j| <= window`` is returned, so
    ``window=0`` on equal-length series gives the Euclidean distance.
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    window = int(window)
    _check_series(a, b, window)
    # keep the rolling rows over the shorter series
    if b.size > a.size:
        a, b = b, a
    return float(_dtw_rows(a[None, :], b[None, :], window)[0])


def default_threads():
    """Worker count from ``REPS_NUM_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("REPS_NUM_THREADS", "1")))
    except ValueError:
        return 1


def build_matrix(ds, metric="euclidean", window=DEFAULT_WINDOW, n_jobs=None):
    """Full mutual distance matrix of a dataset.

    ``metric`` is ``"euclidean"`` (feature rows) or ``"dtw"`` (series).
    Only the upper triangle is computed; chunks of pairs are spread over
    ``n_jobs`` threads and every entry is produced by exactly one
    elementwise kernel call, so the result does not depend on ``n_jobs``.
    """
    expected = {"euclidean": "vectors", "dtw": "series"}
    if metric not in expected:
        raise MetricMismatch(f"unknown metric {metric!r}")
    if ds.kind != expected[metric]:
        raise MetricMismatch(f"metric {metric!r} cannot be used with {ds.kind!r} data")
    X = np.asarray(ds.instances, dtype=np.float64)
    n = X.shape[0]
    if metric == "dtw":
        if X.shape[1] == 0:
            raise EmptySeries("DTW needs nonempty series")
        window = int(window)
        if window < 0:
            raise ValueError(f"window must be nonnegative, got {window}")

        def kernel(A, B):
            return _dtw_rows(A, B, window)
    else:
        kernel = _euclidean_rows

    rows, cols = np.triu_indices(n, 1)
    out = np.empty(rows.size)
    bounds = [(s, min(s + _CHUNK, rows.size)) for s in range(0, rows.size, _CHUNK)]

    def work(bound):
        s, e = bound
        out[s:e] = kernel(X[rows[s:e]], X[cols[s:e]])

    n_jobs = default_threads() if n_jobs is None else max(1, int(n_jobs))
    if n_jobs == 1 or len(bounds) <= 1:
        for b in bounds:
            work(b)
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            list(pool.map(work, bounds))

    values = np.zeros((n, n))
    values[rows, cols] = out
    values[cols, rows] = out
    return DistanceMatrix(values)
