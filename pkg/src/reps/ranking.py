"""Leave-one-out neighbor ranks."""

import numpy as np

from .errors import DegenerateData

__all__ = ["compute_ranks", "write_ranks"]


def compute_ranks(D):
    """Rank every other instance by distance, row by row.

    ``ranks[i, j]`` is the position (1 = nearest) of ``j`` among all
    instances except ``i`` when sorted by ``D[i, j]``; ties go to the
    smaller index. The diagonal holds 0 and carries no meaning.

    Returns an ``(n, n)`` int32 array, read-only.
    """
    D = np.asarray(D, dtype=np.float64)
    n = D.shape[0]
    if D.ndim != 2 or D.shape[1] != n:
        raise DegenerateData(f"expected a square matrix, got shape {D.shape}")
    if n < 2:
        raise DegenerateData("ranks need at least 2 instances")
    keyed = D.copy()
    # self sorts first so the remaining positions are exactly 1..n-1
    np.fill_diagonal(keyed, -np.inf)
    order = np.argsort(keyed, axis=1, kind="stable")
    ranks = np.empty((n, n), dtype=np.int32)
    positions = np.broadcast_to(np.arange(n, dtype=np.int32), (n, n))
    np.put_along_axis(ranks, order, positions, axis=1)
    ranks.setflags(write=False)
    return ranks


def write_ranks(path, ranks):
    """Debug dump of a rank matrix as integer CSV."""
    np.savetxt(path, np.asarray(ranks), fmt="%d", delimiter=",")
