"""1-nearest-neighbor prediction over a prototype set."""

from dataclasses import dataclass

import numpy as np

from .errors import EmptyPrototypeSet

__all__ = [
    "Prediction",
    "predict_1nn",
    "predict_adjusted",
    "query_ranks",
    "nearest_prototypes",
    "evaluate_error",
]


@dataclass(frozen=True)
class Prediction:
    label: int
    neighbor: int
    distance: float


def _check(values, proto_labels):
    values = np.asarray(values, dtype=np.float64).ravel()
    proto_labels = np.asarray(proto_labels).ravel()
    if values.size == 0:
        raise EmptyPrototypeSet("no prototypes to predict from")
    if values.size != proto_labels.size:
        raise ValueError(
            f"{values.size} distances but {proto_labels.size} prototype labels"
        )
    return values, proto_labels


def predict_1nn(dists_to_prototypes, proto_labels):
    """Label of the nearest prototype; ties go to the lower index."""
    d, proto_labels = _check(dists_to_prototypes, proto_labels)
    j = int(np.argmin(d))
    return Prediction(label=proto_labels[j].item(), neighbor=j, distance=float(d[j]))


def predict_adjusted(ranks_to_prototypes, alpha, proto_labels):
    """Label of the prototype with the smallest adjusted rank ``R + alpha``."""
    ranks, proto_labels = _check(ranks_to_prototypes, proto_labels)
    alpha = np.broadcast_to(np.asarray(alpha, dtype=np.float64), ranks.shape)
    adjusted = ranks + alpha
    j = int(np.argmin(adjusted))
    return Prediction(
        label=proto_labels[j].item(), neighbor=j, distance=float(adjusted[j])
    )


def query_ranks(dists_to_prototypes):
    """Ranks ``1..m`` of the prototypes seen from one query (ties by index)."""
    d = np.asarray(dists_to_prototypes, dtype=np.float64).ravel()
    ranks = np.empty(d.size, dtype=np.int64)
    ranks[np.argsort(d, kind="stable")] = np.arange(1, d.size + 1)
    return ranks


def nearest_prototypes(D, proto_indices, query_indices):
    """Index (into ``D``) of each query's nearest prototype, excluding itself."""
    D = np.asarray(D)
    protos = np.sort(np.asarray(proto_indices, dtype=np.int64))
    queries = np.asarray(query_indices, dtype=np.int64)
    if protos.size == 0:
        raise EmptyPrototypeSet("prototype set is empty")
    sub = D[np.ix_(queries, protos)].astype(np.float64, copy=True)
    sub[queries[:, None] == protos[None, :]] = np.inf
    if queries.size and np.any(np.all(np.isinf(sub), axis=1)):
        q = int(queries[np.flatnonzero(np.all(np.isinf(sub), axis=1))[0]])
        raise EmptyPrototypeSet(f"query {q} has no prototype besides itself")
    return protos[np.argmin(sub, axis=1)]


def evaluate_error(D, proto_indices, labels, query_indices):
    """Fraction of queries misclassified by 1-NN over the prototypes.

    A query that is itself a prototype is never its own neighbor.
    """
    labels = np.asarray(labels)
    queries = np.asarray(query_indices, dtype=np.int64)
    if queries.size == 0:
        return 0.0
    nn = nearest_prototypes(D, proto_indices, queries)
    return float(np.mean(labels[nn] != labels[queries]))
