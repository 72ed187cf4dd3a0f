"""From learned weights to prototype scores and a selected prototype set."""

from dataclasses import dataclass, field

import numpy as np

from .dataset import kfold_split
from .errors import InvalidK
from .knn import evaluate_error
from .problem import RepsConfig, build_problem
from .ranking import compute_ranks

__all__ = [
    "PrototypeSet",
    "RepsFit",
    "extract_alpha",
    "score_prototypes",
    "select",
    "size_for_fraction",
    "fit_reps",
    "select_by_cv",
]


@dataclass
class PrototypeSet:
    selected: np.ndarray
    scores: np.ndarray
    k: int
    fraction: float = None
    cv_errors: dict = field(default=None, repr=False)


@dataclass
class RepsFit:
    """Everything produced by one run of the pipeline on a training set."""

    ranks: np.ndarray
    problem: object
    solution: object
    scores: np.ndarray

    def select(self, k):
        return select(self.scores, k, self.problem.config.keep_highest_scores)


def extract_alpha(w, beta, floor=1e-12):
    """Degradations ``log_beta(max(w, floor))``."""
    w = np.maximum(np.asarray(w, dtype=np.float64), floor)
    if beta == 2:
        return np.log2(w)
    return np.log(w) / np.log(beta)


def score_prototypes(alpha, ranks):
    """``s[j] = alpha[j] + min_{i != j} ranks[i, j]``."""
    alpha = np.asarray(alpha, dtype=np.float64)
    ranks = np.asarray(ranks)
    n = ranks.shape[0]
    if alpha.shape != (n,):
        raise ValueError(f"{alpha.size} alphas for {n} instances")
    if n < 2:
        return alpha.copy()
    masked = np.where(np.eye(n, dtype=bool), np.iinfo(np.int64).max, ranks.astype(np.int64))
    return alpha + masked.min(axis=0)


def select(scores, k, keep_highest=True):
    """Keep the ``k`` best scores; ties go to the lower index."""
    scores = np.asarray(scores, dtype=np.float64)
    n = scores.size
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= n:
        raise InvalidK(f"k must satisfy 1 <= k <= {n}, got {k}")
    key = -scores if keep_highest else scores
    order = np.lexsort((np.arange(n), key))
    selected = np.sort(order[:k])
    return PrototypeSet(selected=selected, scores=scores, k=int(k))


def size_for_fraction(fraction, n):
    """``max(1, round_half_up(fraction * n))``, capped at ``n``."""
    if not 0 < fraction <= 1:
        raise InvalidK(f"fraction must lie in (0, 1], got {fraction}")
    return int(min(n, max(1, np.floor(fraction * n + 0.5))))


def fit_reps(D, labels, config=None):
    """Ranks, QP, solution and prototype scores for one training set."""
    from .solvers import solve

    config = config or RepsConfig()
    ranks = compute_ranks(D)
    problem = build_problem(ranks, labels, config)
    solution = solve(problem)
    scores = score_prototypes(solution.alpha, ranks)
    return RepsFit(ranks=ranks, problem=problem, solution=solution, scores=scores)


def select_by_cv(ds, D, config=None, candidate_fractions=(1.0,), folds=5, seed=0):
    """Choose the prototype fraction by internal stratified cross validation.

    For every candidate fraction the mean validation error of 1-NN over
    the selected prototypes is measured; the smallest fraction among the
    best is refit on all of ``ds``. The fold count is capped at ``n``.
    """
    config = config or RepsConfig()
    fractions = sorted(set(float(f) for f in candidate_fractions))
    if not fractions:
        raise InvalidK("need at least one candidate fraction")
    for f in fractions:
        size_for_fraction(f, 1)
    D = np.asarray(D)
    labels = ds.labels
    plan = kfold_split(ds, min(folds, ds.n), seed)
    errors = {f: [] for f in fractions}
    for train, test in plan.folds():
        fit = fit_reps(D[np.ix_(train, train)], labels[train], config)
        for f in fractions:
            chosen = fit.select(size_for_fraction(f, train.size)).selected
            errors[f].append(evaluate_error(D, train[chosen], labels, test))
    mean_err = {f: float(np.mean(errors[f])) for f in fractions}
    best = min(fractions, key=lambda f: (mean_err[f], f))
    fit = fit_reps(D, labels, config)
    result = fit.select(size_for_fraction(best, ds.n))
    result.fraction = best
    result.cv_errors = mean_err
    return result
