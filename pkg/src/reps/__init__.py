"""Large-margin prototype selection for 1-nearest-neighbor classification.

Typical use::

    from reps import load_vector_csv, build_matrix, fit_reps, RepsConfig

    ds = load_vector_csv("iris.csv")
    D = build_matrix(ds, "euclidean")
    fit = fit_reps(D, ds.labels, RepsConfig(beta=2.0, C=0.001))
    prototypes = fit.select(22).selected
"""

__version__ = "0.1.0"

from .dataset import (
    LabeledDataset,
    SplitPlan,
    kfold_split,
    load_distance_matrix,
    load_ucr_tsv,
    load_vector_csv,
    write_distance_matrix,
    write_ucr_tsv,
    write_vector_csv,
)
from .distance import DistanceMatrix, build_matrix, dtw, euclidean
from .errors import *  # noqa: F401,F403
from .evaluation import (
    EvalRecord,
    ParetoRanking,
    beta_sweep,
    dominates,
    emit_report,
    export_nn_graph,
    fsr_error,
    holdout_errors,
    log_odds_ratio,
    nops_error,
    pareto_rank,
    read_report_csv,
    selection_rate,
)
from .knn import Prediction, evaluate_error, predict_1nn, predict_adjusted
from .problem import RepsConfig, RepsProblem, RepsSolution, build_problem, soft_max
from .ranking import compute_ranks
from .selection import (
    PrototypeSet,
    RepsFit,
    extract_alpha,
    fit_reps,
    score_prototypes,
    select,
    select_by_cv,
    size_for_fraction,
)
from .solvers import solve, solve_cutting_plane, solve_projected_gradient
