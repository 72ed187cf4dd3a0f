"""
A four-point walk through the selection pipeline
================================================

Two classes of two points each, small enough to check every number by
hand. The script goes from distances to ranks, from ranks to the
exponential-rank features and margins, through the QP, and ends with
prototype scores and a selection.
"""

import numpy as np

from reps import RepsConfig, build_problem, compute_ranks, score_prototypes, select, solve

# pairwise distances; points 0 and 1 are class 0, points 2 and 3 class 1
D = np.array(
    [
        [0.0, 1.0, 4.0, 5.0],
        [1.0, 0.0, 3.0, 6.0],
        [4.0, 3.0, 0.0, 2.0],
        [5.0, 6.0, 2.0, 0.0],
    ]
)
labels = np.array([0, 0, 1, 1])

# R[i, j] is the leave-one-out rank of j among i's neighbors (1 = nearest)
R = compute_ranks(D)
print("ranks\n", R)

# same-class neighbors push w up, opposite-class neighbors pull it down
config = RepsConfig(beta=2.0, C=1e6)
p = build_problem(R, labels, config)
print("features r\n", p.r)
print("margins rho", p.rho)

# with a huge C every margin constraint is met; w = 3 makes them all tight
sol = solve(p)
print("w", np.round(sol.w, 6), "objective", round(sol.objective, 6))
print("r @ w", np.round(p.r @ sol.w, 6), "vs rho", p.rho)

# the degradation of each prototype is log_beta(w), its score adds the best
# rank it reaches in any column
scores = score_prototypes(sol.alpha, R)
print("alpha", np.round(sol.alpha, 6))
print("scores", np.round(scores, 6))

# keep two prototypes, best scores first
print("selected", select(scores, 2).selected)
