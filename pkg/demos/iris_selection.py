"""
Prototype selection on iris
===========================

Fits the selection model on the full iris set, then walks the error
against the fraction of prototypes kept under 5-fold cross validation,
for both score directions. The last step writes the nearest-neighbor
graph of a 15% selection as DOT.

Run from the repository root::

    python3 demos/iris_selection.py
"""

from pathlib import Path

import numpy as np

from reps import RepsConfig, build_matrix, export_nn_graph, fit_reps, fsr_error, load_vector_csv, nops_error

DATA = Path(__file__).resolve().parents[1] / "tests" / "data"

ds = load_vector_csv(DATA / "iris.csv", label_column=4)
D = build_matrix(ds, "euclidean")
print(f"{ds.n} instances, classes {list(ds.classes)}")

# one fit on everything: which instances get large weights?
config = RepsConfig(beta=2.0, C=0.001)
fit = fit_reps(D, ds.labels, config)
w = fit.solution.w
print(f"solver converged: {fit.solution.converged} after {fit.solution.iterations} steps")
for c, name in enumerate(ds.classes):
    members = ds.labels == c
    print(f"  {name:12s} mean w {w[members].mean():.3e}, mean margin {fit.problem.rho[members].mean():.3e}")

# setosa sits far from the other classes, so its margins (and weights) are
# tiny and its prototypes score lowest under the default direction
print(f"\nNoPS error (all prototypes): {nops_error(ds, D):.4f}")
print("fraction  ERR(keep highest)  ERR(keep lowest)")
low = config.with_(keep_highest_scores=False)
for fraction in (0.1, 0.15, 0.25, 0.5, 0.75, 1.0):
    hi_err = fsr_error(ds, D, config, fraction)
    lo_err = fsr_error(ds, D, low, fraction)
    print(f"  {fraction:5.2f}   {hi_err:8.4f}           {lo_err:8.4f}")

# graph of the 15% selection; render with `dot -Tsvg iris.dot > iris.svg`
chosen = fit.select(int(round(0.15 * ds.n))).selected
out = Path("iris.dot")
export_nn_graph(D, ds.labels, chosen, out, class_names=ds.classes, name="iris")
print(f"\nselected {chosen.size} prototypes, per class {np.bincount(ds.labels[chosen], minlength=3)}")
print(f"wrote {out}")
