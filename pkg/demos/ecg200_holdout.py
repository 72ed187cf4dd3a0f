"""
Time series: ECG200 under dynamic time warping
==============================================

Uses the published train/test split of ECG200. Distances are DTW with a
Sakoe-Chiba band of 5, computed once over the merged set. The script
compares the selection against plain 1-NN at several selection rates,
sweeps beta, and ranks every (error, selection rate) pair by Pareto
dominance.

Run from the repository root::

    python3 demos/ecg200_holdout.py
"""

from pathlib import Path

import numpy as np

from reps import (
    EvalRecord,
    LabeledDataset,
    RepsConfig,
    UndefinedLOR,
    build_matrix,
    holdout_errors,
    load_ucr_tsv,
    log_odds_ratio,
    pareto_rank,
)

DATA = Path(__file__).resolve().parents[1] / "tests" / "data"

train_ds = load_ucr_tsv(DATA / "ECG200_TRAIN.tsv")
test_ds = load_ucr_tsv(DATA / "ECG200_TEST.tsv", classes=train_ds.classes)

# one matrix over train + test so every query sees every candidate prototype
merged = LabeledDataset(
    "ECG200",
    "series",
    np.vstack([train_ds.instances, test_ds.instances]),
    np.concatenate([train_ds.labels, test_ds.labels]),
    train_ds.classes,
)
D = build_matrix(merged, "dtw", window=5)
train = np.arange(train_ds.n)
test = np.arange(train_ds.n, merged.n)
print(f"{train.size} training and {test.size} test series of length {train_ds.instances.shape[1]}")

config = RepsConfig(beta=2.0, C=0.001)
records = []
print("\n SLR    ERR    NoPS    LOR")
for slr in (0.25, 0.5, 0.75, 0.88, 1.0):
    err, err_nops, k, _ = holdout_errors(D, merged.labels, train, test, config, slr)
    try:
        lor = f"{log_odds_ratio(err, k / train.size, err_nops):+.3f}"
    except UndefinedLOR:
        # no loss to trade against, or nothing pruned
        lor = "  n/a"
    print(f"{k / train.size:5.2f}  {err:.3f}  {err_nops:.3f}  {lor}")
    records.append(EvalRecord("REPS", "ECG200", err, k / train.size, beta=2.0, k=k, n_train=train.size))
records.append(EvalRecord("NoPS", "ECG200", err_nops, 1.0))

# a larger beta makes the features decay faster with rank
print("\nbeta   ERR at SLR 0.5")
for beta in (1.5, 2.0, 3.0, 4.0):
    err, _, _, _ = holdout_errors(D, merged.labels, train, test, config.with_(beta=beta), 0.5)
    print(f"{beta:4.1f}   {err:.3f}")

# rank 1 means no other run is at least as good on both axes and better on one
ranking = pareto_rank(records)
print("\nPareto ranks (smaller ERR and SLR are better)")
for rec, rank in zip(records, ranking.ranks):
    print(f"  {rec.method:5s} SLR {rec.slr:.2f} ERR {rec.err:.3f}  rank {rank}")
