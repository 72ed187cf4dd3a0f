"""Configuration, the exponential-rank QP and its solution container."""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import EmptyInput, SingleClass

__all__ = [
    "SOLVERS",
    "RepsConfig",
    "RepsProblem",
    "RepsSolution",
    "soft_max",
    "build_problem",
]

SOLVERS = ("projected_gradient", "cutting_plane")

_DEFAULT_MAX_ITER = {"projected_gradient": 10000, "cutting_plane": 1000}


@dataclass(frozen=True)
class RepsConfig:
    """Hyperparameters of the selection pipeline.

    ``max_iterations`` left as ``None`` resolves to 10000 gradient steps
    or 1000 cuts depending on ``solver``. ``epsilon`` is the cutting-plane
    termination tolerance.
    """

    beta: float = 2.0
    C: float = 0.001
    epsilon: float = 1e-4
    solver: str = "projected_gradient"
    max_iterations: int = None
    weight_floor: float = 1e-12
    keep_highest_scores: bool = True

    def __post_init__(self):
        if not self.beta > 1:
            raise ValueError(f"beta must exceed 1, got {self.beta}")
        if not self.C >= 0:
            raise ValueError(f"C must be nonnegative, got {self.C}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not self.weight_floor > 0:
            raise ValueError(f"weight_floor must be positive, got {self.weight_floor}")
        if self.solver not in SOLVERS:
            raise ValueError(f"solver must be one of {SOLVERS}, got {self.solver!r}")
        if self.max_iterations is None:
            object.__setattr__(self, "max_iterations", _DEFAULT_MAX_ITER[self.solver])
        elif self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")

    def with_(self, **changes):
        if "solver" in changes and "max_iterations" not in changes:
            changes["max_iterations"] = None
        return replace(self, **changes)

    def as_dict(self):
        return {
            "beta": self.beta,
            "C": self.C,
            "epsilon": self.epsilon,
            "solver": self.solver,
            "max_iterations": self.max_iterations,
            "weight_floor": self.weight_floor,
            "keep_highest_scores": self.keep_highest_scores,
        }


@dataclass(frozen=True)
class RepsProblem:
    """``r[i]`` is the signed exponential-rank row of training instance ``i``
    and ``rho[i]`` its margin; the QP is
    ``min ||w||^2 + C sum_i max(0, rho_i - w . r_i)`` over ``w >= 0``."""

    r: np.ndarray
    rho: np.ndarray
    labels: np.ndarray
    config: RepsConfig

    @property
    def n(self):
        return self.r.shape[0]


@dataclass
class RepsSolution:
    """Solver output.

    ``xi`` holds one slack per instance (gradient solver) or the single
    shared slack, expressed as a sum over instances (cutting plane), so
    ``objective == ||w||^2 + C * sum(xi)`` in both cases.
    """

    w: np.ndarray
    xi: np.ndarray
    alpha: np.ndarray
    objective: float
    iterations: int
    converged: bool
    solver: str = ""
    extra: dict = field(default_factory=dict)


def soft_max(values, beta=2.0):
    """``log_beta(sum(beta ** v))`` evaluated with a max shift."""
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise EmptyInput("soft_max needs at least one value")
    if not beta > 1:
        raise ValueError(f"beta must exceed 1, got {beta}")
    m = v.max()
    log_beta = np.log(beta)
    return float(m + np.log(np.sum(np.exp((v - m) * log_beta))) / log_beta)


def build_problem(ranks, labels, config=None):
    """Assemble the exponential-rank features and margins.

    ``r[i, j] = +beta**-R[i, j]`` when ``i`` and ``j`` share a class and
    ``-beta**-R[i, j]`` otherwise, with ``r[i, i] = 0``;
    ``rho[i] = (beta - 1) * sum`` of ``beta**-R[i, q]`` over opposite-class ``q``.
    """
    config = config or RepsConfig()
    ranks = np.asarray(ranks)
    labels = np.asarray(labels, dtype=np.int64)
    n = ranks.shape[0]
    if ranks.shape != (n, n) or labels.shape != (n,):
        raise ValueError(f"ranks {ranks.shape} and labels {labels.shape} disagree")
    same = labels[:, None] == labels[None, :]
    opposite = ~same
    lonely = ~opposite.any(axis=1)
    if lonely.any():
        raise SingleClass(
            f"instance {int(np.flatnonzero(lonely)[0])} has no opposite-class neighbor"
        )
    decay = np.power(float(config.beta), -ranks.astype(np.float64))
    np.fill_diagonal(decay, 0.0)
    r = np.where(same, decay, -decay)
    rho = (config.beta - 1.0) * np.where(opposite, decay, 0.0).sum(axis=1)
    r.setflags(write=False)
    rho.setflags(write=False)
    return RepsProblem(r=r, rho=rho, labels=labels, config=config)
