"""Solvers for the nonnegative large-margin QP.

Both solvers optimize the same objective

    f(w) = ||w||^2 + C * sum_i max(0, rho_i - w . r_i),   w >= 0.

``solve_projected_gradient`` keeps one slack per instance. It runs
accelerated projected gradient ascent on the box-constrained dual

    max_{0 <= lam <= C}  rho . lam - 1/4 ||max(0, R^T lam)||^2

whose primal map ``w(lam) = max(0, R^T lam / 2)`` is the projection of the
unconstrained minimizer onto the nonnegative orthant. Working in the dual
keeps the iteration smooth where the primal hinge has kinks.

``solve_cutting_plane`` uses the one-slack formulation with a growing
working set of aggregated cuts. With the cut constraints averaged over
``n`` instances the equivalent one-slack weight is ``n * C / 2`` on
``1/2 ||w||^2``. Each restricted QP over the working set is solved exactly
through nonnegative least squares, since the cuts are often close to
parallel and first-order methods crawl on them.
"""

import numpy as np
from scipy.optimize import nnls

from .problem import RepsSolution

__all__ = [
    "objective",
    "objective_gradient",
    "dual_objective",
    "dual_gradient",
    "solve_projected_gradient",
    "solve_cutting_plane",
    "solve",
]

GAP_TOL = 1e-9
STALL_TOL = 1e-9
STALL_STEPS = 50


def _margins(p, w):
    return p.rho - p.r @ w


def objective(p, w):
    """Primal objective ``||w||^2 + C * sum(hinge)``."""
    w = np.asarray(w, dtype=np.float64)
    return float(w @ w + p.config.C * np.maximum(_margins(p, w), 0.0).sum())


def objective_gradient(p, w):
    """Gradient of :func:`objective` (a subgradient at kinks).

    Hinge terms that are exactly zero contribute nothing.
    """
    w = np.asarray(w, dtype=np.float64)
    active = _margins(p, w) > 0
    return 2.0 * w - p.config.C * (p.r[active].sum(axis=0))


def _primal_w(p, lam):
    return np.maximum(0.5 * (p.r.T @ lam), 0.0)


def dual_objective(p, lam):
    u = np.maximum(p.r.T @ lam, 0.0)
    return float(p.rho @ lam - 0.25 * (u @ u))


def dual_gradient(p, lam):
    return p.rho - p.r @ _primal_w(p, lam)


def _spectral_sq(M, iters=30):
    """Power-iteration estimate of the largest squared singular value."""
    if M.size == 0:
        return 0.0
    v = np.ones(M.shape[1]) / np.sqrt(M.shape[1])
    s = 0.0
    for _ in range(iters):
        u = M.T @ (M @ v)
        s = float(np.linalg.norm(u))
        if s == 0.0:
            return 0.0
        v = u / s
    return s


def _fista_ascent(fn, project, x0, L, max_iter, gap_tol=GAP_TOL):
    """Maximize a smooth concave function over a convex set.

    ``fn(x)`` returns ``(value, gradient, primal)`` where ``primal`` is
    the primal objective recovered from ``x`` (an upper bound on every
    dual value). The step ``1/L`` is halved whenever the quadratic lower
    model overshoots; momentum restarts when the dual value decreases.
    Stops on a relative duality gap below ``gap_tol``, or when the best
    primal value has not moved by more than ``STALL_TOL`` (relative) over
    ``STALL_STEPS`` steps while the gap is below ``1e-6``.
    """
    x = project(x0)
    fx, _, px = fn(x)
    y, t = x, 1.0
    L = max(L, 1e-300)
    best_x, best_p, best_d = x, px, fx
    stall = 0
    for it in range(1, max_iter + 1):
        fy, gy, _ = fn(y)
        while True:
            x_new = project(y + gy / L)
            d = x_new - y
            f_new, _, p_new = fn(x_new)
            if f_new >= fy + gy @ d - 0.5 * L * (d @ d) - 1e-15 * abs(fy):
                break
            L *= 2.0
        if p_new < best_p:
            improvement = (best_p - p_new) / max(abs(best_p), 1e-300)
            stall = stall + 1 if improvement < STALL_TOL else 0
            best_x, best_p = x_new, p_new
        else:
            stall += 1
        best_d = max(best_d, f_new)
        gap = best_p - best_d
        scale = max(abs(best_p), 1e-300)
        if gap <= gap_tol * scale or (stall >= STALL_STEPS and gap <= 1e-6 * scale):
            return best_x, it, True
        if f_new < fx:
            # adaptive restart
            y, t = x_new, 1.0
        else:
            t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            y = x_new + ((t - 1.0) / t_new) * (x_new - x)
            t = t_new
        x, fx = x_new, f_new
    return best_x, max_iter, False


def solve_projected_gradient(p):
    """Per-instance-slack solver (accelerated projected gradient)."""
    C = float(p.config.C)
    n = p.n
    if C == 0.0:
        w = np.zeros(n)
        return _solution(p, w, np.maximum(_margins(p, w), 0.0), 0, True, "projected_gradient")

    def fn(lam):
        w = _primal_w(p, lam)
        ww = float(w @ w)
        g = p.rho - p.r @ w
        return float(p.rho @ lam) - ww, g, ww + C * float(np.maximum(g, 0.0).sum())

    def project(lam):
        return np.clip(lam, 0.0, C)

    L = 0.5 * _spectral_sq(p.r)
    lam, iterations, converged = _fista_ascent(
        fn, project, np.full(n, C), L, p.config.max_iterations
    )
    w = _primal_w(p, lam)
    xi = np.maximum(_margins(p, w), 0.0)
    return _solution(p, w, xi, iterations, converged, "projected_gradient")


def _least_distance(A, h):
    """Minimum-norm ``w >= 0`` with ``A w >= h``, via nonnegative least squares.

    Returns ``(w, lam)`` with ``lam`` the multipliers of the ``A`` rows, or
    ``(None, None)`` when the constraints cannot be met.
    """
    m, n = A.shape
    G = np.vstack([A, np.eye(n)])
    E = np.vstack([G.T, np.concatenate([h, np.zeros(n)])])
    f = np.zeros(n + 1)
    f[n] = 1.0
    u, _ = nnls(E, f, maxiter=50 * (m + n))
    denom = 1.0 - float(E[n] @ u)
    if denom <= 1e-12:
        return None, None
    lam = u / denom
    return np.maximum(G.T @ lam, 0.0), lam[:m]


def _restricted_qp(A, b, cap):
    """Solve ``min 1/2||w||^2 + cap*xi`` s.t. ``A w >= b - xi``, ``w, xi >= 0``.

    For a fixed ``xi`` this is a least-distance problem with an exact finite
    solution. Its value falls with ``xi`` at rate equal to the multiplier sum
    ``S(xi)``, which is nonincreasing and piecewise affine, so the optimal
    ``xi`` is zero when ``S(0) <= cap`` and otherwise solves ``S(xi) = cap``.
    That root is found by safeguarded regula falsi. The problem is scaled by
    ``max(b)`` first so the solve sees values near one.

    Returns ``(w, xi, evaluations)`` with ``xi`` the largest cut violation
    at ``w``, which makes ``(w, xi)`` feasible for every cut.
    """
    s = float(b.max())
    if s <= 0.0:
        return np.zeros(A.shape[1]), 0.0, 0
    bs = b / s
    target = cap / s
    evals = 0

    def solve_at(t):
        nonlocal evals
        evals += 1
        w, lam = _least_distance(A, bs - t)
        return w, (np.inf if lam is None else float(lam.sum()))

    lo, hi = 0.0, 1.0
    w_hi = np.zeros(A.shape[1])
    w, s_lo = solve_at(lo)
    if s_lo <= target:
        w_hi = w
    else:
        s_hi = 0.0  # w = 0 is optimal at xi = max(b)
        if target > 0.0:
            side = 0
            for _ in range(200):
                if np.isfinite(s_lo) and s_lo > s_hi:
                    t = lo + (s_lo - target) * (hi - lo) / (s_lo - s_hi)
                    # keep the step inside the bracket and off its ends
                    t = min(max(t, lo + 1e-3 * (hi - lo)), hi - 1e-3 * (hi - lo))
                else:
                    t = 0.5 * (lo + hi)
                w, s_t = solve_at(t)
                if abs(s_t - target) <= 1e-12 * target:
                    w_hi, hi = w, t
                    break
                if s_t > target:
                    lo, s_lo = t, s_t
                    if side == -1:
                        s_hi = target + 0.5 * (s_hi - target)
                    side = -1
                else:
                    w_hi, hi, s_hi = w, t, s_t
                    if side == 1 and np.isfinite(s_lo):
                        s_lo = target + 0.5 * (s_lo - target)
                    side = 1
                if hi - lo <= 1e-15:
                    break
    w = s * w_hi
    return w, max(0.0, float(np.max(b - A @ w))), evals


def solve_cutting_plane(p):
    """One-slack cutting-plane solver.

    Starting from an empty working set, each round forms the most violated
    cut ``c_i = [w . r_i < rho_i]`` at the current ``w``. The loop ends once
    that cut is violated by no more than the current slack plus
    ``epsilon`` (both averaged over instances); otherwise the cut joins the
    working set and the restricted QP is solved again.

    The reported slack and objective are those of the last restricted QP.
    The full objective at ``w`` (kept in ``extra["full_objective"]``) may
    exceed it by up to ``C * epsilon * sum(rho)``.
    """
    cfg = p.config
    n = p.n
    cap = 0.5 * n * float(cfg.C)
    # margins are sums of beta**-rank terms, far below 1 on most data, so
    # the tolerance is taken relative to their mean
    tol = cfg.epsilon * float(p.rho.mean())
    cuts_a, cuts_b = [], []
    w = np.zeros(n)
    xi_bar = 0.0
    converged = False
    inner_total = 0
    rounds = 0
    while rounds < cfg.max_iterations:
        c = (p.r @ w) < p.rho
        a_c = (c.astype(np.float64) @ p.r) / n
        b_c = float(p.rho[c].sum()) / n
        rounds += 1
        violation = b_c - float(a_c @ w)
        if violation <= xi_bar + tol:
            converged = True
            break
        cuts_a.append(a_c)
        cuts_b.append(b_c)
        A = np.vstack(cuts_a)
        b = np.array(cuts_b)
        w, xi_bar, inner = _restricted_qp(A, b, cap)
        inner_total += inner
    xi = np.array([n * xi_bar])
    sol = _solution(p, w, xi, rounds, converged, "cutting_plane")
    sol.extra = {
        "working_set_a": np.array(cuts_a).reshape(len(cuts_a), n),
        "working_set_b": np.array(cuts_b),
        "shared_slack": xi_bar,
        "inner_iterations": inner_total,
        "full_objective": objective(p, sol.w),
    }
    return sol


def _solution(p, w, xi, iterations, converged, solver):
    from .selection import extract_alpha

    w = np.maximum(np.asarray(w, dtype=np.float64), 0.0)
    xi = np.asarray(xi, dtype=np.float64)
    obj = float(w @ w + p.config.C * xi.sum())
    alpha = extract_alpha(w, p.config.beta, p.config.weight_floor)
    return RepsSolution(
        w=w,
        xi=xi,
        alpha=alpha,
        objective=obj,
        iterations=int(iterations),
        converged=bool(converged),
        solver=solver,
    )


def solve(p):
    """Dispatch on ``p.config.solver``."""
    if p.config.solver == "cutting_plane":
        return solve_cutting_plane(p)
    return solve_projected_gradient(p)
