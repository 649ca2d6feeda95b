"""Brute-force reference solvers used only by the test suite.

These deliberately avoid the production kernel/svm/projection helpers so the
main implementation is never checked against itself: the projection reference
is a plain scalar bisection, and the dual reference is a slow projected
descent written out longhand. Sizes are capped; these are correctness
anchors, not solvers.
"""

from __future__ import annotations

import numpy as np

PROJECT_CAP = 64
SOLVE_CAP = 200
BISECT_ITERS = 200


def oracle_project(z: np.ndarray, ytilde: np.ndarray, C: float) -> np.ndarray:
    """Bisection on the multiplier over a bracket that provably contains it."""
    z = np.asarray(z, dtype=np.float64)
    y = np.asarray(ytilde, dtype=np.float64)
    if z.shape[0] > PROJECT_CAP:
        raise ValueError(f"oracle_project capped at n={PROJECT_CAP}")
    span = float(np.abs(z).max(initial=0.0)) + C
    lo, hi = -span, span

    def residual(mu: float) -> float:
        return float(y @ np.clip(z - mu * y, 0.0, C))

    for _ in range(BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if residual(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    mu = 0.5 * (lo + hi)
    return np.clip(z - mu * y, 0.0, C)


def oracle_solve_dual(qtilde: np.ndarray, ytilde: np.ndarray, C: float,
                      tol: float = 1e-10, max_steps: int = 10**6,
                      ) -> tuple[np.ndarray, bool]:
    """Reference optimum of 0.5 v'Qv - 1'v over the box-plus-hyperplane set.

    Conservative projected descent with step 1 / (n * max|Q|), iterated until
    the sup-norm change drops below tol. Returns (point, converged); on budget
    exhaustion the last iterate is returned with converged=False.
    """
    Q = np.asarray(qtilde, dtype=np.float64)
    y = np.asarray(ytilde, dtype=np.float64)
    n = y.shape[0]
    if n > SOLVE_CAP:
        raise ValueError(f"oracle_solve_dual capped at n={SOLVE_CAP}")
    step = 1.0 / (n * float(np.abs(Q).max()))
    lam = np.zeros(n)
    for _ in range(max_steps):
        grad = Q @ lam - 1.0
        nxt = oracle_project(lam - step * grad, y, C)
        if float(np.abs(nxt - lam).max()) <= tol:
            return nxt, True
        lam = nxt
    return lam, False


def oracle_objective(qtilde: np.ndarray, lam: np.ndarray) -> float:
    """Double-loop evaluation of the dual objective."""
    n = lam.shape[0]
    total = 0.0
    for i in range(n):
        for j in range(n):
            total += 0.5 * lam[i] * qtilde[i, j] * lam[j]
    return total - float(sum(lam))


def oracle_kkt_residual(qtilde: np.ndarray, ytilde: np.ndarray, C: float,
                        lam: np.ndarray, bound_tol: float = 1e-7) -> float:
    """Worst violation of the dual stationarity conditions at lam.

    With grad = Q lam - 1 and a multiplier b estimated from the interior
    coordinates, optimality requires grad + b*y >= 0 where lam is at 0,
    <= 0 where lam is at C, and == 0 strictly inside.
    """
    Q = np.asarray(qtilde, dtype=np.float64)
    y = np.asarray(ytilde, dtype=np.float64)
    grad = Q @ lam - 1.0
    interior = (lam > bound_tol) & (lam < C - bound_tol)
    if interior.any():
        b = -float((grad[interior] * y[interior]).mean())
    else:
        b = 0.0
    adj = grad + b * y
    worst = 0.0
    for i in range(lam.shape[0]):
        if lam[i] <= bound_tol:
            worst = max(worst, -adj[i])
        elif lam[i] >= C - bound_tol:
            worst = max(worst, adj[i])
        else:
            worst = max(worst, abs(adj[i]))
    return worst
