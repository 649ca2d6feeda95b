"""Euclidean projection onto { v : y.v = 0, 0 <= v <= C } for signed labels y.

The projected point always has the closed form clip(z - mu * y, 0, C) for a
scalar multiplier mu chosen so the hyperplane constraint holds. The residual

    g(mu) = y . clip(z - mu * y, 0, C)

is continuous, piecewise linear and nonincreasing in mu, with slope equal to
minus the number of coordinates strictly inside the box. Two solvers are
provided: an exact one that locates the zero crossing of g among the 2n
breakpoints, and a fixed-point iteration that repeatedly re-solves the
hyperplane equation for the multiplier under the current box split. The exact
path doubles as the reference oracle for the iterative one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# g(mu) == 0 is tested with this slack so the early return is reachable on
# clipped floating-point sums, not only on exact zeros
EXACT_ZERO_TOL = 1e-12


def default_feas_tol(n: int, C: float) -> float:
    return 1e-8 * n * C


@dataclass(frozen=True)
class ProjectionResult:
    lam: np.ndarray
    mu: float
    iterations: int
    converged: bool


def _clip(z: np.ndarray, mu: float, y: np.ndarray, C: float) -> np.ndarray:
    return np.clip(z - mu * y, 0.0, C)


def _residual(z: np.ndarray, mu: float, y: np.ndarray, C: float) -> float:
    return float(y @ _clip(z, mu, y, C))


def project_exact(z: np.ndarray, ytilde: np.ndarray, C: float) -> ProjectionResult:
    """Exact projection via the breakpoint structure of g.

    Binary search over the sorted breakpoints brackets the zero crossing of g,
    then the crossing is solved on the bracketed linear piece using its integer
    slope. O(n log n); the feasible set is never empty (0 is always a member).
    """
    z = np.asarray(z, dtype=np.float64)
    y = np.asarray(ytilde, dtype=np.float64)
    if z.shape != y.shape or z.ndim != 1:
        raise ValueError(f"shape mismatch: z {z.shape} vs labels {y.shape}")
    if not C > 0:
        raise ValueError(f"C must be positive, got {C}")

    if z.min(initial=0.0) >= 0.0 and z.max(initial=0.0) <= C and abs(float(y @ z)) == 0.0:
        return ProjectionResult(lam=z.copy(), mu=0.0, iterations=0, converged=True)

    # the feasible set is invariant under a global label flip, so canonicalize
    # the sign; this makes the result bit-identical for y and -y
    flip = y[0] < 0
    if flip:
        y = -y

    # per coordinate, clip(z_i - mu y_i) has kinks where z_i - mu y_i hits 0
    # and C, i.e. at mu = y_i z_i and mu = y_i (z_i - C)
    a = y * z
    bps = np.sort(np.concatenate([a, a - C * y]))
    evals = 0

    def g(mu: float) -> float:
        nonlocal evals
        evals += 1
        return _residual(z, mu, y, C)

    lo, hi = 0, bps.shape[0] - 1
    g_lo = g(bps[lo])
    if g_lo <= 0.0:
        # g is constant left of the first breakpoint, so it is identically
        # zero there (all-negative labels); the clip at bps[0] is feasible
        mu = float(bps[lo])
    elif g(bps[hi]) > 0.0:  # unreachable analytically; guard against rounding
        mu = float(bps[hi])
    else:
        while hi - lo > 1:
            mid = (lo + hi) // 2
            g_mid = g(bps[mid])
            if g_mid > 0.0:
                lo, g_lo = mid, g_mid
            else:
                hi = mid
        left, right = float(bps[lo]), float(bps[hi])
        inner = z - 0.5 * (left + right) * y
        slope_count = int(np.count_nonzero((inner > 0.0) & (inner < C)))
        if slope_count > 0:
            mu = left + g_lo / slope_count
        else:
            # degenerate one-ulp bracket; refine by scalar bisection
            for _ in range(100):
                mid_mu = 0.5 * (left + right)
                if g(mid_mu) > 0.0:
                    left = mid_mu
                else:
                    right = mid_mu
            mu = right
    lam = _clip(z, mu, y, C)
    if flip:
        mu = -mu
    return ProjectionResult(lam=lam, mu=mu, iterations=evals, converged=True)


def project_fixed_point(z: np.ndarray, ytilde: np.ndarray, C: float,
                        eps: float, max_iter: int) -> ProjectionResult:
    """Iterative multiplier update from the box split of the clipped iterate.

    Each round clips lam = clip(z - mu y), returns early when the hyperplane
    residual vanishes, then re-solves the constraint for the multiplier using
    the current index split: coordinates clipped at C contribute C y_i, and
    the new multiplier is their sum plus the unprojected y_i z_i over interior
    coordinates, divided by the interior count. An empty interior falls back
    to a damped correction step. Stops when the multiplier moves by at most
    eps. Non-convergence is reported, never raised.
    """
    z = np.asarray(z, dtype=np.float64)
    y = np.asarray(ytilde, dtype=np.float64)
    if z.shape != y.shape or z.ndim != 1:
        raise ValueError(f"shape mismatch: z {z.shape} vs labels {y.shape}")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    feas_tol = default_feas_tol(z.shape[0], C)

    mu = 0.0
    for rounds in range(1, max_iter + 1):
        lam = _clip(z, mu, y, C)
        resid = float(y @ lam)
        if resid == 0.0 or abs(resid) <= EXACT_ZERO_TOL:
            return ProjectionResult(lam=lam, mu=mu, iterations=rounds, converged=True)
        at_cap = lam >= C
        interior = (lam > 0.0) & (lam < C)
        n_int = int(np.count_nonzero(interior))
        split = max(n_int, 1)
        cap_term = C * float(y[at_cap].sum())
        int_term = float(z[interior] @ y[interior])
        mu_next = ((split - n_int) / split) * mu + (cap_term + int_term) / split
        if abs(mu_next - mu) <= eps:
            lam = _clip(z, mu_next, y, C)
            ok = abs(float(y @ lam)) <= feas_tol
            return ProjectionResult(lam=lam, mu=mu_next, iterations=rounds, converged=ok)
        mu = mu_next
    lam = _clip(z, mu, y, C)
    return ProjectionResult(lam=lam, mu=mu, iterations=max_iter, converged=False)
