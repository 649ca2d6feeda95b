"""Label-poisoning adversary: randomized flips of the highest-weight points.

The attacker reads the model's dual weights, takes the B points with the
largest weights (the most influential support vectors), and flips the labels
of k of them chosen uniformly at random. Flips are always applied to the
round-start labels, so the poisoned set is rebuilt fresh each round rather
than accumulating. The multiclass variant pools per-class candidate sets and
reassigns class labels according to a flip distribution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import SplitMix64


@dataclass(frozen=True)
class AttackSpec:
    """Budget of candidate points (budget) and flips per round (flips)."""

    budget: int
    flips: int
    seed: int
    warmup_rounds: int = 1

    def __post_init__(self):
        if self.flips < 0 or self.budget < 0:
            raise ValueError("budget and flips must be nonnegative")
        if self.flips > self.budget:
            raise ValueError(f"flips ({self.flips}) exceeds budget ({self.budget})")
        if self.warmup_rounds < 0:
            raise ValueError("warmup_rounds must be nonnegative")


def select_candidates(dual_coef: np.ndarray, budget: int) -> list[int]:
    """Indices of the `budget` largest dual weights, ties by ascending index."""
    lam = np.asarray(dual_coef, dtype=np.float64)
    n = lam.shape[0]
    if budget > n:
        raise ValueError(f"budget {budget} exceeds {n} training points")
    order = np.lexsort((np.arange(n), -lam))
    return [int(i) for i in order[:budget]]


def randomized_topk_flip(labels: np.ndarray, dual_coef: np.ndarray,
                         spec: AttackSpec, rng: SplitMix64) -> tuple[np.ndarray, frozenset[int]]:
    """Flip k labels drawn uniformly from the top-B candidate pool.

    Pure in its inputs: the input labels are left untouched and a fresh array
    is returned. The candidate pool is canonicalized to ascending index before
    sampling so the draw depends only on pool membership, not ranking order.
    """
    y = np.asarray(labels)
    if spec.flips == 0:
        return y.copy(), frozenset()
    pool = sorted(select_candidates(dual_coef, spec.budget))
    picked = rng.sample(pool, spec.flips)
    flipped = frozenset(picked)
    out = y.copy()
    idx = list(flipped)
    out[idx] = -out[idx]
    return out, flipped


def multiclass_flip(class_labels: np.ndarray, per_class_coef: list[np.ndarray],
                    budgets: list[int], flips: int, q: np.ndarray | None,
                    rng: SplitMix64) -> tuple[np.ndarray, frozenset[int]]:
    """Union the per-class candidate pools, then reassign k class labels.

    Each selected point's class is redrawn from the flip distribution q
    restricted to classes other than its current one (uniform when q is None).
    With two classes the reassignment is deterministic, so the draw stream
    matches the binary attacker's.
    """
    y = np.asarray(class_labels)
    m = len(per_class_coef)
    if len(budgets) != m:
        raise ValueError("one budget per class required")
    if q is not None:
        q = np.asarray(q, dtype=np.float64)
        if q.shape != (m,) or q.min() < 0 or q.sum() <= 0:
            raise ValueError("q must be a nonnegative weight per class")
    pool: set[int] = set()
    for coef, budget in zip(per_class_coef, budgets):
        pool.update(select_candidates(coef, budget))
    candidates = sorted(pool)
    take = min(flips, len(candidates))
    picked = sorted(rng.sample(candidates, take))
    out = y.copy()
    classes = np.arange(1, m + 1)
    for i in picked:
        cur = int(out[i])
        others = classes[classes != cur]
        if others.size == 1:
            out[i] = int(others[0])
            continue
        weights = np.ones(others.size) if q is None else q[others - 1]
        total = float(weights.sum())
        if total <= 0:
            raise ValueError(f"flip distribution q has no mass outside class {cur}")
        # inverse-CDF draw with a 53-bit uniform from the portable stream
        u = rng.next_u64() >> 11
        r = (u / float(1 << 53)) * total
        acc = 0.0
        chosen = int(others[-1])
        for cls, w in zip(others, weights):
            acc += float(w)
            if r < acc:
                chosen = int(cls)
                break
        out[i] = chosen
    return out, frozenset(picked)
