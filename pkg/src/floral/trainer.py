"""Adversarial training loop: projected gradient descent against a label flipper.

Each round the attacker rebuilds an adversarial label set from the current
dual weights (skipped during warm-up, when the weights are still zero), the
signed matrix is re-derived from the cached Gram matrix, and the weights take
one projected gradient step onto the constraint set of the new labels:

    z_t   = lam_{t-1} - eta_t * (Q lam_{t-1} - 1)
    lam_t = Proj_{ y_t . v = 0, 0 <= v <= C }(z_t)

Vanilla training is the same loop with the attacker removed. The multiclass
variant keeps one weight vector per class (one-vs-rest) and a pooled attacker.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .attacker import AttackSpec, multiclass_flip, randomized_topk_flip
from .datasets import Dataset, MulticlassDataset
from .kernel import GramMatrix, KernelSpec, cross_gram, gram, gram_matvec, signed_gram
from .metrics import MetricsRecord
from .projection import ProjectionResult, project_exact, project_fixed_point
from .rng import SplitMix64
from .svm import MulticlassModel, SvmModel, dual_objective, recover_bias

logger = logging.getLogger(__name__)

BOUND_SLACK = 1e-9


class ProjectionFailure(RuntimeError):
    """Projection did not converge and no exact fallback was available."""

    def __init__(self, round_no: int, iterations: int):
        super().__init__(
            f"projection failed to converge at round {round_no} after {iterations} iterations")
        self.round_no = round_no


@dataclass(frozen=True)
class LrDecay:
    factor: float
    at_rounds: tuple[int, ...]


@dataclass(frozen=True)
class ExactProjection:
    pass


@dataclass(frozen=True)
class FixedPointProjection:
    eps: float = 1e-21
    max_iter: int = 1000
    # non-convergence falls back to the exact path up to this problem size
    exact_fallback_cap: int = 2000


@dataclass(frozen=True)
class TrainConfig:
    C: float
    rounds: int
    learning_rate: float
    lr_decay: LrDecay | None = None
    warmup_rounds: int = 1
    projection: ExactProjection | FixedPointProjection = field(default_factory=ExactProjection)
    seed: int = 0
    eval_every: int = 10
    max_dense_n: int = 8192

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError("C must be positive")
        if not self.learning_rate > 0:
            raise ValueError("learning rate must be positive")
        if self.rounds < self.warmup_rounds:
            raise ValueError("rounds must cover the warm-up period")


@dataclass(frozen=True)
class RoundTrace:
    round: int
    lambda_inf_norm: float
    lambda_min: float
    hyperplane_residual: float
    objective: float
    flipped_indices: frozenset[int]
    metrics: MetricsRecord | None = None


def lr_at(tcfg: TrainConfig, round_no: int) -> float:
    """Learning rate after applying every decay milestone <= round."""
    if tcfg.lr_decay is None:
        return tcfg.learning_rate
    passed = sum(1 for m in tcfg.lr_decay.at_rounds if m <= round_no)
    return tcfg.learning_rate * tcfg.lr_decay.factor ** passed


def _project(z: np.ndarray, labels: np.ndarray, tcfg: TrainConfig,
             round_no: int) -> ProjectionResult:
    method = tcfg.projection
    if isinstance(method, ExactProjection):
        return project_exact(z, labels, tcfg.C)
    res = project_fixed_point(z, labels, tcfg.C, method.eps, method.max_iter)
    if not res.converged:
        if z.shape[0] <= method.exact_fallback_cap:
            return project_exact(z, labels, tcfg.C)
        raise ProjectionFailure(round_no, res.iterations)
    return res


class FloralGame:
    """Resumable training state for one binary adversarial run.

    ``snapshot``/``restore`` expose the weight vector and the attacker's
    stream so a run can be forked and replayed (perturbation experiments).
    """

    def __init__(self, ds: Dataset, kspec: KernelSpec, tcfg: TrainConfig,
                 aspec: AttackSpec | None, eval_hook=None):
        if aspec is not None and aspec.budget > ds.n:
            raise ValueError(f"attacker budget {aspec.budget} exceeds {ds.n} points")
        self.ds = ds
        self.kspec = kspec
        self.tcfg = tcfg
        self.aspec = aspec
        self.eval_hook = eval_hook
        self.streaming = ds.n > tcfg.max_dense_n
        self.K: GramMatrix | None = None if self.streaming else gram(kspec, ds.features)
        self.lam = np.zeros(ds.n)
        self.labels = ds.labels.copy()  # adversarial labels of the latest round
        self.round_no = 0
        self.rng = SplitMix64(aspec.seed if aspec is not None else tcfg.seed)
        self.projection_stats: list[ProjectionResult] = []

    # -- state management -------------------------------------------------
    def snapshot(self) -> tuple[np.ndarray, SplitMix64, int]:
        return self.lam.copy(), self.rng.clone(), self.round_no

    def restore(self, lam: np.ndarray, rng: SplitMix64, round_no: int) -> None:
        self.lam = np.asarray(lam, dtype=np.float64).copy()
        self.rng = rng.clone()
        self.round_no = round_no

    # -- core loop ---------------------------------------------------------
    def _attack(self) -> tuple[np.ndarray, frozenset[int]]:
        a = self.aspec
        if a is None or a.flips == 0 or self.round_no <= a.warmup_rounds:
            return self.ds.labels.copy(), frozenset()
        if a.budget < self.ds.n:
            ranked = np.sort(self.lam)[::-1]
            if ranked[a.budget - 1] == ranked[a.budget]:
                logger.debug("candidate boundary tie at round %d", self.round_no)
        return randomized_topk_flip(self.ds.labels, self.lam, a, self.rng)

    def _signed_matvec(self, labels: np.ndarray, v: np.ndarray) -> np.ndarray:
        yf = labels.astype(np.float64)
        if self.K is not None:
            return signed_gram(self.K, labels) @ v
        return yf * gram_matvec(self.kspec, self.ds.features, yf * v)

    def step(self) -> RoundTrace:
        self.round_no += 1
        t = self.round_no
        labels, flipped = self._attack()
        self.labels = labels
        yf = labels.astype(np.float64)
        qv = self._signed_matvec(labels, self.lam)
        z = self.lam - lr_at(self.tcfg, t) * (qv - 1.0)
        res = _project(z, yf, self.tcfg, t)
        self.lam = res.lam
        self.projection_stats.append(res)
        hi = float(np.abs(self.lam).max(initial=0.0))
        if hi > self.tcfg.C + BOUND_SLACK:
            raise AssertionError(f"iterate left the box at round {t}: {hi} > C={self.tcfg.C}")
        obj = 0.5 * float(self.lam @ self._signed_matvec(labels, self.lam)) - float(self.lam.sum())
        metrics = None
        if self.eval_hook is not None and (t % self.tcfg.eval_every == 0 or t == self.tcfg.rounds):
            metrics = self.eval_hook(t, self.model_view(), labels.copy())
        return RoundTrace(
            round=t,
            lambda_inf_norm=hi,
            lambda_min=float(self.lam.min(initial=0.0)),
            hyperplane_residual=abs(float(yf @ self.lam)),
            objective=obj,
            flipped_indices=flipped,
            metrics=metrics,
        )

    def run(self, rounds: int) -> list[RoundTrace]:
        return [self.step() for _ in range(rounds)]

    # -- model assembly ----------------------------------------------------
    def _bias(self) -> float:
        if self.K is not None:
            return recover_bias(self.lam, self.labels, self.K, self.tcfg.C)
        tau = 1e-6 * self.tcfg.C
        margin = (self.lam > tau) & (self.lam < self.tcfg.C - tau)
        if not margin.any():
            return 0.0
        rows = cross_gram(self.kspec, self.ds.features[margin], self.ds.features)
        scores = rows @ (self.lam * self.labels.astype(np.float64))
        return float((self.labels[margin] - scores).mean())

    def model_view(self) -> SvmModel:
        return SvmModel(
            dual_coef=self.lam.copy(),
            bias=self._bias(),
            train_features=self.ds.features,
            train_labels=self.labels.copy(),
            spec=self.kspec,
            C=self.tcfg.C,
        )


def train_floral(ds: Dataset, kspec: KernelSpec, tcfg: TrainConfig, aspec: AttackSpec,
                 eval_hook=None) -> tuple[SvmModel, list[RoundTrace]]:
    """Run the full adversarial game and return the final model and traces."""
    game = FloralGame(ds, kspec, tcfg, aspec, eval_hook)
    traces = game.run(tcfg.rounds)
    return game.model_view(), traces


def train_vanilla(ds: Dataset, kspec: KernelSpec, tcfg: TrainConfig,
                  eval_hook=None) -> tuple[SvmModel, list[RoundTrace]]:
    """Plain projected gradient training on the dataset's own labels."""
    game = FloralGame(ds, kspec, tcfg, None, eval_hook)
    traces = game.run(tcfg.rounds)
    return game.model_view(), traces


def train_multiclass(ds: MulticlassDataset, kspec: KernelSpec, tcfg: TrainConfig,
                     budgets: list[int], flips: int, q: np.ndarray | None = None,
                     eval_hook=None, seed: int | None = None,
                     ) -> tuple[MulticlassModel, list[RoundTrace]]:
    """One-vs-rest adversarial training with a pooled multi-head attacker."""
    m = ds.num_classes
    if len(budgets) != m:
        raise ValueError(f"need {m} per-class budgets, got {len(budgets)}")
    K = gram(kspec, ds.features)
    n = ds.n
    lams = [np.zeros(n) for _ in range(m)]
    rng = SplitMix64(tcfg.seed if seed is None else seed)
    traces: list[RoundTrace] = []
    labels = ds.class_labels.copy()
    for t in range(1, tcfg.rounds + 1):
        if flips == 0 or t <= tcfg.warmup_rounds:
            labels, flipped = ds.class_labels.copy(), frozenset()
        else:
            labels, flipped = multiclass_flip(ds.class_labels, lams, budgets, flips, q, rng)
        eta = lr_at(tcfg, t)
        obj = 0.0
        hi = lo = 0.0
        resid = 0.0
        for cls in range(m):
            ybin = np.where(labels == cls + 1, 1, -1).astype(np.int64)
            qt = signed_gram(K, ybin)
            z = lams[cls] - eta * (qt @ lams[cls] - 1.0)
            res = _project(z, ybin.astype(np.float64), tcfg, t)
            lams[cls] = res.lam
            obj += dual_objective(qt, res.lam)
            hi = max(hi, float(res.lam.max(initial=0.0)))
            lo = min(lo, float(res.lam.min(initial=0.0)))
            resid = max(resid, abs(float(ybin @ res.lam)))
        if hi > tcfg.C + BOUND_SLACK:
            raise AssertionError(f"iterate left the box at round {t}")
        metrics = None
        if eval_hook is not None and (t % tcfg.eval_every == 0 or t == tcfg.rounds):
            metrics = eval_hook(t, _multiclass_view(ds, kspec, tcfg, K, lams, labels), labels.copy())
        traces.append(RoundTrace(round=t, lambda_inf_norm=hi, lambda_min=lo,
                                 hyperplane_residual=resid, objective=obj,
                                 flipped_indices=flipped, metrics=metrics))
    return _multiclass_view(ds, kspec, tcfg, K, lams, labels), traces


def _multiclass_view(ds: MulticlassDataset, kspec: KernelSpec, tcfg: TrainConfig,
                     K: GramMatrix, lams: list[np.ndarray],
                     labels: np.ndarray) -> MulticlassModel:
    models = []
    for cls, lam in enumerate(lams, start=1):
        ybin = np.where(labels == cls, 1, -1).astype(np.int64)
        models.append(SvmModel(
            dual_coef=lam.copy(),
            bias=recover_bias(lam, ybin, K, tcfg.C),
            train_features=ds.features,
            train_labels=ybin,
            spec=kspec,
            C=tcfg.C,
        ))
    return MulticlassModel(models=tuple(models))
