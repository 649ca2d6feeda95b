"""Soft-margin kernel SVM dual: objective, gradient, decision function, bias.

The classifier is f(x) = sign(sum_j a_j y_j k(x, x_j) + b) with dual weights a
constrained to the box [0, C] and the label hyperplane y.a = 0. Training is
handled elsewhere; this module owns the pieces that define the model.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .kernel import GramMatrix, KernelSpec, cross_gram

BOX_TOL = 1e-9
HYPERPLANE_TOL = 1e-6


@dataclass(frozen=True)
class SvmModel:
    """A trained (or in-training snapshot of a) kernel SVM.

    ``train_labels`` are the labels the dual weights were last optimized
    against; under adversarial training these are the final adversarial
    labels, not the dataset's original ones.
    """

    dual_coef: np.ndarray
    bias: float
    train_features: np.ndarray
    train_labels: np.ndarray
    spec: KernelSpec
    C: float

    def __post_init__(self):
        a = np.asarray(self.dual_coef, dtype=np.float64)
        y = np.asarray(self.train_labels, dtype=np.int64)
        object.__setattr__(self, "dual_coef", a)
        object.__setattr__(self, "train_labels", y)
        n = a.shape[0]
        if self.train_features.shape[0] != n or y.shape != (n,):
            raise ValueError("dual_coef, train_features and train_labels disagree on n")
        if a.min(initial=0.0) < -BOX_TOL or a.max(initial=0.0) > self.C + BOX_TOL:
            raise ValueError("dual weights leave the box [0, C]")
        if abs(float(y @ a)) > HYPERPLANE_TOL:
            raise ValueError("dual weights violate the label hyperplane constraint")

    @property
    def n(self) -> int:
        return self.dual_coef.shape[0]


def dual_objective(qtilde: np.ndarray, lam: np.ndarray) -> float:
    """0.5 * lam' Q lam - sum(lam)."""
    lam = np.asarray(lam, dtype=np.float64)
    if qtilde.shape != (lam.shape[0], lam.shape[0]):
        raise ValueError(f"shape mismatch: {qtilde.shape} vs {lam.shape}")
    return float(0.5 * lam @ (qtilde @ lam) - lam.sum())


def dual_gradient(qtilde: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Q lam - 1."""
    lam = np.asarray(lam, dtype=np.float64)
    if qtilde.shape != (lam.shape[0], lam.shape[0]):
        raise ValueError(f"shape mismatch: {qtilde.shape} vs {lam.shape}")
    return qtilde @ lam - 1.0


def decision_values(model: SvmModel, points: np.ndarray) -> np.ndarray:
    """Raw margin scores for a batch of points (rows)."""
    P = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if P.shape[1] != model.train_features.shape[1]:
        raise ValueError(
            f"point dimension {P.shape[1]} != model dimension {model.train_features.shape[1]}")
    Kx = cross_gram(model.spec, P, model.train_features)
    return Kx @ (model.dual_coef * model.train_labels) + model.bias


def decision_value(model: SvmModel, x: np.ndarray) -> float:
    return float(decision_values(model, np.asarray(x))[0])


def predict(model: SvmModel, x: np.ndarray) -> int:
    """Sign of the margin score; a score of exactly zero maps to +1."""
    return 1 if decision_value(model, x) >= 0.0 else -1


def predict_batch(model: SvmModel, points: np.ndarray) -> np.ndarray:
    return np.where(decision_values(model, points) >= 0.0, 1, -1).astype(np.int64)


def recover_bias(dual_coef: np.ndarray, labels: np.ndarray, K: GramMatrix, C: float) -> float:
    """Average KKT residual y_i - sum_j a_j y_j K_ij over interior support vectors.

    Interior means tau < a_i < C - tau with tau = 1e-6 * C; returns 0 when no
    weight is strictly inside the box.
    """
    a = np.asarray(dual_coef, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    tau = 1e-6 * C
    margin = (a > tau) & (a < C - tau)
    if not margin.any():
        return 0.0
    scores = K.entries[margin] @ (a * y)
    return float((y[margin] - scores).mean())


@dataclass(frozen=True)
class MulticlassModel:
    """One-vs-rest ensemble; class m's head was trained on +1-vs-rest labels."""

    models: tuple[SvmModel, ...]

    def __post_init__(self):
        if len(self.models) < 2:
            raise ValueError("need at least two class heads")

    @property
    def num_classes(self) -> int:
        return len(self.models)

    def decision_matrix(self, points: np.ndarray) -> np.ndarray:
        return np.column_stack([decision_values(m, points) for m in self.models])

    def predict(self, points: np.ndarray) -> np.ndarray:
        """argmax over class scores; ties resolve to the lowest class id."""
        return self.decision_matrix(points).argmax(axis=1) + 1


def save_model(model: SvmModel, path: str | Path) -> None:
    """Persist as JSON; float repr round-trips every value bit-exactly."""
    payload = {
        "kind": "binary-svm",
        "dual_coef": model.dual_coef.tolist(),
        "bias": model.bias,
        "C": model.C,
        "gamma": model.spec.gamma,
        "train_features": model.train_features.tolist(),
        "train_labels": model.train_labels.tolist(),
    }
    Path(path).write_text(json.dumps(payload), encoding="ascii")


def _model_from_payload(payload: dict) -> SvmModel:
    return SvmModel(
        dual_coef=np.asarray(payload["dual_coef"], dtype=np.float64),
        bias=float(payload["bias"]),
        train_features=np.asarray(payload["train_features"], dtype=np.float64),
        train_labels=np.asarray(payload["train_labels"], dtype=np.int64),
        spec=KernelSpec(gamma=float(payload["gamma"])),
        C=float(payload["C"]),
    )


def load_model(path: str | Path) -> SvmModel:
    payload = json.loads(Path(path).read_text(encoding="ascii"))
    if payload.get("kind") != "binary-svm":
        raise ValueError(f"not a binary SVM model file: {path}")
    return _model_from_payload(payload)


def save_multiclass_model(model: MulticlassModel, path: str | Path) -> None:
    heads = []
    for m in model.models:
        heads.append({
            "dual_coef": m.dual_coef.tolist(),
            "bias": m.bias,
            "C": m.C,
            "gamma": m.spec.gamma,
            "train_features": m.train_features.tolist(),
            "train_labels": m.train_labels.tolist(),
        })
    Path(path).write_text(json.dumps({"kind": "multiclass-svm", "heads": heads}),
                          encoding="ascii")


def load_multiclass_model(path: str | Path) -> MulticlassModel:
    payload = json.loads(Path(path).read_text(encoding="ascii"))
    if payload.get("kind") != "multiclass-svm":
        raise ValueError(f"not a multiclass SVM model file: {path}")
    return MulticlassModel(models=tuple(_model_from_payload(h) for h in payload["heads"]))
