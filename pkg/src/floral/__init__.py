"""Label-robust kernel SVM training via an attacker-defender game."""

from .attacker import AttackSpec, multiclass_flip, randomized_topk_flip, select_candidates
from .datasets import (Dataset, DatasetFormatError, MulticlassDataset, generate_moons,
                       load_csv, poison_by_boundary_distance, save_csv, standardize,
                       train_test_split)
from .kernel import GramMatrix, KernelSpec, gram, gram_matvec, kernel_eval, signed_gram
from .metrics import (MetricsRecord, accuracy, best_and_last, mean_hinge,
                      multiclass_accuracy, recovery_rate, write_metrics_csv)
from .projection import ProjectionResult, project_exact, project_fixed_point
from .svm import (MulticlassModel, SvmModel, decision_value, decision_values,
                  dual_gradient, dual_objective, load_model, predict, predict_batch,
                  recover_bias, save_model)
from .trainer import (ExactProjection, FixedPointProjection, FloralGame, LrDecay,
                      ProjectionFailure, RoundTrace, TrainConfig, lr_at, train_floral,
                      train_multiclass, train_vanilla)

__all__ = [
    "AttackSpec", "Dataset", "DatasetFormatError", "ExactProjection", "FixedPointProjection",
    "FloralGame", "GramMatrix", "KernelSpec", "LrDecay", "MetricsRecord", "MulticlassDataset",
    "MulticlassModel", "ProjectionFailure", "ProjectionResult", "RoundTrace", "SvmModel",
    "TrainConfig", "accuracy", "best_and_last", "decision_value", "decision_values",
    "dual_gradient", "dual_objective", "generate_moons", "gram", "gram_matvec",
    "kernel_eval", "load_csv", "load_model", "lr_at", "mean_hinge", "multiclass_accuracy",
    "multiclass_flip", "poison_by_boundary_distance", "predict", "predict_batch",
    "project_exact", "project_fixed_point", "randomized_topk_flip", "recover_bias",
    "recovery_rate", "save_csv", "save_model", "select_candidates", "signed_gram",
    "standardize", "train_floral", "train_multiclass", "train_test_split", "train_vanilla",
    "write_metrics_csv",
]
