"""Multi-seed experiment sweeps over poison fractions and hyperparameters.

A sweep config is a JSON object; every run in the cross product

    methods x poison_fractions x C x gamma x eta x seeds

trains on a fresh moons split, evaluates against the clean test labels, and
writes one metrics CSV. The summary CSV aggregates mean Best/Last accuracy
(and recovery, when defined) per cell. All randomness flows from the seeds
list, so a sweep is reproducible byte for byte.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import datasets
from .attacker import AttackSpec
from .kernel import KernelSpec, cross_gram
from .metrics import (MetricsRecord, best_and_last, recovery_rate, scores_accuracy,
                      scores_mean_hinge, write_metrics_csv)
from .trainer import (ExactProjection, FixedPointProjection, LrDecay, TrainConfig,
                      train_floral, train_vanilla)

_TOP_KEYS = {
    "dataset": dict,
    "train_size": int,
    "standardize": bool,
    "poison_fractions": list,
    "methods": list,
    "C": list,
    "gamma": list,
    "eta": list,
    "k": (list, type(None)),
    "rounds": int,
    "lr_decay": (dict, type(None)),
    "warmup_rounds": int,
    "projection": str,
    "eval_every": int,
    "seeds": list,
}
_REQUIRED = ("dataset", "poison_fractions", "methods", "C", "gamma", "eta", "rounds", "seeds")
_DATASET_KEYS = {"kind": str, "n": int, "noise": float}
_METHODS = ("floral", "vanilla")
# attack size when the poison fraction is zero: 1% of the training split
CLEAN_K_FRACTION = 0.01


class ConfigError(ValueError):
    """Carries every schema violation found in a sweep config."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


@dataclass(frozen=True)
class SweepConfig:
    dataset_kind: str
    dataset_n: int
    dataset_noise: float
    train_size: int
    standardize: bool
    poison_fractions: tuple[float, ...]
    methods: tuple[str, ...]
    C_values: tuple[float, ...]
    gamma_values: tuple[float, ...]
    eta_values: tuple[float, ...]
    k_values: tuple[int, ...] | None
    rounds: int
    lr_decay: LrDecay | None
    warmup_rounds: int
    projection: str
    eval_every: int
    seeds: tuple[int, ...]


def parse_config(path: str | Path) -> SweepConfig:
    """Validate the JSON config, collecting every invalid key before failing."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError([f"not valid JSON: {e}"]) from None
    problems: list[str] = []
    if not isinstance(raw, dict):
        raise ConfigError(["top level must be a JSON object"])
    for key in raw:
        if key not in _TOP_KEYS:
            problems.append(f"unknown key {key!r}")
    for key in _REQUIRED:
        if key not in raw:
            problems.append(f"missing required key {key!r}")
    for key, expected in _TOP_KEYS.items():
        if key in raw and not isinstance(raw[key], expected):
            problems.append(f"key {key!r} has wrong type {type(raw[key]).__name__}")
    ds = raw.get("dataset")
    if isinstance(ds, dict):
        for key in ds:
            if key not in _DATASET_KEYS:
                problems.append(f"unknown dataset key {key!r}")
        for key, typ in _DATASET_KEYS.items():
            if key not in ds:
                problems.append(f"missing dataset key {key!r}")
            elif typ is float and isinstance(ds[key], (int, float)):
                pass
            elif not isinstance(ds.get(key), typ):
                problems.append(f"dataset key {key!r} has wrong type")
        if ds.get("kind") not in (None, "moons"):
            problems.append(f"unsupported dataset kind {ds.get('kind')!r}")
    for m in raw.get("methods", []):
        if m not in _METHODS:
            problems.append(f"unknown method {m!r}")
    if raw.get("projection", "exact") not in ("exact", "fixed-point"):
        problems.append(f"unknown projection {raw.get('projection')!r}")
    decay = raw.get("lr_decay")
    if isinstance(decay, dict):
        if set(decay) != {"factor", "at_rounds"}:
            problems.append("lr_decay must have exactly the keys 'factor' and 'at_rounds'")
    if problems:
        raise ConfigError(problems)
    return SweepConfig(
        dataset_kind=ds["kind"],
        dataset_n=ds["n"],
        dataset_noise=float(ds["noise"]),
        train_size=raw.get("train_size", ds["n"] // 4),
        standardize=raw.get("standardize", True),
        poison_fractions=tuple(float(f) for f in raw["poison_fractions"]),
        methods=tuple(raw["methods"]),
        C_values=tuple(float(v) for v in raw["C"]),
        gamma_values=tuple(float(v) for v in raw["gamma"]),
        eta_values=tuple(float(v) for v in raw["eta"]),
        k_values=None if raw.get("k") is None else tuple(int(v) for v in raw["k"]),
        rounds=raw["rounds"],
        lr_decay=None if decay is None else LrDecay(factor=float(decay["factor"]),
                                                    at_rounds=tuple(decay["at_rounds"])),
        warmup_rounds=raw.get("warmup_rounds", 1),
        projection=raw.get("projection", "exact"),
        eval_every=raw.get("eval_every", 10),
        seeds=tuple(int(s) for s in raw["seeds"]),
    )


def tier_flip_count(fraction: float, train_size: int) -> int:
    """Default attack size: match the poison level (1% floor on clean data)."""
    frac = fraction if fraction > 0 else CLEAN_K_FRACTION
    return max(1, int(round(frac * train_size)))


def prepare_split(cfg: SweepConfig, fraction: float, seed: int,
                  ) -> tuple[datasets.Dataset, datasets.Dataset]:
    """Generate, split, optionally standardize, and poison one replication."""
    full = datasets.generate_moons(cfg.dataset_n, cfg.dataset_noise, seed)
    train, test = datasets.train_test_split(full, cfg.train_size, seed)
    if cfg.standardize:
        train, test = datasets.standardize(train, test)
    if fraction > 0:
        train = datasets.poison_by_boundary_distance(train, fraction, seed)
    return train, test


@dataclass(frozen=True)
class RunResult:
    best: float
    last: float
    recovery: float | None
    records: list[MetricsRecord]


def make_eval_hook(train: datasets.Dataset, test: datasets.Dataset, kspec: KernelSpec,
                   records: list[MetricsRecord]):
    """Metrics hook with the test-against-train kernel block precomputed."""
    test_kernel = cross_gram(kspec, test.features, train.features)

    def hook(round_no, model, adv_labels):
        scores = test_kernel @ (model.dual_coef * model.train_labels) + model.bias
        rec_rate = None
        if train.poisoned_indices:
            rec_rate = recovery_rate(train.poisoned_indices, train.clean_labels, adv_labels)
        rec = MetricsRecord(round=round_no,
                            test_accuracy=scores_accuracy(scores, test.labels),
                            mean_hinge=scores_mean_hinge(scores, test.labels),
                            recovery_rate=rec_rate)
        records.append(rec)
        return rec

    return hook


def run_one(cfg: SweepConfig, method: str, fraction: float, C: float, gamma: float,
            eta: float, k: int, seed: int) -> RunResult:
    train, test = prepare_split(cfg, fraction, seed)
    kspec = KernelSpec(gamma=gamma)
    proj = ExactProjection() if cfg.projection == "exact" else FixedPointProjection()
    tcfg = TrainConfig(C=C, rounds=cfg.rounds, learning_rate=eta, lr_decay=cfg.lr_decay,
                       warmup_rounds=cfg.warmup_rounds, projection=proj, seed=seed,
                       eval_every=cfg.eval_every)
    records: list[MetricsRecord] = []
    hook = make_eval_hook(train, test, kspec, records)

    if method == "vanilla":
        train_vanilla(train, kspec, tcfg, eval_hook=hook)
    else:
        aspec = AttackSpec(budget=min(2 * k, train.n), flips=k, seed=seed,
                           warmup_rounds=cfg.warmup_rounds)
        train_floral(train, kspec, tcfg, aspec, eval_hook=hook)
    best, last = best_and_last(records)
    return RunResult(best=best, last=last, recovery=records[-1].recovery_rate,
                     records=records)


def _cells(cfg: SweepConfig):
    for method in cfg.methods:
        for fraction in cfg.poison_fractions:
            k_options = (cfg.k_values if cfg.k_values is not None
                         else (tier_flip_count(fraction, cfg.train_size),))
            for k in k_options:
                for C in cfg.C_values:
                    for gamma in cfg.gamma_values:
                        for eta in cfg.eta_values:
                            yield method, fraction, k, C, gamma, eta


def _run_cell_job(args):
    cfg, method, fraction, k, C, gamma, eta, seed = args
    return run_one(cfg, method, fraction, C, gamma, eta, k, seed)


def run_sweep(cfg: SweepConfig, outdir: str | Path, workers: int = 1) -> Path:
    """Run the full cross product; returns the summary CSV path.

    Cells are independent; with workers > 1 the runs execute in parallel
    worker processes without affecting per-run determinism.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    jobs = [(cfg, method, fraction, k, C, gamma, eta, seed)
            for (method, fraction, k, C, gamma, eta) in _cells(cfg)
            for seed in cfg.seeds]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell_job, jobs))
    else:
        results = [_run_cell_job(j) for j in jobs]

    summary_rows = []
    cursor = 0
    for method, fraction, k, C, gamma, eta in _cells(cfg):
        bests, lasts, recs = [], [], []
        for seed in cfg.seeds:
            result = results[cursor]
            cursor += 1
            name = (f"run_{method}_f{fraction:g}_k{k}_C{C:g}"
                    f"_g{gamma:g}_e{eta:g}_s{seed}.csv")
            write_metrics_csv(result.records, outdir / name)
            bests.append(result.best)
            lasts.append(result.last)
            if result.recovery is not None:
                recs.append(result.recovery)
        summary_rows.append({
            "method": method, "poison_fraction": fraction, "k": k,
            "C": C, "gamma": gamma, "eta": eta,
            "seeds": len(cfg.seeds),
            "best_mean": float(np.mean(bests)),
            "last_mean": float(np.mean(lasts)),
            "recovery_mean": float(np.mean(recs)) if recs else "",
        })
    summary_path = outdir / "summary.csv"
    with open(summary_path, "w", newline="", encoding="ascii") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(summary_rows[0].keys()))
        writer.writeheader()
        writer.writerows(summary_rows)
    return summary_path
