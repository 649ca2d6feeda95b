"""Command-line interface: data generation, poisoning, training, sweeps.

Exit codes: 0 on success, 2 for usage or validation problems, 3 for numerical
failures (a projection that cannot be completed). Every command is
deterministic given its flags; all randomness flows from --seed.
"""

from __future__ import annotations

import argparse
import sys


from . import datasets
from .attacker import AttackSpec
from .experiment import ConfigError, parse_config, run_sweep
from .kernel import KernelSpec
from .metrics import (MetricsRecord, accuracy, best_and_last, mean_hinge,
                      multiclass_accuracy, multiclass_mean_hinge, recovery_rate,
                      write_metrics_csv)
from .svm import save_model, save_multiclass_model
from .trainer import (ExactProjection, FixedPointProjection, LrDecay, ProjectionFailure,
                      TrainConfig, train_floral, train_multiclass, train_vanilla)

EXIT_USAGE = 2
EXIT_NUMERICAL = 3

# exact projection is the default up to this training size, the fixed-point
# iteration beyond it
EXACT_DEFAULT_MAX_N = 2000


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="floral",
                                     description="Label-robust kernel SVM training")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-data", help="generate a synthetic dataset CSV")
    gen_sub = gen.add_subparsers(dest="shape", required=True)
    moons = gen_sub.add_parser("moons", help="two interleaving half-circles")
    moons.add_argument("--n", type=int, required=True)
    moons.add_argument("--noise", type=float, default=0.2)
    moons.add_argument("--seed", type=int, default=0)
    moons.add_argument("--out", required=True)

    poison = sub.add_parser("poison", help="flip labels farthest from a linear separator")
    poison.add_argument("--in", dest="infile", required=True)
    poison.add_argument("--fraction", type=float, required=True)
    poison.add_argument("--seed", type=int, default=0)
    poison.add_argument("--header", action="store_true",
                        help="skip a first line that fails numeric parse")
    poison.add_argument("--out", required=True)

    train = sub.add_parser("train", help="train a model and write metrics")
    train.add_argument("--data", required=True)
    train.add_argument("--test", required=True)
    train.add_argument("--C", type=float, default=10.0)
    train.add_argument("--gamma", type=float, default=1.0)
    train.add_argument("--eta", type=float, default=7e-4)
    train.add_argument("--rounds", type=int, default=500)
    train.add_argument("--budget-B", type=int, default=None)
    train.add_argument("--k", type=int, default=None)
    train.add_argument("--warmup", type=int, default=1)
    train.add_argument("--lr-decay-factor", type=float, default=None)
    train.add_argument("--lr-decay-rounds", type=int, nargs="*", default=None)
    train.add_argument("--projection", choices=["exact", "fixed-point"], default=None)
    train.add_argument("--eps", type=float, default=1e-21)
    train.add_argument("--max-proj-iter", type=int, default=1000)
    train.add_argument("--proj-fallback-cap", type=int, default=2000,
                       help="fall back to exact projection on non-convergence up to this n")
    train.add_argument("--eval-every", type=int, default=10)
    train.add_argument("--seed", type=int, default=0)
    train.add_argument("--header", action="store_true")
    train.add_argument("--vanilla", action="store_true",
                       help="plain PGD training, no attacker")
    train.add_argument("--multiclass", action="store_true",
                       help="one-vs-rest on integer class labels")
    train.add_argument("--out-model", required=True)
    train.add_argument("--out-metrics", required=True)

    exp = sub.add_parser("experiment", help="run a multi-seed sweep from a JSON config")
    exp.add_argument("config")
    exp.add_argument("--outdir", required=True)
    exp.add_argument("--workers", type=int, default=1,
                     help="parallel worker processes for independent runs")
    return parser


def _cmd_gen_data(args) -> None:
    try:
        ds = datasets.generate_moons(args.n, args.noise, args.seed)
    except ValueError as e:
        raise CliError(str(e)) from None
    try:
        datasets.save_csv(ds, args.out)
    except OSError as e:
        raise CliError(f"cannot write {args.out}: {e}") from None


def _cmd_poison(args) -> None:
    header = True if args.header else None
    try:
        ds = datasets.load_csv(args.infile, header=header)
        poisoned = datasets.poison_by_boundary_distance(ds, args.fraction, args.seed)
    except (ValueError, OSError) as e:
        raise CliError(str(e)) from None
    datasets.save_csv(poisoned, args.out)


def _train_binary(args, tcfg: TrainConfig, kspec: KernelSpec):
    header = True if args.header else None
    train_ds = datasets.load_csv(args.data, header=header)
    test_ds = datasets.load_csv(args.test, header=header)
    if test_ds.clean_labels is not None:
        # evaluation always targets clean labels
        test_ds = datasets.Dataset(features=test_ds.features, labels=test_ds.clean_labels)
    records: list[MetricsRecord] = []

    def hook(round_no, model, adv_labels):
        rec_rate = None
        if train_ds.poisoned_indices:
            rec_rate = recovery_rate(train_ds.poisoned_indices, train_ds.clean_labels,
                                     adv_labels)
        rec = MetricsRecord(round=round_no, test_accuracy=accuracy(model, test_ds),
                            mean_hinge=mean_hinge(model, test_ds), recovery_rate=rec_rate)
        records.append(rec)
        return rec

    if args.vanilla:
        model, _ = train_vanilla(train_ds, kspec, tcfg, eval_hook=hook)
    else:
        k = args.k if args.k is not None else max(1, round(0.05 * train_ds.n))
        budget = args.budget_B if args.budget_B is not None else min(2 * k, train_ds.n)
        try:
            aspec = AttackSpec(budget=budget, flips=k, seed=args.seed, warmup_rounds=args.warmup)
        except ValueError as e:
            raise CliError(str(e)) from None
        model, _ = train_floral(train_ds, kspec, tcfg, aspec, eval_hook=hook)
    save_model(model, args.out_model)
    return records


def _train_multiclass(args, tcfg: TrainConfig, kspec: KernelSpec):
    header = True if args.header else None
    train_ds = datasets.load_csv(args.data, header=header, multiclass=True)
    test_ds = datasets.load_csv(args.test, header=header, multiclass=True)
    records: list[MetricsRecord] = []

    def hook(round_no, model, adv_labels):
        del adv_labels
        rec = MetricsRecord(round=round_no, test_accuracy=multiclass_accuracy(model, test_ds),
                            mean_hinge=multiclass_mean_hinge(model, test_ds))
        records.append(rec)
        return rec

    k = args.k if args.k is not None else 0
    budget = args.budget_B if args.budget_B is not None else min(2 * max(k, 1), train_ds.n)
    budgets = [budget] * train_ds.num_classes
    model, _ = train_multiclass(train_ds, kspec, tcfg, budgets, k, eval_hook=hook,
                                seed=args.seed)
    save_multiclass_model(model, args.out_model)
    return records


def _cmd_train(args) -> None:
    if args.vanilla and (args.budget_B is not None or args.k is not None):
        raise CliError("--vanilla does not take --budget-B or --k")
    if args.vanilla and args.multiclass:
        raise CliError("--vanilla and --multiclass are mutually exclusive")
    decay = None
    if (args.lr_decay_factor is None) != (args.lr_decay_rounds is None):
        raise CliError("--lr-decay-factor and --lr-decay-rounds go together")
    if args.lr_decay_factor is not None:
        decay = LrDecay(factor=args.lr_decay_factor, at_rounds=tuple(args.lr_decay_rounds))
    try:
        kspec = KernelSpec(gamma=args.gamma)
        with open(args.data) as fh:  # projection default depends on the training size
            n_hint = sum(1 for _ in fh)
        proj_name = args.projection or ("exact" if n_hint <= EXACT_DEFAULT_MAX_N
                                        else "fixed-point")
        projection = (ExactProjection() if proj_name == "exact"
                      else FixedPointProjection(eps=args.eps, max_iter=args.max_proj_iter,
                                                exact_fallback_cap=args.proj_fallback_cap))
        tcfg = TrainConfig(C=args.C, rounds=args.rounds, learning_rate=args.eta,
                           lr_decay=decay, warmup_rounds=args.warmup, projection=projection,
                           seed=args.seed, eval_every=args.eval_every)
    except (ValueError, OSError) as e:
        raise CliError(str(e)) from None
    try:
        if args.multiclass:
            records = _train_multiclass(args, tcfg, kspec)
        else:
            records = _train_binary(args, tcfg, kspec)
    except ProjectionFailure as e:
        raise CliError(str(e), code=EXIT_NUMERICAL) from None
    except (ValueError, OSError) as e:
        raise CliError(str(e)) from None
    write_metrics_csv(records, args.out_metrics)
    best, last = best_and_last(records)
    print(f"best_accuracy={best!r}")
    print(f"last_accuracy={last!r}")


def _cmd_experiment(args) -> None:
    try:
        cfg = parse_config(args.config)
    except ConfigError as e:
        raise CliError("invalid config: " + "; ".join(e.problems)) from None
    except OSError as e:
        raise CliError(str(e)) from None
    try:
        summary = run_sweep(cfg, args.outdir, workers=args.workers)
    except ProjectionFailure as e:
        raise CliError(str(e), code=EXIT_NUMERICAL) from None
    print(f"summary={summary}")


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "gen-data": _cmd_gen_data,
        "poison": _cmd_poison,
        "train": _cmd_train,
        "experiment": _cmd_experiment,
    }
    try:
        handlers[args.command](args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    return 0


if __name__ == "__main__":
    sys.exit(main())
