import json

import numpy as np
import pytest

from floral.attacker import AttackSpec
from floral.cli import main
from floral.datasets import (generate_moons, load_csv, poison_by_boundary_distance,
                             save_csv, standardize, train_test_split)
from floral.kernel import KernelSpec
from floral.metrics import read_metrics_csv
from floral.svm import load_model, load_multiclass_model
from floral.trainer import TrainConfig, train_floral


def run_cli(*argv):
    return main(list(argv))


@pytest.fixture
def moons_files(tmp_path):
    """Small standardized train/test CSV pair plus a poisoned train variant."""
    full = generate_moons(240, 0.2, 3)
    train, test = train_test_split(full, 80, 3)
    train, test = standardize(train, test)
    train_path, test_path = tmp_path / "train.csv", tmp_path / "test.csv"
    save_csv(train, train_path)
    save_csv(test, test_path)
    adv = poison_by_boundary_distance(train, 0.1, 3)
    adv_path = tmp_path / "adv.csv"
    save_csv(adv, adv_path)
    return train_path, test_path, adv_path


class TestGenData:
    def test_row_count_and_determinism(self, tmp_path, capsys):
        out = tmp_path / "m.csv"
        assert run_cli("gen-data", "moons", "--n", "2000", "--noise", "0.2",
                       "--seed", "1", "--out", str(out)) == 0
        first = out.read_bytes()
        assert len(first.splitlines()) == 2000
        assert run_cli("gen-data", "moons", "--n", "2000", "--noise", "0.2",
                       "--seed", "1", "--out", str(out)) == 0
        assert out.read_bytes() == first

    def test_n_below_two_is_usage_error(self, tmp_path, capsys):
        rc = run_cli("gen-data", "moons", "--n", "1", "--seed", "0",
                     "--out", str(tmp_path / "x.csv"))
        assert rc == 2
        assert "n >= 2" in capsys.readouterr().err

    def test_unwritable_path_reports_io_error(self, tmp_path, capsys):
        rc = run_cli("gen-data", "moons", "--n", "4", "--seed", "0",
                     "--out", str(tmp_path / "no" / "dir" / "x.csv"))
        assert rc == 2
        assert "cannot write" in capsys.readouterr().err


class TestPoison:
    def test_zero_fraction_keeps_labels_and_flags(self, tmp_path):
        src = tmp_path / "src.csv"
        run_cli("gen-data", "moons", "--n", "100", "--seed", "4", "--out", str(src))
        out = tmp_path / "adv.csv"
        assert run_cli("poison", "--in", str(src), "--fraction", "0", "--seed", "1",
                       "--out", str(out)) == 0
        ds = load_csv(out)
        base = load_csv(src)
        assert np.array_equal(ds.labels, base.labels)
        assert ds.poisoned_indices == frozenset()

    def test_flag_count_and_api_parity(self, tmp_path):
        src = tmp_path / "src.csv"
        run_cli("gen-data", "moons", "--n", "500", "--noise", "0.2", "--seed", "2",
                "--out", str(src))
        out = tmp_path / "adv.csv"
        assert run_cli("poison", "--in", str(src), "--fraction", "0.05", "--seed", "2",
                       "--out", str(out)) == 0
        ds = load_csv(out)
        assert len(ds.poisoned_indices) == 25
        api = poison_by_boundary_distance(load_csv(src), 0.05, 2)
        assert ds.poisoned_indices == api.poisoned_indices

    def test_fraction_out_of_range_exits_2(self, tmp_path, capsys):
        src = tmp_path / "src.csv"
        run_cli("gen-data", "moons", "--n", "10", "--seed", "0", "--out", str(src))
        assert run_cli("poison", "--in", str(src), "--fraction", "1.5",
                       "--out", str(tmp_path / "o.csv")) == 2


class TestTrain:
    def test_stdout_contract_and_artifacts(self, tmp_path, moons_files, capsys):
        train_path, test_path, _ = moons_files
        model_path, metrics_path = tmp_path / "m.json", tmp_path / "metrics.csv"
        rc = run_cli("train", "--data", str(train_path), "--test", str(test_path),
                     "--C", "1", "--gamma", "1", "--eta", "0.02", "--rounds", "30",
                     "--k", "4", "--budget-B", "8", "--seed", "5",
                     "--out-model", str(model_path), "--out-metrics", str(metrics_path))
        assert rc == 0
        lines = capsys.readouterr().out.strip().splitlines()
        best = [l for l in lines if l.startswith("best_accuracy=")]
        last = [l for l in lines if l.startswith("last_accuracy=")]
        assert len(best) == 1 and len(last) == 1
        float(best[0].split("=")[1])  # parseable
        records = read_metrics_csv(metrics_path)
        assert [r.round for r in records] == [10, 20, 30]
        model = load_model(model_path)
        assert model.n == 80

    def test_k_zero_matches_vanilla_metrics(self, tmp_path, moons_files):
        train_path, test_path, _ = moons_files
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        common = ["--data", str(train_path), "--test", str(test_path), "--C", "1",
                  "--gamma", "1", "--eta", "0.02", "--rounds", "25", "--seed", "7"]
        assert run_cli("train", *common, "--k", "0", "--budget-B", "0",
                       "--out-model", str(tmp_path / "ma.json"), "--out-metrics", str(a)) == 0
        assert run_cli("train", *common, "--vanilla",
                       "--out-model", str(tmp_path / "mb.json"), "--out-metrics", str(b)) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_vanilla_with_attack_flags_exits_2(self, tmp_path, moons_files, capsys):
        train_path, test_path, _ = moons_files
        rc = run_cli("train", "--data", str(train_path), "--test", str(test_path),
                     "--vanilla", "--k", "3",
                     "--out-model", str(tmp_path / "m.json"),
                     "--out-metrics", str(tmp_path / "x.csv"))
        assert rc == 2

    def test_recovery_recorded_for_poisoned_input(self, tmp_path, moons_files):
        _, test_path, adv_path = moons_files
        metrics_path = tmp_path / "metrics.csv"
        rc = run_cli("train", "--data", str(adv_path), "--test", str(test_path),
                     "--C", "1", "--gamma", "1", "--eta", "0.02", "--rounds", "20",
                     "--k", "8", "--seed", "5",
                     "--out-model", str(tmp_path / "m.json"), "--out-metrics", str(metrics_path))
        assert rc == 0
        records = read_metrics_csv(metrics_path)
        assert all(r.recovery_rate is not None for r in records)

    def test_multiclass_smoke(self, tmp_path):
        from conftest import make_blobs
        train = make_blobs(10, [(0, 0), (4, 0), (0, 4)], 0.4, seed=5)
        test = make_blobs(8, [(0, 0), (4, 0), (0, 4)], 0.4, seed=6)
        tr, te = tmp_path / "tr.csv", tmp_path / "te.csv"
        save_csv(train, tr)
        save_csv(test, te)
        model_path = tmp_path / "mc.json"
        rc = run_cli("train", "--data", str(tr), "--test", str(te), "--multiclass",
                     "--C", "1", "--gamma", "0.5", "--eta", "0.05", "--rounds", "40",
                     "--k", "2", "--budget-B", "3", "--seed", "1",
                     "--out-model", str(model_path),
                     "--out-metrics", str(tmp_path / "mm.csv"))
        assert rc == 0
        assert load_multiclass_model(model_path).num_classes == 3

    def test_projection_failure_exits_3_with_round(self, tmp_path, moons_files, capsys):
        train_path, test_path, _ = moons_files
        rc = run_cli("train", "--data", str(train_path), "--test", str(test_path),
                     "--C", "1", "--gamma", "1", "--eta", "0.05", "--rounds", "10",
                     "--vanilla", "--projection", "fixed-point", "--eps", "1e-300",
                     "--max-proj-iter", "1", "--proj-fallback-cap", "0",
                     "--out-model", str(tmp_path / "m.json"),
                     "--out-metrics", str(tmp_path / "x.csv"))
        assert rc == 3
        assert "at round 1" in capsys.readouterr().err

    def test_model_file_reproduces_training_run(self, tmp_path, moons_files):
        train_path, test_path, _ = moons_files
        model_path = tmp_path / "m.json"
        run_cli("train", "--data", str(train_path), "--test", str(test_path),
                "--C", "1", "--gamma", "1", "--eta", "0.02", "--rounds", "30",
                "--k", "4", "--budget-B", "8", "--seed", "5",
                "--out-model", str(model_path), "--out-metrics", str(tmp_path / "x.csv"))
        saved = load_model(model_path)
        ds = load_csv(train_path)
        tcfg = TrainConfig(C=1.0, rounds=30, learning_rate=0.02, seed=5)
        aspec = AttackSpec(budget=8, flips=4, seed=5)
        model, _ = train_floral(ds, KernelSpec(gamma=1.0), tcfg, aspec)
        assert np.array_equal(saved.dual_coef, model.dual_coef)
        assert saved.bias == model.bias


class TestExperiment:
    def base_config(self, seeds=(1,), fractions=(0.0,), methods=("floral",)):
        return {
            "dataset": {"kind": "moons", "n": 160, "noise": 0.2},
            "train_size": 60,
            "standardize": True,
            "poison_fractions": list(fractions),
            "methods": list(methods),
            "C": [1.0],
            "gamma": [1.0],
            "eta": [0.02],
            "rounds": 20,
            "seeds": list(seeds),
        }

    def test_degenerate_sweep_matches_single_run(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(self.base_config()))
        outdir = tmp_path / "out"
        assert run_cli("experiment", str(cfg_path), "--outdir", str(outdir)) == 0
        summary = (outdir / "summary.csv").read_text().splitlines()
        assert len(summary) == 2
        run_files = list(outdir.glob("run_*.csv"))
        assert len(run_files) == 1
        records = read_metrics_csv(run_files[0])
        best = max(r.test_accuracy for r in records)
        last = records[-1].test_accuracy
        row = dict(zip(summary[0].split(","), summary[1].split(",")))
        assert float(row["best_mean"]) == best
        assert float(row["last_mean"]) == last

    def test_five_seed_mean(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(self.base_config(seeds=(1, 2, 3, 4, 5))))
        outdir = tmp_path / "out"
        assert run_cli("experiment", str(cfg_path), "--outdir", str(outdir)) == 0
        bests = []
        for f in sorted(outdir.glob("run_*.csv")):
            records = read_metrics_csv(f)
            bests.append(max(r.test_accuracy for r in records))
        summary = (outdir / "summary.csv").read_text().splitlines()
        row = dict(zip(summary[0].split(","), summary[1].split(",")))
        assert float(row["best_mean"]) == pytest.approx(np.mean(bests), abs=1e-12)

    def test_schema_violations_list_every_key(self, tmp_path, capsys):
        cfg = self.base_config()
        cfg["bogus"] = 1
        cfg["another"] = 2
        del cfg["rounds"]
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        rc = run_cli("experiment", str(cfg_path), "--outdir", str(tmp_path / "o"))
        assert rc == 2
        err = capsys.readouterr().err
        assert "bogus" in err and "another" in err and "rounds" in err

    def test_parallel_workers_match_sequential(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(self.base_config(seeds=(1, 2))))
        seq_dir, par_dir = tmp_path / "seq", tmp_path / "par"
        assert run_cli("experiment", str(cfg_path), "--outdir", str(seq_dir)) == 0
        assert run_cli("experiment", str(cfg_path), "--outdir", str(par_dir),
                       "--workers", "2") == 0
        assert (seq_dir / "summary.csv").read_bytes() == (par_dir / "summary.csv").read_bytes()
        for f in sorted(seq_dir.glob("run_*.csv")):
            assert f.read_bytes() == (par_dir / f.name).read_bytes()
