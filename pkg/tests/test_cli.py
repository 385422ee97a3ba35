import json
import shutil
from pathlib import Path

import numpy as np
import pytest

from t2drisk.cli import main
from t2drisk.cohort import write_cohort_csv
from conftest import random_records


@pytest.fixture(scope="module")
def small_cohort_csv(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    code = main(["synth", "--out", str(out), "--n", "1500", "--seed", "12"])
    assert code == 0
    return out / "cohort.csv"


def read_manifest(out_dir: Path) -> dict:
    return json.loads((out_dir / "manifest.json").read_text())


class TestSynth:
    def test_row_count_matches_request(self, small_cohort_csv):
        lines = small_cohort_csv.read_text().splitlines()
        assert len(lines) == 1501  # header + rows

    def test_zero_rows_rejected(self, tmp_path):
        assert main(["synth", "--out", str(tmp_path), "--n", "0", "--seed", "1"]) == 2

    def test_same_seed_identical_bytes(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert main(["synth", "--out", str(out), "--n", "400", "--seed", "7"]) == 0
        assert (a / "cohort.csv").read_bytes() == (b / "cohort.csv").read_bytes()

    def test_config_file_run(self, tmp_path):
        from t2drisk import synthetic

        config = synthetic.reference_preset(n=120, seed=3)
        path = tmp_path / "config.yaml"
        synthetic.save_config(config, str(path))
        out = tmp_path / "out"
        assert main(["synth", "--out", str(out), "--config", str(path), "--seed", "3"]) == 0
        assert (out / "cohort.csv").exists()
        assert (out / "provenance.json").exists()

    def test_bad_config_path(self, tmp_path):
        code = main(
            ["synth", "--out", str(tmp_path), "--config", str(tmp_path / "nope.yaml"),
             "--seed", "1"]
        )
        assert code == 2

    def test_strict_requires_seed(self, tmp_path):
        assert main(["--strict", "synth", "--out", str(tmp_path), "--n", "10"]) == 1


class TestFit:
    def test_outputs_and_report_columns(self, small_cohort_csv, tmp_path):
        out = tmp_path / "fit"
        assert main(["fit", str(small_cohort_csv), "--out", str(out), "--seed", "5"]) == 0
        header = (out / "coefficients.csv").read_text().splitlines()[0]
        assert header == "feature,log_hr,ci_low,ci_high,neg_log2_p"
        doc = json.loads((out / "model.json").read_text())
        assert doc["format"] == "t2drisk-cox-model"
        assert len(doc["features"]) == 19
        assert (out / "test.csv").exists()
        manifest = read_manifest(out)
        assert {o["path"] for o in manifest["outputs"]} == {
            "model.json", "coefficients.csv", "test.csv",
        }

    def test_refuses_cohort_without_events(self, tmp_path):
        records, outcomes = random_records(60, seed=2)
        from t2drisk.cohort import Outcome

        censored = [Outcome(o.time, False) for o in outcomes]
        path = tmp_path / "cohort.csv"
        write_cohort_csv(str(path), records, censored)
        assert main(["fit", str(path), "--out", str(tmp_path / "f"), "--seed", "1"]) == 2

    def test_missing_file_is_data_error(self, tmp_path):
        code = main(["fit", str(tmp_path / "nope.csv"), "--out", str(tmp_path), "--seed", "1"])
        assert code == 2


class TestEval:
    def test_report_fields_and_determinism(self, small_cohort_csv, tmp_path):
        fit_out = tmp_path / "fit"
        assert main(["fit", str(small_cohort_csv), "--out", str(fit_out), "--seed", "5"]) == 0
        runs = []
        for name in ("e1", "e2"):
            out = tmp_path / name
            assert main(
                ["eval", str(fit_out / "model.json"), str(fit_out / "test.csv"),
                 "--out", str(out), "--seed", "5"]
            ) == 0
            runs.append(out)
        report = json.loads((runs[0] / "report.json").read_text())
        assert report["n_bootstrap"] == 50  # paper default
        assert {"mean_predicted_risk", "mean_observed_risk", "ici", "c_index"} <= set(report)
        assert (runs[0] / "report.json").read_bytes() == (runs[1] / "report.json").read_bytes()
        assert (runs[0] / "calibration.csv").read_bytes() == (runs[1] / "calibration.csv").read_bytes()
        assert (runs[0] / "forest.csv").read_bytes() == (runs[1] / "forest.csv").read_bytes()


class TestSelect:
    def test_ledger_and_features_written(self, tmp_path):
        # selection needs enough events per fold for 19-feature refits
        synth_out = tmp_path / "synth"
        assert main(["synth", "--out", str(synth_out), "--n", "4000", "--seed", "12"]) == 0
        out = tmp_path / "sel"
        assert main(
            ["select", str(synth_out / "cohort.csv"), "--out", str(out), "--seed", "5",
             "--folds", "2"]
        ) == 0
        features = (out / "features.txt").read_text().splitlines()
        assert features  # something survives
        lines = (out / "ledger.jsonl").read_text().splitlines()
        assert all(json.loads(line) for line in lines)


class TestTrainDL:
    def test_zero_learning_rate_keeps_initial_weights(self, small_cohort_csv, tmp_path):
        import yaml

        from t2drisk import neural

        config_path = tmp_path / "net.yaml"
        config_path.write_text(
            yaml.safe_dump(
                {"topology": [8], "learning_rate": 0.0, "epochs": 2, "batch_size": 2000,
                 "dropout": 0.0, "batch_norm": False, "weight_decay": 0.0}
            )
        )
        out = tmp_path / "dl"
        assert main(
            ["traindl", str(small_cohort_csv), "--out", str(out), "--seed", "4",
             "--netconfig", str(config_path)]
        ) == 0
        model = neural.load_weights(str(out / "weights.bin"))
        fresh = neural.build_network(19, model.config)
        for trained, init in zip(model.net.parameters(), fresh.parameters()):
            np.testing.assert_array_equal(trained.detach().numpy(), init.detach().numpy())

    def test_default_config_is_tuned_optimum(self, small_cohort_csv, tmp_path):
        out = tmp_path / "dl2"
        assert main(
            ["traindl", str(small_cohort_csv), "--out", str(out), "--seed", "4",
             "--epochs", "1"]
        ) == 0
        manifest = read_manifest(out)
        config = manifest["args"]["config"]
        assert config["topology"] == [64, 64, 64]
        assert config["activation"] == "selu"
        assert config["dropout"] == 0.04809
        assert config["weight_decay"] == 0.00101
        assert config["batch_norm"] is True
        assert config["optimizer"] == "adam"
        assert config["learning_rate"] == 0.00169


class TestServe:
    def test_check_loads_bundled_model(self):
        assert main(["serve", "--check"]) == 0

    def test_check_rejects_malformed_artifact(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{nope")
        assert main(["serve", "--check", "--model", str(bad)]) == 2

    def test_live_server_round_trip(self, tmp_path):
        import socket
        import subprocess
        import sys
        import time
        import urllib.request

        with socket.socket() as s:
            s.bind(("127.0.0.1", 0))
            port = s.getsockname()[1]
        proc = subprocess.Popen(
            [sys.executable, "-m", "t2drisk.cli", "serve", "--port", str(port)],
            stdout=subprocess.DEVNULL,
            stderr=subprocess.DEVNULL,
        )
        try:
            body = None
            for _ in range(100):
                try:
                    with urllib.request.urlopen(
                        f"http://127.0.0.1:{port}/v1/health", timeout=1
                    ) as response:
                        body = json.loads(response.read())
                    break
                except Exception:
                    time.sleep(0.2)
            assert body is not None and body["status"] == "ok"
        finally:
            proc.terminate()
            proc.wait(timeout=10)


class TestUsage:
    def test_unknown_command_is_usage_error(self):
        assert main(["frobnicate"]) == 1

    def test_missing_required_argument(self):
        assert main(["fit"]) == 1
