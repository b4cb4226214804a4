import json
from pathlib import Path

import pytest

import fmaguard.classifier as zcc
from fmaguard.cli import main

SIM_CONFIG = """\
scenario:
  duration_s: 0.45
  fault: {kind: AG, x: 0.1, r_f: 0.001, t_inception: 0.25}
attack: {mode: basic, c_a: eavesdropped, t_start: 0.0}
relay: {}
mi: {f: 0.05}
seed: 3
"""

DATASET_CONFIG = """\
sweep: {positives: 6, negatives: 6}
seed: 17
"""


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_all(out_dir):
    return {p.name: p.read_bytes() for p in sorted(Path(out_dir).iterdir())}


class TestSimulate:
    def test_outputs_and_manifest(self, tmp_path):
        cfg = write(tmp_path, "sim.yaml", SIM_CONFIG)
        out = tmp_path / "out"
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
        names = {p.name for p in out.iterdir()}
        assert names == {"stream.csv", "mi_trace.csv", "events.jsonl", "manifest.json"}
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["subcommand"] == "simulate"
        assert manifest["root_seed"] == 3
        assert len(manifest["config_sha256"]) == 64
        events = [json.loads(line) for line in (out / "events.jsonl").read_text().splitlines()]
        assert events[0]["kind"] == "MITrigger"

    def test_trace_crosses_threshold_after_inception(self, tmp_path):
        cfg = write(tmp_path, "sim.yaml", SIM_CONFIG)
        out = tmp_path / "out"
        main(["simulate", "--config", cfg, "--out", str(out)])
        lines = (out / "mi_trace.csv").read_text().splitlines()
        assert lines[0] == "# schema=fmaguard-mi-trace-v1"
        assert lines[1] == "t,p_norm,m,l_u,o"
        rows = [line.split(",") for line in lines[2:]]
        crossing = [float(r[0]) for r in rows if float(r[2]) >= float(r[3])]
        assert crossing and min(crossing) >= 0.25

    def test_healthy_scenario_empty_events(self, tmp_path):
        cfg = write(tmp_path, "sim.yaml", "scenario: {duration_s: 0.3}\nseed: 0\n")
        out = tmp_path / "out"
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
        assert (out / "events.jsonl").read_text() == ""

    def test_missing_config_exit_2(self, tmp_path):
        assert main(["simulate", "--config", str(tmp_path / "nope.yaml"),
                     "--out", str(tmp_path / "o")]) == 2

    def test_unknown_key_exit_2(self, tmp_path):
        cfg = write(tmp_path, "sim.yaml", "scenario: {duration_s: 0.3}\nbogus: 1\n")
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2

    def test_byte_identical_rerun(self, tmp_path):
        cfg = write(tmp_path, "sim.yaml", SIM_CONFIG)
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        main(["simulate", "--config", cfg, "--out", str(out1)])
        main(["simulate", "--config", cfg, "--out", str(out2)])
        a = read_all(out1)
        b = read_all(out2)
        a["manifest.json"] = a["manifest.json"].replace(b"o1", b"oX")
        b["manifest.json"] = b["manifest.json"].replace(b"o2", b"oX")
        assert a == b


@pytest.fixture(scope="module")
def artifacts(tmp_path_factory):
    root = tmp_path_factory.mktemp("cliflow")
    ds_cfg = write(root, "ds.yaml", DATASET_CONFIG)
    ds_out = root / "ds"
    assert main(["dataset", "--config", ds_cfg, "--out", str(ds_out)]) == 0

    train_cfg = write(root, "train.yaml", f"""\
dataset: {ds_out / 'dataset.csv'}
train: {{epochs: 30, seed: 2, hidden: [32, 16], batch_size: 8}}
""")
    model_out = root / "model"
    assert main(["train", "--config", train_cfg, "--out", str(model_out)]) == 0

    return root, ds_cfg, ds_out, train_cfg, model_out


class TestDatasetTrainEvalRoc:
    def test_dataset_schema(self, artifacts):
        _, _, ds_out, _, _ = artifacts
        lines = (ds_out / "dataset.csv").read_text().splitlines()
        assert lines[0] == "# schema=fmaguard-dataset-v1"
        header = lines[1].split(",")
        assert header[0] == "case_id" and header[-1] == "label"
        assert len(header) == 110

    def test_train_outputs(self, artifacts):
        _, _, _, _, model_out = artifacts
        model = zcc.load_model(model_out / "model.bin")
        assert model.layer_sizes == (108, 32, 16, 2)
        summary = json.loads((model_out / "training.json").read_text())
        assert "best_epoch" in summary

    def test_train_byte_identical(self, artifacts, tmp_path):
        root, _, ds_out, train_cfg, model_out = artifacts
        out2 = tmp_path / "model2"
        assert main(["train", "--config", train_cfg, "--out", str(out2)]) == 0
        assert (model_out / "model.bin").read_bytes() == (out2 / "model.bin").read_bytes()

    def test_train_missing_dataset_exit_3(self, tmp_path):
        cfg = write(tmp_path, "t.yaml", "dataset: /nonexistent/ds.csv\n")
        assert main(["train", "--config", cfg, "--out", str(tmp_path / "m")]) == 3

    def test_eval_outputs(self, artifacts, tmp_path):
        root, _, _, _, model_out = artifacts
        eval_cfg = write(tmp_path, "eval.yaml", f"""\
model: {model_out / 'model.bin'}
sweep: {{positives: 4, negatives: 4}}
seed: 23
""")
        out = tmp_path / "eval"
        assert main(["eval", "--config", eval_cfg, "--out", str(out)]) == 0
        lines = (out / "metrics.csv").read_text().splitlines()
        assert lines[0] == "# schema=fmaguard-metrics-v1"
        assert lines[1] == "accuracy,precision,recall,fp_rate,fn_rate,tp,tn,fp,fn"
        cases = (out / "cases.csv").read_text().splitlines()
        assert cases[1] == "case_id,label,relay_trip,mi_trigger,fma_alarm,latency_samples,error"
        assert len(cases) == 2 + 8

    def test_eval_missing_model_exit_3(self, tmp_path):
        cfg = write(tmp_path, "e.yaml",
                    "model: /nonexistent/model.bin\nsweep: {positives: 2, negatives: 2}\n")
        assert main(["eval", "--config", cfg, "--out", str(tmp_path / "o")]) == 3

    def test_roc_outputs_sorted(self, artifacts, tmp_path):
        root, _, _, _, model_out = artifacts
        roc_cfg = write(tmp_path, "roc.yaml", f"""\
model: {model_out / 'model.bin'}
sweep: {{positives: 5, negatives: 5}}
f_list: [0.01, 0.05, 0.10]
seed: 41
""")
        out = tmp_path / "roc"
        assert main(["roc", "--config", roc_cfg, "--out", str(out)]) == 0
        lines = (out / "roc.csv").read_text().splitlines()
        assert lines[0] == "# schema=fmaguard-roc-v1"
        assert lines[1] == "detector,f,threshold,fp_rate,tp_rate"
        rows = [line.split(",") for line in lines[2:]]
        for detector in ("mi_only", "mi_zcc"):
            fprs = [float(r[3]) for r in rows if r[0] == detector]
            assert fprs == sorted(fprs)
        auc = json.loads((out / "auc.json").read_text())
        assert set(auc) == {"auc_mi_only", "auc_mi_zcc"}

    def test_seed_flag_overrides(self, artifacts, tmp_path):
        _, ds_cfg, _, _, _ = artifacts
        out = tmp_path / "ds2"
        assert main(["dataset", "--config", ds_cfg, "--out", str(out), "--seed", "99"]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["root_seed"] == 99


class TestBundledConfigs:
    CONFIG_DIR = Path(__file__).parent.parent / "configs"

    def test_bundled_configs_parse(self):
        from fmaguard.config import (
            load_yaml,
            parse_dataset_config,
            parse_eval_config,
            parse_roc_config,
            parse_simulate_config,
            parse_train_config,
        )

        parsers = {
            "dataset_demo.yaml": parse_dataset_config,
            "train_demo.yaml": parse_train_config,
            "eval_demo.yaml": parse_eval_config,
            "roc_demo.yaml": parse_roc_config,
        }
        for path in sorted(self.CONFIG_DIR.glob("*.yaml")):
            parser = parsers.get(path.name, parse_simulate_config)
            parser(load_yaml(path))

    def test_bolted_example_crosses_threshold_after_inception(self, tmp_path):
        cfg = self.CONFIG_DIR / "fma_ag_x10_bolted.yaml"
        out = tmp_path / "out"
        assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
        lines = (out / "mi_trace.csv").read_text().splitlines()[2:]
        rows = [line.split(",") for line in lines]
        crossings = [float(r[0]) for r in rows if float(r[2]) >= float(r[3])]
        assert crossings and 0.25 <= min(crossings) <= 0.26

    def test_healthy_example_empty_event_log(self, tmp_path):
        cfg = self.CONFIG_DIR / "healthy.yaml"
        out = tmp_path / "out"
        assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
        assert (out / "events.jsonl").read_text() == ""
