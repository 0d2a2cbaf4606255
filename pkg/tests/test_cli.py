import json
from pathlib import Path

import pytest

from drivebc.cli import main


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """One tiny end-to-end run shared by the CLI tests."""
    root = tmp_path_factory.mktemp("cli")
    assert main(["generate", "--out", str(root / "corpus"), "--segments", "6",
                 "--seed", "11", "--embedding-dim", "4",
                 "--duration", "4"]) == 0
    assert main(["preprocess", "--train", str(root / "corpus/train.jsonl"),
                 "--val", str(root / "corpus/val.jsonl"),
                 "--out", str(root / "windows")]) == 0
    assert main(["train", "--windows", str(root / "windows"),
                 "--variant", "lstm_12", "--hidden", "16", "--epochs", "3",
                 "--out", str(root / "model.dbc"), "--quiet"]) == 0
    return root


class TestPipelineCommands:
    def test_generate_outputs(self, workspace):
        assert (workspace / "corpus/train.jsonl").exists()
        assert (workspace / "corpus/val.jsonl").exists()
        manifest = json.loads((workspace / "corpus/manifest.json").read_text())
        assert len(manifest["train_segments"]) == 5

    def test_preprocess_outputs(self, workspace):
        assert (workspace / "windows/train.windows").exists()
        assert (workspace / "windows/val.windows").exists()

    def test_train_outputs(self, workspace):
        assert (workspace / "model.dbc").exists()
        run = json.loads((workspace / "model.dbc.run.json").read_text())
        assert len(run["history"]) == 3
        assert run["config"]["seed"] == 0

    def test_evaluate(self, workspace, capsys):
        assert main(["evaluate", "--artifact", str(workspace / "model.dbc"),
                     "--windows", str(workspace / "windows/val.windows"),
                     "--out", str(workspace / "report.json"),
                     "--baselines", "--table", str(workspace / "results")]) == 0
        out = capsys.readouterr().out
        assert "persistence" in out and "zero" in out
        report = json.loads((workspace / "report.json").read_text())
        assert report["model_id"] == "lstm_12"
        assert (workspace / "results.txt").exists()
        assert (workspace / "results.csv").exists()

    def test_plot(self, workspace):
        assert main(["plot", "--artifact", str(workspace / "model.dbc"),
                     "--data", str(workspace / "corpus/val.jsonl"),
                     "--out", str(workspace / "plot")]) == 0
        svg = (workspace / "plot.svg").read_text()
        assert svg.startswith("<svg")
        csv_text = (workspace / "plot.csv").read_text()
        assert csv_text.splitlines()[0] == "frame,pred_x,true_x,pred_y,true_y"

    def test_plot_unknown_segment(self, workspace, capsys):
        rc = main(["plot", "--artifact", str(workspace / "model.dbc"),
                   "--data", str(workspace / "corpus/val.jsonl"),
                   "--segment", "nope", "--out", str(workspace / "p2")])
        assert rc == 1
        assert "error:" in capsys.readouterr().err

    def test_gradcheck(self, capsys):
        assert main(["gradcheck", "--variant", "lstm_12"]) == 0
        out = capsys.readouterr().out
        assert "PASS" in out and "max relative error" in out


class TestErrorHandling:
    def test_missing_required_flag_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["evaluate", "--windows", "w"])
        assert exc.value.code == 2

    def test_unknown_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["transmogrify"])
        assert exc.value.code == 2

    def test_validation_failure_exits_1(self, tmp_path, capsys):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"segment_id": "s"}\n')
        rc = main(["preprocess", "--train", str(bad), "--val", str(bad),
                   "--out", str(tmp_path / "w")])
        assert rc == 1
        err = capsys.readouterr().err
        assert err.startswith("error:")
        assert "\n" == err[-1] and err.count("\n") == 1  # one-line error

    def test_missing_config_file(self, tmp_path, capsys):
        rc = main(["--config", str(tmp_path / "none.ini"), "generate",
                   "--out", str(tmp_path / "c")])
        assert rc == 1

    def test_config_file_supplies_defaults(self, tmp_path):
        cfg = tmp_path / "run.ini"
        cfg.write_text("[generate]\nsegments = 4\nduration = 3\n"
                       "embedding-dim = 2\n")
        assert main(["--config", str(cfg), "generate",
                     "--out", str(tmp_path / "c"), "--seed", "5"]) == 0
        manifest = json.loads((tmp_path / "c/manifest.json").read_text())
        assert manifest["n_segments"] == 4
        assert manifest["config"]["duration_s"] == 3.0
        assert manifest["config"]["embedding_dim"] == 2

    def test_flags_override_config_file(self, tmp_path):
        cfg = tmp_path / "run.ini"
        cfg.write_text("[generate]\nsegments = 4\nduration = 3\n")
        assert main(["--config", str(cfg), "generate",
                     "--out", str(tmp_path / "c"), "--segments", "2"]) == 0
        manifest = json.loads((tmp_path / "c/manifest.json").read_text())
        assert manifest["n_segments"] == 2


def test_generate_deterministic(tmp_path):
    for sub in ("a", "b"):
        assert main(["generate", "--out", str(tmp_path / sub), "--segments",
                     "3", "--seed", "4", "--duration", "2",
                     "--embedding-dim", "3"]) == 0
    for name in ("train.jsonl", "val.jsonl", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes()
