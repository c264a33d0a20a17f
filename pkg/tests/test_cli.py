from __future__ import annotations

import json
import os

import pytest

from labelaudit.cli import main

LEAN = "bias,word,shape,prev,next"


def run(argv) -> int:
    return main(argv)


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("data")
    code = run(["synth", "--n-train", "150", "--n-test", "50",
                "--vocab-size", "60", "--entity-types", "A,B",
                "--fraction", "0.3", "--seed", "9", "--out", str(out)])
    assert code == 0
    return out


def test_synth_outputs(synth_dir):
    names = {"train.conll", "test_clean.conll", "test_corrupted.conll",
             "test_good.conll", "test_mistake.conll",
             "test_corrected.conll", "manifest.json"}
    assert names <= set(os.listdir(synth_dir))
    manifest = json.loads((synth_dir / "manifest.json").read_text())
    assert manifest["sizes"] == {"train": 150, "test": 50, "corrupted": 15}
    assert len(manifest["corrupted_indices"]) == 15
    assert manifest["run_config"]["fraction"] == 0.3
    assert "jobs" not in manifest["run_config"]


def test_synth_deterministic(tmp_path, synth_dir):
    out2 = tmp_path / "rerun"
    assert run(["synth", "--n-train", "150", "--n-test", "50",
                "--vocab-size", "60", "--entity-types", "A,B",
                "--fraction", "0.3", "--seed", "9",
                "--out", str(out2)]) == 0
    for name in ["train.conll", "test_corrupted.conll"]:
        assert (out2 / name).read_bytes() == (synth_dir / name).read_bytes()


def test_synth_small_fraction_count(tmp_path):
    # round(0.0538 * 3453) = 186
    out = tmp_path / "big"
    assert run(["synth", "--n-train", "10", "--n-test", "3453",
                "--vocab-size", "60", "--entity-types", "A,B",
                "--fraction", "0.0538", "--seed", "1",
                "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["sizes"]["corrupted"] == 186


def test_synth_mistake_corrected_alignment(synth_dir):
    from labelaudit.corpus import parse_conll
    mistake = parse_conll((synth_dir / "test_mistake.conll").read_text())
    corrected = parse_conll((synth_dir / "test_corrected.conll").read_text())
    assert len(mistake) == len(corrected) == 15
    for m, c in zip(mistake.sentences, corrected.sentences):
        assert m.texts == c.texts
        assert m.labels != c.labels


def identify_args(synth_dir, out, extra=()):
    return ["identify", "--train", str(synth_dir / "train.conll"),
            "--test", str(synth_dir / "test_corrupted.conll"),
            "--x", "40", "--seeds", "1,2", "--epochs", "2",
            "--templates", LEAN, "--out", str(out), *extra]


def test_identify_outputs_and_rerun_identical(tmp_path, synth_dir, capsys):
    out = tmp_path / "run"
    assert run(identify_args(synth_dir, out)) == 0
    printed = capsys.readouterr().out
    assert "verdict:" in printed
    assert "PureTrain-TestTrain" in printed
    files = {"report.json", "curves.csv", "curves.svg"}
    assert files <= set(os.listdir(out))
    payload = json.loads((out / "report.json").read_text())
    assert payload["run_config"]["x"] == 40
    assert payload["tool"]["version"]

    before = {f: (out / f).read_bytes() for f in files}
    assert run(identify_args(synth_dir, out, ["--jobs", "2"])) == 0
    for f in files:
        assert (out / f).read_bytes() == before[f]


def test_identify_missing_file_exits_2_no_outputs(tmp_path, synth_dir):
    out = tmp_path / "never"
    code = run(["identify", "--train", str(synth_dir / "nope.conll"),
                "--test", str(synth_dir / "test_clean.conll"),
                "--out", str(out)])
    assert code == 2
    assert not out.exists()


def test_identify_infeasible_x_message(tmp_path, synth_dir, capsys):
    out = tmp_path / "never"
    code = run(identify_args(synth_dir, out)[:5] +
               ["--x", "999", "--out", str(out)])
    assert code == 2
    assert "maximum feasible x is 50" in capsys.readouterr().err
    assert not out.exists()


def test_default_x_rule(tmp_path, synth_dir, capsys):
    # x = min(|test|, |train| // 3) = min(50, 50) = 50
    out = tmp_path / "defx"
    args = ["identify", "--train", str(synth_dir / "train.conll"),
            "--test", str(synth_dir / "test_corrupted.conll"),
            "--seeds", "1", "--epochs", "1", "--templates", LEAN,
            "--checkpoints", "50,100", "--out", str(out)]
    assert run(args) == 0
    payload = json.loads((out / "report.json").read_text())
    assert payload["sizes"]["x"] == 50


def test_validate_command(tmp_path, synth_dir, capsys):
    out = tmp_path / "val"
    args = ["validate", "--train", str(synth_dir / "train.conll"),
            "--test-good", str(synth_dir / "test_good.conll"),
            "--test-mistake", str(synth_dir / "test_mistake.conll"),
            "--test-corrected", str(synth_dir / "test_corrected.conll"),
            "--x", "40", "--w", "60", "--seeds", "1", "--epochs", "2",
            "--templates", LEAN, "--checkpoints", "40,80,110",
            "--out", str(out)]
    assert run(args) == 0
    printed = capsys.readouterr().out
    assert "verdict:" in printed
    assert "correct_minus_mistake:TestTrainMistake" in printed
    payload = json.loads((out / "report.json").read_text())
    assert payload["protocol"] == "validate"
    assert len(payload["curves"]) == 8
    # every curve ends at y + w + z = 35 + 60 + 15
    assert all(c["points"][-1]["prefix_size"] == 110
               for c in payload["curves"])


def test_validate_misaligned_exits_2(tmp_path, synth_dir, capsys):
    out = tmp_path / "bad"
    args = ["validate", "--train", str(synth_dir / "train.conll"),
            "--test-good", str(synth_dir / "test_good.conll"),
            "--test-mistake", str(synth_dir / "test_mistake.conll"),
            "--test-corrected", str(synth_dir / "test_good.conll"),
            "--x", "40", "--w", "60", "--out", str(out)]
    assert run(args) == 2
    assert not out.exists()


def test_eval_command(tmp_path, synth_dir, capsys):
    out = tmp_path / "eval"
    args = ["eval", "--train", str(synth_dir / "train.conll"),
            "--test", str(synth_dir / "test_clean.conll"),
            "--epochs", "4", "--out", str(out)]
    assert run(args) == 0
    printed = capsys.readouterr().out
    lines = printed.splitlines()
    assert lines[0].split() == ["P", "R", "F1"]
    values = lines[1].split()
    assert len(values) == 3
    assert all("." in v and len(v.split(".")[1]) == 2 for v in values)
    assert (out / "model.json").exists()


def test_eval_deterministic(tmp_path, synth_dir, capsys):
    args = ["eval", "--train", str(synth_dir / "train.conll"),
            "--test", str(synth_dir / "test_clean.conll"),
            "--epochs", "2", "--out", str(tmp_path / "e1")]
    assert run(args) == 0
    first = capsys.readouterr().out
    args[-1] = str(tmp_path / "e2")
    assert run(args) == 0
    assert capsys.readouterr().out == first


def test_plot_rerenders_identical(tmp_path, synth_dir):
    out = tmp_path / "run"
    assert run(identify_args(synth_dir, out)) == 0
    plot_out = tmp_path / "plot"
    assert run(["plot", "--report", str(out / "report.json"),
                "--out", str(plot_out)]) == 0
    assert (plot_out / "curves.svg").read_bytes() == \
        (out / "curves.svg").read_bytes()


def test_config_file_and_flag_precedence(tmp_path, synth_dir):
    config = {"train": str(synth_dir / "train.conll"),
              "test": str(synth_dir / "test_corrupted.conll"),
              "x": 30, "seeds": [1], "epochs": 1,
              "templates": ["bias", "word"],
              "checkpoints": [30, 60],
              "out": str(tmp_path / "cfg_out")}
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    assert run(["identify", "--config", str(path), "--x", "35"]) == 0
    payload = json.loads((tmp_path / "cfg_out" / "report.json").read_text())
    assert payload["sizes"]["x"] == 35  # flag beats file
    assert payload["run_config"]["epochs"] == 1  # file beats default


def test_bad_config_exits_1(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{\"unknown_key\": 1}")
    assert run(["identify", "--config", str(path)]) == 1
    path.write_text("not json")
    assert run(["identify", "--config", str(path)]) == 1
    assert run(["identify", "--config", str(tmp_path / "missing.json")]) == 1


def test_usage_error_exits_1():
    assert run(["frobnicate"]) == 1
    assert run([]) == 1


def test_missing_plot_report_exits_1(tmp_path):
    assert run(["plot", "--out", str(tmp_path)]) == 1


def test_version_exits_0(capsys):
    assert run(["--version"]) == 0
    assert "labelaudit" in capsys.readouterr().out
