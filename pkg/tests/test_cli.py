import json
from pathlib import Path

import pytest

from crowdrl.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main
from crowdrl.env import EnvConfig, ToyPolicy

FIXTURES = Path(__file__).parent / "fixtures"

SINGLE_BOX = {
    "steps": 200,
    "scenes_per_step": 4,
    "num_train_scenes": 16,
    "num_eval_scenes": 16,
    "env": {"count_range": [1, 1], "overlap_target": 0.0, "overlap_tolerance": 0.0},
}


def write_config(tmp_path, cfg, name="config.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


class TestGen:
    def test_rerun_identical(self, tmp_path):
        for d in ("a", "b"):
            assert main(["gen", "--count", "10", "--seed", "1", "--out", str(tmp_path / d)]) == EXIT_OK
        a = (tmp_path / "a" / "scenes.jsonl").read_bytes()
        assert a == (tmp_path / "b" / "scenes.jsonl").read_bytes()
        assert len(a.splitlines()) == 10
        manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
        assert manifest["scenes"] == 10

    def test_count_zero(self, tmp_path):
        assert main(["gen", "--count", "0", "--out", str(tmp_path)]) == EXIT_OK
        assert (tmp_path / "scenes.jsonl").read_text() == ""

    def test_unreachable_target(self, tmp_path):
        cfg = write_config(tmp_path, {"env": {"max_retries": 20}})
        rc = main(
            ["gen", "--config", cfg, "--count", "3", "--min-boxes", "3", "--max-boxes", "3",
             "--overlap-target", "0.99", "--overlap-tolerance", "0.001", "--out", str(tmp_path / "o")]
        )
        assert rc != EXIT_OK
        assert not (tmp_path / "o" / "scenes.jsonl").exists()

    def test_bad_config(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"env": {"grid": 1}})
        assert main(["gen", "--config", cfg, "--count", "1", "--out", str(tmp_path)]) == EXIT_USAGE
        assert "usage error" in capsys.readouterr().err
        assert main(["gen", "--config", str(tmp_path / "nope.json"), "--count", "1", "--out", str(tmp_path)]) == EXIT_USAGE


class TestScore:
    def args(self, tmp_path, responses, gt=None, g="4"):
        return [
            "score", "--responses", str(responses),
            "--ground-truth", str(gt or FIXTURES / "score_ground_truth.jsonl"),
            "--group-size", g, "--out", str(tmp_path / "out"),
        ]

    def test_golden_bytes(self, tmp_path):
        assert main(self.args(tmp_path, FIXTURES / "score_responses.jsonl")) == EXIT_OK
        got = (tmp_path / "out" / "rewards.jsonl").read_bytes()
        assert got == (FIXTURES / "score_golden.jsonl").read_bytes()
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert summary["groups"] == 40 and summary["errors"] == []

    def test_empty_input(self, tmp_path):
        empty = tmp_path / "empty.jsonl"
        empty.write_text("")
        assert main(self.args(tmp_path, empty)) == EXIT_OK
        assert (tmp_path / "out" / "rewards.jsonl").read_text() == ""

    def test_malformed_line(self, tmp_path, capsys):
        lines = (FIXTURES / "score_responses.jsonl").read_text().splitlines()[:2]
        bad = tmp_path / "bad.jsonl"
        bad.write_text(lines[0] + "\n{not json\n" + lines[1] + "\n")
        assert main(self.args(tmp_path, bad)) == EXIT_DATA
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert summary["errors"][0]["line"] == 2
        assert "line 2" in summary["errors"][0]["error"]
        assert summary["responses"] == 8
        assert "line 2" in capsys.readouterr().err

    def test_wrong_group_size(self, tmp_path):
        assert main(self.args(tmp_path, FIXTURES / "score_responses.jsonl", g="8")) == EXIT_DATA
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert len(summary["errors"]) == 40
        assert "expected G=8" in summary["errors"][0]["error"]

    def test_bad_group_size_flag(self, tmp_path):
        assert main(self.args(tmp_path, FIXTURES / "score_responses.jsonl", g="1")) == EXIT_USAGE

    def test_missing_file(self, tmp_path):
        assert main(self.args(tmp_path, tmp_path / "missing.jsonl")) == EXIT_USAGE


class TestTrainPipeline:
    def test_zero_steps(self, tmp_path):
        assert main(["train", "--steps", "0", "--out", str(tmp_path)]) == EXIT_OK
        ckpt = json.loads((tmp_path / "checkpoint.json").read_text())
        init = json.loads((tmp_path / "checkpoint_init.json").read_text())
        assert ckpt["params"] == init["params"] == ToyPolicy(EnvConfig()).params.tolist()
        assert (tmp_path / "metrics.jsonl").read_text() == ""

    def test_repeatable(self, tmp_path):
        for d in ("a", "b"):
            assert main(["train", "--steps", "3", "--seed", "7", "--out", str(tmp_path / d)]) == EXIT_OK
        a = (tmp_path / "a" / "metrics.jsonl").read_bytes()
        assert a == (tmp_path / "b" / "metrics.jsonl").read_bytes()
        assert len(a.splitlines()) == 3
        saved = json.loads((tmp_path / "a" / "config.json").read_text())
        assert saved["seed"] == 7 and saved["steps"] == 3

    def test_train_predict_eval_report(self, tmp_path):
        cfg = write_config(tmp_path, SINGLE_BOX)
        run = tmp_path / "run"
        assert main(["train", "--config", cfg, "--checkpoint-every", "100", "--out", str(run)]) == EXIT_OK
        assert (run / "checkpoint_step00100.json").exists()
        ap50 = {}
        for name in ("checkpoint_init", "checkpoint"):
            preds = tmp_path / f"{name}.preds.jsonl"
            assert main(["predict", "--checkpoint", str(run / f"{name}.json"), "--scenes", str(run / "eval_scenes.jsonl"), "--out", str(preds)]) == EXIT_OK
            report = tmp_path / f"{name}.report.json"
            assert main(["eval", "--predictions", str(preds), "--ground-truth", str(run / "eval_scenes.jsonl"), "--out", str(report)]) == EXIT_OK
            ap50[name] = json.loads(report.read_text())["micro"]["AP50"]
        assert ap50["checkpoint"] > ap50["checkpoint_init"]

        out = tmp_path / "rep"
        assert main(["report", "--metrics", str(run / "metrics.jsonl"), "--window", "20", "--out", str(out)]) == EXIT_OK
        summary = json.loads((out / "summary.json").read_text())
        assert summary["steps"] == 200
        assert (out / "curve.csv").read_text().startswith("step,mean_reward,moving_average")

    def test_report_empty_log(self, tmp_path):
        log = tmp_path / "m.jsonl"
        log.write_text("")
        assert main(["report", "--metrics", str(log), "--out", str(tmp_path / "r")]) == EXIT_USAGE

    def test_eval_unknown_scene(self, tmp_path, capsys):
        gt = tmp_path / "gt.jsonl"
        gt.write_text(json.dumps({"scene_id": "a", "boxes": [{"bbox_2d": [0, 0, 5, 5], "label": "person"}]}) + "\n")
        pr = tmp_path / "pr.jsonl"
        pr.write_text(json.dumps({"scene_id": "b", "boxes": []}) + "\n")
        assert main(["eval", "--predictions", str(pr), "--ground-truth", str(gt)]) == EXIT_DATA
        assert "unknown scene_id 'b'" in capsys.readouterr().out


def test_no_command():
    with pytest.raises(SystemExit):
        main([])
