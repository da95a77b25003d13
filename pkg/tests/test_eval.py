import csv
import io
import math
import random

import pytest

from crowdrl.eval import EmptyLogError, evaluate, moving_average, reward_curve_report
from crowdrl.geometry import LabeledBox
from groupgen import make_anchors, random_box


def B(x1, y1, x2, y2, label="person"):
    return LabeledBox(x1, y1, x2, y2, label)


def random_corpus(rng, n_scenes=8):
    gt, preds = {}, {}
    for i in range(n_scenes):
        anchors = make_anchors(rng)
        gt[f"s{i}"] = [random_box(rng, anchors) for _ in range(rng.randint(0, 6))]
        preds[f"s{i}"] = [random_box(rng, anchors) for _ in range(rng.randint(0, 6))]
    return preds, gt


class TestEvaluate:
    def test_identity(self):
        gt = {"a": [B(0, 0, 10, 10)], "b": [B(0, 0, 5, 5), B(10, 10, 20, 20)]}
        rep = evaluate(gt, gt)
        assert set(rep.micro.values()) == {1.0}
        assert set(rep.macro.values()) == {1.0}
        assert "100.0" in rep.table()

    def test_empty_predictions(self):
        gt = {"a": [B(0, 0, 10, 10)], "b": [B(0, 0, 5, 5)]}
        rep = evaluate({}, gt)
        assert rep.micro == {"AP30": 0.0, "AR30": 0.0, "AP50": 0.0, "AR50": 0.0}

    def test_iou_point_four(self):
        gt = {"a": [B(0, 0, 10, 10)]}
        pred = {"a": [B(0, 0, 10, 4)]}  # IoU 0.4
        rep = evaluate(pred, gt)
        assert rep.micro["AP30"] == 1.0 and rep.micro["AR30"] == 1.0
        assert rep.micro["AP50"] == 0.0 and rep.micro["AR50"] == 0.0
        assert rep.per_scene[0]["TP30"] == 1 and rep.per_scene[0]["TP50"] == 0

    def test_micro_vs_macro(self):
        gt = {"a": [B(0, 0, 10, 10)], "b": [B(0, 0, 10, 10), B(20, 20, 30, 30), B(40, 40, 50, 50)]}
        pred = {"a": [B(0, 0, 10, 10)], "b": [B(0, 0, 10, 10)]}
        rep = evaluate(pred, gt)
        assert rep.micro["AR50"] == 0.5
        assert rep.macro["AR50"] == pytest.approx((1 + 1 / 3) / 2)

    def test_unknown_scene(self):
        gt = {"a": [B(0, 0, 10, 10)]}
        rep = evaluate({"a": [B(0, 0, 10, 10)], "zzz": [B(0, 0, 1, 1)]}, gt)
        assert rep.errors == ["unknown scene_id 'zzz'"]
        assert rep.counts["predictions"] == 1
        assert rep.micro["AP50"] == 1.0

    def test_deterministic(self):
        preds, gt = random_corpus(random.Random(0))
        assert evaluate(preds, gt).to_dict() == evaluate(dict(preds), dict(gt)).to_dict()

    def test_looser_threshold_dominates(self):
        rng = random.Random(1)
        for _ in range(200):
            preds, gt = random_corpus(rng)
            rep = evaluate(preds, gt)
            for agg in (rep.micro, rep.macro):
                assert agg["AP30"] >= agg["AP50"]
                assert agg["AR30"] >= agg["AR50"]

    def test_partition_invariance(self):
        # boxes in far-apart scenes cannot interact, so merging them keeps the micro metrics
        rng = random.Random(2)
        preds, gt = random_corpus(rng, 4)
        merged_p, merged_g = [], []
        for k, sid in enumerate(sorted(gt)):
            merged_p += [b.translated(1000 * k, 0) for b in preds[sid]]
            merged_g += [b.translated(1000 * k, 0) for b in gt[sid]]
        a = evaluate(preds, gt)
        b = evaluate({"all": merged_p}, {"all": merged_g})
        assert a.micro == b.micro


class TestCurveReport:
    def test_constant(self):
        summary, _ = reward_curve_report([{"mean_reward": 1.5}] * 30, window=10)
        assert summary["delta"] == 0.0
        assert summary["relative_change"] == 0.0

    def test_increasing(self):
        log = [{"step": i, "mean_reward": float(i)} for i in range(40)]
        summary, text = reward_curve_report(log, window=10)
        assert summary["delta"] == pytest.approx(34.5 - 4.5)
        assert summary["first"] == 0.0 and summary["last"] == 39.0
        rows = list(csv.reader(io.StringIO(text)))
        assert rows[0] == ["step", "mean_reward", "moving_average"]
        assert len(rows) == 41 and float(rows[-1][2]) == 34.5

    def test_zero_initial(self):
        summary, _ = reward_curve_report([{"mean_reward": 0.0}, {"mean_reward": 1.0}], window=1)
        assert summary["relative_change"] is None

    def test_empty(self):
        with pytest.raises(EmptyLogError):
            reward_curve_report([])

    def test_moving_average(self):
        assert moving_average([1, 2, 3, 4], 2) == [1.0, 1.5, 2.5, 3.5]
        assert all(not math.isnan(v) for v in moving_average([0.1] * 50, 7))
