"""Command-line entry point: gen / score / train / predict / eval / report.

Exit status: 0 on success, 2 for usage errors (bad flags, missing files,
invalid config), 3 when the run finished but some records failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from pathlib import Path
from typing import Optional

from .env import EnvConfig, Scene, SceneGenerationError, ToyPolicy, generate_scenes
from .eval import EmptyLogError, evaluate, reward_curve_report
from .geometry import InvalidBoxError
from .grpo import GrpoConfig, with_advantages
from .response import boxes_from_json, boxes_to_json, parse_response, read_jsonl, write_jsonl
from .rewards import ResponseGroup, RewardConfig, score_group
from .training import TrainConfig, make_datasets, train

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3

logger = logging.getLogger("crowdrl")


class UsageError(Exception):
    pass


def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from exc
    except ValueError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    return data


def _train_config(args) -> TrainConfig:
    raw = _load_config(args.config)
    if args.seed is not None:
        raw["seed"] = args.seed
    if getattr(args, "steps", None) is not None:
        raw["steps"] = args.steps
    try:
        return TrainConfig.from_dict(raw)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid config: {exc}") from exc


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _require_file(path: str) -> None:
    if not Path(path).is_file():
        raise UsageError(f"no such file: {path}")


def _read_boxes_file(path: str) -> tuple[dict, list[str]]:
    """Map scene_id -> boxes from a ``{"scene_id", "boxes"}`` JSONL file."""
    _require_file(path)
    out, errors = {}, []
    for rec in read_jsonl(path):
        if rec.error:
            errors.append(f"{path}: {rec.error}")
            continue
        try:
            out[str(rec.data["scene_id"])] = boxes_from_json(rec.data["boxes"])
        except (KeyError, ValueError, InvalidBoxError) as exc:
            errors.append(f"{path}: line {rec.line}: {exc}")
    return out, errors


# -- commands ---------------------------------------------------------------


def cmd_gen(args) -> int:
    cfg = _train_config(args)
    env_overrides = {}
    if args.overlap_target is not None:
        env_overrides["overlap_target"] = args.overlap_target
    if args.overlap_tolerance is not None:
        env_overrides["overlap_tolerance"] = args.overlap_tolerance
    if args.min_boxes is not None or args.max_boxes is not None:
        lo, hi = cfg.env.count_range
        env_overrides["count_range"] = (
            args.min_boxes if args.min_boxes is not None else lo,
            args.max_boxes if args.max_boxes is not None else hi,
        )
    try:
        env = EnvConfig.from_dict({**cfg.env.to_dict(), **env_overrides})
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid env config: {exc}") from exc
    if args.count < 0:
        raise UsageError("--count must be >= 0")

    try:
        scenes = generate_scenes(cfg.seed, args.count, env, prefix=args.prefix)
    except SceneGenerationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA

    out = _out_dir(args.out)
    # temp file + rename: no partial scenes.jsonl on failure
    with tempfile.NamedTemporaryFile("w", dir=out, delete=False, suffix=".tmp", encoding="utf-8") as fh:
        for s in scenes:
            fh.write(json.dumps(s.to_record()) + "\n")
        tmp = fh.name
    os.replace(tmp, out / "scenes.jsonl")
    _write_json(out / "config.json", {"seed": cfg.seed, "count": args.count, "env": env.to_dict()})
    _write_json(
        out / "manifest.json",
        {
            "scenes": len(scenes),
            "boxes": sum(len(s.ground_truth) for s in scenes),
            "mean_crowding": (sum(s.crowding for s in scenes) / len(scenes)) if scenes else None,
            "files": ["scenes.jsonl", "config.json"],
        },
    )
    print(f"wrote {len(scenes)} scenes to {out / 'scenes.jsonl'}")
    return EXIT_OK


def cmd_score(args) -> int:
    raw = _load_config(args.config)
    try:
        reward_cfg = RewardConfig(**raw.get("rewards", {}))
        grpo_cfg = GrpoConfig(**raw.get("grpo", {}))
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid config: {exc}") from exc
    group_size = args.group_size if args.group_size is not None else grpo_cfg.group_size
    if group_size < 2:
        raise UsageError("--group-size must be >= 2")

    gt, gt_errors = _read_boxes_file(args.ground_truth)
    if gt_errors:
        raise UsageError("; ".join(gt_errors))
    _require_file(args.responses)

    rows = []
    errors = []
    for rec in read_jsonl(args.responses):
        if rec.error:
            errors.append({"line": rec.line, "error": rec.error})
            continue
        data = rec.data
        scene_id = str(data.get("scene_id"))
        responses = data.get("responses")
        if not isinstance(responses, list) or not all(isinstance(r, str) for r in responses):
            errors.append({"line": rec.line, "scene_id": scene_id, "error": "'responses' must be a list of strings"})
            continue
        if len(responses) != group_size:
            errors.append(
                {"line": rec.line, "scene_id": scene_id, "error": f"expected G={group_size} responses, got {len(responses)}"}
            )
            continue
        if scene_id not in gt:
            errors.append({"line": rec.line, "scene_id": scene_id, "error": "no ground truth for scene"})
            continue
        group = ResponseGroup(scene_id, gt[scene_id], [parse_response(r) for r in responses])
        breakdowns = with_advantages(score_group(group, reward_cfg), grpo_cfg.advantage_std_floor)
        for i, b in enumerate(breakdowns):
            rows.append({"scene_id": scene_id, "response_index": i, **b.to_dict()})

    out = _out_dir(args.out)
    write_jsonl(out / "rewards.jsonl", rows)
    summary = {"groups": len(rows) // group_size, "responses": len(rows), "errors": errors}
    for key in ("format", "look", "accuracy", "total"):
        vals = [r[key] for r in rows]
        summary[key] = (
            {"mean": sum(vals) / len(vals), "min": min(vals), "max": max(vals)} if vals else None
        )
    _write_json(out / "summary.json", summary)
    for e in errors:
        print(f"error: line {e['line']}: {e['error']}", file=sys.stderr)
    print(f"scored {len(rows)} responses, {len(errors)} errors")
    return EXIT_DATA if errors else EXIT_OK


def _save_checkpoint(path: Path, policy: ToyPolicy, step: int) -> None:
    _write_json(path, {"step": step, **policy.to_dict()})


def cmd_train(args) -> int:
    cfg = _train_config(args)
    out = _out_dir(args.out)
    _write_json(out / "config.json", cfg.to_dict())
    train_scenes, eval_scenes = make_datasets(cfg)
    write_jsonl(out / "train_scenes.jsonl", [s.to_record() for s in train_scenes])
    write_jsonl(out / "eval_scenes.jsonl", [s.to_record() for s in eval_scenes])

    init = ToyPolicy(cfg.env)
    _save_checkpoint(out / "checkpoint_init.json", init, 0)
    metrics_path = out / "metrics.jsonl"
    metrics_fh = open(metrics_path, "w", encoding="utf-8")
    every = args.checkpoint_every

    def on_step(step, row, policy):
        metrics_fh.write(json.dumps(row) + "\n")
        metrics_fh.flush()
        if every and (step + 1) % every == 0:
            _save_checkpoint(out / f"checkpoint_step{step + 1:05d}.json", policy, step + 1)

    try:
        policy, log = train(cfg, train_scenes, init, on_step=on_step)
    finally:
        metrics_fh.close()
    _save_checkpoint(out / "checkpoint.json", policy, cfg.steps)
    errors = [e for row in log for e in row["errors"]]
    print(f"trained {cfg.steps} steps; checkpoint at {out / 'checkpoint.json'}")
    return EXIT_DATA if errors else EXIT_OK


def _load_policy(path: str) -> ToyPolicy:
    _require_file(path)
    try:
        with open(path, encoding="utf-8") as fh:
            return ToyPolicy.from_dict(json.load(fh))
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"bad checkpoint {path}: {exc}") from exc


def cmd_predict(args) -> int:
    policy = _load_policy(args.checkpoint)
    _require_file(args.scenes)
    rows, errors = [], []
    for rec in read_jsonl(args.scenes):
        if rec.error:
            errors.append(rec.error)
            continue
        try:
            scene = Scene.from_record(rec.data, policy.config)
        except (KeyError, ValueError, InvalidBoxError) as exc:
            errors.append(f"line {rec.line}: {exc}")
            continue
        rows.append({"scene_id": scene.scene_id, "boxes": boxes_to_json(policy.predict(scene))})
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_jsonl(out, rows)
    for e in errors:
        print(f"error: {e}", file=sys.stderr)
    print(f"wrote {len(rows)} predictions to {out}")
    return EXIT_DATA if errors else EXIT_OK


def cmd_eval(args) -> int:
    preds, pred_errors = _read_boxes_file(args.predictions)
    gt, gt_errors = _read_boxes_file(args.ground_truth)
    if gt_errors:
        raise UsageError("; ".join(gt_errors))
    report = evaluate(preds, gt)
    report.errors = pred_errors + report.errors
    print(report.table())
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        _write_json(out, report.to_dict())
    return EXIT_DATA if report.errors else EXIT_OK


def cmd_report(args) -> int:
    _require_file(args.metrics)
    log = []
    for rec in read_jsonl(args.metrics):
        if rec.error:
            raise UsageError(f"{args.metrics}: {rec.error}")
        log.append(rec.data)
    try:
        summary, csv_text = reward_curve_report(log, args.window, args.key)
    except EmptyLogError as exc:
        raise UsageError(str(exc)) from exc
    except KeyError as exc:
        raise UsageError(f"metrics log has no column {exc}") from exc
    out = _out_dir(args.out)
    _write_json(out / "summary.json", summary)
    (out / "curve.csv").write_text(csv_text, encoding="utf-8")
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crowdrl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--config", help="JSON config file")
        if seed:
            p.add_argument("--seed", type=int)

    p = sub.add_parser("gen", help="generate synthetic scenes")
    common(p)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--prefix", default="scene")
    p.add_argument("--overlap-target", type=float)
    p.add_argument("--overlap-tolerance", type=float)
    p.add_argument("--min-boxes", type=int)
    p.add_argument("--max-boxes", type=int)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("score", help="score response groups")
    common(p, seed=False)
    p.add_argument("--responses", required=True)
    p.add_argument("--ground-truth", required=True)
    p.add_argument("--group-size", type=int)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("train", help="GRPO training on synthetic scenes")
    common(p)
    p.add_argument("--steps", type=int)
    p.add_argument("--checkpoint-every", type=int, default=50)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="greedy predictions from a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--scenes", required=True)
    p.add_argument("--out", required=True, help="predictions JSONL path")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="AP/AR at IoU 0.3 and 0.5")
    p.add_argument("--predictions", required=True)
    p.add_argument("--ground-truth", required=True)
    p.add_argument("--out", help="report JSON path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("report", help="summarize a training metrics log")
    p.add_argument("--metrics", required=True)
    p.add_argument("--window", type=int, default=20)
    p.add_argument("--key", default="mean_reward")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    logging.basicConfig(level=os.environ.get("CROWDRL_LOG_LEVEL", "WARNING").upper())
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
