"""Parsing and serialization of think/look/answer responses.

A well-formed response is::

    <think> ... </think><look> BOXES </look><answer> BOXES | None </answer>

where ``BOXES`` is a JSON array of ``{"bbox_2d": [x1, y1, x2, y2], "label": str}``
objects, either bare or inside a fenced ```` ```json ```` block.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence, Union

from .geometry import InvalidBoxError, LabeledBox

logger = logging.getLogger(__name__)

TAGS = ("<think>", "</think>", "<look>", "</look>", "<answer>", "</answer>")


class _NoneAnswer:
    """Sentinel for an ``<answer>None</answer>`` response."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NONE_ANSWER"

    def __reduce__(self):
        return (_NoneAnswer, ())


NONE_ANSWER = _NoneAnswer()

_FENCE_RE = re.compile(r"^```(?:json)?\s*\n?(.*?)\n?\s*```$", re.DOTALL)


@dataclass
class StructuredResponse:
    raw: str
    think: Optional[str] = None
    look_boxes: Optional[list[LabeledBox]] = None
    answer_boxes: Union[list[LabeledBox], _NoneAnswer, None] = None
    format_valid: bool = False
    diagnostics: list[str] = field(default_factory=list)

    def answer_list(self) -> list[LabeledBox]:
        """Answer boxes as a plain list; NONE_ANSWER and absent sections give ``[]``."""
        if self.answer_boxes is None or self.answer_boxes is NONE_ANSWER:
            return []
        return list(self.answer_boxes)

    def look_list(self) -> list[LabeledBox]:
        return list(self.look_boxes) if self.look_boxes else []


def _box_from_obj(obj) -> LabeledBox:
    if not isinstance(obj, dict):
        raise InvalidBoxError(f"box entry is not an object: {type(obj).__name__}")
    if "bbox_2d" not in obj or "label" not in obj:
        raise InvalidBoxError("box entry needs 'bbox_2d' and 'label'")
    coords = obj["bbox_2d"]
    label = obj["label"]
    if not isinstance(coords, list) or len(coords) != 4:
        raise InvalidBoxError(f"bbox_2d must be a 4-element array, got {coords!r}")
    if not isinstance(label, str):
        raise InvalidBoxError(f"label must be a string, got {label!r}")
    for c in coords:
        if isinstance(c, bool) or not isinstance(c, (int, float)):
            raise InvalidBoxError(f"non-numeric coordinate {c!r}")
    return LabeledBox(*coords, label=label)


def parse_box_list(text: str, diagnostics: Optional[list[str]] = None) -> Optional[list[LabeledBox]]:
    """Parse a box array from a fenced ```json block or a bare JSON array.

    Returns ``None`` if the section is not a readable array. Individual
    malformed entries are skipped and reported through ``diagnostics``.
    """
    if diagnostics is None:
        diagnostics = []
    body = text.strip()
    if body == "":
        return []
    m = _FENCE_RE.match(body)
    if m:
        body = m.group(1).strip()
    try:
        data = json.loads(body)
    except (ValueError, RecursionError) as exc:
        diagnostics.append(f"unparseable box section: {exc.__class__.__name__}")
        return None
    if not isinstance(data, list):
        diagnostics.append("box section is not a JSON array")
        return None
    boxes = []
    for k, obj in enumerate(data):
        try:
            boxes.append(_box_from_obj(obj))
        except InvalidBoxError as exc:
            diagnostics.append(f"skipped box {k}: {exc}")
    return boxes


def _section_positions(raw: str) -> Optional[list[int]]:
    positions = []
    for tag in TAGS:
        if raw.count(tag) != 1:
            return None
        positions.append(raw.index(tag))
    if positions != sorted(positions):
        return None
    return positions


def parse_response(raw: Union[str, bytes]) -> StructuredResponse:
    """Decompose a raw model output. Never raises."""
    if isinstance(raw, (bytes, bytearray)):
        raw = bytes(raw).decode("utf-8", errors="replace")
    resp = StructuredResponse(raw=raw)
    positions = _section_positions(raw)
    if positions is None:
        resp.diagnostics.append("tags missing, duplicated or out of order")
        return resp

    def between(k: int) -> str:
        return raw[positions[k] + len(TAGS[k]) : positions[k + 1]]

    resp.think = between(0)
    look = parse_box_list(between(2), resp.diagnostics)
    answer_text = between(4)
    if answer_text.strip() == "None":
        answer = NONE_ANSWER
    else:
        answer = parse_box_list(answer_text, resp.diagnostics)
    resp.look_boxes = look
    resp.answer_boxes = answer
    resp.format_valid = look is not None and answer is not None
    if resp.diagnostics:
        logger.debug("parse diagnostics: %s", resp.diagnostics)
    return resp


def format_reward(response: StructuredResponse) -> int:
    return 1 if response.format_valid else 0


def _round_coord(c: float) -> int:
    return int(round(c))


def serialize_boxes(boxes: Sequence[LabeledBox]) -> str:
    """Render boxes as the fenced Markdown JSON block, coordinates rounded to integers."""
    items = [{"bbox_2d": [_round_coord(c) for c in b.coords], "label": b.label} for b in boxes]
    return "```json\n" + json.dumps(items) + "\n```"


def compose_response(
    think: str,
    look_boxes: Sequence[LabeledBox],
    answer_boxes: Union[Sequence[LabeledBox], _NoneAnswer],
) -> str:
    if answer_boxes is NONE_ANSWER:
        answer = "None"
    else:
        answer = serialize_boxes(answer_boxes)
    return (
        f"<think>{think}</think>"
        f"<look>{serialize_boxes(look_boxes)}</look>"
        f"<answer>{answer}</answer>"
    )


# -- JSONL batch files ------------------------------------------------------


def boxes_to_json(boxes: Iterable[LabeledBox]) -> list[dict]:
    return [b.to_dict() for b in boxes]


def boxes_from_json(items: Sequence[dict]) -> list[LabeledBox]:
    """Strict counterpart of :func:`parse_box_list` for trusted files; raises on bad entries."""
    if not isinstance(items, list):
        raise ValueError("'boxes' must be a list")
    return [_box_from_obj(obj) for obj in items]


@dataclass
class JsonlRecord:
    line: int
    data: Optional[dict] = None
    error: Optional[str] = None


def read_jsonl(path: Union[str, Path]) -> Iterator[JsonlRecord]:
    """Yield one record per non-blank line; malformed lines become error records."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except (ValueError, RecursionError) as exc:
                yield JsonlRecord(lineno, error=f"line {lineno}: malformed JSON ({getattr(exc, 'msg', exc)})")
                continue
            if not isinstance(data, dict):
                yield JsonlRecord(lineno, error=f"line {lineno}: expected a JSON object")
                continue
            yield JsonlRecord(lineno, data=data)


def write_jsonl(path: Union[str, Path], rows: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")


def response_group_record(scene_id: str, responses: Sequence[str]) -> dict:
    return {"scene_id": scene_id, "responses": list(responses)}


def ground_truth_record(scene_id: str, boxes: Sequence[LabeledBox], **extra) -> dict:
    row = {"scene_id": scene_id, "boxes": boxes_to_json(boxes)}
    row.update(extra)
    return row
