"""Synthetic crowded scenes and a toy autoregressive box-emitting policy.

Token vocabulary on a K x K grid: ids ``0 .. K*K-1`` are cells in row-major
order (``row * K + col``), followed by ``EMIT_LOOK``, ``EMIT_ANSWER`` and
``STOP``. A box is a pair of cell tokens, top-left then bottom-right, spanning
the two cell centers.
"""

from __future__ import annotations

import itertools
import zlib
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .geometry import LabeledBox, iou
from .grpo import TokenTrajectory
from .response import (
    NONE_ANSWER,
    StructuredResponse,
    boxes_from_json,
    compose_response,
    ground_truth_record,
    parse_response,
    serialize_boxes,
)

THINK_PLACEHOLDER = "Scan the scene, mark regions that are hard to separate, then list every person."


def substream(seed: int, *names: str) -> np.random.Generator:
    """Independent generator for a named component, derived from one run seed."""
    keys = [zlib.crc32(n.encode("utf-8")) for n in names]
    return np.random.default_rng(np.random.SeedSequence([int(seed), *keys]))


class SceneGenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class EnvConfig:
    canvas: tuple[int, int] = (512, 512)
    grid: int = 16
    count_range: tuple[int, int] = (1, 4)
    width_range: tuple[float, float] = (64.0, 144.0)
    height_range: tuple[float, float] = (96.0, 208.0)
    overlap_target: float = 0.05
    overlap_tolerance: float = 0.05
    max_retries: int = 400
    labels: tuple[str, ...] = ("person",)
    multi_class: bool = False
    feature_noise: float = 0.15
    corner_drop: float = 0.1
    max_boxes_per_section: int = 6
    max_tokens: int = 40
    raw_mode: bool = False

    def __post_init__(self):
        lo, hi = self.count_range
        if lo < 0 or hi < lo:
            raise ValueError(f"invalid count_range {self.count_range}")
        for name in ("width_range", "height_range"):
            a, b = getattr(self, name)
            if a <= 0 or b < a:
                raise ValueError(f"invalid {name} {(a, b)}")
        if self.width_range[1] >= self.canvas[0] or self.height_range[1] >= self.canvas[1]:
            raise ValueError("box sizes must fit inside the canvas")
        if self.grid < 2:
            raise ValueError("grid must be >= 2")
        if not 0 <= self.overlap_target <= 1 or self.overlap_tolerance < 0:
            raise ValueError("invalid overlap target/tolerance")
        if not self.labels:
            raise ValueError("need at least one label")

    @classmethod
    def from_dict(cls, d: dict) -> "EnvConfig":
        d = dict(d)
        for key in ("canvas", "count_range", "width_range", "height_range", "labels"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


# -- grid and tokens --------------------------------------------------------


@dataclass(frozen=True)
class Grid:
    k: int = 16
    width: float = 512.0
    height: float = 512.0

    @property
    def num_cells(self) -> int:
        return self.k * self.k

    @property
    def EMIT_LOOK(self) -> int:
        return self.num_cells

    @property
    def EMIT_ANSWER(self) -> int:
        return self.num_cells + 1

    @property
    def STOP(self) -> int:
        return self.num_cells + 2

    @property
    def vocab_size(self) -> int:
        return self.num_cells + 3

    @property
    def cell_w(self) -> float:
        return self.width / self.k

    @property
    def cell_h(self) -> float:
        return self.height / self.k

    def cell(self, col: int, row: int) -> int:
        if not (0 <= col < self.k and 0 <= row < self.k):
            raise ValueError(f"cell ({col}, {row}) outside a {self.k}x{self.k} grid")
        return row * self.k + col

    def col_row(self, token: int) -> tuple[int, int]:
        return token % self.k, token // self.k

    def center(self, token: int) -> tuple[float, float]:
        col, row = self.col_row(token)
        return (col + 0.5) * self.cell_w, (row + 0.5) * self.cell_h

    def nearest_cell(self, x: float, y: float) -> int:
        col = int(np.clip(round(x / self.cell_w - 0.5), 0, self.k - 1))
        row = int(np.clip(round(y / self.cell_h - 0.5), 0, self.k - 1))
        return self.cell(col, row)

    def box_from_pair(self, tl: int, br: int, label: str = "person") -> Optional[LabeledBox]:
        c1, r1 = self.col_row(tl)
        c2, r2 = self.col_row(br)
        if c2 <= c1 or r2 <= r1:
            return None
        x1, y1 = self.center(tl)
        x2, y2 = self.center(br)
        return LabeledBox(x1, y1, x2, y2, label)

    def pair_from_box(self, box: LabeledBox) -> tuple[int, int]:
        return self.nearest_cell(box.x1, box.y1), self.nearest_cell(box.x2, box.y2)

    @classmethod
    def from_config(cls, config: EnvConfig) -> "Grid":
        return cls(config.grid, float(config.canvas[0]), float(config.canvas[1]))


def encode_boxes(
    look_boxes: Sequence[LabeledBox],
    answer_boxes: Sequence[LabeledBox],
    grid: Grid,
) -> list[int]:
    """Inverse of :func:`decode_tokens` for boxes whose corners sit on cell centers."""
    tokens = [grid.EMIT_LOOK]
    for b in look_boxes:
        tokens.extend(grid.pair_from_box(b))
    tokens.append(grid.EMIT_ANSWER)
    for b in answer_boxes:
        tokens.extend(grid.pair_from_box(b))
    tokens.append(grid.STOP)
    return tokens


def decode_tokens(
    tokens: Sequence[int],
    grid: Grid,
    strict: bool = False,
    label: str = "person",
    think: str = THINK_PLACEHOLDER,
    diagnostics: Optional[list[str]] = None,
) -> str:
    """Render a token stream as response text.

    With ``strict=False`` the text always has the three sections in order
    (missing sections become empty, an empty answer becomes ``None``). With
    ``strict=True`` tags follow the stream literally, so duplicated, misordered
    or unterminated sections produce text that fails format validation.
    """
    if diagnostics is None:
        diagnostics = []
    sections: list[list] = []  # [name, boxes, closed]
    pending: Optional[int] = None
    for pos, tok in enumerate(tokens):
        if not 0 <= tok < grid.vocab_size:
            diagnostics.append(f"token {tok} at {pos} outside vocabulary")
            continue
        if tok >= grid.num_cells:
            if pending is not None:
                diagnostics.append(f"dangling corner at {pos - 1} dropped")
                pending = None
            if sections and not sections[-1][2]:
                sections[-1][2] = True
            if tok == grid.STOP:
                break
            sections.append(["look" if tok == grid.EMIT_LOOK else "answer", [], False])
            continue
        if not sections or sections[-1][2]:
            diagnostics.append(f"cell token at {pos} outside any section dropped")
            continue
        if pending is None:
            pending = tok
            continue
        box = grid.box_from_pair(pending, tok, label)
        if box is None:
            diagnostics.append(f"corner pair at {pos - 1} not ordered top-left/bottom-right, dropped")
        else:
            sections[-1][1].append(box)
        pending = None
    if pending is not None:
        diagnostics.append("dangling corner at end dropped")

    if not strict:
        look = [b for name, boxes, _ in sections if name == "look" for b in boxes]
        answer = [b for name, boxes, _ in sections if name == "answer" for b in boxes]
        return compose_response(think, look, answer if answer else NONE_ANSWER)

    parts = [f"<think>{think}</think>"]
    for name, boxes, closed in sections:
        body = "None" if name == "answer" and not boxes else serialize_boxes(boxes)
        parts.append(f"<{name}>{body}" + (f"</{name}>" if closed else ""))
    return "".join(parts)


# -- scenes -----------------------------------------------------------------


@dataclass
class SceneFeatures:
    """Per-cell noisy observation channels, each flattened to ``K*K``."""

    occupancy: np.ndarray
    top_left: np.ndarray
    bottom_right: np.ndarray
    estimated_count: float
    occupancy_integral: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.occupancy_integral is None:
            k = int(round(np.sqrt(self.occupancy.size)))
            occ = self.occupancy.reshape(k, k)
            integral = np.zeros((k + 1, k + 1))
            integral[1:, 1:] = occ.cumsum(0).cumsum(1)
            self.occupancy_integral = integral

    def mean_occupancy(self, c1: int, r1: int, c2: np.ndarray, r2: np.ndarray) -> np.ndarray:
        """Mean occupancy over cell rectangles [c1..c2] x [r1..r2] (inclusive)."""
        s = self.occupancy_integral
        total = s[r2 + 1, c2 + 1] - s[r1, c2 + 1] - s[r2 + 1, c1] + s[r1, c1]
        return total / ((c2 - c1 + 1) * (r2 - r1 + 1))


@dataclass
class Scene:
    scene_id: str
    canvas: tuple[int, int]
    ground_truth: list[LabeledBox]
    crowding: float
    seed: int = 0
    features: Optional[SceneFeatures] = field(default=None, repr=False, compare=False)

    def to_record(self) -> dict:
        return ground_truth_record(
            self.scene_id,
            self.ground_truth,
            canvas=list(self.canvas),
            crowding=self.crowding,
            seed=self.seed,
        )

    @classmethod
    def from_record(cls, rec: dict, config: Optional[EnvConfig] = None) -> "Scene":
        boxes = boxes_from_json(rec["boxes"])
        canvas = tuple(rec.get("canvas", config.canvas if config else (512, 512)))
        scene = cls(
            scene_id=str(rec["scene_id"]),
            canvas=canvas,
            ground_truth=boxes,
            crowding=float(rec.get("crowding", mean_pairwise_iou(boxes))),
            seed=int(rec.get("seed", 0)),
        )
        if config is not None:
            scene.features = render_features(scene, config)
        return scene


def mean_pairwise_iou(boxes: Sequence[LabeledBox]) -> float:
    if len(boxes) < 2:
        return 0.0
    vals = [iou(a, b) for a, b in itertools.combinations(boxes, 2)]
    return float(sum(vals) / len(vals))


def _sample_layout(rng, n, config, spread):
    w_canvas, h_canvas = config.canvas
    ws = rng.uniform(*config.width_range, size=n)
    hs = rng.uniform(*config.height_range, size=n)
    cx0 = rng.uniform(0, w_canvas)
    cy0 = rng.uniform(0, h_canvas)
    cx = cx0 + spread * rng.standard_normal(n)
    cy = cy0 + spread * rng.standard_normal(n)
    x1 = np.clip(cx - ws / 2, 0, w_canvas - ws)
    y1 = np.clip(cy - hs / 2, 0, h_canvas - hs)
    return x1, y1, x1 + ws, y1 + hs


def generate_scene(seed: int, config: EnvConfig = EnvConfig(), scene_id: Optional[str] = None) -> Scene:
    """Place boxes so the mean pairwise IoU lands within tolerance of the target.

    Layouts are drawn around a random cluster center with a spread that is
    widened or tightened after every rejected draw. Raises
    :class:`SceneGenerationError` when no layout is accepted within
    ``config.max_retries`` draws.
    """
    rng = substream(seed, "scene")
    lo, hi = config.count_range
    n = int(rng.integers(lo, hi + 1))
    target, tol = config.overlap_target, config.overlap_tolerance
    spread = max(config.canvas) / 4
    max_spread = 4.0 * max(config.canvas)

    for _ in range(config.max_retries):
        x1, y1, x2, y2 = _sample_layout(rng, n, config, spread)
        if config.multi_class:
            labels = [config.labels[int(i)] for i in rng.integers(0, len(config.labels), size=n)]
        else:
            labels = [config.labels[0]] * n
        boxes = [
            LabeledBox(float(a), float(b), float(c), float(d), lab)
            for a, b, c, d, lab in zip(x1, y1, x2, y2, labels)
        ]
        crowding = mean_pairwise_iou(boxes)
        if abs(crowding - target) <= tol:
            scene = Scene(
                scene_id=scene_id if scene_id is not None else f"scene-{seed}",
                canvas=tuple(config.canvas),
                ground_truth=boxes,
                crowding=crowding,
                seed=int(seed),
            )
            scene.features = render_features(scene, config)
            return scene
        if crowding > target:
            spread = min(spread * 1.2, max_spread)
        else:
            spread = max(spread / 1.2, 1.0)
    raise SceneGenerationError(
        f"no layout with mean pairwise IoU {target} +/- {tol} for {n} boxes after {config.max_retries} draws"
    )


def generate_scenes(seed: int, count: int, config: EnvConfig = EnvConfig(), prefix: str = "scene") -> list[Scene]:
    seeds = substream(seed, "scene-seeds").integers(0, 2**31 - 1, size=count)
    return [generate_scene(int(s), config, scene_id=f"{prefix}-{i:05d}") for i, s in enumerate(seeds)]


def render_features(scene: Scene, config: EnvConfig) -> SceneFeatures:
    """Noisy coarse rendering of the ground truth: occupancy and corner maps."""
    grid = Grid.from_config(config)
    k = grid.k
    rng = substream(scene.seed, "features", scene.scene_id)
    edges_x = np.arange(k + 1) * grid.cell_w
    edges_y = np.arange(k + 1) * grid.cell_h
    occ = np.zeros((k, k))
    tl = np.zeros(k * k)
    br = np.zeros(k * k)
    for b in scene.ground_truth:
        ox = np.clip(np.minimum(edges_x[1:], b.x2) - np.maximum(edges_x[:-1], b.x1), 0, None) / grid.cell_w
        oy = np.clip(np.minimum(edges_y[1:], b.y2) - np.maximum(edges_y[:-1], b.y1), 0, None) / grid.cell_h
        occ += np.outer(oy, ox)
        if rng.random() >= config.corner_drop:
            tl[grid.nearest_cell(b.x1, b.y1)] += 1.0
        if rng.random() >= config.corner_drop:
            br[grid.nearest_cell(b.x2, b.y2)] += 1.0
    occ = np.minimum(occ, 1.0).ravel()
    sigma = config.feature_noise
    occ = occ + sigma * rng.standard_normal(k * k)
    tl = tl + sigma * rng.standard_normal(k * k)
    br = br + sigma * rng.standard_normal(k * k)
    est = float(np.count_nonzero(tl > 0.5))
    return SceneFeatures(occupancy=occ, top_left=tl, bottom_right=br, estimated_count=est)


def ensure_features(scene: Scene, config: EnvConfig) -> SceneFeatures:
    if scene.features is None:
        scene.features = render_features(scene, config)
    return scene.features


# -- toy policy -------------------------------------------------------------

_SECTIONS = ("look", "answer")
_N_TL = 5  # top-left features: tl corner, occupancy, br corner, already used, inside an emitted box
_N_BR = 4  # bottom-right features: br corner, occupancy, tl corner, mean occupancy of the spanned box
# state kinds for out-of-grammar (raw mode) token biases
_KINDS = ("start", "look_boundary", "look_after", "answer_boundary", "answer_after")
_CLASSES = ("cell", "look", "answer", "stop")


class ParamLayout:
    def __init__(self, k: int, cap: int):
        self.k = k
        self.cap = cap
        self.slices: dict[str, slice] = {}
        size = 0

        def add(name, n):
            nonlocal size
            self.slices[name] = slice(size, size + n)
            size += n

        for s in _SECTIONS:
            add(f"{s}.tl", _N_TL)
            add(f"{s}.br", _N_BR)
            add(f"{s}.dx", k - 1)
            add(f"{s}.dy", k - 1)
            add(f"{s}.end_bias", cap + 1)
            add(f"{s}.end_gap", 1)
        add("start_look", 1)
        add("raw", len(_KINDS) * len(_CLASSES))
        self.size = size

    def index(self, name: str, offset: int = 0) -> int:
        return self.slices[name].start + offset

    def raw_index(self, kind: str, cls: str) -> int:
        return self.slices["raw"].start + _KINDS.index(kind) * len(_CLASSES) + _CLASSES.index(cls)


@dataclass
class _State:
    phase: str = "start"  # start | look | answer | done
    pending: Optional[int] = None
    count: int = 0
    used: set = field(default_factory=set)
    emitted: list = field(default_factory=list)  # (c1, r1, c2, r2) of boxes in this section

    @property
    def kind(self) -> str:
        if self.phase == "start":
            return "start"
        return f"{self.phase}_{'after' if self.pending is not None else 'boundary'}"

    def open_section(self, phase: str) -> None:
        self.phase = phase
        self.pending = None
        self.count = 0
        self.used = set()
        self.emitted = []


class ToyPolicy:
    """Factored categorical policy whose logits are linear in the parameters.

    At every step the logit of token ``v`` is ``phi(state, v) . params``, so
    ``d log pi / d params = phi(a) - E_pi[phi]`` exactly.
    """

    def __init__(self, config: EnvConfig = EnvConfig(), params: Optional[np.ndarray] = None):
        self.config = config
        self.grid = Grid.from_config(config)
        self.layout = ParamLayout(config.grid, config.max_boxes_per_section)
        self.label = config.labels[0]
        if params is None:
            params = self.initial_params()
        params = np.array(params, dtype=np.float64)
        if params.shape != (self.layout.size,):
            raise ValueError(f"expected {self.layout.size} parameters, got {params.shape}")
        self.params = params

        k = self.grid.k
        cols = np.arange(k * k) % k
        rows = np.arange(k * k) // k
        self._cols, self._rows = cols, rows
        self._can_start_box = (cols < k - 1) & (rows < k - 1)

    def initial_params(self) -> np.ndarray:
        """Weakly informed starting point: corners attract, sections end after about one box."""
        p = np.zeros(self.layout.size)
        lay = self.layout
        for s in _SECTIONS:
            p[lay.slices[f"{s}.tl"]] = [1.0, 0.5, 0.0, 0.0, 0.0]
            p[lay.slices[f"{s}.br"]] = [1.0, 0.5, 0.0, 0.0]
            p[lay.slices[f"{s}.end_bias"]] = 6.0
        p[lay.slices["raw"]] = -2.0
        return p

    @classmethod
    def uniform(cls, config: EnvConfig = EnvConfig()) -> "ToyPolicy":
        return cls(config, np.zeros(ParamLayout(config.grid, config.max_boxes_per_section).size))

    def copy(self) -> "ToyPolicy":
        return ToyPolicy(self.config, self.params.copy())

    # -- step features --

    def _features(self, feats: SceneFeatures, st: _State) -> tuple[np.ndarray, np.ndarray]:
        """Feature matrix (vocab x params) and the mask of allowed tokens."""
        g = self.grid
        lay = self.layout
        n_cells = g.num_cells
        phi = np.zeros((g.vocab_size, lay.size))
        raw = self.config.raw_mode
        allowed = np.zeros(g.vocab_size, dtype=bool)
        kind = st.kind
        ctrl = {g.EMIT_LOOK: "look", g.EMIT_ANSWER: "answer", g.STOP: "stop"}

        def raw_bias(tokens_mask, cls):
            phi[tokens_mask, lay.raw_index(kind, cls)] = 1.0

        if kind == "start":
            phi[g.EMIT_LOOK, lay.index("start_look")] = 1.0
            allowed[[g.EMIT_LOOK, g.EMIT_ANSWER]] = True
            if raw:
                raw_bias(slice(0, n_cells), "cell")
                raw_bias(g.STOP, "stop")
        elif st.pending is None:
            s = st.phase
            end_tok = g.EMIT_ANSWER if s == "look" else g.STOP
            tl_sl = lay.slices[f"{s}.tl"]
            used = np.zeros(n_cells)
            if st.used:
                used[list(st.used)] = 1.0
            inside = np.zeros(n_cells)
            for c1, r1, c2, r2 in st.emitted:
                inside[(self._cols >= c1) & (self._cols <= c2) & (self._rows >= r1) & (self._rows <= r2)] = 1.0
            block = np.stack([feats.top_left, feats.occupancy, feats.bottom_right, used, inside], axis=1)
            starts = self._can_start_box if (raw or st.count < lay.cap) else np.zeros(n_cells, dtype=bool)
            phi[:n_cells, tl_sl] = np.where(starts[:, None], block, 0.0)
            allowed[:n_cells] = starts
            phi[end_tok, lay.index(f"{s}.end_bias", min(st.count, lay.cap))] = 1.0
            phi[end_tok, lay.index(f"{s}.end_gap")] = feats.estimated_count - st.count
            allowed[end_tok] = True
            if raw:
                raw_bias(np.arange(n_cells)[~starts], "cell")
                for tok, cls in ctrl.items():
                    if tok != end_tok:
                        raw_bias(tok, cls)
        else:
            s = st.phase
            tc, tr = st.pending % g.k, st.pending // g.k
            valid = (self._cols > tc) & (self._rows > tr)
            idx = np.nonzero(valid)[0]
            c2 = self._cols[idx]
            r2 = self._rows[idx]
            mean_occ = feats.mean_occupancy(tc, tr, c2, r2)
            br_sl = lay.slices[f"{s}.br"]
            phi[idx, br_sl] = np.stack(
                [feats.bottom_right[idx], feats.occupancy[idx], feats.top_left[idx], mean_occ], axis=1
            )
            phi[idx, lay.index(f"{s}.dx") + (c2 - tc - 1)] = 1.0
            phi[idx, lay.index(f"{s}.dy") + (r2 - tr - 1)] = 1.0
            allowed[idx] = True
            if raw:
                raw_bias(np.nonzero(~valid)[0], "cell")
                for tok, cls in ctrl.items():
                    raw_bias(tok, cls)
        if raw:
            allowed[:] = True
        return phi, allowed

    def _advance(self, st: _State, tok: int) -> None:
        g = self.grid
        if tok == g.STOP:
            st.phase = "done"
        elif tok == g.EMIT_LOOK:
            st.open_section("look")
        elif tok == g.EMIT_ANSWER:
            st.open_section("answer")
        elif st.phase == "start":
            pass
        elif st.pending is None:
            st.pending = tok
        else:
            c1, r1 = g.col_row(st.pending)
            c2, r2 = g.col_row(tok)
            if c2 > c1 and r2 > r1:
                st.count += 1
                st.used.add(st.pending)
                st.emitted.append((c1, r1, c2, r2))
            st.pending = None

    @staticmethod
    def _log_softmax(logits: np.ndarray, allowed: np.ndarray) -> np.ndarray:
        z = np.where(allowed, logits, -np.inf)
        m = z.max()
        return z - (m + np.log(np.exp(z - m).sum()))

    # -- sampling and scoring --

    def rollout(
        self,
        scene: Scene,
        rng: Optional[np.random.Generator] = None,
        greedy: bool = False,
    ) -> tuple[StructuredResponse, TokenTrajectory]:
        """Sample a token stream, decode it, and return the parsed response with its trajectory."""
        feats = ensure_features(scene, self.config)
        if rng is None and not greedy:
            raise ValueError("sampling needs an rng (or greedy=True)")
        st = _State()
        tokens: list[int] = []
        logps: list[float] = []
        while st.phase != "done" and len(tokens) < self.config.max_tokens:
            phi, allowed = self._features(feats, st)
            logp = self._log_softmax(phi @ self.params, allowed)
            if greedy:
                tok = int(np.argmax(logp))
            else:
                p = np.exp(logp)
                tok = int(rng.choice(len(p), p=p / p.sum()))
            tokens.append(tok)
            logps.append(float(logp[tok]))
            self._advance(st, tok)
        text = decode_tokens(tokens, self.grid, strict=self.config.raw_mode, label=self.label)
        logp_arr = np.array(logps)
        traj = TokenTrajectory(tokens, logp_arr.copy(), logp_arr.copy(), logp_arr.copy())
        return parse_response(text), traj

    def log_prob_jacobian(self, scene: Scene, tokens: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
        """Per-token log-probs and their gradient w.r.t. ``params`` (tokens x params)."""
        feats = ensure_features(scene, self.config)
        st = _State()
        logps = np.zeros(len(tokens))
        jac = np.zeros((len(tokens), self.layout.size))
        for t, tok in enumerate(tokens):
            phi, allowed = self._features(feats, st)
            logp = self._log_softmax(phi @ self.params, allowed)
            p = np.exp(logp)
            logps[t] = logp[tok]
            jac[t] = phi[tok] - p @ phi
            self._advance(st, tok)
        return logps, jac

    def log_probs(self, scene: Scene, tokens: Sequence[int]) -> np.ndarray:
        return self.log_prob_jacobian(scene, tokens)[0]

    def predict(self, scene: Scene) -> list[LabeledBox]:
        """Greedy-decoded answer boxes."""
        resp, _ = self.rollout(scene, greedy=True)
        return resp.answer_list()

    def to_dict(self) -> dict:
        return {"config": self.config.to_dict(), "params": self.params.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "ToyPolicy":
        return cls(EnvConfig.from_dict(d["config"]), np.array(d["params"], dtype=np.float64))
