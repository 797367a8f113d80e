"""Experiment front-end: streams, configs, replay with checkpoints, CSV.

Configs are single JSON documents. A composition expression is a nested
object with a "kind" discriminator; hint-consuming learners may appear only
at the root (their sources travel with them). Results are rows, one per
(checkpoint, comparator), with checkpoints at powers of two.

CSV columns, fixed: experiment_id, T, comparator_id, regret, cum_loss,
sum_gh_sq, sum_gh_sq_minus_h_sq, wallclock_ms. Runs whose learner carries
scalar bettors append one bettor{i}_regret_at0 column per bettor. Runs
without hints report the hint columns under the convention h_t = 0.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .combinators import (
    AddCombiner,
    ConstrainedOptimisticLearner,
    MultiHintLearner,
    OptimisticLearner,
)
from .core import DimensionMismatch, Learner, as_vector
from .geometry import Ball, Box, ConvexDomain, WholeSpace
from .hints import (
    AdversarialNegate,
    ConstantHint,
    ExternalHints,
    HintSource,
    LastGradient,
    RunningAverage,
    UnitBallDescent,
    ZeroHint,
)
from .learners import (
    AdaptiveProjectedDescent,
    CoinBettor,
    CoinBettorLearner,
    DimFreeLearner,
    PerCoordinateLearner,
)
from . import combinators
from .geometry import NormSpec

SEED_ENV_VAR = "REGRETFORGE_SEED"

CSV_COLUMNS = [
    "experiment_id",
    "T",
    "comparator_id",
    "regret",
    "cum_loss",
    "sum_gh_sq",
    "sum_gh_sq_minus_h_sq",
    "wallclock_ms",
]


class CompositionError(ValueError):
    """Invalid experiment composition; the message names the offending node."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


# ---------------------------------------------------------------------------
# gradient streams
# ---------------------------------------------------------------------------

STREAM_KINDS = (
    "rademacher_iid",
    "gaussian_clipped",
    "slowly_varying",
    "sparse",
    "biased",
    "zero",
)


@dataclass
class StreamSpec:
    kind: str
    dim: int
    T: int
    seed: int = 0
    params: dict = field(default_factory=dict)

    @classmethod
    def from_config(cls, cfg: dict, path: str = "stream") -> "StreamSpec":
        try:
            kind = cfg["kind"]
            dim = int(cfg["dim"])
            T = int(cfg["T"])
        except KeyError as missing:
            raise CompositionError(path, f"missing field {missing}") from None
        if kind not in STREAM_KINDS:
            raise CompositionError(path, f"unknown stream kind {kind!r}")
        if dim < 1 or T < 1:
            raise CompositionError(path, "dim and T must be positive")
        extra = {k: v for k, v in cfg.items() if k not in ("kind", "dim", "T", "seed")}
        return cls(kind, dim, T, int(cfg.get("seed", 0)), extra)


def _clip_rows_to_unit(G: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(G, axis=1)
    over = norms > 1.0
    if np.any(over):
        G[over] /= norms[over, None]
    return G


def generate_stream(spec: StreamSpec) -> np.ndarray:
    """Deterministic (T, d) gradient stream with every row norm <= 1."""
    rng = np.random.default_rng(spec.seed)
    T, d = spec.T, spec.dim
    if spec.kind == "zero":
        return np.zeros((T, d))
    if spec.kind == "rademacher_iid":
        signs = rng.integers(0, 2, size=(T, d)) * 2.0 - 1.0
        return signs / math.sqrt(d)
    if spec.kind == "gaussian_clipped":
        sigma = float(spec.params.get("sigma", 0.5))
        G = sigma * rng.standard_normal((T, d)) / math.sqrt(d)
        return _clip_rows_to_unit(G)
    if spec.kind == "slowly_varying":
        step = float(spec.params.get("step_size", 1.0 / math.sqrt(T)))
        v = rng.standard_normal(d)
        v /= np.linalg.norm(v)
        G = np.empty((T, d))
        for t in range(T):
            G[t] = v
            v = v + step * rng.standard_normal(d) / math.sqrt(d)
            v /= np.linalg.norm(v)
        return G
    if spec.kind == "sparse":
        k = int(spec.params.get("k_active", max(1, d // 8)))
        if not (1 <= k <= d):
            raise ValueError(f"k_active must be in [1, {d}]")
        G = np.zeros((T, d))
        scale = 1.0 / math.sqrt(k)
        for t in range(T):
            idx = rng.choice(d, size=k, replace=False)
            G[t, idx] = scale * (rng.integers(0, 2, size=k) * 2.0 - 1.0)
        return G
    if spec.kind == "biased":
        mu = np.asarray(spec.params.get("mu", [0.25] + [0.0] * (d - 1)), dtype=np.float64)
        mu = as_vector(mu, d, "mu")
        noise = float(spec.params.get("noise", 0.5))
        G = mu + noise * rng.standard_normal((T, d)) / math.sqrt(d)
        return _clip_rows_to_unit(G)
    raise ValueError(f"unknown stream kind {spec.kind!r}")


# ---------------------------------------------------------------------------
# composition expressions
# ---------------------------------------------------------------------------

def _build_domain(cfg: dict, dim: int, path: str) -> ConvexDomain:
    kind = cfg.get("kind")
    if kind == "whole_space":
        return WholeSpace()
    if kind == "ball":
        center = cfg.get("center", [0.0] * dim)
        return Ball(as_vector(center, dim, "center"), float(cfg.get("radius", 1.0)))
    if kind == "box":
        try:
            lo = as_vector(cfg["lo"], dim, "lo")
            hi = as_vector(cfg["hi"], dim, "hi")
        except KeyError as missing:
            raise CompositionError(path, f"box needs field {missing}") from None
        return Box(lo, hi)
    raise CompositionError(path, f"unknown domain kind {kind!r}")


def _build_hint_source(cfg: dict, dim: int, stream: Optional[np.ndarray],
                       path: str) -> HintSource:
    kind = cfg.get("kind")
    if kind == "zero":
        return ZeroHint(dim)
    if kind == "last_gradient":
        return LastGradient(dim)
    if kind == "running_average":
        return RunningAverage(dim)
    if kind == "unit_ball_descent":
        return UnitBallDescent(dim)
    if kind == "adversarial_negate":
        return AdversarialNegate(dim)
    if kind == "constant":
        if "vector" not in cfg:
            raise CompositionError(path, "constant hint needs a 'vector'")
        return ConstantHint(as_vector(cfg["vector"], dim, "hint"))
    if kind == "external":
        if "path" not in cfg:
            raise CompositionError(path, "external hints need a 'path'")
        src = ExternalHints.from_file(cfg["path"])
        if src.dim != dim:
            raise CompositionError(path, f"hint file dim {src.dim} != stream dim {dim}")
        return src
    if kind == "perfect":
        # oracle sugar: external hints equal to the upcoming gradients
        if stream is None:
            raise CompositionError(path, "perfect hints need the stream at build time")
        return ExternalHints(stream)
    raise CompositionError(path, f"unknown hint kind {kind!r}")


_PLAIN_KINDS = ("coin", "dimfree", "percoord", "apd", "add", "multi_norm", "zero")
_HINTED_KINDS = ("optimistic", "constrained", "multi_hint")


def _build_plain(cfg: dict, dim: int, path: str) -> Learner:
    kind = cfg.get("kind")
    if kind in _HINTED_KINDS:
        raise CompositionError(
            path, f"{kind} consumes hints and may only appear at the root"
        )
    eps = float(cfg.get("epsilon", 1.0))
    if kind == "coin":
        if dim != 1:
            raise CompositionError(path, "coin learner is 1-D; stream dim must be 1")
        return CoinBettorLearner(eps)
    if kind == "dimfree":
        spec = NormSpec.from_p(float(cfg["p"])) if "p" in cfg else None
        return DimFreeLearner(dim, epsilon=eps, spec=spec)
    if kind == "percoord":
        return PerCoordinateLearner(dim, epsilon=eps)
    if kind == "zero":
        from .core import ZeroLearner

        return ZeroLearner(dim)
    if kind == "apd":
        if "domain" not in cfg:
            raise CompositionError(path, "apd needs a bounded 'domain'")
        dom = _build_domain(cfg["domain"], dim, path + ".domain")
        if not dom.bounded:
            raise CompositionError(path + ".domain", "apd needs a bounded domain")
        return AdaptiveProjectedDescent(dom)
    if kind == "add":
        children_cfg = cfg.get("children")
        if not children_cfg or len(children_cfg) < 2:
            raise CompositionError(path, "add needs at least two children")
        children = [
            _build_plain(c, dim, f"{path}.children[{i}]")
            for i, c in enumerate(children_cfg)
        ]
        try:
            return AddCombiner(children)
        except (ValueError, DimensionMismatch) as exc:
            raise CompositionError(path, str(exc)) from exc
    if kind == "multi_norm":
        try:
            return combinators.multi_norm(dim, eps)
        except ValueError as exc:
            raise CompositionError(path, str(exc)) from exc
    raise CompositionError(path, f"unknown learner kind {cfg.get('kind')!r}")


@dataclass
class ComposedLearner:
    """A built learner plus its hint plan (None, one source, or k sources)."""

    learner: Learner
    hint_sources: object = None  # None | HintSource | list[HintSource]

    @property
    def bettors(self) -> list:
        out = []
        node = self.learner
        if isinstance(node, (OptimisticLearner, ConstrainedOptimisticLearner)):
            out.append(node.bettor)
        elif isinstance(node, MultiHintLearner):
            out.extend(node.bettors)
        return out


def build_learner(cfg: dict, dim: int, stream: Optional[np.ndarray] = None,
                  path: str = "learner") -> ComposedLearner:
    """Build a composition expression; hinted kinds are root-only."""
    kind = cfg.get("kind")
    if kind == "optimistic":
        if "hints" not in cfg:
            raise CompositionError(path, "optimistic learner requires a hint source")
        base = _build_plain(cfg.get("base", {"kind": "dimfree"}), dim, path + ".base")
        eps_b = float(cfg.get("bettor_epsilon", 1.0))
        learner = OptimisticLearner(base, CoinBettor(eps_b))
        src = _build_hint_source(cfg["hints"], dim, stream, path + ".hints")
        return ComposedLearner(learner, src)
    if kind == "constrained":
        if "hints" not in cfg:
            raise CompositionError(path, "constrained learner requires a hint source")
        if "domain" not in cfg:
            raise CompositionError(path, "constrained learner requires a domain")
        base = _build_plain(cfg.get("base", {"kind": "dimfree"}), dim, path + ".base")
        dom = _build_domain(cfg["domain"], dim, path + ".domain")
        eps_b = float(cfg.get("bettor_epsilon", 1.0))
        learner = ConstrainedOptimisticLearner(base, dom, CoinBettor(eps_b))
        src = _build_hint_source(cfg["hints"], dim, stream, path + ".hints")
        return ComposedLearner(learner, src)
    if kind == "multi_hint":
        hints_cfg = cfg.get("hints")
        if not hints_cfg or not isinstance(hints_cfg, list):
            raise CompositionError(path, "multi_hint requires a list of hint sources")
        base = _build_plain(cfg.get("base", {"kind": "dimfree"}), dim, path + ".base")
        eps_b = float(cfg.get("bettor_epsilon", 1.0))
        learner = MultiHintLearner(base, [CoinBettor(eps_b) for _ in hints_cfg])
        sources = [
            _build_hint_source(h, dim, stream, f"{path}.hints[{i}]")
            for i, h in enumerate(hints_cfg)
        ]
        return ComposedLearner(learner, sources)
    return ComposedLearner(_build_plain(cfg, dim, path))


# ---------------------------------------------------------------------------
# comparators
# ---------------------------------------------------------------------------

def resolve_comparator(cfg: dict, dim: int, gsum: np.ndarray, path: str) -> np.ndarray:
    """Comparator vector at a checkpoint; best_in_ball uses the gradient sum."""
    kind = cfg.get("kind")
    if kind == "origin":
        return np.zeros(dim)
    if kind == "vector":
        return as_vector(cfg["entries"], dim, "comparator")
    if kind == "scaled_unit":
        direction = as_vector(cfg["direction"], dim, "direction")
        n = float(np.linalg.norm(direction))
        if n == 0.0:
            raise CompositionError(path, "scaled_unit direction must be nonzero")
        return float(cfg.get("r", 1.0)) * direction / n
    if kind == "best_in_ball":
        # minimizer of <sum g, u> over the ball: u* = -r * sum g / ||sum g||
        r = float(cfg.get("radius", 1.0))
        n = float(np.linalg.norm(gsum))
        if n == 0.0:
            return np.zeros(dim)
        return -r * gsum / n
    raise CompositionError(path, f"unknown comparator kind {kind!r}")


def comparator_id(cfg: dict, index: int) -> str:
    kind = cfg.get("kind", "vector")
    if kind == "scaled_unit":
        return f"scaled_unit_r{cfg.get('r', 1.0)}"
    if kind == "best_in_ball":
        return f"best_in_ball_r{cfg.get('radius', 1.0)}"
    if kind == "vector":
        return f"vector_{index}"
    return kind


# ---------------------------------------------------------------------------
# experiment runner
# ---------------------------------------------------------------------------

def checkpoints(T: int) -> list:
    """Powers of two up to T, always including T itself."""
    pts = [1 << k for k in range(T.bit_length()) if (1 << k) <= T]
    if pts[-1] != T:
        pts.append(T)
    return pts


@dataclass
class RunRecord:
    """Raw per-round material kept by the runner for checkpoint reporting."""

    losses: np.ndarray
    gradients: np.ndarray
    iterates: Optional[np.ndarray]
    hints: Optional[np.ndarray]
    gh_sq: np.ndarray        # per-round ||g - h||^2 (h = 0 when no hints)
    gh_sq_minus: np.ndarray  # per-round ||g - h||^2 - ||h||^2
    bettor_regrets: Optional[np.ndarray] = None  # (T, k) running regret at 0


def _drive(composed: ComposedLearner, G: np.ndarray,
           keep_iterates: bool) -> RunRecord:
    T, d = G.shape
    learner = composed.learner
    sources = composed.hint_sources
    bettors = composed.bettors
    losses = np.empty(T)
    gh_sq = np.empty(T)
    gh_minus = np.empty(T)
    iterates = np.empty((T, d)) if keep_iterates else None
    bettor_regrets = np.empty((T, len(bettors))) if bettors else None
    hints = None
    if sources is not None:
        hints = (
            np.empty((T, len(sources), d))
            if isinstance(sources, list)
            else np.empty((T, d))
        )
    for t in range(T):
        g = G[t]
        if sources is None:
            w = learner.predict()
            h = None
        elif isinstance(sources, list):
            hs = np.stack([s.next_hint() for s in sources])
            hints[t] = hs
            w = learner.predict(hs)
            h = hs[0]  # reported hint columns track the first slot
        else:
            h = sources.next_hint()
            hints[t] = h
            w = learner.predict(h)
        if not np.all(np.isfinite(w)):
            raise RuntimeError(f"round {t}: learner produced a non-finite iterate")
        losses[t] = float(np.dot(g, w))
        if h is None:
            gh_sq[t] = float(np.dot(g, g))
            gh_minus[t] = gh_sq[t]
        else:
            diff = g - h
            gh_sq[t] = float(np.dot(diff, diff))
            gh_minus[t] = gh_sq[t] - float(np.dot(h, h))
        learner.observe(g)
        if sources is not None:
            if isinstance(sources, list):
                for s in sources:
                    s.feed(g)
            else:
                sources.feed(g)
        if bettors:
            bettor_regrets[t] = [b.regret_at_zero() for b in bettors]
        if keep_iterates:
            iterates[t] = w
    return RunRecord(losses, G, iterates, hints, gh_sq, gh_minus, bettor_regrets)


def run_experiment(config: dict, seed_override: Optional[int] = None,
                   keep_record: bool = False):
    """Run one experiment config; returns result rows (and the record if asked).

    Rows appear per (checkpoint, comparator) with measured regret, cumulative
    loss, and the optimism statistics; bettor columns are appended when the
    learner carries scalar bettors.
    """
    if "stream" not in config:
        raise CompositionError("stream", "experiment config needs a 'stream'")
    if "learner" not in config:
        raise CompositionError("learner", "experiment config needs a 'learner'")
    stream_cfg = dict(config["stream"])
    if seed_override is not None:
        stream_cfg["seed"] = int(seed_override)
    spec = StreamSpec.from_config(stream_cfg)
    G = generate_stream(spec)
    composed = build_learner(config["learner"], spec.dim, stream=G)
    comparator_cfgs = config.get("comparators", [{"kind": "origin"}])

    start = time.perf_counter()
    record = _drive(composed, G, keep_iterates=keep_record or bool(config.get("dump_ledger")))

    experiment_id = config.get("experiment_id", "experiment")
    rows = []
    gsum_prefix = np.cumsum(G, axis=0)
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    for T_prime in checkpoints(spec.T):
        cum_loss = math.fsum(record.losses[:T_prime])
        gsum = gsum_prefix[T_prime - 1]
        for idx, ccfg in enumerate(comparator_cfgs):
            u = resolve_comparator(ccfg, spec.dim, gsum, f"comparators[{idx}]")
            regret = cum_loss - float(np.dot(gsum, u))
            row = {
                "experiment_id": experiment_id,
                "T": T_prime,
                "comparator_id": comparator_id(ccfg, idx),
                "regret": regret,
                "cum_loss": cum_loss,
                "sum_gh_sq": math.fsum(record.gh_sq[:T_prime]),
                "sum_gh_sq_minus_h_sq": math.fsum(record.gh_sq_minus[:T_prime]),
                "wallclock_ms": elapsed_ms,
            }
            if record.bettor_regrets is not None:
                for i in range(record.bettor_regrets.shape[1]):
                    row[f"bettor{i}_regret_at0"] = record.bettor_regrets[T_prime - 1, i]
            rows.append(row)
    if keep_record:
        return rows, record
    return rows


def write_csv(rows, path) -> None:
    if not rows:
        raise ValueError("no rows to write")
    columns = list(CSV_COLUMNS)
    for key in rows[0]:
        if key not in columns:
            columns.append(key)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)


def read_csv(path) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def dump_ledger(record: RunRecord, path) -> None:
    """One JSON object per round: iterate, gradient, and hint if present."""
    with open(path, "w", encoding="utf-8") as fh:
        for t in range(len(record.losses)):
            entry = {
                "t": t,
                "w": record.iterates[t].tolist(),
                "g": record.gradients[t].tolist(),
            }
            if record.hints is not None:
                entry["h"] = record.hints[t].tolist()
            fh.write(json.dumps(entry) + "\n")


def fit_slope(rows, comparator_id_value: str) -> float:
    """Least-squares slope of log2(regret) vs log2(T) over the checkpoints.

    Regret values at or below zero are floored at 1 before taking logs.
    Needs at least 4 checkpoints.
    """
    pts = sorted(
        (int(r["T"]), float(r["regret"]))
        for r in rows
        if r["comparator_id"] == comparator_id_value
    )
    if len(pts) < 4:
        raise ValueError(f"need >= 4 checkpoints to fit a slope, got {len(pts)}")
    x = np.log2([p[0] for p in pts])
    y = np.log2([max(p[1], 1.0) for p in pts])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def _sweep_cell(args):
    base_config, T, seed = args
    cfg = json.loads(json.dumps(base_config))  # deep copy
    cfg["stream"]["T"] = T
    cfg["stream"]["seed"] = seed
    cfg["experiment_id"] = f"{cfg.get('experiment_id', 'experiment')}_T{T}_s{seed}"
    return (T, seed), run_experiment(cfg)


def run_sweep(config: dict, workers: int = 1):
    """Grid over T and/or seeds; cells are independent and merged by key."""
    sweep = config.get("sweep", {})
    Ts = sweep.get("T", [config["stream"]["T"]])
    seeds = sweep.get("seeds", [config["stream"].get("seed", 0)])
    cells = [(config, int(T), int(s)) for T in Ts for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_cell, cells))
    else:
        results = [_sweep_cell(c) for c in cells]
    results.sort(key=lambda kv: kv[0])
    rows = []
    for _, cell_rows in results:
        rows.extend(cell_rows)
    return rows


def env_seed_override() -> Optional[int]:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from None
