"""Learner contract, loss accounting, and regret evaluation.

Everything downstream speaks two conventions fixed here once:

* losses are linear: playing w against gradient g costs <g, w>;
* regret against a comparator u is sum_t <g_t, w_t - u>.

Cumulative sums that tests check to 1e-9*T are accumulated with
``math.fsum`` (exact) or a Neumaier-compensated accumulator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

# Tolerance for the unit-gradient / unit-hint contracts.
GRAD_TOL = 1e-9


class ContractViolation(RuntimeError):
    """A learner or caller broke the predict/observe protocol."""


class DimensionMismatch(ValueError):
    """Vector dimensions do not agree."""


class ReplayError(RuntimeError):
    """Replay aborted; the message names the offending round."""


def as_vector(x, dim=None, name="vector") -> np.ndarray:
    """Validate and return x as a finite 1-D float64 array."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-D, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatch(f"{name} has dim {v.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def check_unit_norm(v: np.ndarray, name: str, tol: float = GRAD_TOL) -> None:
    n = float(np.linalg.norm(v))
    if n > 1.0 + tol:
        raise ValueError(f"{name} has norm {n:.12g} > 1 + {tol}")


class Accumulator:
    """Neumaier-compensated running sum."""

    __slots__ = ("_s", "_c")

    def __init__(self):
        self._s = 0.0
        self._c = 0.0

    def add(self, x: float) -> None:
        t = self._s + x
        if abs(self._s) >= abs(x):
            self._c += (self._s - t) + x
        else:
            self._c += (x - t) + self._s
        self._s = t

    @property
    def total(self) -> float:
        return self._s + self._c


@dataclass
class RegretContract:
    """Declared regret-bound shape of a learner.

    ``epsilon`` is the guaranteed regret at the origin. C, c, D describe the
    scalar learner's log-scaled terms, ``lam`` the strong-convexity modulus of
    the squared norm the learner adapts to, and A_T/B_T the comparator-dependent
    envelope functions (both nonnegative everywhere).
    """

    epsilon: float
    C: float = 0.0
    c: float = 0.0
    D: float = 0.0
    lam: float = 1.0
    A_T: Optional[Callable[[np.ndarray], float]] = None
    B_T: Optional[Callable[[np.ndarray], float]] = None

    def __post_init__(self):
        for field in ("epsilon", "C", "c", "D"):
            if getattr(self, field) < 0:
                raise ValueError(f"{field} must be nonnegative")
        if self.lam <= 0:
            raise ValueError("lam must be positive")


class RegretLedger:
    """Replay record of (w_t, g_t) pairs.

    Supports regret evaluation at arbitrary comparators after the fact.
    ``hints`` is attached by the hinted replay drivers and is None otherwise.
    """

    def __init__(self, iterates: np.ndarray, gradients: np.ndarray, hints=None):
        self.iterates = np.asarray(iterates, dtype=np.float64)
        self.gradients = np.asarray(gradients, dtype=np.float64)
        if self.iterates.shape != self.gradients.shape:
            raise DimensionMismatch(
                f"iterates {self.iterates.shape} vs gradients {self.gradients.shape}"
            )
        self.hints = hints
        self._losses = None

    def __len__(self) -> int:
        return self.iterates.shape[0]

    @property
    def dim(self) -> int:
        return self.iterates.shape[1]

    def per_round_losses(self) -> np.ndarray:
        if self._losses is None:
            self._losses = np.einsum("td,td->t", self.gradients, self.iterates)
        return self._losses

    @property
    def cumulative_loss(self) -> float:
        return math.fsum(self.per_round_losses())

    def gradient_sum(self) -> np.ndarray:
        return self.gradients.sum(axis=0)

    def regret_at(self, u) -> float:
        u = as_vector(u, self.dim, "comparator")
        # single pass: fsum over per-round <g_t, w_t - u>
        terms = self.per_round_losses() - self.gradients @ u
        return math.fsum(terms)


def regret_at(ledger: RegretLedger, u) -> float:
    """Regret of the recorded play against the fixed comparator u."""
    return ledger.regret_at(u)


class Learner:
    """Base online learner: alternating predict() / observe(g).

    predict() is pure and may be called repeatedly; observe() must be
    preceded by at least one predict() for the round. round_index counts
    completed observes. Subclasses implement _prediction() and _update().
    """

    #: learners declaring this reject gradients with ||g||_2 > 1 + GRAD_TOL
    unit_gradient_bound = True

    def __init__(self, dim: int, epsilon: Optional[float] = None):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self.epsilon = epsilon
        self.round_index = 0
        self._awaiting_predict = True

    def predict(self) -> np.ndarray:
        w = self._prediction()
        self._awaiting_predict = False
        return w

    def observe(self, g) -> None:
        if self._awaiting_predict:
            raise ContractViolation(
                f"observe at round {self.round_index} without a preceding predict"
            )
        g = as_vector(g, self.dim, "gradient")
        if self.unit_gradient_bound:
            check_unit_norm(g, "gradient")
        self._update(g)
        self.round_index += 1
        self._awaiting_predict = True

    @property
    def contract(self) -> Optional[RegretContract]:
        if self.epsilon is None:
            return None
        return RegretContract(epsilon=self.epsilon)

    def _prediction(self) -> np.ndarray:
        raise NotImplementedError

    def _update(self, g: np.ndarray) -> None:
        raise NotImplementedError


class HintedLearner(Learner):
    """Learner whose prediction consumes a hint vector for the round.

    The hint arrives strictly before the prediction is fixed; observe()
    consumes the most recent hint and clears it, so every round needs a
    fresh predict(h).
    """

    def predict(self, h) -> np.ndarray:  # noqa: D102 - contract in class docstring
        h = as_vector(h, self.dim, "hint")
        check_unit_norm(h, "hint")
        w = self._hinted_prediction(h)
        self._awaiting_predict = False
        return w

    def _hinted_prediction(self, h: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class ZeroLearner(Learner):
    """Always plays the origin. Useful as an identity element in sums."""

    def __init__(self, dim: int):
        super().__init__(dim, epsilon=0.0)

    def _prediction(self):
        return np.zeros(self.dim)

    def _update(self, g):
        pass


class ConstantLearner(Learner):
    """Always plays a fixed point (no regret guarantee at the origin)."""

    def __init__(self, point):
        point = as_vector(point, name="point")
        super().__init__(point.shape[0], epsilon=None)
        self.point = point

    def _prediction(self):
        return self.point.copy()

    def _update(self, g):
        pass


def _check_iterate(w, dim, t) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (dim,):
        raise ReplayError(f"round {t}: iterate has shape {w.shape}, expected ({dim},)")
    if not np.all(np.isfinite(w)):
        raise ReplayError(f"round {t}: iterate contains non-finite entries")
    return w


def replay(learner: Learner, gradients) -> RegretLedger:
    """Drive a plain learner over a finite gradient stream.

    Aborts with a diagnostic naming the round index if the learner emits a
    non-finite iterate or breaks the alternation contract.
    """
    G = np.asarray(gradients, dtype=np.float64)
    if G.ndim != 2:
        raise DimensionMismatch("gradient stream must be a (T, d) array")
    T, d = G.shape
    W = np.empty_like(G)
    for t in range(T):
        try:
            W[t] = _check_iterate(learner.predict(), d, t)
            learner.observe(G[t])
        except (ContractViolation, ValueError) as exc:
            raise ReplayError(f"round {t}: {exc}") from exc
    return RegretLedger(W, G)


def replay_hinted(learner: HintedLearner, gradients, source) -> RegretLedger:
    """Drive a hinted learner; hints come from ``source`` before each play."""
    G = np.asarray(gradients, dtype=np.float64)
    T, d = G.shape
    W = np.empty_like(G)
    H = np.empty_like(G)
    for t in range(T):
        try:
            H[t] = source.next_hint()
            W[t] = _check_iterate(learner.predict(H[t]), d, t)
            learner.observe(G[t])
            source.feed(G[t])
        except (ContractViolation, ValueError) as exc:
            raise ReplayError(f"round {t}: {exc}") from exc
    return RegretLedger(W, G, hints=H)


def replay_multi_hint(learner, gradients, sources: Sequence) -> RegretLedger:
    """Drive a multi-hint learner with one hint source per slot."""
    G = np.asarray(gradients, dtype=np.float64)
    T, d = G.shape
    k = len(sources)
    W = np.empty_like(G)
    H = np.empty((T, k, d))
    for t in range(T):
        try:
            for i, src in enumerate(sources):
                H[t, i] = src.next_hint()
            W[t] = _check_iterate(learner.predict(H[t]), d, t)
            learner.observe(G[t])
            for src in sources:
                src.feed(G[t])
        except (ContractViolation, ValueError) as exc:
            raise ReplayError(f"round {t}: {exc}") from exc
    return RegretLedger(W, G, hints=H)
