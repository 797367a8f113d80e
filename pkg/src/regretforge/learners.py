"""Concrete online learners used as building blocks by the combinators.

* CoinBettor: 1-D parameter-free coin betting (KT-style fraction).
* DimFreeLearner: magnitude bettor times a direction learner on the unit
  p-norm ball; dimension-free regret shape.
* PerCoordinateLearner: one independent 1-D bettor per coordinate.
* AdaptiveProjectedDescent: projected gradient descent on a bounded domain
  with step B / sqrt(sum ||g||^2).

Sign convention, fixed once: learners consume gradients (losses). The raw
bettor consumes the negated loss z (a reward), so wrappers feeding it a
loss ell pass z = -ell.
"""

from __future__ import annotations

import math

import numpy as np

from .core import GRAD_TOL, Accumulator, Learner, as_vector
from .geometry import Ball, ConvexDomain, NormSpec, p_norm

# On a perfectly predictable stream the bettor's wealth grows exponentially
# and would overflow float64; the cap keeps iterates finite. Capping only
# ever reduces wealth, so nonnegativity and the epsilon-at-origin guarantee
# survive (the measured loss sum is tracked separately and exactly).
WEALTH_CAP = 1e80


class CoinBettor:
    """Parameter-free scalar learner via coin betting with a KT-style fraction.

    Bets the fraction signed_sum / (round + 1) of current wealth; the divisor
    keeps |fraction| < 1 strictly so wealth stays positive for |z| <= 1.
    ``observe`` consumes the reward z = negated loss.
    """

    def __init__(self, epsilon: float = 1.0):
        if epsilon <= 0:
            raise ValueError("epsilon must be positive")
        self.epsilon = float(epsilon)
        self.wealth = float(epsilon)
        self.signed_sum = 0.0
        self.round = 0
        self._loss_sum = Accumulator()  # sum_t (-z_t) * y_t, measured exactly

    def predict(self) -> float:
        return self.signed_sum / (self.round + 1) * self.wealth

    def observe(self, z: float) -> None:
        z = float(z)
        if not math.isfinite(z) or abs(z) > 1.0 + GRAD_TOL:
            raise ValueError(f"bettor outcome {z!r} outside [-1, 1]")
        y = self.predict()
        self._loss_sum.add(-z * y)
        self.wealth = min(self.wealth + y * z, WEALTH_CAP)
        self.signed_sum += z
        self.round += 1

    def regret_at(self, u: float) -> float:
        """Measured regret sum_t ell_t (y_t - u) with ell_t = -z_t."""
        return self._loss_sum.total + u * self.signed_sum

    def regret_at_zero(self) -> float:
        return self._loss_sum.total


class CoinBettorLearner(Learner):
    """CoinBettor exposed under the vector learner contract (dim = 1)."""

    def __init__(self, epsilon: float = 1.0):
        super().__init__(dim=1, epsilon=epsilon)
        self.bettor = CoinBettor(epsilon)

    def _prediction(self):
        return np.array([self.bettor.predict()])

    def _update(self, g):
        self.bettor.observe(-float(g[0]))


class PNormBallDescent:
    """Mirror descent over the unit p-norm ball, 1 < p <= 2.

    Uses the gradient maps of 0.5*||.||_p^2 with adaptive step
    sqrt(p-1)/sqrt(sum ||g_s||_q^2), projecting back by radial rescaling.
    For p = 2 this is plain projected online gradient descent. Ties keep
    the previous point; the initial point is the origin.
    """

    def __init__(self, dim: int, spec: NormSpec | None = None):
        self.dim = dim
        self.spec = spec if spec is not None else NormSpec.from_p(2.0)
        if self.spec.p <= 1.0:
            raise ValueError("direction learner needs p > 1 (lam > 0)")
        self.point = np.zeros(dim)
        self.dual_sq_sum = 0.0

    def predict(self) -> np.ndarray:
        return self.point.copy()

    def _grad_half_norm_sq(self, x, p):
        # gradient of 0.5*||x||_p^2; identity for p = 2
        if p == 2.0:
            return np.asarray(x, dtype=np.float64).copy()
        n = p_norm(x, p)
        if n == 0.0:
            return np.zeros_like(x)
        return n ** (2.0 - p) * np.sign(x) * np.abs(x) ** (p - 1.0)

    def observe(self, g: np.ndarray) -> None:
        gq = self.spec.dual(g)
        self.dual_sq_sum += gq * gq
        if self.dual_sq_sum <= 0.0:
            return
        eta = math.sqrt(self.spec.lam) / math.sqrt(self.dual_sq_sum)
        theta = self._grad_half_norm_sq(self.point, self.spec.p) - eta * g
        u = self._grad_half_norm_sq(theta, self.spec.q)
        np_u = p_norm(u, self.spec.p)
        if np_u > 1.0:
            u = u / np_u
        self.point = u


class DimFreeLearner(Learner):
    """Magnitude times direction: a coin bettor scales a unit-ball direction.

    The magnitude bettor sees the loss <g, direction> (so |z| <= 1 whenever
    ||g||_2 <= 1 and p <= 2), the direction learner sees g itself. Zero
    accumulated gradient leaves the direction at the origin, so the learner
    plays 0 until evidence arrives.
    """

    def __init__(self, dim: int, epsilon: float = 1.0, spec: NormSpec | None = None):
        super().__init__(dim, epsilon=epsilon)
        self.magnitude = CoinBettor(epsilon)
        self.direction = PNormBallDescent(dim, spec)

    def _prediction(self):
        return self.magnitude.predict() * self.direction.point

    def _update(self, g):
        u = self.direction.point
        self.magnitude.observe(-float(np.dot(g, u)))
        self.direction.observe(g)


class PerCoordinateLearner(Learner):
    """d independent 1-D coin bettors, each with budget epsilon / d.

    State is held in coordinate arrays rather than d bettor objects; the
    update is one vector operation and matches the d-instance semantics
    exactly (each coordinate sees only its own gradient entries).
    """

    def __init__(self, dim: int, epsilon: float = 1.0):
        super().__init__(dim, epsilon=epsilon)
        self.wealth = np.full(dim, epsilon / dim)
        self.signed_sum = np.zeros(dim)
        self.round = 0

    def _prediction(self):
        return self.signed_sum / (self.round + 1) * self.wealth

    def _update(self, g):
        y = self._prediction()
        z = -g
        self.wealth = np.minimum(self.wealth + y * z, WEALTH_CAP)
        self.signed_sum = self.signed_sum + z
        self.round += 1


class AdaptiveProjectedDescent(Learner):
    """Projected gradient descent with step B / sqrt(sum ||g||^2).

    Needs a bounded domain (B is its diameter). The first round with zero
    accumulated gradient performs no move, so an all-zero stream leaves the
    iterate at the initial point forever. No origin-budget guarantee.
    """

    def __init__(self, domain: ConvexDomain, x0=None):
        if not domain.bounded:
            raise ValueError("adaptive projected descent needs a bounded domain")
        if isinstance(domain, Ball):
            dim = domain.center.shape[0]
        else:
            dim = domain.lo.shape[0]
        super().__init__(dim, epsilon=None)
        self.domain = domain
        self.B = domain.diameter
        start = np.zeros(dim) if x0 is None else as_vector(x0, dim, "x0")
        self.point = domain.project(start)
        self.grad_sq_sum = 0.0

    def _prediction(self):
        return self.point.copy()

    def _update(self, g):
        self.grad_sq_sum += float(np.dot(g, g))
        if self.grad_sq_sum <= 0.0:
            return
        step = self.B / math.sqrt(self.grad_sq_sum)
        self.point = self.domain.project(self.point - step * g)
