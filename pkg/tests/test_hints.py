"""Hint sources: running average, unit-ball descent, and the FTL gap."""

import math

import numpy as np
import pytest

from regretforge import (
    AdversarialNegate,
    ConstantHint,
    ExternalHints,
    LastGradient,
    RunningAverage,
    UnitBallDescent,
    ZeroHint,
    best_fixed_hint,
    ftl_regret_check,
    hint_learner_regret,
)
from conftest import rademacher_stream, unit_stream


def ftl_gap_oracle(G):
    """Direct enumeration: replay the running mean by hand."""
    G = np.asarray(G, dtype=float)
    T = G.shape[0]
    played = 0.0
    for t in range(T):
        h = G[:t].mean(axis=0) if t > 0 else np.zeros(G.shape[1])
        played += float(np.dot(G[t] - h, G[t] - h))
    gbar = G.mean(axis=0)
    best = sum(float(np.dot(g - gbar, g - gbar)) for g in G)
    return played - best


def test_running_average_examples():
    src = RunningAverage(2)
    assert np.array_equal(src.next_hint(), np.zeros(2))
    src.feed(np.array([1.0, 0.0]))
    src.feed(np.array([0.0, 1.0]))
    assert np.allclose(src.next_hint(), [0.5, 0.5])


def test_running_average_constant_stream():
    src = RunningAverage(2)
    g = np.array([0.3, -0.4])
    for _ in range(7):
        src.feed(g)
    assert np.allclose(src.next_hint(), g, atol=1e-15)


def test_last_gradient_and_negate():
    last = LastGradient(2)
    neg = AdversarialNegate(2)
    assert np.array_equal(last.next_hint(), np.zeros(2))
    g = np.array([0.2, -0.5])
    last.feed(g)
    neg.feed(g)
    assert np.array_equal(last.next_hint(), g)
    assert np.array_equal(neg.next_hint(), -g)


def test_constant_hint_validation():
    ConstantHint([0.6, 0.8])
    with pytest.raises(ValueError):
        ConstantHint([1.0, 1.0])


def test_external_hints(tmp_path):
    rows = np.array([[0.1, 0.2], [0.3, -0.4]])
    path = tmp_path / "hints.txt"
    np.savetxt(path, rows)
    src = ExternalHints.from_file(path)
    assert np.allclose(src.next_hint(), rows[0])
    assert np.allclose(src.next_hint(), rows[1])
    with pytest.raises(IndexError):
        src.next_hint()
    with pytest.raises(ValueError):
        ExternalHints(np.array([[2.0, 0.0]]))


def test_all_sources_emit_unit_bounded_hints(rng):
    G = unit_stream(rng, 300, 3)
    sources = [
        ZeroHint(3),
        LastGradient(3),
        AdversarialNegate(3),
        RunningAverage(3),
        UnitBallDescent(3),
        ConstantHint([0.5, 0.0, 0.0]),
        ExternalHints(G),
    ]
    for src in sources:
        for g in G:
            assert np.linalg.norm(src.next_hint()) <= 1.0 + 1e-9
            src.feed(g)


def test_unit_ball_descent_zero_gradients():
    src = UnitBallDescent(2)
    for _ in range(5):
        assert np.array_equal(src.next_hint(), np.zeros(2))
        src.feed(np.zeros(2))


def test_unit_ball_descent_tracks_constant_gradient():
    # minimizing <g, g - 2h> over the unit ball drives h toward g/||g||
    src = UnitBallDescent(2)
    g = np.array([0.6, -0.3])
    for _ in range(4096):
        src.next_hint()
        src.feed(g)
    target = g / np.linalg.norm(g)
    assert np.linalg.norm(src.next_hint() - target) <= 0.1


def test_best_fixed_hint_closed_form_is_optimal(rng):
    # brute-force check: no sampled point of the ball beats the closed form
    G = unit_stream(rng, 64, 3)
    h_star = best_fixed_hint(G)
    def total_loss(h):
        return math.fsum(float(np.dot(g, g - 2 * h)) for g in G)
    best = total_loss(h_star)
    for _ in range(500):
        h = rng.standard_normal(3)
        n = np.linalg.norm(h)
        if n > 1:
            h = h / n
        assert total_loss(h) >= best - 1e-9
    assert np.array_equal(best_fixed_hint(np.zeros((4, 2))), np.zeros(2))


def test_hint_learner_regret_bound(rng):
    for _ in range(5):
        G = rademacher_stream(rng, 2048, 8)
        reg = hint_learner_regret(G)
        assert reg <= 4.0 * math.sqrt(float(np.sum(G * G)))


def test_ftl_gap_constant_stream():
    g = np.array([0.6, 0.0])
    G = np.tile(g, (9, 1))
    # only round 1 contributes: ||g - 0||^2, and the mean equals g
    assert ftl_regret_check(G) == pytest.approx(float(np.dot(g, g)), abs=1e-12)


def test_ftl_gap_two_round_oracle():
    g = np.array([0.6, 0.0])
    G = np.stack([g, -g])
    oracle = ftl_gap_oracle(G)
    # hand enumeration: ||g||^2 + ||-g - g||^2 - 2||g||^2 = 3 ||g||^2
    assert oracle == pytest.approx(3 * float(np.dot(g, g)), abs=1e-12)
    assert ftl_regret_check(G) == pytest.approx(oracle, abs=1e-12)


def test_ftl_gap_matches_oracle_random(rng):
    G = unit_stream(rng, 200, 3)
    assert ftl_regret_check(G) == pytest.approx(ftl_gap_oracle(G), abs=1e-9)


def test_ftl_gap_nonnegative_and_logarithmic(rng):
    for _ in range(5):
        G = rademacher_stream(rng, 4096, 4)
        gaps = []
        for T in (16, 64, 256, 1024, 4096):
            gap = ftl_regret_check(G[:T])
            assert gap >= -1e-12
            assert gap <= 8.0 * math.log(T)
            gaps.append(gap)
        # fitted slope of gap against ln T stays in [0, 8]
        slope = np.polyfit(np.log([16, 64, 256, 1024, 4096]), gaps, 1)[0]
        assert -0.05 <= slope <= 8.0


def test_running_average_matches_constant_oracle_on_biased_streams():
    # on a biased i.i.d. stream the running-average source behaves like the
    # constant oracle hint mu/max(1, ||mu||): regret growth slopes agree
    from regretforge import (
        CoinBettor, ConstantHint, DimFreeLearner, OptimisticLearner, fit_slope,
        replay_hinted,
    )
    from regretforge.harness import StreamSpec, generate_stream

    d = 4
    mu = np.array([0.3, 0.0, 0.0, 0.0])
    T = 2 ** 14
    grid = [2 ** k for k in range(10, 15)]
    G = generate_stream(StreamSpec("biased", d, T, 21, {"mu": mu.tolist(), "noise": 0.4}))

    def slope_with(source):
        learner = OptimisticLearner(DimFreeLearner(d, 0.5), CoinBettor(0.5))
        ledger = replay_hinted(learner, G, source)
        losses = ledger.per_round_losses()
        gsum = np.cumsum(G, axis=0)
        rows = []
        for Tp in grid:
            cum = math.fsum(losses[:Tp])
            rows.append({"comparator_id": "env", "T": Tp,
                         "regret": cum + float(np.linalg.norm(gsum[Tp - 1]))})
        return fit_slope(rows, "env")

    oracle_hint = mu / max(1.0, float(np.linalg.norm(mu)))
    s_avg = slope_with(RunningAverage(d))
    s_oracle = slope_with(ConstantHint(oracle_hint))
    assert abs(s_avg - s_oracle) <= 0.05
