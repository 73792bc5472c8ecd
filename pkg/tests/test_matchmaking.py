import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from elo_arena.errors import InvalidArgumentError, MissingAgentError
from elo_arena.matchmaking import (
    SelectionPolicy,
    sample_opponent,
    sample_opponents,
    selection_distribution,
)
from elo_arena.rating import RatingTable


def _table(policy=1500.0, opps=(1400.0, 1700.0, 2000.0)):
    entries = {"pi": policy}
    entries.update({f"m{i}": r for i, r in enumerate(opps)})
    return RatingTable(entries)


def test_distribution_example():
    dist = selection_distribution(_table(), "pi", ["m0", "m1", "m2"], 200.0)
    assert [o for o, _ in dist] == ["m0", "m1", "m2"]
    # exp(-d/T) normalised with mpmath
    expected = [0.574096992967695, 0.348207427883735, 0.077695579148571]
    for (_, p), e in zip(dist, expected):
        assert p == pytest.approx(e, abs=1e-12)


def test_equidistant_opponents_split_evenly():
    for T in (1.0, 20.0, 2000.0):
        dist = selection_distribution(_table(1500, (1300, 1700)), "pi", ["m0", "m1"], T)
        assert [p for _, p in dist] == pytest.approx([0.5, 0.5], abs=1e-15)


def test_flat_limit():
    dist = selection_distribution(_table(), "pi", ["m0", "m1", "m2"], 1e9)
    assert all(abs(p - 1 / 3) < 1e-3 for _, p in dist)


def test_sharp_limit_and_no_underflow():
    # nearest gap 100 -> T = 2
    dist = selection_distribution(_table(), "pi", ["m0", "m1", "m2"], 2.0)
    assert dist[0][1] >= 1 - 1e-6
    assert math.fsum(p for _, p in dist) == pytest.approx(1.0, abs=1e-12)
    # exp(-500/0.1) underflows unless shifted by the minimum distance
    dist = selection_distribution(_table(), "pi", ["m2"], 0.1)
    assert dist == [("m2", 1.0)]


def test_errors():
    with pytest.raises(InvalidArgumentError):
        selection_distribution(_table(), "pi", [], 1.0)
    with pytest.raises(MissingAgentError):
        selection_distribution(_table(), "pi", ["ghost"], 1.0)
    with pytest.raises(MissingAgentError):
        selection_distribution(_table(), "ghost", ["m0"], 1.0)
    with pytest.raises(InvalidArgumentError):
        selection_distribution(_table(), "pi", ["m0"], 0.0)
    with pytest.raises(InvalidArgumentError):
        SelectionPolicy(temperature=-1.0)


finite = st.floats(min_value=0, max_value=3000)


@given(finite, st.lists(finite, min_size=1, max_size=6), st.floats(min_value=1, max_value=5000),
       st.floats(min_value=-1000, max_value=1000))
def test_distribution_properties(policy, opps, T, shift):
    ids = [f"m{i}" for i in range(len(opps))]
    dist = selection_distribution(_table(policy, opps), "pi", ids, T)
    probs = [p for _, p in dist]
    assert abs(math.fsum(probs) - 1.0) <= 1e-12
    spread = max(abs(policy - r) for r in opps) - min(abs(policy - r) for r in opps)
    if spread / T < 700:  # beyond this exp() leaves the double range
        assert all(p > 0 for p in probs)
    shifted = selection_distribution(_table(policy + shift, [r + shift for r in opps]), "pi", ids, T)
    assert [p for _, p in shifted] == pytest.approx(probs, abs=1e-9)


@given(st.floats(min_value=1, max_value=1000), st.floats(min_value=1, max_value=400))
def test_moving_toward_opponent_raises_its_probability(T, step):
    before = selection_distribution(_table(1000, (1500, 2000)), "pi", ["m0", "m1"], T)[1][1]
    after = selection_distribution(_table(1000 + step, (1500, 2000)), "pi", ["m0", "m1"], T)[1][1]
    assert after > before or before == pytest.approx(after, abs=1e-300)


def test_sampling_degenerate_and_deterministic():
    assert sample_opponent([("A", 1.0)], SelectionPolicy(1.0, 7)) == "A"
    dist = selection_distribution(_table(), "pi", ["m0", "m1", "m2"], 200.0)
    a = sample_opponents(dist, SelectionPolicy(200.0, 99), 50)
    b = sample_opponents(dist, SelectionPolicy(200.0, 99), 50)
    assert a == b


def test_sampling_frequencies():
    dist = selection_distribution(_table(), "pi", ["m0", "m1", "m2"], 200.0)
    draws = sample_opponents(dist, np.random.default_rng(5), 100_000)
    for opp, p in dist:
        assert abs(draws.count(opp) / 100_000 - p) <= 0.01


def test_sampling_rejects_invalid_distribution():
    with pytest.raises(InvalidArgumentError):
        sample_opponent([("A", 0.4), ("B", 0.4)], np.random.default_rng(0))
    with pytest.raises(InvalidArgumentError):
        sample_opponent([], np.random.default_rng(0))
