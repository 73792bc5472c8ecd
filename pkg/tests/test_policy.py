import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from elo_arena.errors import InvalidArgumentError
from elo_arena.judging import ResponseSample
from elo_arena.policy import (
    SurrogatePolicy,
    batch_advantages,
    grpo_gradient,
    grpo_objective,
    grpo_step,
    normalize_advantages,
    objective_and_gradient,
    sample_outputs,
)


def test_policy_validation():
    with pytest.raises(InvalidArgumentError):
        SurrogatePolicy(0.0, spread=0.0)
    with pytest.raises(InvalidArgumentError):
        SurrogatePolicy(0.0, clip_epsilon=1.0)
    with pytest.raises(InvalidArgumentError):
        SurrogatePolicy(0.0, kl_beta=-0.1)
    p = SurrogatePolicy(1.5)
    assert p.skill_old == p.skill_ref == 1.5


def test_sample_outputs():
    p = SurrogatePolicy(skill=3.0, spread=1e-9, skill_old=2.0)
    assert all(abs(o.quality - 2.0) < 1e-6 for o in sample_outputs(p, 8, seed=1))
    wide = SurrogatePolicy(skill=0.0, spread=2.0, skill_old=1.0)
    q = np.array([o.quality for o in sample_outputs(wide, 100_000, seed=2)])
    assert abs(q.mean() - 1.0) <= 0.01 * 2.0
    assert sample_outputs(wide, 5, seed=3) == sample_outputs(wide, 5, seed=3)
    with pytest.raises(InvalidArgumentError):
        sample_outputs(wide, 1)


def test_normalize_examples():
    assert normalize_advantages([1, 0, 1, 0]).advantages == (1.0, -1.0, 1.0, -1.0)
    assert normalize_advantages([1, 1, 1, 1]).advantages == (0.0, 0.0, 0.0, 0.0)
    assert normalize_advantages([0, 0, 0]).advantages == (0.0, 0.0, 0.0)
    adv = normalize_advantages([1, 0, 0, 0]).advantages
    # 0.75 / (sqrt(3)/4), -0.25 / (sqrt(3)/4)
    assert adv == pytest.approx([1.7320508075688772, -0.5773502691896258, -0.5773502691896258,
                                 -0.5773502691896258], abs=1e-12)
    with pytest.raises(InvalidArgumentError):
        normalize_advantages([1.0])
    assert normalize_advantages([1, 0]).group_size == 2


rewards = st.lists(st.floats(min_value=-100, max_value=100), min_size=2, max_size=32)


@given(rewards, st.floats(min_value=-50, max_value=50), st.floats(min_value=0.01, max_value=100))
def test_normalize_properties(r, shift, scale):
    adv = np.array(normalize_advantages(r).advantages)
    if np.ptp(r) == 0:
        assert np.all(adv == 0)
        return
    if np.std(r) < 1e-6 * max(1.0, np.abs(r).max()):
        return  # too close to constant for 1e-9 statements in double precision
    assert abs(adv.mean()) <= 1e-9
    assert abs(adv.std() - 1.0) <= 1e-9
    moved = np.array(normalize_advantages([x * scale + shift for x in r]).advantages)
    assert moved == pytest.approx(adv, abs=1e-6)


def test_batch_advantages_rows():
    r = np.array([[1, 0, 1, 0], [1, 1, 1, 1], [1, 0, 0, 0]], dtype=float)
    out = batch_advantages(r)
    for row, expect in zip(out, r):
        assert row.tolist() == list(normalize_advantages(expect).advantages)


def test_objective_identity_point():
    p = SurrogatePolicy(0.7, spread=1.3)
    outs = sample_outputs(p, 6, seed=0)
    adv = normalize_advantages([1, 0, 1, 1, 0, 0]).advantages
    assert grpo_objective(p, outs, adv) == pytest.approx(0.0, abs=1e-15)


def test_objective_kl_only():
    p = SurrogatePolicy(skill=2.0, spread=2.0, skill_old=2.0, skill_ref=0.0, kl_beta=0.3)
    outs = [ResponseSample(1.0), ResponseSample(3.0)]
    assert grpo_objective(p, outs, [0.0, 0.0]) == pytest.approx(-0.3 * 0.5, abs=1e-15)


def test_objective_against_density_oracle():
    s, old, delta = 0.8, 1.0, 0.05
    p = SurrogatePolicy(skill=old + delta, spread=s, skill_old=old, kl_beta=0.0)
    ratio = stats.norm.pdf(old, loc=old + delta, scale=s) / stats.norm.pdf(old, loc=old, scale=s)
    assert ratio == pytest.approx(np.exp(-delta ** 2 / (2 * s ** 2)), rel=1e-12)
    assert grpo_objective(p, [ResponseSample(old)], [1.0]) == pytest.approx(ratio, rel=1e-12)


def test_objective_against_density_oracle_with_clipping():
    rng = np.random.default_rng(4)
    for _ in range(50):
        s = rng.uniform(0.3, 2.0)
        old = rng.normal()
        p = SurrogatePolicy(old + rng.normal(0, 0.5), spread=s, skill_old=old,
                            skill_ref=rng.normal(), clip_epsilon=0.2, kl_beta=0.05)
        o = old + s * rng.standard_normal(8)
        a = rng.standard_normal(8)
        ratio = stats.norm.pdf(o, p.skill, s) / stats.norm.pdf(o, old, s)
        surr = np.minimum(ratio * a, np.clip(ratio, 0.8, 1.2) * a).mean()
        kl = (p.skill - p.skill_ref) ** 2 / (2 * s ** 2)
        assert grpo_objective(p, o, a) == pytest.approx(surr - 0.05 * kl, rel=1e-9, abs=1e-12)


def test_gaussian_kl_matches_numeric_integral():
    from scipy import integrate

    s, a, b = 0.7, 0.4, -0.3
    f = lambda x: stats.norm.pdf(x, a, s) * (stats.norm.logpdf(x, a, s) - stats.norm.logpdf(x, b, s))
    numeric, _ = integrate.quad(f, -20, 20)
    p = SurrogatePolicy(skill=a, spread=s, skill_ref=b)
    assert p.kl_to_reference() == pytest.approx(numeric, rel=1e-8)
    assert p.kl_to_reference() > 0
    assert SurrogatePolicy(skill=b, spread=s, skill_ref=b).kl_to_reference() == 0


def _random_config(rng):
    s = rng.uniform(0.3, 2.0)
    old = rng.normal()
    g = int(rng.integers(2, 17))
    p = SurrogatePolicy(
        skill=old + rng.normal(0, 0.4 * s),
        spread=s,
        skill_old=old,
        skill_ref=old + rng.normal(0, 0.5),
        clip_epsilon=rng.uniform(0.05, 0.4),
        kl_beta=rng.uniform(0, 0.2),
    )
    o = old + s * rng.standard_normal(g)
    a = np.array(normalize_advantages((rng.random(g) < 0.5).astype(float)).advantages)
    return p, o, a


def relative_error(a, b):
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(2024)
    h = 1e-5
    for _ in range(100):
        p, o, a = _random_config(rng)
        _, grad, _ = objective_and_gradient(p, o, a)
        up = objective_and_gradient(p, o, a, skill=p.skill + h)[0]
        down = objective_and_gradient(p, o, a, skill=p.skill - h)[0]
        assert relative_error(grad, (up - down) / (2 * h)) <= 1e-6


def test_clip_inactive_at_old_snapshot():
    rng = np.random.default_rng(8)
    for _ in range(20):
        p, o, a = _random_config(rng)
        at_old = SurrogatePolicy(p.skill_old, p.spread, p.skill_old, p.skill_ref, p.clip_epsilon, p.kl_beta)
        unclipped = SurrogatePolicy(p.skill_old, p.spread, p.skill_old, p.skill_ref, 0.999999, p.kl_beta)
        assert grpo_objective(at_old, o, a) == grpo_objective(unclipped, o, a)
        assert grpo_gradient(at_old, o, a) == grpo_gradient(unclipped, o, a)


def test_step_examples():
    p = SurrogatePolicy(0.0, spread=1.0, kl_beta=0.0, learning_rate=0.5)
    outs = [ResponseSample(1.0), ResponseSample(-1.0)]
    assert grpo_step(p, outs, [0.0, 0.0]).skill == 0.0
    up = grpo_step(p, outs, [1.0, -1.0])
    assert up.skill > 0.0
    assert up.skill_old == up.skill and up.spread == p.spread and up.skill_ref == 0.0


def test_misaligned_inputs():
    p = SurrogatePolicy(0.0)
    with pytest.raises(InvalidArgumentError):
        grpo_objective(p, [ResponseSample(0.0)] * 3, [0.0, 1.0])
    with pytest.raises(InvalidArgumentError):
        grpo_step(p, [], [])
