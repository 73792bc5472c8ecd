import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from elo_arena import kernels

py = kernels.python_backend
cy = kernels.compiled_backend
needs_compiled = pytest.mark.skipif(cy is None, reason="compiled extension not built")


def _case(seed, b=16, g=8):
    rng = np.random.default_rng(seed)
    rewards = rng.integers(0, 2, (b, g)).astype(np.float64)
    rewards[0] = 1.0  # one constant group
    return rng, rewards


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")
    assert (kernels.BACKEND == "cython") == (cy is not None)


def test_pure_python_switch():
    env = dict(os.environ, ELO_ARENA_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import elo_arena; print(elo_arena.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_python_backend_group_advantages():
    adv = py.group_advantages(np.array([[1.0, 0, 0, 0], [1, 1, 1, 1]]))
    np.testing.assert_allclose(adv[0], [1.7320508075688772] + [-0.5773502691896258] * 3, rtol=1e-15)
    assert not adv[1].any()


@needs_compiled
@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_parity(seed):
    rng, rewards = _case(seed)
    r_opp = rng.uniform(1000, 2400, rewards.shape[0])
    r_self = float(rng.uniform(1000, 2400))
    assert cy.elo_batch_delta(r_self, r_opp, rewards, 32.0) == pytest.approx(
        py.elo_batch_delta(r_self, r_opp, rewards, 32.0), abs=1e-12)

    scores = rewards.ravel().copy()
    np.testing.assert_allclose(cy.elo_walk(r_self, 1700.0, scores, 32.0),
                               py.elo_walk(r_self, 1700.0, scores, 32.0), atol=1e-9, rtol=0)

    np.testing.assert_allclose(cy.group_advantages(rewards), py.group_advantages(rewards), atol=1e-12, rtol=0)

    adv = py.group_advantages(rewards)
    outputs = rng.normal(0.0, 1.0, rewards.shape)
    skill = float(rng.normal(0, 0.3))
    for args in ((skill, 0.0, 1.0, 0.2), (0.0, 0.0, 0.5, 0.1)):
        v_c, g_c = cy.clipped_surrogate(outputs, adv, *args)
        v_p, g_p = py.clipped_surrogate(outputs, adv, *args)
        assert v_c == pytest.approx(v_p, abs=1e-12)
        assert g_c == pytest.approx(g_p, abs=1e-12)

    probs = rng.dirichlet(np.ones(5))
    u = rng.random(200)
    np.testing.assert_array_equal(cy.inverse_cdf_sample(probs, u), py.inverse_cdf_sample(probs, u))


@needs_compiled
def test_inverse_cdf_edges():
    probs = np.array([0.25, 0.0, 0.75])
    u = np.array([0.0, 0.2499999, 0.25, 0.9999999])
    for backend in (cy, py):
        idx = backend.inverse_cdf_sample(probs, u)
        assert idx.tolist()[0] == 0 and 1 not in idx.tolist() and idx.tolist()[-1] == 2


@pytest.mark.parametrize("backend", [py, cy], ids=["python", "compiled"])
def test_underflowing_spread_counts_as_constant(backend):
    if backend is None:
        pytest.skip("compiled extension not built")
    adv = backend.group_advantages(np.array([[1e-320, 0.0, 0.0, 0.0]]))
    assert not adv.any()
