"""Pure-Python/numpy versions of the compiled kernels (same signatures, same semantics)."""

import numpy as np


def _expected(r_self, r_opp):
    return 1.0 / (1.0 + 10.0 ** ((r_opp - r_self) / 400.0))


def elo_walk(r0, r_opp, scores, k):
    out = np.empty(len(scores), dtype=np.float64)
    r = float(r0)
    for i, s in enumerate(np.asarray(scores, dtype=np.float64).tolist()):
        r = r + k * (s - _expected(r, r_opp))
        out[i] = r
    return out


def elo_batch_delta(r_self, r_opp, scores, k):
    total = 0.0
    for rb, row in zip(np.asarray(r_opp).tolist(), np.asarray(scores).tolist()):
        e = _expected(r_self, rb)
        for s in row:
            total = total + (s - e)
    return k * total


def group_advantages(rewards):
    rewards = np.asarray(rewards, dtype=np.float64)
    out = np.zeros_like(rewards)
    varying = rewards.max(axis=1) != rewards.min(axis=1)
    if varying.any():
        r = rewards[varying]
        mean = r.mean(axis=1, keepdims=True)
        sd = np.sqrt(((r - mean) ** 2).mean(axis=1, keepdims=True))
        # spreads so small that the variance underflows count as constant
        safe = np.where(sd > 0, sd, 1.0)
        out[varying] = np.where(sd > 0, (r - mean) / safe, 0.0)
    return out


def clipped_surrogate(outputs, advantages, skill, skill_old, spread, eps):
    o = np.asarray(outputs, dtype=np.float64)
    a = np.asarray(advantages, dtype=np.float64)
    inv_var = 1.0 / (spread * spread)
    rho = np.exp(0.5 * inv_var * ((o - skill_old) ** 2 - (o - skill) ** 2))
    drho = rho * (o - skill) * inv_var
    unclipped = rho * a
    clipped = np.clip(rho, 1.0 - eps, 1.0 + eps) * a
    take_clip = clipped < unclipped
    value = np.where(take_clip, clipped, unclipped).sum()
    grad = np.where(take_clip, 0.0, drho * a).sum()
    return float(value / o.size), float(grad / o.size)


def inverse_cdf_sample(probs, u):
    cdf = np.cumsum(np.asarray(probs, dtype=np.float64))
    idx = np.searchsorted(cdf, np.asarray(u, dtype=np.float64), side="right")
    return np.minimum(idx, len(cdf) - 1).astype(np.int64)
