"""Scalar Gaussian surrogate policy trained with the group-relative clipped objective.

The policy emits response qualities o ~ Normal(skill, spread^2). Likelihood
ratios, epsilon-clipping and the KL anchor to the reference policy are the
same as in the token-level objective; only the density is one-dimensional.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import kernels
from .errors import InvalidArgumentError
from .judging import ResponseSample

DEFAULT_CLIP_EPSILON = 0.2
DEFAULT_KL_BETA = 0.001
# a placeholder default; no measured value backs it, so set it explicitly for real runs
DEFAULT_GROUP_SIZE = 8


@dataclass(frozen=True)
class SurrogatePolicy:
    skill: float
    spread: float = 1.0
    skill_old: float | None = None
    skill_ref: float | None = None
    clip_epsilon: float = DEFAULT_CLIP_EPSILON
    kl_beta: float = DEFAULT_KL_BETA
    learning_rate: float = 0.1

    def __post_init__(self):
        if self.skill_old is None:
            object.__setattr__(self, "skill_old", self.skill)
        if self.skill_ref is None:
            object.__setattr__(self, "skill_ref", self.skill)
        if not self.spread > 0:
            raise InvalidArgumentError("spread must be positive")
        if not 0.0 < self.clip_epsilon < 1.0:
            raise InvalidArgumentError("clip_epsilon must lie in (0, 1)")
        if self.kl_beta < 0:
            raise InvalidArgumentError("kl_beta must be non-negative")
        if not self.learning_rate > 0:
            raise InvalidArgumentError("learning_rate must be positive")

    def kl_to_reference(self, skill: float | None = None) -> float:
        s = self.skill if skill is None else skill
        return (s - self.skill_ref) ** 2 / (2.0 * self.spread ** 2)


@dataclass(frozen=True)
class AdvantageGroup:
    rewards: tuple[float, ...]
    advantages: tuple[float, ...]

    @property
    def group_size(self) -> int:
        return len(self.rewards)


def sample_qualities(policy: SurrogatePolicy, shape, rng: np.random.Generator) -> np.ndarray:
    return policy.skill_old + policy.spread * rng.standard_normal(shape)


def sample_outputs(policy: SurrogatePolicy, count: int,
                   seed: int | np.random.Generator | None = None) -> list[ResponseSample]:
    """Draw ``count`` outputs from the old snapshot (the policy that generates the group)."""
    if count < 2:
        raise InvalidArgumentError("a group needs at least two outputs")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return [ResponseSample(float(q)) for q in sample_qualities(policy, count, rng)]


def normalize_advantages(rewards: Sequence[float]) -> AdvantageGroup:
    """(r - mean) / population std; a constant group gets all-zero advantages."""
    r = np.asarray(rewards, dtype=np.float64)
    if r.ndim != 1 or r.size < 2:
        raise InvalidArgumentError("need a flat list of at least two rewards")
    adv = kernels.group_advantages(np.ascontiguousarray(r[None, :]))[0]
    return AdvantageGroup(tuple(r.tolist()), tuple(adv.tolist()))


def batch_advantages(rewards: np.ndarray) -> np.ndarray:
    """Row-wise ``normalize_advantages`` over a (groups x outputs) reward matrix."""
    return kernels.group_advantages(np.ascontiguousarray(rewards, dtype=np.float64))


def _as_matrix(outputs, advantages):
    if len(outputs) and isinstance(outputs[0], ResponseSample):
        outputs = [o.quality for o in outputs]
    o = np.asarray(outputs, dtype=np.float64)
    a = np.asarray(advantages, dtype=np.float64)
    if o.shape != a.shape:
        raise InvalidArgumentError(f"outputs {o.shape} and advantages {a.shape} are misaligned")
    if o.size == 0:
        raise InvalidArgumentError("no outputs")
    if o.ndim == 1:
        o, a = o[None, :], a[None, :]
    return np.ascontiguousarray(o), np.ascontiguousarray(a)


def objective_and_gradient(policy: SurrogatePolicy, outputs, advantages,
                           skill: float | None = None) -> tuple[float, float, float]:
    """Return (objective, d objective / d skill, KL term) at ``skill`` (default: policy.skill).

    ``outputs``/``advantages`` are one group (1-D) or a batch of equal-size groups (2-D);
    groups are averaged uniformly.
    """
    o, a = _as_matrix(outputs, advantages)
    s = policy.skill if skill is None else skill
    surrogate, dsurrogate = kernels.clipped_surrogate(
        o, a, float(s), float(policy.skill_old), float(policy.spread), float(policy.clip_epsilon)
    )
    kl = policy.kl_to_reference(s)
    dkl = (s - policy.skill_ref) / policy.spread ** 2
    return surrogate - policy.kl_beta * kl, dsurrogate - policy.kl_beta * dkl, kl


def grpo_objective(policy: SurrogatePolicy, outputs, advantages) -> float:
    return objective_and_gradient(policy, outputs, advantages)[0]


def grpo_gradient(policy: SurrogatePolicy, outputs, advantages) -> float:
    return objective_and_gradient(policy, outputs, advantages)[1]


def grpo_step(policy: SurrogatePolicy, outputs, advantages) -> SurrogatePolicy:
    """One ascent step on the objective, then refresh the old snapshot."""
    grad = grpo_gradient(policy, outputs, advantages)
    new_skill = policy.skill + policy.learning_rate * grad
    return replace(policy, skill=new_skill, skill_old=new_skill)


class TrainingLog:
    header = ("iteration", "skill", "objective", "mean_reward", "kl_term")

    def __init__(self, fh):
        self._writer = csv.writer(fh, lineterminator="\n")
        self._writer.writerow(self.header)

    def append(self, iteration, skill, objective, mean_reward, kl_term) -> None:
        self._writer.writerow(
            (iteration, f"{skill:.12g}", f"{objective:.12g}", f"{mean_reward:.12g}", f"{kl_term:.12g}")
        )
