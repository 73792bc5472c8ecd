"""Temperature-controlled opponent sampling over Elo distance."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import InvalidArgumentError
from .rating import RatingTable


@dataclass(frozen=True)
class SelectionPolicy:
    temperature: float
    rng_seed: int = 0

    def __post_init__(self):
        if not self.temperature > 0:
            raise InvalidArgumentError(f"temperature must be positive, got {self.temperature!r}")
        if not 0 <= self.rng_seed < 2**64:
            raise InvalidArgumentError("rng_seed must be a 64-bit unsigned integer")

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(self.rng_seed)


def softmax_by_distance(distances: Sequence[float], temperature: float) -> list[float]:
    if not temperature > 0:
        raise InvalidArgumentError(f"temperature must be positive, got {temperature!r}")
    d = [float(x) for x in distances]
    dmin = min(d)
    # shift by the smallest distance so the nearest weight is exactly 1
    w = [math.exp(-(x - dmin) / temperature) for x in d]
    z = math.fsum(w)
    return [x / z for x in w]


def selection_distribution(
    table: RatingTable,
    policy_id: str,
    opponent_ids: Sequence[str],
    temperature: float,
) -> list[tuple[str, float]]:
    """p(opponent) proportional to exp(-|R_policy - R_opponent| / T), in input order."""
    if not opponent_ids:
        raise InvalidArgumentError("opponent list is empty")
    r_pol = table[policy_id]
    distances = [abs(r_pol - table[o]) for o in opponent_ids]
    return list(zip(opponent_ids, softmax_by_distance(distances, temperature)))


def _validate(dist):
    if not dist:
        raise InvalidArgumentError("empty distribution")
    probs = [p for _, p in dist]
    if any(not (p >= 0) for p in probs) or abs(math.fsum(probs) - 1.0) > 1e-9:
        raise InvalidArgumentError("probabilities must be non-negative and sum to 1")
    return probs


def sample_opponent(dist, policy: SelectionPolicy | np.random.Generator) -> str:
    """Draw one opponent id by inverse CDF over the distribution's order."""
    return sample_opponents(dist, policy, 1)[0]


def sample_opponents(dist, policy: SelectionPolicy | np.random.Generator, count: int) -> list[str]:
    probs = _validate(dist)
    rng = policy.generator() if isinstance(policy, SelectionPolicy) else policy
    u = rng.random(count)
    idx = kernels.inverse_cdf_sample(np.asarray(probs, dtype=np.float64), u)
    return [dist[i][0] for i in idx.tolist()]


def opponent_indices(probs: np.ndarray, rng: np.random.Generator, count: int) -> np.ndarray:
    return kernels.inverse_cdf_sample(np.ascontiguousarray(probs, dtype=np.float64), rng.random(count))


class SelectionLog:
    """Comma-separated per-iteration selection frequencies."""

    header = ("iteration", "opponent_id", "selection_count", "probability")

    def __init__(self, fh):
        self._writer = csv.writer(fh, lineterminator="\n")
        self._writer.writerow(self.header)

    def append(self, iteration: int, dist, counts) -> None:
        for (opp, p), c in zip(dist, counts):
            self._writer.writerow((iteration, opp, int(c), f"{p:.12g}"))

