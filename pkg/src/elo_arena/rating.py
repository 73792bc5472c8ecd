"""Elo ratings: expected score, batched updates against frozen opponents."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .errors import InvalidArgumentError, MissingAgentError

DEFAULT_K = 32.0
POLICY_INITIAL_ELO = 1350.0


def _check_finite(*values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise InvalidArgumentError(f"rating must be finite, got {v!r}")


def expected_score(rating_self: float, rating_opp: float) -> float:
    """Model-implied probability that ``rating_self`` beats ``rating_opp``."""
    _check_finite(rating_self, rating_opp)
    return 1.0 / (1.0 + 10.0 ** ((rating_opp - rating_self) / 400.0))


def stationary_rating(win_prob: float, rating_opp: float) -> float:
    """Rating at which ``expected_score`` against ``rating_opp`` equals ``win_prob``."""
    if not 0.0 < win_prob < 1.0:
        raise InvalidArgumentError(f"win_prob must lie in (0, 1), got {win_prob!r}")
    _check_finite(rating_opp)
    return rating_opp - 400.0 * math.log10(1.0 / win_prob - 1.0)


@dataclass(frozen=True)
class MatchOutcome:
    opponent_id: str
    score: float
    expected: float

    def __post_init__(self):
        if self.score not in (0.0, 1.0):
            raise InvalidArgumentError(f"score must be 0 or 1, got {self.score!r}")
        if not 0.0 < self.expected < 1.0:
            raise InvalidArgumentError(f"expected must lie in (0, 1), got {self.expected!r}")


@dataclass
class RatingTable:
    entries: dict[str, float] = field(default_factory=dict)
    k_factor: float = DEFAULT_K

    def __post_init__(self):
        if not self.k_factor > 0:
            raise InvalidArgumentError(f"k_factor must be positive, got {self.k_factor!r}")
        for agent, r in self.entries.items():
            _check_finite(r)
        self.entries = {str(a): float(r) for a, r in self.entries.items()}

    def __getitem__(self, agent_id: str) -> float:
        try:
            return self.entries[agent_id]
        except KeyError:
            raise MissingAgentError(agent_id) from None

    def __contains__(self, agent_id: str) -> bool:
        return agent_id in self.entries

    def copy(self) -> "RatingTable":
        return RatingTable(dict(self.entries), self.k_factor)

    def snapshot(self) -> Mapping[str, float]:
        return dict(self.entries)

    def expected(self, agent_id: str, opponent_id: str) -> float:
        return expected_score(self[agent_id], self[opponent_id])


def update_batch(table: RatingTable, agent: str, outcomes: Sequence[MatchOutcome]) -> RatingTable:
    """Apply one batched update to ``agent``; opponents stay frozen.

    Every outcome's ``expected`` must come from the table state before the
    batch. Returns a new table; the input is not modified.
    """
    current = table[agent]
    for o in outcomes:
        if o.opponent_id not in table:
            raise MissingAgentError(o.opponent_id)
    if not outcomes:
        return table.copy()
    delta = table.k_factor * sum(o.score - o.expected for o in outcomes)
    new = table.copy()
    new.entries[agent] = current + delta
    return new


def batch_delta(rating_self: float, opponent_ratings: Sequence[float], scores, k_factor: float) -> float:
    """K times the summed surprise over a (groups x outputs) score matrix.

    Row ``b`` of ``scores`` was played against ``opponent_ratings[b]``.
    """
    scores = np.ascontiguousarray(scores, dtype=np.float64)
    if scores.ndim == 1:
        scores = scores[:, None]
    r_opp = np.ascontiguousarray(opponent_ratings, dtype=np.float64)
    if scores.shape[0] != r_opp.shape[0]:
        raise InvalidArgumentError("one opponent rating per score row is required")
    if scores.size == 0:
        return 0.0
    return float(kernels.elo_batch_delta(float(rating_self), r_opp, scores, float(k_factor)))


def simulate_fixed_opponent(
    win_prob: float,
    rating_opp: float,
    matches: int,
    k_factor: float = DEFAULT_K,
    initial: float | None = None,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Rating trajectory of an agent with true win rate ``win_prob`` against a frozen opponent."""
    if not 0.0 < win_prob < 1.0:
        raise InvalidArgumentError(f"win_prob must lie in (0, 1), got {win_prob!r}")
    rng = rng if rng is not None else np.random.default_rng()
    scores = (rng.random(matches) < win_prob).astype(np.float64)
    start = rating_opp if initial is None else initial
    return kernels.elo_walk(float(start), float(rating_opp), scores, float(k_factor))


class RatingLog:
    """Comma-separated rating history: iteration, agent_id, rating."""

    header = ("iteration", "agent_id", "rating")

    def __init__(self, fh):
        self._writer = csv.writer(fh, lineterminator="\n")
        self._writer.writerow(self.header)

    def append(self, iteration: int, ratings: Mapping[str, float]) -> None:
        for agent, r in ratings.items():
            self._writer.writerow((iteration, agent, f"{r:.6f}"))


def read_rating_log(path) -> list[tuple[int, str, float]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [(int(r["iteration"]), r["agent_id"], float(r["rating"])) for r in reader]


def table_from(ratings: Iterable[tuple[str, float]], k_factor: float = DEFAULT_K) -> RatingTable:
    table = RatingTable({}, k_factor)
    for agent, r in ratings:
        if agent in table.entries:
            raise InvalidArgumentError(f"duplicate agent id {agent!r}")
        _check_finite(float(r))
        table.entries[agent] = float(r)
    return table
