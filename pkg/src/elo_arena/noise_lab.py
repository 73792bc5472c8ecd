"""Judge-noise estimation: absolute-score regression versus Thurstone comparison noise.

Pipeline: regress per-item mean LLM rating on expert quality to get the
compression slope and residual noise, turn them into an effective ranking
noise sqrt(2) * residual / |slope|, estimate comparison noise per quality gap
by maximum likelihood under P(correct) = Phi(gap / sigma), and compare the two.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import (
    DegenerateDesignError,
    InfiniteNoiseError,
    InsufficientReplicationError,
    InvalidArgumentError,
    NonIdentifiableError,
)
from .judging import derived_rng
from .normal import norm_cdf, norm_ppf, norm_sf

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class AbsoluteRecord:
    item_id: str
    expert_quality: int
    ratings: tuple[float, ...]

    def __post_init__(self):
        if self.expert_quality not in (1, 2, 3, 4, 5):
            raise InvalidArgumentError(f"expert_quality must be 1..5, got {self.expert_quality!r}")
        object.__setattr__(self, "ratings", tuple(float(r) for r in self.ratings))


@dataclass(frozen=True)
class PairRecord:
    pair_id: str
    gap: int
    wins: float
    total: float

    def __post_init__(self):
        if self.gap < 1:
            raise InvalidArgumentError("gap must be >= 1")
        if not 0 <= self.wins <= self.total:
            raise InvalidArgumentError(f"need 0 <= wins <= total, got {self.wins}/{self.total}")


@dataclass
class AbsoluteRatingDataset:
    records: list[AbsoluteRecord] = field(default_factory=list)

    @classmethod
    def from_jsonl(cls, path) -> "AbsoluteRatingDataset":
        with open(path) as fh:
            rows = [json.loads(line) for line in fh if line.strip()]
        return cls([AbsoluteRecord(str(r["item_id"]), int(r["expert_quality"]), r["ratings"]) for r in rows])


@dataclass
class PairwiseDataset:
    """Pooled comparison counts. ``wins`` may be fractional when rebuilt from reported accuracies."""

    records: list[PairRecord] = field(default_factory=list)

    @classmethod
    def from_jsonl(cls, path) -> "PairwiseDataset":
        with open(path) as fh:
            rows = [json.loads(line) for line in fh if line.strip()]
        return cls([PairRecord(str(r["pair_id"]), int(r["gap"]), r["wins"], r["total"]) for r in rows])

    @classmethod
    def from_accuracies(cls, stats: Mapping[int, tuple[float, float]]) -> "PairwiseDataset":
        """Build from {gap: (accuracy, comparisons)} summary statistics."""
        return cls([PairRecord(f"gap{g}", g, acc * n, n) for g, (acc, n) in sorted(stats.items())])

    def gaps(self) -> list[int]:
        return sorted({r.gap for r in self.records})

    def pooled(self, gap: int) -> tuple[float, float]:
        wins = math.fsum(r.wins for r in self.records if r.gap == gap)
        total = math.fsum(r.total for r in self.records if r.gap == gap)
        return wins, total


class RegressionFit(NamedTuple):
    slope_a: float
    intercept_b: float
    r_squared: float
    residual_std: float


def fit_absolute_regression(data: AbsoluteRatingDataset) -> RegressionFit:
    """Ordinary least squares of per-item mean rating on expert quality."""
    if len(data.records) < 2:
        raise DegenerateDesignError("need at least two items")
    x = np.array([r.expert_quality for r in data.records], dtype=np.float64)
    y = np.array([np.mean(r.ratings) for r in data.records], dtype=np.float64)
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0.0:
        raise DegenerateDesignError("all expert qualities are identical")
    slope = float(xc @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    ssr = float(resid @ resid)
    sst = float(((y - y.mean()) ** 2).sum())
    r2 = 0.0 if sst == 0.0 else max(0.0, min(1.0, 1.0 - ssr / sst))
    return RegressionFit(slope, intercept, r2, math.sqrt(ssr / len(y)))


def within_sample_variance(data: AbsoluteRatingDataset) -> float:
    """Mean over items of the sample (n-1) variance of the repeated ratings."""
    if not data.records:
        raise InsufficientReplicationError("no items")
    variances = []
    for r in data.records:
        if len(r.ratings) < 2:
            raise InsufficientReplicationError(f"item {r.item_id!r} has fewer than two ratings")
        variances.append(float(np.var(r.ratings, ddof=1)))
    return math.fsum(variances) / len(variances)


def effective_ranking_noise(slope_a: float, residual_std: float) -> float:
    """sqrt(2) * residual_std / |slope_a|, in expert-quality units."""
    if slope_a == 0:
        raise InfiniteNoiseError("zero slope: scores carry no quality signal")
    return SQRT2 * residual_std / abs(slope_a)


def _score(x: float, wins: float, losses: float) -> float:
    # d loglik / dx divided by phi(x) > 0, with x = gap / sigma; decreasing in x
    return wins / norm_cdf(x) - losses / norm_sf(x)


def thurstone_mle(data: PairwiseDataset, gap: int) -> float:
    """Comparison noise sigma for one quality gap, pooling all pairs at that gap.

    Maximises W log Phi(gap/sigma) + (N - W) log(1 - Phi(gap/sigma)) by
    bisection on the score equation in x = gap/sigma.
    """
    wins, total = data.pooled(gap)
    if total <= 0:
        raise InvalidArgumentError(f"no comparisons at gap {gap}")
    acc = wins / total
    if acc <= 0.5:
        raise NonIdentifiableError(f"accuracy {acc:.4f} <= 0.5 at gap {gap}: sigma is unbounded")
    if acc >= 1.0:
        raise NonIdentifiableError(f"perfect accuracy at gap {gap}: sigma -> 0")
    losses = total - wins
    lo, hi = 0.0, 1.0
    while _score(hi, wins, losses) > 0:
        lo, hi = hi, 2.0 * hi
        if hi > 64:
            raise NonIdentifiableError("score equation has no root below x = 64")
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _score(mid, wins, losses) > 0:
            lo = mid
        else:
            hi = mid
    return gap / (0.5 * (lo + hi))


def thurstone_closed_form(gap: float, accuracy: float) -> float:
    if accuracy <= 0.5:
        raise NonIdentifiableError(f"accuracy {accuracy} <= 0.5")
    return gap / norm_ppf(accuracy)


def superiority_check(sigma_comp: float, sigma_abs: float) -> bool:
    """True when direct comparison is less noisy than differencing two absolute scores."""
    if not (sigma_comp > 0 and sigma_abs > 0):
        raise InvalidArgumentError("both noise levels must be positive")
    return sigma_comp < SQRT2 * sigma_abs


@dataclass
class NoiseReport:
    slope_a: float
    intercept_b: float
    r_squared: float
    within_variance: float | None
    residual_std: float
    sigma_abs_eff: float
    sigma_comp_by_gap: dict[int, float]
    noise_ratio: float
    superiority: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sigma_comp_by_gap"] = {str(k): v for k, v in self.sigma_comp_by_gap.items()}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def table(self) -> str:
        lines = [
            f"{'quantity':<28}{'value':>12}",
            f"{'slope a':<28}{self.slope_a:>12.4f}",
            f"{'intercept b':<28}{self.intercept_b:>12.4f}",
            f"{'R^2':<28}{self.r_squared:>12.4f}",
        ]
        if self.within_variance is not None:
            lines.append(f"{'within-sample variance':<28}{self.within_variance:>12.4f}")
        lines += [
            f"{'residual std':<28}{self.residual_std:>12.4f}",
            f"{'sigma_abs,eff':<28}{self.sigma_abs_eff:>12.4f}",
        ]
        for gap, s in sorted(self.sigma_comp_by_gap.items()):
            lines.append(f"{f'sigma_comp (gap {gap})':<28}{s:>12.4f}")
        lines += [
            f"{'noise ratio':<28}{self.noise_ratio:>12.4f}",
            f"{'comparison superior':<28}{str(self.superiority):>12}",
        ]
        return "\n".join(lines)


def _assemble(fit: RegressionFit, within: float | None, pairs: PairwiseDataset) -> NoiseReport:
    sigma_eff = effective_ranking_noise(fit.slope_a, fit.residual_std)
    by_gap = {g: thurstone_mle(pairs, g) for g in pairs.gaps()}
    if not by_gap:
        raise InvalidArgumentError("pairwise dataset is empty")
    reference = by_gap[1] if 1 in by_gap else by_gap[min(by_gap)]
    return NoiseReport(
        slope_a=fit.slope_a,
        intercept_b=fit.intercept_b,
        r_squared=fit.r_squared,
        within_variance=within,
        residual_std=fit.residual_std,
        sigma_abs_eff=sigma_eff,
        sigma_comp_by_gap=by_gap,
        noise_ratio=sigma_eff / reference,
        # sigma_abs_eff already carries the sqrt(2) of score differencing
        superiority=superiority_check(reference, sigma_eff / SQRT2),
    )


def noise_report(absolute: AbsoluteRatingDataset, pairwise: PairwiseDataset) -> NoiseReport:
    return _assemble(fit_absolute_regression(absolute), within_sample_variance(absolute), pairwise)


def report_from_statistics(
    slope_a: float,
    residual_std: float,
    gap_stats: Mapping[int, tuple[float, float]],
    intercept_b: float = float("nan"),
    r_squared: float = float("nan"),
    within_variance: float | None = None,
) -> NoiseReport:
    """Report from summary statistics (slope, residual, per-gap accuracies) instead of raw ratings."""
    fit = RegressionFit(slope_a, intercept_b, r_squared, residual_std)
    return _assemble(fit, within_variance, PairwiseDataset.from_accuracies(gap_stats))


@dataclass(frozen=True)
class EfficiencyRow:
    n: int
    misrank_comparison: float
    se_comparison: float
    misrank_absolute: float
    se_absolute: float


def _misrank(margin_sign: np.ndarray) -> np.ndarray:
    # 1 for a wrong ranking, 0.5 for an exact tie, 0 for a correct one
    return np.where(margin_sign < 0, 1.0, np.where(margin_sign > 0, 0.0, 0.5))


def _rate(x: np.ndarray) -> tuple[float, float]:
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def sample_efficiency_experiment(
    sigma_comp: float,
    sigma_abs: float,
    delta_q: float,
    budgets: Sequence[int],
    repetitions: int = 10_000,
    seed: int = 0,
) -> list[EfficiencyRow]:
    """Misranking rates of majority-vote comparison versus mean-of-scores ranking.

    For each budget n: the comparison arm takes a majority vote over n
    Thurstone judgments of (better, worse); the absolute arm averages n noisy
    scores per item and ranks by the means. Exact ties count as half an error.
    """
    if repetitions < 1000:
        raise InvalidArgumentError("repetitions must be >= 1000")
    if not budgets or any(n < 1 for n in budgets):
        raise InvalidArgumentError("budgets must be >= 1")
    if not sigma_comp > 0 or sigma_abs < 0:
        raise InvalidArgumentError("need sigma_comp > 0 and sigma_abs >= 0")
    rows = []
    for n in budgets:
        rng = derived_rng(seed, "comparison", n)
        correct = (delta_q + sigma_comp * rng.standard_normal((repetitions, n)) > 0).sum(axis=1)
        comp = _misrank(2 * correct - n)
        rng = derived_rng(seed, "absolute", n)
        eps = rng.standard_normal((2, repetitions, n)).mean(axis=2)
        better = delta_q + sigma_abs * eps[0]
        worse = sigma_abs * eps[1]
        absolute = _misrank(better - worse)
        rows.append(EfficiencyRow(n, *_rate(comp), *_rate(absolute)))
    return rows
