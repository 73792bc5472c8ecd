"""Elo-orchestrated competitive training simulator and judge-noise toolkit."""

from .kernels import BACKEND
from .rating import RatingTable, expected_score, stationary_rating, update_batch
from .matchmaking import SelectionPolicy, sample_opponent, selection_distribution
from .judging import JudgeModel, MatchRecord, ResponseSample, Verdict, judge_pair
from .policy import SurrogatePolicy, grpo_objective, grpo_step, normalize_advantages
from .noise_lab import NoiseReport, noise_report, sample_efficiency_experiment, thurstone_mle
from .cache import ResponseCache, build_cache
from .config import RunConfig
from .orchestrator import replay, run, temperature_sweep

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "RatingTable", "expected_score", "stationary_rating", "update_batch",
    "SelectionPolicy", "sample_opponent", "selection_distribution",
    "JudgeModel", "MatchRecord", "ResponseSample", "Verdict", "judge_pair",
    "SurrogatePolicy", "grpo_objective", "grpo_step", "normalize_advantages",
    "NoiseReport", "noise_report", "sample_efficiency_experiment", "thurstone_mle",
    "ResponseCache", "build_cache",
    "RunConfig",
    "replay", "run", "temperature_sweep",
]
