"""Run configuration: agents, judge, and training hyper-parameters."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ConfigError
from .judging import JUDGE_KINDS, JudgeModel

POLICY_INITIAL_ELO = 1350.0
# starting ratings of the three-opponent curriculum pool
CURRICULUM_OPPONENT_ELOS = (1400.0, 1700.0, 2000.0)


@dataclass(frozen=True)
class LengthSpec:
    """Word-count distribution: ``normal`` (mean, std; rounded, floored at 0), ``uniform`` (low..high) or ``fixed``."""

    kind: str = "normal"
    mean: float = 200.0
    std: float = 50.0
    low: int = 0
    high: int = 0
    words: int = 0

    def __post_init__(self):
        if self.kind not in ("normal", "uniform", "fixed"):
            raise ConfigError(f"unknown length kind {self.kind!r}")
        if self.kind == "normal" and (self.std < 0 or self.mean < 0):
            raise ConfigError("length mean/std must be non-negative")
        if self.kind == "uniform" and not 0 <= self.low <= self.high:
            raise ConfigError("uniform length needs 0 <= low <= high")
        if self.kind == "fixed" and self.words < 0:
            raise ConfigError("fixed length must be non-negative")

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        if self.kind == "fixed":
            return np.full(shape, self.words, dtype=np.int64)
        if self.kind == "uniform":
            return rng.integers(self.low, self.high + 1, size=shape, dtype=np.int64)
        draw = self.mean + self.std * rng.standard_normal(shape)
        return np.maximum(np.rint(draw), 0).astype(np.int64)


@dataclass(frozen=True)
class AgentSpec:
    id: str
    skill: float
    spread: float = 1.0
    init_elo: float = 1400.0
    length: LengthSpec = field(default_factory=LengthSpec)

    def __post_init__(self):
        if not self.id:
            raise ConfigError("agent id must be non-empty")
        if self.spread < 0 or not math.isfinite(self.skill):
            raise ConfigError(f"agent {self.id!r}: spread must be >= 0 and skill finite")


@dataclass(frozen=True)
class JudgeSpec:
    kind: str = "thurstone_comparison"
    sigma_comp: float = 1.0
    sigma_abs: float = 0.0

    def model(self, seed: int) -> JudgeModel:
        return JudgeModel(self.kind, self.sigma_comp, self.sigma_abs, rng_seed=seed)


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    iterations: int = 100
    batch_size: int = 8
    group_size: int = 8  # placeholder default, see policy.DEFAULT_GROUP_SIZE
    temperature: float = 200.0
    k_factor: float = 32.0
    clip_epsilon: float = 0.2
    kl_beta: float = 0.001
    learning_rate: float = 0.05
    length_guard: int = 300
    prompts: int = 64  # prompt count when the cache is built from this config
    policy: AgentSpec = field(default_factory=lambda: AgentSpec("policy", 0.0, 1.0, POLICY_INITIAL_ELO))
    opponents: tuple[AgentSpec, ...] = ()
    judge: JudgeSpec = field(default_factory=JudgeSpec)

    def __post_init__(self):
        for name in ("iterations", "batch_size", "prompts"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.group_size < 2:
            raise ConfigError("group_size must be >= 2")
        if not self.temperature > 0:
            raise ConfigError("temperature must be positive")
        if not self.k_factor > 0:
            raise ConfigError("k_factor must be positive")
        if not 0 < self.clip_epsilon < 1:
            raise ConfigError("clip_epsilon must lie in (0, 1)")
        if self.kl_beta < 0 or not self.learning_rate > 0:
            raise ConfigError("need kl_beta >= 0 and learning_rate > 0")
        if self.length_guard < 0:
            raise ConfigError("length_guard must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if not self.opponents:
            raise ConfigError("at least one opponent is required")
        ids = [self.policy.id] + [o.id for o in self.opponents]
        if len(set(ids)) != len(ids):
            raise ConfigError("agent ids must be unique")
        if self.policy.spread <= 0:
            raise ConfigError("policy spread must be positive")
        if self.judge.kind not in JUDGE_KINDS or self.judge.kind == "remote":
            raise ConfigError("simulation runs need a thurstone_comparison or noisy_absolute judge")

    @property
    def opponent_ids(self) -> list[str]:
        return [o.id for o in self.opponents]

    def with_(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


def _build(cls, data: Any, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def agent_from_dict(data: dict, where: str = "agent") -> AgentSpec:
    data = dict(data)
    if "length" in data:
        data["length"] = _build(LengthSpec, data["length"], f"{where}.length")
    return _build(AgentSpec, data, where)


def config_from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be an object")
    data = dict(data)
    if "policy" in data:
        data["policy"] = agent_from_dict(data["policy"], "policy")
    data["opponents"] = tuple(
        agent_from_dict(o, f"opponents[{i}]") for i, o in enumerate(data.get("opponents", ()))
    )
    if "judge" in data:
        data["judge"] = _build(JudgeSpec, data["judge"], "judge")
    return _build(RunConfig, data, "config")


def load_config(path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(data)


def dump_config(cfg: RunConfig, path) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")


def load_opponents(path) -> list[AgentSpec]:
    """Opponent specs from a config document (full RunConfig or just ``{"opponents": [...]}``)."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    rows = data.get("opponents") if isinstance(data, dict) else data
    if not rows:
        raise ConfigError(f"{path}: no opponents")
    return [agent_from_dict(o, f"opponents[{i}]") for i, o in enumerate(rows)]


def curriculum_config(seed: int = 0, iterations: int = 2000, temperature: float = 200.0) -> RunConfig:
    """Three-opponent pool at fixed starting ratings, with skills placed so Elo and skill agree.

    With policy spread 0.5, opponent spread 0.5 and comparison noise 0.5 a
    skill gap of 1 is worth roughly 341 Elo under the probit/logistic match.
    K = 2 keeps the batched update (B*G = 32 outcomes) well inside its stable range.
    """
    words = LengthSpec("fixed", words=200)
    opponents = tuple(
        AgentSpec(name, (elo - POLICY_INITIAL_ELO) / 341.0, 0.5, elo, words)
        for name, elo in zip(("m14b", "m32b", "m8b"), CURRICULUM_OPPONENT_ELOS)
    )
    return RunConfig(
        seed=seed,
        iterations=iterations,
        batch_size=4,
        group_size=8,
        temperature=temperature,
        k_factor=2.0,
        learning_rate=0.01,
        prompts=256,
        policy=AgentSpec("policy", 0.0, 0.5, POLICY_INITIAL_ELO, words),
        opponents=opponents,
        judge=JudgeSpec("thurstone_comparison", 0.5),
    )
