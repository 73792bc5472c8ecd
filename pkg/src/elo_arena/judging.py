"""Binary competitive rewards from pluggable judges, plus the length guard."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Literal

import numpy as np

from .errors import InvalidArgumentError, InvalidJudgeError, JudgeUnavailableError

JudgeKind = Literal["thurstone_comparison", "noisy_absolute", "remote"]
Winner = Literal["policy", "opponent", "tie"]

DEFAULT_LENGTH_THRESHOLD = 300
JUDGE_KINDS = ("thurstone_comparison", "noisy_absolute", "remote")


def word_count(text: str) -> int:
    return len(text.split())


@dataclass(frozen=True)
class ResponseSample:
    quality: float
    word_count: int = 0
    text: str | None = None

    def __post_init__(self):
        if self.word_count < 0:
            raise InvalidArgumentError("word_count must be non-negative")
        if not math.isfinite(self.quality):
            raise InvalidArgumentError("quality must be finite")

    @classmethod
    def from_text(cls, text: str, quality: float = 0.0) -> "ResponseSample":
        return cls(quality=quality, word_count=word_count(text), text=text)


@dataclass(frozen=True)
class JudgeModel:
    kind: JudgeKind = "thurstone_comparison"
    sigma_comp: float = 1.0
    sigma_abs: float = 0.0
    rng_seed: int = 0
    gateway: object | None = None  # GatewayConfig when kind == "remote"

    def __post_init__(self):
        if self.kind not in JUDGE_KINDS:
            raise InvalidJudgeError(f"unknown judge kind {self.kind!r}")
        if self.kind == "thurstone_comparison" and not self.sigma_comp > 0:
            raise InvalidJudgeError("thurstone judge needs sigma_comp > 0")
        if self.kind == "noisy_absolute" and not self.sigma_abs >= 0:
            raise InvalidJudgeError("absolute judge needs sigma_abs >= 0")
        if self.kind == "remote" and self.gateway is None:
            raise InvalidJudgeError("remote judge needs a gateway config")


@dataclass(frozen=True)
class Verdict:
    winner: Winner
    reward: float

    @classmethod
    def of(cls, winner: Winner) -> "Verdict":
        return cls(winner, 1.0 if winner == "policy" else 0.0)


@dataclass
class MatchRecord:
    iteration: int
    prompt_id: str
    opponent_id: str
    output_index: int
    winner: Winner
    reward: float
    policy_words: int
    opponent_words: int
    request_id: str | None = field(default=None)

    def to_json(self) -> str:
        d = asdict(self)
        if d["request_id"] is None:
            del d["request_id"]
        return json.dumps(d, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "MatchRecord":
        return cls(**json.loads(line))


def derived_rng(seed: int, *keys) -> np.random.Generator:
    """Generator keyed by (seed, keys...) so per-call draws are order independent."""
    words = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for k in keys:
        if isinstance(k, (int, np.integer)):
            words.append(int(k) & 0xFFFFFFFFFFFFFFFF)
        else:
            digest = hashlib.blake2b(str(k).encode(), digest_size=8).digest()
            words.append(int.from_bytes(digest, "little"))
    return np.random.default_rng(words)


def _rng_for(judge: JudgeModel, rng):
    return rng if rng is not None else np.random.default_rng(judge.rng_seed)


def compare_thurstone(policy: ResponseSample, opponent: ResponseSample, judge: JudgeModel,
                      rng: np.random.Generator | None = None) -> Verdict:
    """Policy wins with probability Phi((q_policy - q_opp) / sigma_comp)."""
    if judge.kind != "thurstone_comparison":
        raise InvalidJudgeError(f"compare_thurstone needs a thurstone judge, got {judge.kind!r}")
    z = _rng_for(judge, rng).standard_normal()
    margin = policy.quality - opponent.quality + judge.sigma_comp * z
    if margin > 0:
        return Verdict.of("policy")
    if margin < 0:
        return Verdict.of("opponent")
    return Verdict.of("tie")


def compare_via_scores(policy: ResponseSample, opponent: ResponseSample, judge: JudgeModel,
                       rng: np.random.Generator | None = None) -> Verdict:
    """Score each response independently as q + N(0, sigma_abs^2) and rank by score."""
    if judge.kind != "noisy_absolute":
        raise InvalidJudgeError(f"compare_via_scores needs an absolute judge, got {judge.kind!r}")
    eps = _rng_for(judge, rng).standard_normal(2)
    s_pol = policy.quality + judge.sigma_abs * eps[0]
    s_opp = opponent.quality + judge.sigma_abs * eps[1]
    if s_pol > s_opp:
        return Verdict.of("policy")
    if s_pol < s_opp:
        return Verdict.of("opponent")
    return Verdict.of("tie")


def apply_length_guard(verdict: Verdict, policy_words: int, opponent_words: int,
                       threshold: int = DEFAULT_LENGTH_THRESHOLD) -> Verdict:
    if threshold < 0:
        raise InvalidArgumentError("threshold must be non-negative")
    if policy_words - opponent_words > threshold:
        return Verdict.of("opponent")
    return verdict


def _remote_verdict(prompt_id, prompt_text, policy, opponent, judge):
    from . import gateway

    if policy.text is None or opponent.text is None or not prompt_text:
        raise InvalidArgumentError("remote judging needs prompt and response texts")
    try:
        reply = gateway.remote_compare(judge.gateway, prompt_text, policy.text, opponent.text)
    except JudgeUnavailableError as exc:
        raise JudgeUnavailableError(str(exc), prompt_id=prompt_id) from exc
    return Verdict.of({"a": "policy", "b": "opponent", "tie": "tie"}[reply])


def judge_pair(
    prompt_id: str,
    policy: ResponseSample,
    opponent: ResponseSample,
    judge: JudgeModel,
    threshold: int = DEFAULT_LENGTH_THRESHOLD,
    *,
    iteration: int = 0,
    opponent_id: str = "",
    output_index: int = 0,
    prompt_text: str | None = None,
    rng: np.random.Generator | None = None,
) -> MatchRecord:
    """Judge one policy output against one opponent response and package the match.

    Simulated judges draw from ``derived_rng(judge.rng_seed, prompt_id,
    output_index)`` unless an explicit generator is given.
    """
    if judge.kind == "remote":
        verdict = _remote_verdict(prompt_id, prompt_text, policy, opponent, judge)
    else:
        if rng is None:
            rng = derived_rng(judge.rng_seed, prompt_id, output_index)
        if judge.kind == "thurstone_comparison":
            verdict = compare_thurstone(policy, opponent, judge, rng)
        else:
            verdict = compare_via_scores(policy, opponent, judge, rng)
    verdict = apply_length_guard(verdict, policy.word_count, opponent.word_count, threshold)
    return MatchRecord(
        iteration=iteration,
        prompt_id=prompt_id,
        opponent_id=opponent_id,
        output_index=output_index,
        winner=verdict.winner,
        reward=verdict.reward,
        policy_words=policy.word_count,
        opponent_words=opponent.word_count,
    )


def simulated_rewards(policy_q: np.ndarray, opponent_q: np.ndarray, judge: JudgeModel,
                      rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised judging of a (groups x outputs) quality matrix against one opponent per row.

    Returns (rewards, ties) as float and bool arrays of the same shape.
    """
    diff = policy_q - opponent_q[:, None]
    if judge.kind == "thurstone_comparison":
        margin = diff + judge.sigma_comp * rng.standard_normal(diff.shape)
    elif judge.kind == "noisy_absolute":
        eps = rng.standard_normal((2,) + diff.shape)
        margin = (policy_q + judge.sigma_abs * eps[0]) - (opponent_q[:, None] + judge.sigma_abs * eps[1])
    else:
        raise InvalidJudgeError("remote judges cannot be vectorised in simulation")
    return (margin > 0).astype(np.float64), margin == 0


class MatchLog:
    """Newline-delimited MatchRecord log."""

    def __init__(self, fh):
        self._fh = fh

    def append(self, record: MatchRecord) -> None:
        self._fh.write(record.to_json())
        self._fh.write("\n")


def read_match_log(path) -> list[MatchRecord]:
    with open(path) as fh:
        return [MatchRecord.from_json(line) for line in fh if line.strip()]


@dataclass(frozen=True)
class RemoteMatch:
    iteration: int
    prompt_id: str
    prompt_text: str
    output_index: int
    opponent_id: str
    policy: ResponseSample
    opponent: ResponseSample


def judge_remote_batch(matches, judge: JudgeModel,
                       threshold: int = DEFAULT_LENGTH_THRESHOLD) -> list[MatchRecord]:
    """Judge many pairs through the gateway concurrently; records come back in input order.

    The policy response is always sent as ``response_a``. On failure the raised
    JudgeUnavailableError carries the failing prompt id and the records that did
    complete (``exc.records``).
    """
    from . import gateway

    if judge.kind != "remote":
        raise InvalidJudgeError("judge_remote_batch needs a remote judge")
    jobs = []
    for m in matches:
        if m.policy.text is None or m.opponent.text is None:
            raise InvalidArgumentError("remote judging needs response texts")
        jobs.append(gateway.CompareJob((m.prompt_id, m.output_index), m.prompt_text,
                                       m.policy.text, m.opponent.text))

    def to_records(results):
        out = []
        for m in matches:
            hit = results.get((m.prompt_id, m.output_index))
            if hit is None:
                continue
            winner, request_id = hit
            verdict = Verdict.of({"a": "policy", "b": "opponent", "tie": "tie"}[winner])
            verdict = apply_length_guard(verdict, m.policy.word_count, m.opponent.word_count, threshold)
            out.append(MatchRecord(m.iteration, m.prompt_id, m.opponent_id, m.output_index,
                                   verdict.winner, verdict.reward, m.policy.word_count,
                                   m.opponent.word_count, request_id))
        return out

    try:
        results = gateway.compare_many(judge.gateway, jobs)
    except JudgeUnavailableError as exc:
        failed = getattr(exc, "failed_key", (None,))[0]
        err = JudgeUnavailableError(str(exc), prompt_id=failed)
        err.records = to_records(getattr(exc, "partial", {}))
        raise err from exc
    return to_records(results)
