"""The co-evolutionary training loop, Elo replay and temperature sweeps."""

from __future__ import annotations

import contextlib
import csv
import json
import logging
from collections import OrderedDict
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import cache as cache_mod
from .cache import ResponseCache
from .config import RunConfig
from .errors import CacheMissError
from .judging import MatchRecord, derived_rng, simulated_rewards
from .matchmaking import SelectionLog, opponent_indices, selection_distribution
from .policy import SurrogatePolicy, TrainingLog, batch_advantages, objective_and_gradient, sample_qualities
from .rating import RatingLog, RatingTable, batch_delta

log = logging.getLogger(__name__)

_WINNER = np.array(["opponent", "policy"])


@dataclass
class IterationSummary:
    iteration: int
    policy_elo: float
    policy_skill: float
    mean_reward: float
    selection_counts: dict[str, int]
    selection_probs: dict[str, float]
    mean_abs_advantage: float
    objective: float
    kl_term: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"))


@dataclass
class RunResult:
    config: RunConfig
    summaries: list[IterationSummary]
    final_table: RatingTable
    final_policy: SurrogatePolicy
    records: list[MatchRecord] | None = None

    @property
    def elo_trajectory(self) -> list[float]:
        return [s.policy_elo for s in self.summaries]

    @property
    def skill_trajectory(self) -> list[float]:
        return [s.policy_skill for s in self.summaries]


class RunLogs:
    """All per-run output files under one directory."""

    def __init__(self, out_dir):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self._stack = contextlib.ExitStack()

    def __enter__(self):
        def open_(name):
            return self._stack.enter_context(open(self.dir / name, "w", newline=""))

        self.ratings = RatingLog(open_("ratings.csv"))
        self.selection = SelectionLog(open_("selection.csv"))
        self.training = TrainingLog(open_("training.csv"))
        self.matches = open_("matches.jsonl")
        self.summaries = open_("summaries.jsonl")
        return self

    def __exit__(self, *exc):
        return self._stack.__exit__(*exc)


def initial_table(config: RunConfig) -> RatingTable:
    entries = {config.policy.id: config.policy.init_elo}
    entries.update({o.id: o.init_elo for o in config.opponents})
    return RatingTable(entries, config.k_factor)


def initial_policy(config: RunConfig) -> SurrogatePolicy:
    return SurrogatePolicy(
        skill=config.policy.skill,
        spread=config.policy.spread,
        clip_epsilon=config.clip_epsilon,
        kl_beta=config.kl_beta,
        learning_rate=config.learning_rate,
    )


def _match_lines(iteration, prompts, opp_ids, rewards, p_words, o_words) -> list[str]:
    lines = []
    winners = _WINNER[rewards.astype(np.int64)].tolist()
    rew = rewards.tolist()
    pw = p_words.tolist()
    for b, (pid, oid) in enumerate(zip(prompts, opp_ids)):
        head = f'{{"iteration":{iteration},"prompt_id":{json.dumps(pid)},"opponent_id":{json.dumps(oid)},"output_index":'
        ow = int(o_words[b])
        for g in range(len(rew[b])):
            lines.append(
                f'{head}{g},"winner":"{winners[b][g]}","reward":{rew[b][g]!r},'
                f'"policy_words":{pw[b][g]},"opponent_words":{ow}}}\n'
            )
    return lines


def run(
    config: RunConfig,
    cache: ResponseCache,
    prompt_stream: Iterable[Sequence[str]] | None = None,
    out_dir=None,
    keep_records: bool = False,
    on_iteration: Callable[[IterationSummary], None] | None = None,
) -> RunResult:
    """Run ``config.iterations`` training iterations.

    Each iteration: sample B prompts (with replacement, unless ``prompt_stream``
    supplies the batches), draw one opponent per prompt from the temperature
    softmax at the iteration-start ratings, draw G outputs per prompt from the
    old policy snapshot, judge each against the cached opponent response,
    normalise advantages per group, take one clipped-objective step, and
    apply a single Elo update over all B*G outcomes.
    """
    opp_ids = config.opponent_ids
    try:
        cache.check_complete(opp_ids)
    except CacheMissError as exc:
        exc.iteration = None
        raise
    table = initial_table(config)
    policy = initial_policy(config)
    judge = config.judge.model(config.seed)
    policy_id = config.policy.id
    opp_elos = np.array([table[o] for o in opp_ids], dtype=np.float64)
    manifest = cache.manifest
    B, G = config.batch_size, config.group_size
    stream = iter(prompt_stream) if prompt_stream is not None else None
    records: list[MatchRecord] | None = [] if keep_records else None
    summaries: list[IterationSummary] = []

    with (RunLogs(out_dir) if out_dir is not None else contextlib.nullcontext()) as logs:
        for t in range(config.iterations):
            rng = derived_rng(config.seed, "iteration", t)
            if stream is None:
                prompts = [manifest[i] for i in rng.integers(len(manifest), size=B).tolist()]
            else:
                prompts = list(next(stream))
                if len(prompts) != B:
                    raise ValueError(f"prompt batch {t} has {len(prompts)} prompts, expected {B}")
            dist = selection_distribution(table, policy_id, opp_ids, config.temperature)
            probs = np.array([p for _, p in dist])
            chosen = opponent_indices(probs, rng, B)
            chosen_ids = [opp_ids[k] for k in chosen.tolist()]
            opp_q = np.empty(B)
            opp_w = np.empty(B, dtype=np.int64)
            for b, (pid, oid) in enumerate(zip(prompts, chosen_ids)):
                try:
                    sample = cache.lookup(pid, oid)
                except CacheMissError as exc:
                    exc.iteration = t
                    raise
                opp_q[b] = sample.quality
                opp_w[b] = sample.word_count

            outputs = sample_qualities(policy, (B, G), rng)
            pol_w = config.policy.length.sample(rng, (B, G))
            rewards, _ties = simulated_rewards(outputs, opp_q, judge, rng)
            rewards[(pol_w - opp_w[:, None]) > config.length_guard] = 0.0

            advantages = batch_advantages(rewards)
            objective, grad, kl = objective_and_gradient(policy, outputs, advantages)
            new_skill = policy.skill + policy.learning_rate * grad
            policy = SurrogatePolicy(new_skill, policy.spread, new_skill, policy.skill_ref,
                                     policy.clip_epsilon, policy.kl_beta, policy.learning_rate)

            elo = table[policy_id]
            delta = batch_delta(elo, opp_elos[chosen], rewards, table.k_factor)
            table.entries[policy_id] = elo + delta

            counts = np.bincount(chosen, minlength=len(opp_ids))
            summary = IterationSummary(
                iteration=t,
                policy_elo=table[policy_id],
                policy_skill=policy.skill,
                mean_reward=float(rewards.mean()),
                selection_counts={o: int(c) for o, c in zip(opp_ids, counts)},
                selection_probs={o: float(p) for o, p in dist},
                mean_abs_advantage=float(np.abs(advantages).mean()),
                objective=objective,
                kl_term=kl,
            )
            summaries.append(summary)

            if records is not None or logs is not None:
                lines = _match_lines(t, prompts, chosen_ids, rewards, pol_w, opp_w)
                if records is not None:
                    records.extend(MatchRecord.from_json(line) for line in lines)
                if logs is not None:
                    logs.matches.writelines(lines)
                    logs.ratings.append(t, table.entries)
                    logs.selection.append(t, dist, counts)
                    logs.training.append(t, policy.skill, objective, summary.mean_reward, kl)
                    logs.summaries.write(summary.to_json() + "\n")
            if on_iteration is not None:
                on_iteration(summary)

    return RunResult(config, summaries, table, policy, records)


def replay(records: Iterable[MatchRecord], table: RatingTable, policy_id: str,
           k_factor: float | None = None) -> list[tuple[int, float]]:
    """Recompute the policy's Elo trajectory from a match log.

    Records must be grouped by iteration in log order; each iteration is one
    batched update against the frozen opponent ratings in ``table``.
    """
    k = table.k_factor if k_factor is None else k_factor
    by_iter: OrderedDict[int, list[MatchRecord]] = OrderedDict()
    last = None
    for rec in records:
        if last is not None and rec.iteration < last:
            raise ValueError("match log is not ordered by iteration")
        last = rec.iteration
        by_iter.setdefault(rec.iteration, []).append(rec)
    rating = table[policy_id]
    out = []
    for it, recs in by_iter.items():
        r_opp = np.array([table[r.opponent_id] for r in recs], dtype=np.float64)
        scores = np.array([[r.reward] for r in recs], dtype=np.float64)
        rating = rating + batch_delta(rating, r_opp, scores, k)
        out.append((it, rating))
    return out


def temperature_sweep(base: RunConfig, temperatures: Sequence[float], cache: ResponseCache,
                      out_dir=None) -> dict[float, RunResult]:
    """One run per temperature with shared seed and cache."""
    results = {}
    for T in temperatures:
        sub = None if out_dir is None else Path(out_dir) / f"T{T:g}"
        results[T] = run(base.with_(temperature=float(T)), cache, out_dir=sub)
        log.info("T=%g final Elo %.1f skill %.3f", T, results[T].final_table[base.policy.id],
                 results[T].final_policy.skill)
    if out_dir is not None:
        with open(Path(out_dir) / "sweep.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("temperature", "final_elo", "final_skill"))
            for T, res in results.items():
                w.writerow((f"{T:g}", f"{res.final_table[base.policy.id]:.6f}", f"{res.final_policy.skill:.12g}"))
    return results


def cache_for(config: RunConfig) -> ResponseCache:
    """Simulated cache covering ``config.prompts`` prompts and every opponent."""
    return cache_mod.build_cache(cache_mod.simulated_prompt_ids(config.prompts), config.opponents, config.seed)


def weighted_opponent_rating(result: RunResult) -> np.ndarray:
    """Per iteration, the selection-probability-weighted mean opponent rating."""
    elo = {o.id: o.init_elo for o in result.config.opponents}
    return np.array([sum(p * elo[o] for o, p in s.selection_probs.items()) for s in result.summaries])


def window_means(values: Sequence[float], window: int = 100) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64)
    n = len(v) // window
    return v[: n * window].reshape(n, window).mean(axis=1)
