"""Command-line entry point: ``elo-arena <subcommand>``.

Exit codes: 0 success, 2 configuration error, 3 cache error, 4 judge error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import cache as cache_mod
from .config import load_config, load_opponents
from .errors import CacheError, ConfigError, EloArenaError, JudgeUnavailableError, ProtocolError
from .judging import read_match_log
from .noise_lab import AbsoluteRatingDataset, PairwiseDataset, noise_report, sample_efficiency_experiment
from .orchestrator import cache_for, initial_table, replay, run, temperature_sweep

EXIT_CONFIG, EXIT_CACHE, EXIT_JUDGE = 2, 3, 4

log = logging.getLogger("elo_arena")


def _cmd_simulate(args):
    cfg = load_config(args.config)
    cache = cache_mod.load(args.cache)
    result = run(cfg, cache, out_dir=args.out)
    last = result.summaries[-1]
    print(f"iterations={len(result.summaries)} policy_elo={last.policy_elo:.2f} "
          f"skill={last.policy_skill:.4f} mean_reward={last.mean_reward:.3f}")


def _cmd_noise(args):
    report = noise_report(AbsoluteRatingDataset.from_jsonl(args.absolute),
                          PairwiseDataset.from_jsonl(args.pairwise))
    out = Path(args.out)
    out.write_text(report.to_json() + "\n")
    out.with_suffix(".txt").write_text(report.table() + "\n")
    print(report.table())


def _cmd_cache_build(args):
    prompts = [p.prompt_id for p in cache_mod.read_prompts(args.prompts)]
    if args.responses:
        cache = cache_mod.ingest_responses(cache_mod.read_responses(args.responses), prompts)
    else:
        cache = cache_mod.build_cache(prompts, load_opponents(args.opponents), args.seed)
    cache_mod.persist(cache, args.out)
    print(f"wrote {len(cache)} entries ({len(cache.manifest)} prompts x {len(cache.opponent_ids)} opponents) to {args.out}")


def _cmd_replay(args):
    cfg = load_config(args.config)
    trajectory = replay(read_match_log(args.log), initial_table(cfg), cfg.policy.id)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("iteration", "agent_id", "rating"))
        for it, r in trajectory:
            w.writerow((it, cfg.policy.id, f"{r:.6f}"))
    finally:
        if fh is not sys.stdout:
            fh.close()


def _cmd_sweep(args):
    cfg = load_config(args.config)
    cache = cache_mod.load(args.cache) if args.cache else cache_for(cfg)
    temps = [float(t) for t in args.temperatures.split(",") if t.strip()]
    if not temps or any(t <= 0 for t in temps):
        raise ConfigError("temperatures must be a comma-separated list of positive numbers")
    results = temperature_sweep(cfg, temps, cache, out_dir=args.out)
    for T, res in results.items():
        print(f"T={T:g} final_elo={res.final_table[cfg.policy.id]:.2f} skill={res.final_policy.skill:.4f}")


def _cmd_efficiency(args):
    budgets = [int(n) for n in args.budgets.split(",")]
    rows = sample_efficiency_experiment(args.sigma_comp, args.sigma_abs, args.delta_q, budgets,
                                        args.repetitions, args.seed)
    print("n,misrank_comparison,se_comparison,misrank_absolute,se_absolute")
    for r in rows:
        print(f"{r.n},{r.misrank_comparison:.6f},{r.se_comparison:.6f},{r.misrank_absolute:.6f},{r.se_absolute:.6f}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="elo-arena", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the training loop")
    p.add_argument("--config", required=True)
    p.add_argument("--cache", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("noise", help="estimate absolute vs comparison judge noise")
    p.add_argument("--absolute", required=True)
    p.add_argument("--pairwise", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_noise)

    p = sub.add_parser("cache-build", help="build the opponent response cache")
    p.add_argument("--prompts", required=True)
    p.add_argument("--opponents", help="config document with an opponents list (simulation mode)")
    p.add_argument("--responses", help="newline-delimited opponent responses to ingest instead")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_cache_build)

    p = sub.add_parser("replay", help="recompute the Elo trajectory from a match log")
    p.add_argument("--log", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("sweep", help="one run per temperature")
    p.add_argument("--config", required=True)
    p.add_argument("--temperatures", default="20,200,2000")
    p.add_argument("--cache")
    p.add_argument("--out", default="sweep")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("efficiency", help="comparison vs absolute misranking experiment")
    p.add_argument("--sigma-comp", type=float, required=True)
    p.add_argument("--sigma-abs", type=float, required=True)
    p.add_argument("--delta-q", type=float, default=1.0)
    p.add_argument("--budgets", default="1,5,15")
    p.add_argument("--repetitions", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_efficiency)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "cache-build" and not (args.opponents or args.responses):
        print("error: cache-build needs --opponents or --responses", file=sys.stderr)
        return EXIT_CONFIG
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CacheError as exc:
        print(f"cache error: {exc}", file=sys.stderr)
        return EXIT_CACHE
    except (JudgeUnavailableError, ProtocolError) as exc:
        print(f"judge error: {exc}", file=sys.stderr)
        return EXIT_JUDGE
    except (EloArenaError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
