"""Pre-computed opponent responses keyed by (prompt, opponent).

On disk: one JSON header line, then one JSON record per entry::

    {"format": "elo-arena-cache", "version": 1, "prompts": P, "opponents": M, "entries": P*M, "seed": s, ...}
    {"prompt_id": ..., "opponent_id": ..., "quality": ..., "word_count": ..., "text": ...}
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .config import AgentSpec
from .errors import (
    CacheMissError,
    CorruptCacheError,
    DuplicateEntryError,
    IncompatibleFormatError,
    InvalidArgumentError,
)
from .judging import ResponseSample, derived_rng, word_count

FORMAT = "elo-arena-cache"
VERSION = 1


@dataclass
class ResponseCache:
    entries: dict[tuple[str, str], ResponseSample] = field(default_factory=dict)
    manifest: list[str] = field(default_factory=list)
    opponent_ids: list[str] = field(default_factory=list)
    seed: int | None = None
    version: int = VERSION

    def __len__(self) -> int:
        return len(self.entries)

    def lookup(self, prompt_id: str, opponent_id: str) -> ResponseSample:
        try:
            return self.entries[(prompt_id, opponent_id)]
        except KeyError:
            raise CacheMissError(prompt_id, opponent_id) from None

    def check_complete(self, opponent_ids: Iterable[str] | None = None) -> None:
        """Raise CacheMissError for the first (prompt, opponent) pair that is absent."""
        for opp in (self.opponent_ids if opponent_ids is None else opponent_ids):
            for p in self.manifest:
                if (p, opp) not in self.entries:
                    raise CacheMissError(p, opp)

    def _lines(self) -> list[str]:
        header = {
            "format": FORMAT,
            "version": self.version,
            "prompts": len(self.manifest),
            "opponents": len(self.opponent_ids),
            "entries": len(self.entries),
            "seed": self.seed,
            "manifest": self.manifest,
            "opponent_ids": self.opponent_ids,
        }
        lines = [json.dumps(header, separators=(",", ":"))]
        for (p, o), s in self.entries.items():
            rec = {"prompt_id": p, "opponent_id": o, "quality": s.quality, "word_count": s.word_count}
            if s.text is not None:
                rec["text"] = s.text
            lines.append(json.dumps(rec, separators=(",", ":")))
        return lines

    def dumps(self) -> str:
        return "\n".join(self._lines()) + "\n"

    def content_hash(self) -> str:
        return hashlib.sha256(self.dumps().encode()).hexdigest()


def lookup(cache: ResponseCache, prompt_id: str, opponent_id: str) -> ResponseSample:
    return cache.lookup(prompt_id, opponent_id)


def build_cache(prompts: Sequence[str], opponents: Sequence[AgentSpec], seed: int) -> ResponseCache:
    """Simulated responses: quality ~ Normal(skill, spread^2), words from the opponent's length spec.

    Each opponent draws from its own stream keyed by (seed, opponent id), so an
    entry does not depend on the order of the opponent list.
    """
    if not prompts or not opponents:
        raise InvalidArgumentError("need at least one prompt and one opponent")
    prompts = [str(p) for p in prompts]
    if len(set(prompts)) != len(prompts):
        raise DuplicateEntryError("duplicate prompt ids")
    ids = [o.id for o in opponents]
    if len(set(ids)) != len(ids):
        raise DuplicateEntryError("duplicate opponent ids")
    columns = {}
    for opp in opponents:
        rng = derived_rng(seed, "cache", opp.id)
        q = opp.skill + opp.spread * rng.standard_normal(len(prompts))
        w = opp.length.sample(rng, len(prompts))
        columns[opp.id] = (q.tolist(), w.tolist())
    entries = {}
    for i, p in enumerate(prompts):
        for opp in opponents:
            q, w = columns[opp.id]
            entries[(p, opp.id)] = ResponseSample(q[i], int(w[i]))
    return ResponseCache(entries, prompts, ids, seed)


def ingest_responses(records: Iterable[Mapping], prompts: Sequence[str] | None = None) -> ResponseCache:
    """Cache from externally generated responses ``{prompt_id, opponent_id, text, quality?, word_count?}``."""
    entries: dict[tuple[str, str], ResponseSample] = {}
    manifest: list[str] = list(prompts) if prompts is not None else []
    seen_prompts = set(manifest)
    opponent_ids: list[str] = []
    for rec in records:
        key = (str(rec["prompt_id"]), str(rec["opponent_id"]))
        if key in entries:
            raise DuplicateEntryError(f"duplicate entry for prompt={key[0]!r} opponent={key[1]!r}")
        text = rec.get("text")
        wc = rec.get("word_count")
        if wc is None:
            wc = word_count(text) if text is not None else 0
        entries[key] = ResponseSample(float(rec.get("quality", 0.0)), int(wc), text)
        if key[0] not in seen_prompts:
            if prompts is not None:
                raise InvalidArgumentError(f"response for unknown prompt {key[0]!r}")
            seen_prompts.add(key[0])
            manifest.append(key[0])
        if key[1] not in opponent_ids:
            opponent_ids.append(key[1])
    cache = ResponseCache(entries, manifest, opponent_ids, None)
    cache.check_complete()
    return cache


def persist(cache: ResponseCache, path) -> None:
    Path(path).write_text(cache.dumps())


def load(path) -> ResponseCache:
    raw = Path(path).read_text()
    if not raw:
        raise CorruptCacheError(f"{path}: empty file")
    if not raw.endswith("\n"):
        raise CorruptCacheError(f"{path}: truncated (no trailing newline)")
    lines = raw.split("\n")[:-1]
    try:
        header = json.loads(lines[0])
    except ValueError as exc:
        raise CorruptCacheError(f"{path}: unreadable header") from exc
    if not isinstance(header, dict) or header.get("format") != FORMAT:
        raise IncompatibleFormatError(f"{path}: not an {FORMAT} file")
    if header.get("version") != VERSION:
        raise IncompatibleFormatError(f"{path}: format version {header.get('version')!r}, expected {VERSION}")
    entries = {}
    for n, line in enumerate(lines[1:], start=2):
        try:
            rec = json.loads(line)
            key = (rec["prompt_id"], rec["opponent_id"])
            sample = ResponseSample(float(rec["quality"]), int(rec["word_count"]), rec.get("text"))
        except (ValueError, KeyError, TypeError) as exc:
            raise CorruptCacheError(f"{path}:{n}: bad record") from exc
        if key in entries:
            raise CorruptCacheError(f"{path}:{n}: duplicate entry {key}")
        entries[key] = sample
    if len(entries) != header.get("entries"):
        raise CorruptCacheError(f"{path}: header promises {header.get('entries')} entries, found {len(entries)}")
    return ResponseCache(entries, list(header["manifest"]), list(header["opponent_ids"]), header.get("seed"))


@dataclass(frozen=True)
class PromptRecord:
    prompt_id: str
    text: str | None = None


def read_prompts(path) -> list[PromptRecord]:
    out = []
    with open(path) as fh:
        for n, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                out.append(PromptRecord(str(rec["prompt_id"]), rec.get("text")))
            except (ValueError, KeyError) as exc:
                raise InvalidArgumentError(f"{path}:{n}: bad prompt record") from exc
    ids = [p.prompt_id for p in out]
    if len(set(ids)) != len(ids):
        raise DuplicateEntryError(f"{path}: duplicate prompt ids")
    return out


def read_responses(path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def simulated_prompt_ids(count: int) -> list[str]:
    width = max(4, len(str(count - 1)))
    return [f"p{i:0{width}d}" for i in range(count)]
