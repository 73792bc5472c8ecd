"""HTTP client for a remote LLM judge.

Wire format (JSON over POST)::

    /v1/compare  {"prompt", "response_a", "response_b"} -> {"winner": "a" | "b" | "tie"}
    /v1/score    {"prompt", "response"}                 -> {"score": number in [1, 5]}

``ELO_ARENA_JUDGE_URL`` overrides the configured base URL.
"""

from __future__ import annotations

import json
import logging
import math
import os
import socket
import time
import urllib.error
import urllib.request
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Hashable, Sequence

from .errors import InvalidArgumentError, JudgeUnavailableError, ProtocolError

log = logging.getLogger(__name__)

URL_ENV = "ELO_ARENA_JUDGE_URL"
WINNERS = ("a", "b", "tie")


@dataclass(frozen=True)
class GatewayConfig:
    base_url: str = "http://127.0.0.1:8000"
    timeout: float = 30_000  # milliseconds
    max_retries: int = 3
    max_in_flight: int = 4
    prompt_template_compare: str = "{prompt}"
    prompt_template_score: str = "{prompt}"
    bearer_token: str | None = None
    backoff_base: float = 250.0  # milliseconds
    backoff_factor: float = 2.0

    def __post_init__(self):
        if not self.timeout > 0:
            raise InvalidArgumentError("timeout must be positive")
        if self.max_retries < 0:
            raise InvalidArgumentError("max_retries must be >= 0")
        if self.max_in_flight < 1:
            raise InvalidArgumentError("max_in_flight must be >= 1")

    @property
    def url(self) -> str:
        return os.environ.get(URL_ENV) or self.base_url


class _Transient(Exception):
    pass


def _post(cfg: GatewayConfig, path: str, body: dict, request_id: str) -> dict:
    headers = {"Content-Type": "application/json", "X-Request-Id": request_id}
    if cfg.bearer_token:
        headers["Authorization"] = f"Bearer {cfg.bearer_token}"
    req = urllib.request.Request(
        cfg.url.rstrip("/") + path,
        data=json.dumps(body).encode(),
        headers=headers,
        method="POST",
    )
    try:
        with urllib.request.urlopen(req, timeout=cfg.timeout / 1000.0) as resp:
            raw = resp.read()
    except urllib.error.HTTPError as exc:
        if exc.code >= 500 or exc.code == 429:
            raise _Transient(f"HTTP {exc.code}") from exc
        raise ProtocolError(f"HTTP {exc.code} from judge") from exc
    except (urllib.error.URLError, ConnectionError, socket.timeout, TimeoutError) as exc:
        raise _Transient(str(exc)) from exc
    try:
        reply = json.loads(raw)
    except ValueError as exc:
        raise ProtocolError(f"reply is not JSON: {raw[:80]!r}") from exc
    if not isinstance(reply, dict):
        raise ProtocolError("reply is not a JSON object")
    return reply


def _call(cfg: GatewayConfig, path: str, body: dict, request_id: str | None = None) -> dict:
    request_id = request_id or uuid.uuid4().hex
    delay = cfg.backoff_base
    for attempt in range(cfg.max_retries + 1):
        try:
            return _post(cfg, path, body, request_id)
        except _Transient as exc:
            if attempt == cfg.max_retries:
                raise JudgeUnavailableError(
                    f"judge unreachable after {attempt + 1} attempts: {exc}"
                ) from exc
            log.warning("judge request %s failed (%s); retry in %.0f ms", request_id, exc, delay)
            time.sleep(delay / 1000.0)
            delay *= cfg.backoff_factor
    raise AssertionError("unreachable")


def _require_text(**fields):
    for name, value in fields.items():
        if not isinstance(value, str) or not value:
            raise InvalidArgumentError(f"{name} must be a non-empty string")


def remote_compare(cfg: GatewayConfig, prompt: str, response_a: str, response_b: str,
                   request_id: str | None = None) -> str:
    """Ask the judge which response is better; returns "a", "b" or "tie"."""
    _require_text(prompt=prompt, response_a=response_a, response_b=response_b)
    body = {
        "prompt": cfg.prompt_template_compare.format(prompt=prompt),
        "response_a": response_a,
        "response_b": response_b,
    }
    winner = _call(cfg, "/v1/compare", body, request_id).get("winner")
    if winner not in WINNERS:
        raise ProtocolError(f"winner must be one of {WINNERS}, got {winner!r}")
    return winner


def remote_score(cfg: GatewayConfig, prompt: str, response: str,
                 request_id: str | None = None) -> float:
    _require_text(prompt=prompt, response=response)
    body = {"prompt": cfg.prompt_template_score.format(prompt=prompt), "response": response}
    score = _call(cfg, "/v1/score", body, request_id).get("score")
    if isinstance(score, bool) or not isinstance(score, (int, float)):
        raise ProtocolError(f"score must be a number, got {score!r}")
    score = float(score)
    if not (math.isfinite(score) and 1.0 <= score <= 5.0):
        raise ProtocolError(f"score {score} outside the 1-5 scale")
    return score


@dataclass(frozen=True)
class CompareJob:
    key: Hashable
    prompt: str
    response_a: str
    response_b: str


def compare_many(cfg: GatewayConfig, jobs: Sequence[CompareJob]) -> dict[Hashable, tuple[str, str]]:
    """Run comparisons with at most ``max_in_flight`` outstanding requests.

    Returns key -> (winner, request_id). Each job gets exactly one request id,
    reused across its retries. The first failure is re-raised once all
    in-flight work has settled, with the completed results attached as
    ``exc.partial``.
    """
    keys = [j.key for j in jobs]
    if len(set(keys)) != len(keys):
        raise InvalidArgumentError("job keys must be unique")
    ids = {j.key: uuid.uuid4().hex for j in jobs}

    def run(job):
        return job.key, remote_compare(cfg, job.prompt, job.response_a, job.response_b, ids[job.key])

    results = {}
    with ThreadPoolExecutor(max_workers=cfg.max_in_flight) as pool:
        futures = [pool.submit(run, j) for j in jobs]
        first_error = None
        for fut in futures:
            try:
                key, winner = fut.result()
            except Exception as exc:  # noqa: BLE001 - re-raised below
                if first_error is None:
                    first_error = exc
                    first_error.failed_key = keys[futures.index(fut)]
                continue
            results[key] = (winner, ids[key])
    if first_error is not None:
        first_error.partial = results
        raise first_error
    return results
