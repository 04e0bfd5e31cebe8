"""
Prediction collection over HTTP.

Talks one wire dialect: an OpenAI-compatible chat-completion POST with
base64 data-URL image parts. Responses are stored raw and byte-exact, one
JSON record per line; parsing and repair happen at scoring time so protocol
fixes never require re-querying an endpoint.

The collection loop runs a bounded number of requests in flight, respects a
token-bucket requests-per-minute budget, retries transient failures with
exponential backoff, and is resumable: sample ids already present in the
output sink are skipped on restart.
"""

from __future__ import annotations

import base64
import json
import logging
import mimetypes
import os
import random
import threading
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional

import requests

from .graphops import ConfigurationError
from .predictions import PROTOCOL_GRAPH, PROTOCOLS

logger = logging.getLogger(__name__)

DEFAULT_API_KEY_ENV = "OCSRBENCH_API_KEY"

_RETRY_STATUSES = {429, 500, 502, 503, 504}


class GatewayStartupError(RuntimeError):
    """Collection cannot start (e.g. the auth variable is unset)."""


@dataclass(frozen=True)
class EndpointConfig:
    """How to reach one model endpoint."""

    base_url: str
    model_name: str
    api_key_env: str = DEFAULT_API_KEY_ENV  # empty string = no auth header
    timeout_s: float = 120.0
    max_concurrency: int = 4
    max_retries: int = 3
    requests_per_minute: Optional[int] = None
    temperature: float = 0.0
    max_tokens: int = 8192
    backoff_base_s: float = 2.0

    def __post_init__(self):
        if self.max_concurrency < 1:
            raise ConfigurationError("max_concurrency must be >= 1")
        if self.timeout_s <= 0:
            raise ConfigurationError("timeout_s must be positive")
        if self.max_retries < 0:
            raise ConfigurationError("max_retries must be >= 0")

    @property
    def completions_url(self) -> str:
        url = self.base_url.rstrip("/")
        if url.endswith("/chat/completions"):
            return url
        return f"{url}/chat/completions"

    def run_metadata(self) -> dict:
        return {
            "model": self.model_name,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "timeout_s": self.timeout_s,
            "max_retries": self.max_retries,
        }


@dataclass(frozen=True)
class PromptBundle:
    """Template text plus ordered images for one request.

    The graph protocol sends exactly three images, in order: the bond
    exemplar, the normalization-case exemplar, then the target; other
    protocols send the target alone.
    """

    protocol: str
    text: str
    images: tuple[Path, ...]

    def __post_init__(self):
        expected = 3 if self.protocol == PROTOCOL_GRAPH else 1
        if len(self.images) != expected:
            raise ConfigurationError(
                f"{self.protocol} bundle needs {expected} image(s), got {len(self.images)}"
            )


def prompt_template(protocol: str) -> str:
    """The shipped template text for a protocol, verbatim."""
    if protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}")
    return (
        resources.files("ocsrbench").joinpath(f"prompts/{protocol}.txt").read_text("utf-8")
    )


def default_exemplar(name: str) -> Path:
    """Path of a bundled exemplar asset ('bond' or 'case')."""
    with resources.as_file(
        resources.files("ocsrbench").joinpath(f"assets/{name}_exemplar.png")
    ) as path:
        return Path(path)


def build_prompt(
    protocol: str,
    image: Path,
    bond_exemplar: Optional[Path] = None,
    case_exemplar: Optional[Path] = None,
) -> PromptBundle:
    """Assemble the request bundle for one sample."""
    text = prompt_template(protocol)
    if protocol == PROTOCOL_GRAPH:
        if bond_exemplar is None or case_exemplar is None:
            raise ConfigurationError(
                "graph protocol needs bond and case exemplar images"
            )
        images: tuple[Path, ...] = (Path(bond_exemplar), Path(case_exemplar), Path(image))
    else:
        images = (Path(image),)
    return PromptBundle(protocol=protocol, text=text, images=images)


# ---------------------------------------------------------------------------
# HTTP
# ---------------------------------------------------------------------------


@dataclass
class RequestResult:
    ok: bool
    text: Optional[str]
    status: Optional[int]
    attempts: int
    latency_s: float
    error: Optional[str] = None

    def meta(self) -> dict:
        return {
            "ok": self.ok,
            "status": self.status,
            "attempts": self.attempts,
            "latency_s": round(self.latency_s, 4),
            "error": self.error,
        }


def _data_url(path: Path) -> str:
    mime = mimetypes.guess_type(str(path))[0] or "image/png"
    payload = base64.b64encode(path.read_bytes()).decode("ascii")
    return f"data:{mime};base64,{payload}"


def _request_body(cfg: EndpointConfig, bundle: PromptBundle) -> dict:
    content: list[dict] = [{"type": "text", "text": bundle.text}]
    for image in bundle.images:
        content.append(
            {"type": "image_url", "image_url": {"url": _data_url(image)}}
        )
    return {
        "model": cfg.model_name,
        "temperature": cfg.temperature,
        "max_tokens": cfg.max_tokens,
        "messages": [{"role": "user", "content": content}],
    }


def _extract_content(payload: dict) -> str:
    message = payload["choices"][0]["message"]
    content = message.get("content")
    if isinstance(content, str):
        return content
    if isinstance(content, list):  # multi-part content
        return "".join(
            part.get("text", "") for part in content if isinstance(part, dict)
        )
    raise ValueError("response carries no message content")


def resolve_api_key(cfg: EndpointConfig) -> Optional[str]:
    if not cfg.api_key_env:
        return None
    key = os.environ.get(cfg.api_key_env)
    if not key:
        raise GatewayStartupError(
            f"auth environment variable {cfg.api_key_env} is not set"
        )
    return key


def request_prediction(
    cfg: EndpointConfig,
    bundle: PromptBundle,
    api_key: Optional[str] = None,
    session: Optional[requests.Session] = None,
) -> RequestResult:
    """Send one request with retries; failures are data, not exceptions."""
    if api_key is None and cfg.api_key_env:
        api_key = resolve_api_key(cfg)
    headers = {"Content-Type": "application/json"}
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    body = _request_body(cfg, bundle)
    http = session or requests

    started = time.monotonic()
    attempts = 0
    last_status: Optional[int] = None
    last_error: Optional[str] = None
    while attempts <= cfg.max_retries:
        attempts += 1
        try:
            response = http.post(
                cfg.completions_url, json=body, headers=headers, timeout=cfg.timeout_s
            )
            last_status = response.status_code
            if response.status_code == 200:
                try:
                    text = _extract_content(response.json())
                except (ValueError, KeyError, IndexError, TypeError) as exc:
                    return RequestResult(
                        ok=False,
                        text=None,
                        status=200,
                        attempts=attempts,
                        latency_s=time.monotonic() - started,
                        error=f"malformed completion payload: {exc}",
                    )
                return RequestResult(
                    ok=True,
                    text=text,
                    status=200,
                    attempts=attempts,
                    latency_s=time.monotonic() - started,
                )
            last_error = f"HTTP {response.status_code}"
            if response.status_code not in _RETRY_STATUSES:
                break
        except requests.RequestException as exc:
            last_error = f"{type(exc).__name__}: {exc}"
        if attempts <= cfg.max_retries:
            delay = cfg.backoff_base_s * (2 ** (attempts - 1))
            delay *= 1.0 + random.uniform(0.0, 0.25)
            time.sleep(delay)
    return RequestResult(
        ok=False,
        text=None,
        status=last_status,
        attempts=attempts,
        latency_s=time.monotonic() - started,
        error=last_error,
    )


# ---------------------------------------------------------------------------
# Collection loop
# ---------------------------------------------------------------------------


class _TokenBucket:
    """Blocking requests-per-minute limiter."""

    def __init__(self, per_minute: Optional[int]):
        self.rate = (per_minute / 60.0) if per_minute else None
        self.capacity = float(per_minute) if per_minute else 0.0
        self.tokens = self.capacity
        self.updated = time.monotonic()
        self.lock = threading.Lock()

    def acquire(self) -> None:
        if self.rate is None:
            return
        while True:
            with self.lock:
                now = time.monotonic()
                self.tokens = min(self.capacity, self.tokens + (now - self.updated) * self.rate)
                self.updated = now
                if self.tokens >= 1.0:
                    self.tokens -= 1.0
                    return
                wait = (1.0 - self.tokens) / self.rate
            time.sleep(wait)


@dataclass
class CollectionSummary:
    ok: int = 0
    failed: int = 0
    skipped: int = 0

    def to_json(self) -> dict:
        return {"ok": self.ok, "failed": self.failed, "skipped": self.skipped}


def _recorded_sample_ids(sink_path: Path) -> set[str]:
    if not sink_path.exists():
        return set()
    done: set[str] = set()
    with sink_path.open("r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            try:
                done.add(json.loads(line)["sample_id"])
            except (json.JSONDecodeError, KeyError):
                continue
    return done


def run_collection(
    cfg: EndpointConfig,
    samples: Iterable[tuple[str, Path]],
    protocol: str,
    sink_path: Path,
    bond_exemplar: Optional[Path] = None,
    case_exemplar: Optional[Path] = None,
) -> CollectionSummary:
    """Collect raw predictions for ``samples`` (pairs of id and image path).

    Every non-skipped sample yields exactly one appended record, success or
    failure; raw model text is stored untouched.
    """
    if protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}")
    api_key = resolve_api_key(cfg) if cfg.api_key_env else None

    sink_path = Path(sink_path)
    sink_path.parent.mkdir(parents=True, exist_ok=True)
    already_done = _recorded_sample_ids(sink_path)

    summary = CollectionSummary()
    limiter = _TokenBucket(cfg.requests_per_minute)
    write_lock = threading.Lock()
    run_meta = cfg.run_metadata()

    todo: list[tuple[str, Path]] = []
    for sample_id, image in samples:
        if sample_id in already_done:
            summary.skipped += 1
            continue
        todo.append((sample_id, Path(image)))

    def worker(sample_id: str, image: Path) -> tuple[str, RequestResult]:
        bundle = build_prompt(protocol, image, bond_exemplar, case_exemplar)
        limiter.acquire()
        return sample_id, request_prediction(cfg, bundle, api_key=api_key)

    with sink_path.open("a", encoding="utf-8") as sink:
        with ThreadPoolExecutor(max_workers=cfg.max_concurrency) as pool:
            futures = [pool.submit(worker, sid, image) for sid, image in todo]
            for future in as_completed(futures):
                sample_id, result = future.result()
                record = {
                    "sample_id": sample_id,
                    "raw": result.text,
                    "meta": {"protocol": protocol, **run_meta, **result.meta()},
                }
                with write_lock:
                    sink.write(json.dumps(record, ensure_ascii=False) + "\n")
                    sink.flush()
                if result.ok:
                    summary.ok += 1
                else:
                    summary.failed += 1
                    logger.warning(
                        "sample %s failed after %d attempt(s): %s",
                        sample_id,
                        result.attempts,
                        result.error,
                    )
    return summary
