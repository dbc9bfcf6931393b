"""Text-generation backends: live chat-completions client, scripted mock, record/replay."""
from __future__ import annotations

import enum
import hashlib
import json
import logging
import os
import random
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

import httpx

from .errors import BackendUnavailable, ConfigError, RateLimited, ScriptMiss, StoreCorrupt
from .prompts import BFI_TEMPLATE, INTERACTIVE_MARKER, WRITING_PROMPT

logger = logging.getLogger(__name__)

API_KEY_ENV = "PERSONA_LAB_API_KEY"
DEFAULT_MODEL = "gpt-3.5-turbo-0613"
DEFAULT_BASE_URL = "https://api.openai.com/v1"
STORE_SCHEMA_KEYS = ("fingerprint", "request", "text", "timestamp")


class Role(str, enum.Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"


@dataclass(frozen=True)
class ChatMessage:
    role: Role
    content: str

    def __post_init__(self):
        object.__setattr__(self, "role", Role(self.role))
        if self.role in (Role.SYSTEM, Role.USER) and not self.content:
            raise ValueError(f"{self.role.value} message must have content")

    def to_dict(self) -> dict:
        return {"role": self.role.value, "content": self.content}


@dataclass(frozen=True)
class GenerationRequest:
    """One chat-completion call.

    ``agent_id`` and ``sequence`` never reach the provider; they only enter
    the fingerprint so that repeated identical prompts from one agent, or the
    same prompt from two agents, get distinct replay entries.
    """

    messages: tuple
    temperature: float = 0.7
    model_id: str = DEFAULT_MODEL
    max_tokens: int | None = None
    agent_id: str | None = None
    sequence: int = 0

    def __post_init__(self):
        object.__setattr__(self, "messages", tuple(self.messages))
        if not self.messages:
            raise ValueError("request needs at least one message")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature {self.temperature} outside [0, 2]")
        if self.max_tokens is not None and self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive or None")

    @property
    def system_prompt(self) -> str | None:
        first = self.messages[0]
        return first.content if first.role is Role.SYSTEM else None

    @property
    def last_user_content(self) -> str:
        for msg in reversed(self.messages):
            if msg.role is Role.USER:
                return msg.content
        return ""

    def to_dict(self) -> dict:
        return {
            "messages": [m.to_dict() for m in self.messages],
            "temperature": self.temperature,
            "model_id": self.model_id,
            "max_tokens": self.max_tokens,
            "agent_id": self.agent_id,
            "sequence": self.sequence,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GenerationRequest":
        return cls(
            messages=tuple(ChatMessage(m["role"], m["content"]) for m in d["messages"]),
            temperature=d["temperature"],
            model_id=d["model_id"],
            max_tokens=d.get("max_tokens"),
            agent_id=d.get("agent_id"),
            sequence=d.get("sequence", 0),
        )

    def fingerprint(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class GenerationResult:
    text: str
    backend_id: str
    latency_ms: int
    raw_fingerprint: str


class Backend:
    """Base class. Subclasses implement ``_complete``."""

    backend_id = "abstract"

    def generate(self, request: GenerationRequest) -> GenerationResult:
        start = time.perf_counter()
        text = self._complete(request)
        latency = int(round((time.perf_counter() - start) * 1000))
        return GenerationResult(
            text=text.rstrip(),
            backend_id=self.backend_id,
            latency_ms=max(latency, 0),
            raw_fingerprint=request.fingerprint(),
        )

    def _complete(self, request: GenerationRequest) -> str:
        raise NotImplementedError

    def close(self) -> None:
        pass


# ---------------------------------------------------------------- live client


class TokenBucket:
    """Blocking token bucket; ``rate_per_minute`` admissions on average, burst ``capacity``."""

    def __init__(self, rate_per_minute: float = 20.0, capacity: float = 1.0,
                 clock=time.monotonic, sleep=time.sleep):
        if rate_per_minute <= 0:
            raise ConfigError("rate_per_minute must be positive")
        self.rate = rate_per_minute / 60.0
        self.capacity = float(capacity)
        self._tokens = float(capacity)
        self._clock = clock
        self._sleep = sleep
        self._last = clock()
        self._lock = threading.Lock()

    def acquire(self) -> float:
        """Take one token, sleeping as needed. Returns seconds waited."""
        waited = 0.0
        with self._lock:
            while True:
                now = self._clock()
                self._tokens = min(self.capacity, self._tokens + (now - self._last) * self.rate)
                self._last = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return waited
                delay = (1.0 - self._tokens) / self.rate
                self._sleep(delay)
                waited += delay


class LiveBackend(Backend):
    """OpenAI-compatible ``/chat/completions`` client with retry and rate limiting."""

    backend_id = "live"

    def __init__(
        self,
        base_url: str = DEFAULT_BASE_URL,
        api_key: str | None = None,
        timeout: float = 60.0,
        max_retries: int = 5,
        backoff_base: float = 1.0,
        backoff_cap: float = 30.0,
        requests_per_minute: float = 20.0,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
        rng_seed: int | None = None,
    ):
        api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        if not api_key:
            raise BackendUnavailable(
                f"no API key: export {API_KEY_ENV}=<key> before using the live backend"
            )
        self.base_url = base_url.rstrip("/")
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self.backoff_cap = backoff_cap
        self._sleep = sleep
        self._jitter = random.Random(rng_seed)
        self._bucket = TokenBucket(requests_per_minute, sleep=sleep)
        self._client = httpx.Client(
            base_url=self.base_url,
            timeout=timeout,
            transport=transport,
            headers={"Authorization": f"Bearer {api_key}"},
        )

    def close(self) -> None:
        self._client.close()

    @staticmethod
    def payload(request: GenerationRequest) -> dict:
        body = {
            "model": request.model_id,
            "messages": [m.to_dict() for m in request.messages],
            "temperature": request.temperature,
        }
        if request.max_tokens is not None:
            body["max_tokens"] = request.max_tokens
        return body

    def _backoff(self, attempt: int, retry_after: float | None = None) -> float:
        if retry_after is not None:
            return min(retry_after, self.backoff_cap)
        delay = min(self.backoff_cap, self.backoff_base * 2 ** attempt)
        return delay * (0.5 + 0.5 * self._jitter.random())

    def _post_once(self, body: dict) -> str:
        try:
            resp = self._client.post("/chat/completions", json=body)
        except httpx.TransportError as exc:
            raise ConnectionError(str(exc)) from exc
        if resp.status_code == 429:
            err = RateLimited("provider returned 429")
            err.retry_after = _retry_after(resp)
            raise err
        if resp.status_code >= 500:
            raise ConnectionError(f"server error {resp.status_code}")
        if resp.status_code in (401, 403):
            raise BackendUnavailable(f"authentication rejected ({resp.status_code}); check {API_KEY_ENV}")
        if resp.status_code >= 400:
            raise BackendUnavailable(f"request rejected ({resp.status_code}): {resp.text[:200]}")
        try:
            return resp.json()["choices"][0]["message"]["content"] or ""
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ConnectionError(f"malformed completion payload: {exc}") from exc

    def _complete(self, request: GenerationRequest) -> str:
        body = self.payload(request)
        last_error = None
        for attempt in range(self.max_retries + 1):
            self._bucket.acquire()
            try:
                return self._post_once(body)
            except RateLimited as exc:
                last_error = exc
                delay = self._backoff(attempt, exc.retry_after)
            except ConnectionError as exc:
                last_error = exc
                delay = self._backoff(attempt)
            if attempt < self.max_retries:
                logger.warning("generate attempt %d failed (%s); retrying in %.1fs", attempt + 1, last_error, delay)
                self._sleep(delay)
        raise BackendUnavailable(f"gave up after {self.max_retries + 1} attempts: {last_error}")


def _retry_after(resp: httpx.Response) -> float | None:
    value = resp.headers.get("retry-after")
    try:
        return float(value) if value is not None else None
    except ValueError:
        return None


# ---------------------------------------------------------------- scripted mock


def classify_task(request: GenerationRequest) -> str:
    """Name the task a request carries: ``bfi``, ``write``, ``write_interactive`` or ``other``."""
    content = request.last_user_content
    if content.startswith(BFI_TEMPLATE.split("{", 1)[0]):
        return "bfi"
    if content.startswith(WRITING_PROMPT):
        return "write_interactive" if INTERACTIVE_MARKER in content else "write"
    return "other"


class ScriptedMockBackend(Backend):
    """Deterministic mock keyed on ``(profile_id, task)``.

    A script value may be a string (always returned), a list of strings
    (consumed in order per key, the last one then repeats) or a callable
    ``f(request) -> str``. Profiles are recognised by their system prompt.
    Unknown keys raise :class:`ScriptMiss`.
    """

    backend_id = "mock"

    def __init__(self, script: dict, profiles=None):
        from .persona import builtin_profiles

        self.script = dict(script)
        self._prompt_to_profile = {p.system_prompt: p.id for p in (profiles or builtin_profiles())}
        self._cursor: dict = {}
        self._lock = threading.Lock()
        self.calls: list[GenerationRequest] = []

    def key_for(self, request: GenerationRequest) -> tuple:
        profile_id = self._prompt_to_profile.get(request.system_prompt or "")
        return profile_id, classify_task(request)

    def _complete(self, request: GenerationRequest) -> str:
        key = self.key_for(request)
        with self._lock:
            self.calls.append(request)
            entry = self.script.get(key, self.script.get((None, key[1]), self.script.get("*")))
            if entry is None:
                raise ScriptMiss(f"no script entry for profile={key[0]!r}, task={key[1]!r}")
            if isinstance(entry, (list, tuple)):
                i = self._cursor.get(key, 0)
                self._cursor[key] = i + 1
                entry = entry[min(i, len(entry) - 1)]
        return entry(request) if callable(entry) else entry


# ---------------------------------------------------------------- record / replay


class RecordingBackend(Backend):
    """Wraps another backend and appends every completion to a JSONL store."""

    backend_id = "record"

    def __init__(self, inner: Backend, path):
        self.inner = inner
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self.entries = 0

    def _complete(self, request: GenerationRequest) -> str:
        text = self.inner.generate(request).text
        line = json.dumps(
            {
                "fingerprint": request.fingerprint(),
                "request": request.to_dict(),
                "text": text,
                "timestamp": datetime.now(timezone.utc).isoformat(),
            },
            ensure_ascii=False,
            sort_keys=True,
        )
        with self._lock, self.path.open("a", encoding="utf-8") as fh:
            fh.write(line + "\n")
            self.entries += 1
        return text

    def close(self) -> None:
        self.inner.close()


def load_store(path) -> dict[str, str]:
    """Read a replay store into ``fingerprint -> text``; first entry wins."""
    store: dict[str, str] = {}
    with Path(path).open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise StoreCorrupt(f"{path}:{line_no}: not JSON ({exc})") from None
            if not isinstance(rec, dict) or any(k not in rec for k in STORE_SCHEMA_KEYS):
                raise StoreCorrupt(f"{path}:{line_no}: missing one of {STORE_SCHEMA_KEYS}")
            try:
                expected = GenerationRequest.from_dict(rec["request"]).fingerprint()
            except (KeyError, TypeError, ValueError) as exc:
                raise StoreCorrupt(f"{path}:{line_no}: bad request record ({exc})") from None
            if expected != rec["fingerprint"]:
                raise StoreCorrupt(f"{path}:{line_no}: fingerprint does not match stored request")
            store.setdefault(rec["fingerprint"], rec["text"])
    return store


class ReplayBackend(Backend):
    backend_id = "replay"

    def __init__(self, path):
        self.path = Path(path)
        self.store = load_store(self.path)
        self.hits = 0

    def _complete(self, request: GenerationRequest) -> str:
        try:
            text = self.store[request.fingerprint()]
        except KeyError:
            raise ScriptMiss(f"replay store {self.path} has no entry for this request") from None
        self.hits += 1
        return text


def record_session(path, inner: Backend | None = None) -> RecordingBackend:
    return RecordingBackend(inner if inner is not None else LiveBackend(), path)


def replay_session(path) -> ReplayBackend:
    return ReplayBackend(path)
