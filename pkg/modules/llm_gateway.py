"""
LLM Gateway
===========

Uniform access to chat-completion backends for every agent of the pipeline.

Components:
  - ChatRequest / BackendResponse: one call and its outcome
  - HttpChatBackend: OpenAI-compatible /chat/completions client with retries
  - MockBackend: deterministic scripted backend for offline runs and tests
  - ResponseCache: content-addressed on-disk cache, one JSON file per prompt
  - UsageLedger: thread-safe call/token/latency accounting per agent family
  - LLMGateway: backend + cache + ledger
  - AgentClient: per-document view used by the agents (ordinals, re-ask policy)

Functions:
  - parse_binary(text) -> bool
  - build_gateway(run_config, cache_dir) -> LLMGateway
"""

import hashlib
import json
import logging
import os
import re
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

import backoff
import requests

import config
from modules.errors import (
    AuthenticationError,
    BinaryParseError,
    MalformedResponseError,
    MockScriptError,
    TransportError,
)
from modules.prompts import AGENT_KINDS, BINARY_AGENTS, BINARY_REMINDER, get_template, render

logger = logging.getLogger(__name__)

AGENT_FAMILIES = ("segmentation", "edge", "memory", "translation")


def agent_family(agent_kind: str) -> str:
    """'memory.entities' -> 'memory'; other kinds are their own family."""
    return agent_kind.split(".", 1)[0]


# ============================================================================
# REQUEST / RESPONSE
# ============================================================================

@dataclass(frozen=True)
class ChatRequest:
    """
    One chat-completion call.

    `doc_id` and `ordinal` identify the call inside a run (sentence position,
    edge pair number or node index) and are what mock scripts match on.
    """

    agent_kind: str
    rendered_prompt: str
    max_output_tokens: int
    temperature: float
    model_name: str
    doc_id: str = ""
    ordinal: Optional[int] = None

    def __post_init__(self):
        if self.agent_kind not in AGENT_KINDS:
            raise ValueError(f"unknown agent kind {self.agent_kind!r}")
        if not self.rendered_prompt:
            raise ValueError("prompt must not be empty")
        if self.max_output_tokens != max_tokens_for(self.agent_kind):
            raise ValueError(
                f"{self.agent_kind} requests must use max_output_tokens={max_tokens_for(self.agent_kind)}"
            )
        if not 0.0 <= self.temperature <= 1.0:
            raise ValueError(f"temperature {self.temperature} outside [0, 1]")

    @classmethod
    def for_agent(
        cls,
        agent_kind: str,
        prompt: str,
        model_name: str,
        temperature: float = config.DEFAULT_TEMPERATURE,
        doc_id: str = "",
        ordinal: Optional[int] = None,
    ) -> "ChatRequest":
        return cls(
            agent_kind=agent_kind,
            rendered_prompt=prompt,
            max_output_tokens=max_tokens_for(agent_kind),
            temperature=temperature,
            model_name=model_name,
            doc_id=doc_id,
            ordinal=ordinal,
        )


def max_tokens_for(agent_kind: str) -> int:
    if agent_kind in BINARY_AGENTS:
        return config.BINARY_MAX_TOKENS
    return config.GENERATIVE_MAX_TOKENS


@dataclass(frozen=True)
class BackendResponse:
    text: str
    prompt_tokens: int = 0
    completion_tokens: int = 0
    latency: float = 0.0
    cached: bool = False

    def __post_init__(self):
        if self.prompt_tokens < 0 or self.completion_tokens < 0:
            raise ValueError("token counts must be non-negative")


_BINARY_PATTERN = re.compile(r"^[\W_]*(yes|true|no|false)(?![a-z])", re.IGNORECASE)


def parse_binary(text: str) -> bool:
    """
    Parse a yes/no agent answer.

    Leading punctuation and whitespace are ignored; the first word must be
    yes/true or no/false (any case).

    Raises:
        BinaryParseError: for anything else

    Example:
        >>> parse_binary("Yes")
        True
        >>> parse_binary("no.")
        False
    """
    match = _BINARY_PATTERN.match(text or "")
    if not match:
        raise BinaryParseError(f"expected yes/no, got {text!r}")
    return match.group(1).lower() in ("yes", "true")


# ============================================================================
# BACKENDS
# ============================================================================

class ChatBackend:
    """Interface shared by the HTTP and mock backends."""

    is_remote = True

    def complete(self, req: ChatRequest) -> BackendResponse:
        raise NotImplementedError


class _RetryableError(Exception):
    """Transport failure worth another attempt (connection, timeout, 429, 5xx)."""


class HttpChatBackend(ChatBackend):
    """Client for any server implementing the chat-completions schema."""

    def __init__(
        self,
        base_url: str = config.DEFAULT_BACKEND_URL,
        api_key_env: str = config.API_KEY_ENV,
        timeout_s: float = config.REQUEST_TIMEOUT_SECONDS,
        max_retries: int = config.MAX_RETRIES,
        backoff_factor: float = config.BACKOFF_FACTOR,
        session: Optional[requests.Session] = None,
    ):
        self.url = base_url.rstrip("/") + "/chat/completions"
        self.api_key = os.getenv(api_key_env, "")
        self.timeout_s = timeout_s
        self.session = session or requests.Session()
        self._post_with_retries = backoff.on_exception(
            backoff.expo,
            _RetryableError,
            max_tries=max_retries + 1,
            factor=backoff_factor,
            jitter=None,
            logger=logger,
        )(self._post_once)
        if not self.api_key:
            logger.warning(f"{api_key_env} is not set; requests will be sent without an API key")

    def _headers(self) -> Dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        return headers

    def _post_once(self, body: Dict) -> requests.Response:
        try:
            response = self.session.post(self.url, headers=self._headers(), json=body, timeout=self.timeout_s)
        except (requests.ConnectionError, requests.Timeout) as e:
            raise _RetryableError(str(e)) from e

        if response.status_code in (401, 403):
            raise AuthenticationError(f"backend rejected credentials (HTTP {response.status_code})")
        if response.status_code == 429 or response.status_code >= 500:
            raise _RetryableError(f"HTTP {response.status_code}")
        if response.status_code >= 400:
            raise TransportError(f"HTTP {response.status_code}: {response.text[:200]}")
        return response

    def complete(self, req: ChatRequest) -> BackendResponse:
        body = {
            "model": req.model_name,
            "messages": [{"role": "user", "content": req.rendered_prompt}],
            "temperature": req.temperature,
            "max_tokens": req.max_output_tokens,
        }

        start = time.perf_counter()
        try:
            response = self._post_with_retries(body)
        except _RetryableError as e:
            raise TransportError(f"{self.url} unreachable after retries: {e}") from e
        latency = time.perf_counter() - start

        try:
            payload = response.json()
            text = payload["choices"][0]["message"]["content"]
            usage = payload.get("usage") or {}
        except (ValueError, KeyError, IndexError, TypeError, AttributeError) as e:
            raise MalformedResponseError(f"not a chat completion payload: {e}") from e
        if not isinstance(text, str):
            raise MalformedResponseError("message content is not a string")

        return BackendResponse(
            text=text,
            prompt_tokens=int(usage.get("prompt_tokens") or 0),
            completion_tokens=int(usage.get("completion_tokens") or 0),
            latency=latency,
        )


class MockBackend(ChatBackend):
    """
    Scripted backend.

    Each script entry is {"match": {...}, "response": "..."}. A match is either
    {"prompt_sha256": hex}, {"prompt": exact text}, or any combination of
    "agent", "ordinal" and "doc_id"; omitted fields match anything. Entries are
    tried in order and the first match wins. Every request is logged.
    """

    is_remote = False

    def __init__(self, entries: List[Dict]):
        for position, entry in enumerate(entries):
            if not isinstance(entry, dict) or not isinstance(entry.get("match"), dict):
                raise MockScriptError(f"entry {position} has no 'match' object")
            if not isinstance(entry.get("response"), str):
                raise MockScriptError(f"entry {position} has no string 'response'")
        self.entries = entries
        self._lock = threading.Lock()
        self._calls: List[ChatRequest] = []

    @classmethod
    def from_file(cls, path) -> "MockBackend":
        try:
            with open(path, "r", encoding="utf-8") as f:
                entries = json.load(f)
        except (OSError, ValueError) as e:
            raise MockScriptError(f"cannot read mock script {path}: {e}") from e
        if not isinstance(entries, list):
            raise MockScriptError(f"mock script {path} must be a JSON array")
        logger.info(f"Loaded mock script with {len(entries)} entries from {path}")
        return cls(entries)

    @staticmethod
    def _matches(match: Dict, req: ChatRequest) -> bool:
        if "prompt_sha256" in match:
            return match["prompt_sha256"] == prompt_sha256(req.rendered_prompt)
        if "prompt" in match:
            return match["prompt"] == req.rendered_prompt
        if "agent" in match and match["agent"] != req.agent_kind:
            return False
        if "ordinal" in match and match["ordinal"] != req.ordinal:
            return False
        if "doc_id" in match and match["doc_id"] != req.doc_id:
            return False
        return True

    def complete(self, req: ChatRequest) -> BackendResponse:
        with self._lock:
            self._calls.append(req)

        for entry in self.entries:
            if self._matches(entry["match"], req):
                text = entry["response"]
                return BackendResponse(
                    text=text,
                    prompt_tokens=len(req.rendered_prompt.split()),
                    completion_tokens=len(text.split()),
                    latency=0.0,
                )
        raise MockScriptError(
            f"no script entry for agent={req.agent_kind} ordinal={req.ordinal} doc_id={req.doc_id!r}"
        )

    @property
    def call_log(self) -> List[ChatRequest]:
        with self._lock:
            return list(self._calls)

    def count_calls(self, family: Optional[str] = None) -> int:
        """Number of logged requests, optionally for one agent family."""
        return sum(1 for r in self.call_log if family is None or agent_family(r.agent_kind) == family)


def prompt_sha256(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


# ============================================================================
# CACHE
# ============================================================================

class ResponseCache:
    """Content-addressed response cache stored as <dir>/<sha256>.json."""

    def __init__(self, cache_dir):
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._key_locks: Dict[str, threading.Lock] = {}

    @staticmethod
    def key(req: ChatRequest) -> str:
        material = json.dumps(
            [req.agent_kind, req.model_name, req.temperature, req.rendered_prompt],
            ensure_ascii=False,
        )
        return hashlib.sha256(material.encode("utf-8")).hexdigest()

    def _path(self, key: str) -> Path:
        return self.cache_dir / f"{key}.json"

    def key_lock(self, req: ChatRequest) -> threading.Lock:
        """Lock held while one request with this key is in flight."""
        key = self.key(req)
        with self._lock:
            return self._key_locks.setdefault(key, threading.Lock())

    def get(self, req: ChatRequest) -> Optional[str]:
        path = self._path(self.key(req))
        if not path.exists():
            return None
        try:
            with open(path, "r", encoding="utf-8") as f:
                return json.load(f)["response"]
        except (OSError, ValueError, KeyError) as e:
            logger.warning(f"Ignoring unreadable cache entry {path.name}: {e}")
            return None

    def put(self, req: ChatRequest, text: str) -> None:
        key = self.key(req)
        record = {
            "agent_kind": req.agent_kind,
            "model_name": req.model_name,
            "temperature": req.temperature,
            "prompt": req.rendered_prompt,
            "response": text,
        }
        path = self._path(key)
        with self._lock:
            tmp = path.with_suffix(".tmp")
            with open(tmp, "w", encoding="utf-8") as f:
                json.dump(record, f, ensure_ascii=False, indent=2)
            os.replace(tmp, path)


# ============================================================================
# ACCOUNTING
# ============================================================================

_COUNTERS = ("calls", "network_calls", "cached_calls", "prompt_tokens", "completion_tokens", "latency_s")


class UsageLedger:
    """Additive per-agent-family usage counters; safe for concurrent recording."""

    def __init__(self):
        self._lock = threading.Lock()
        self._families = {family: dict.fromkeys(_COUNTERS, 0) for family in AGENT_FAMILIES}
        for counters in self._families.values():
            counters["latency_s"] = 0.0

    def record(self, agent_kind: str, response: BackendResponse) -> None:
        with self._lock:
            counters = self._families[agent_family(agent_kind)]
            counters["calls"] += 1
            if response.cached:
                counters["cached_calls"] += 1
            else:
                counters["network_calls"] += 1
            counters["prompt_tokens"] += response.prompt_tokens
            counters["completion_tokens"] += response.completion_tokens
            counters["latency_s"] += response.latency

    def add(self, other: "UsageLedger") -> None:
        snapshot = other.by_family()
        with self._lock:
            for family, counters in snapshot.items():
                for name in _COUNTERS:
                    self._families[family][name] += counters[name]

    def by_family(self) -> Dict[str, Dict]:
        with self._lock:
            return {family: dict(counters) for family, counters in self._families.items()}

    def totals(self) -> Dict:
        totals = {name: 0 for name in _COUNTERS}
        totals["latency_s"] = 0.0
        for counters in self.by_family().values():
            for name in _COUNTERS:
                totals[name] += counters[name]
        return totals

    def calls(self, family: Optional[str] = None) -> int:
        if family is None:
            return self.totals()["calls"]
        return self.by_family()[family]["calls"]

    def to_dict(self, prompt_per_1k: float = 0.0, completion_per_1k: float = 0.0, source_words: int = 0) -> Dict:
        """
        Accounting record with an estimated cost.

        Args:
            prompt_per_1k: Price per 1,000 prompt tokens
            completion_per_1k: Price per 1,000 completion tokens
            source_words: Source words covered, for the cost per 1,000 words
        """
        totals = self.totals()
        cost = (totals["prompt_tokens"] * prompt_per_1k + totals["completion_tokens"] * completion_per_1k) / 1000
        record = {"by_agent": self.by_family(), "totals": totals, "estimated_cost": round(cost, 6)}
        if source_words:
            record["source_words"] = source_words
            record["cost_per_1k_words"] = round(cost * 1000 / source_words, 6)
        return record


# ============================================================================
# GATEWAY
# ============================================================================

class LLMGateway:
    """Backend, optional cache and a run-wide usage ledger."""

    def __init__(
        self,
        backend: ChatBackend,
        model_name: str = config.DEFAULT_MODEL_NAME,
        temperature: float = config.DEFAULT_TEMPERATURE,
        cache: Optional[ResponseCache] = None,
    ):
        self.backend = backend
        self.model_name = model_name
        self.temperature = temperature
        self.cache = cache
        self.ledger = UsageLedger()

    def complete(self, req: ChatRequest, ledger: Optional[UsageLedger] = None) -> BackendResponse:
        """
        Serve a request from the cache or the backend and record its usage.

        Raises:
            TransportError, MalformedResponseError, AuthenticationError, MockScriptError
        """
        if self.cache is None:
            response = self.backend.complete(req)
        else:
            # identical requests wait for the first one and read its entry
            with self.cache.key_lock(req):
                text = self.cache.get(req)
                if text is not None:
                    response = BackendResponse(text=text, cached=True)
                    logger.debug(f"Cache hit for {req.agent_kind} #{req.ordinal} of {req.doc_id}")
                else:
                    response = self.backend.complete(req)
                    self.cache.put(req, response.text)

        self.ledger.record(req.agent_kind, response)
        if ledger is not None:
            ledger.record(req.agent_kind, response)
        return response

    def client(self, doc_id: str, source_lang: str, target_lang: str) -> "AgentClient":
        return AgentClient(self, doc_id, source_lang, target_lang)


class AgentClient:
    """
    Per-document handle the agents talk through.

    Stamps requests with the document id, renders prompts for the run's
    language pair, keeps the document's own ledger and applies the re-ask
    policy for yes/no answers.
    """

    def __init__(self, gateway: LLMGateway, doc_id: str, source_lang: str, target_lang: str):
        self.gateway = gateway
        self.doc_id = doc_id
        self.source_lang = source_lang
        self.target_lang = target_lang
        self.ledger = UsageLedger()

    def render(self, agent_kind: str, slots: Dict) -> str:
        return render(get_template(agent_kind, self.source_lang, self.target_lang), slots)

    def ask(self, agent_kind: str, prompt: str, ordinal: Optional[int] = None) -> str:
        req = ChatRequest.for_agent(
            agent_kind,
            prompt,
            model_name=self.gateway.model_name,
            temperature=self.gateway.temperature,
            doc_id=self.doc_id,
            ordinal=ordinal,
        )
        return self.gateway.complete(req, ledger=self.ledger).text

    def ask_binary(self, agent_kind: str, prompt: str, ordinal: Optional[int] = None) -> bool:
        """
        Ask a yes/no question; one re-ask with a reminder line if the answer is unparseable.

        Raises:
            BinaryParseError: if the re-ask is unparseable too
        """
        answer = self.ask(agent_kind, prompt, ordinal)
        try:
            return parse_binary(answer)
        except BinaryParseError:
            logger.warning(f"[{self.doc_id}] {agent_kind} #{ordinal}: unparseable answer {answer!r}, asking again")
        return parse_binary(self.ask(agent_kind, f"{prompt}\n{BINARY_REMINDER}", ordinal))


def build_gateway(run_config, cache_dir=None) -> LLMGateway:
    """
    Create the gateway described by a RunConfig.

    Args:
        run_config: validated modules.run_config.RunConfig
        cache_dir: where to keep cached responses; caching is off when None or disabled in config
    """
    settings = run_config.backend
    if settings.kind == "mock":
        backend = MockBackend.from_file(settings.mock_script)
    else:
        backend = HttpChatBackend(
            base_url=settings.base_url,
            api_key_env=settings.api_key_env,
            timeout_s=settings.timeout_s,
            max_retries=settings.max_retries,
            backoff_factor=settings.backoff_factor,
        )

    cache = ResponseCache(cache_dir) if (cache_dir is not None and run_config.cache.enabled) else None
    return LLMGateway(
        backend,
        model_name=settings.model_name,
        temperature=run_config.decoding.temperature,
        cache=cache,
    )


__all__ = [
    "AGENT_FAMILIES",
    "agent_family",
    "ChatRequest",
    "BackendResponse",
    "max_tokens_for",
    "parse_binary",
    "ChatBackend",
    "HttpChatBackend",
    "MockBackend",
    "prompt_sha256",
    "ResponseCache",
    "UsageLedger",
    "LLMGateway",
    "AgentClient",
    "build_gateway",
]
