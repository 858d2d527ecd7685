"""
LLM Gateway Tests
=================

HTTP behaviour is exercised against a fake requests session; nothing here
touches the network.

Run with: pytest test_llm_gateway.py
"""

import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor

import pytest
import requests

from modules.errors import (
    AuthenticationError,
    BinaryParseError,
    MalformedResponseError,
    MockScriptError,
    TransportError,
)
from modules.llm_gateway import (
    BackendResponse,
    ChatBackend,
    ChatRequest,
    HttpChatBackend,
    LLMGateway,
    MockBackend,
    ResponseCache,
    UsageLedger,
    parse_binary,
    prompt_sha256,
)
from modules.prompts import BINARY_REMINDER


class FakeResponse:
    def __init__(self, status_code=200, payload=None, text=""):
        self.status_code = status_code
        self._payload = payload
        self.text = text

    def json(self):
        if self._payload is None:
            raise ValueError("no JSON body")
        return self._payload


class FakeSession:
    """Replays a list of responses (or exceptions) and records every post."""

    def __init__(self, outcomes):
        self.outcomes = list(outcomes)
        self.posts = []

    def post(self, url, headers=None, json=None, timeout=None):
        self.posts.append({"url": url, "headers": headers, "json": json, "timeout": timeout})
        outcome = self.outcomes.pop(0)
        if isinstance(outcome, Exception):
            raise outcome
        return outcome


def completion(text, prompt_tokens=7, completion_tokens=1):
    return FakeResponse(200, {
        "choices": [{"message": {"role": "assistant", "content": text}}],
        "usage": {"prompt_tokens": prompt_tokens, "completion_tokens": completion_tokens},
    })


def http_backend(session, max_retries=2):
    return HttpChatBackend(
        base_url="http://backend.test/v1/",
        api_key_env="GRAFT_TEST_KEY",
        timeout_s=5,
        max_retries=max_retries,
        backoff_factor=0,
        session=session,
    )


def request(kind="translation", prompt="Translate this.", ordinal=0, doc_id="d"):
    return ChatRequest.for_agent(kind, prompt, model_name="m", temperature=0.1, doc_id=doc_id, ordinal=ordinal)


# ========== Requests and binary answers ==========

def test_binary_requests_are_capped_at_one_token():
    assert request("edge").max_output_tokens == 1
    assert request("memory.summary").max_output_tokens == 4096
    with pytest.raises(ValueError):
        ChatRequest("edge", "p", 5, 0.1, "m")
    with pytest.raises(ValueError):
        ChatRequest.for_agent("critic", "p", "m")
    with pytest.raises(ValueError):
        ChatRequest.for_agent("translation", "", "m")


@pytest.mark.parametrize("answer, expected", [
    ("yes", True), ("Yes.", True), ("  TRUE", True), ("'yes', because", True),
    ("no", False), ("No.", False), ("false", False),
])
def test_parse_binary(answer, expected):
    assert parse_binary(answer) is expected


@pytest.mark.parametrize("answer", ["", "maybe", "yesterday", "nothing", "I think yes"])
def test_parse_binary_rejects_other_answers(answer):
    with pytest.raises(BinaryParseError):
        parse_binary(answer)


# ========== HTTP backend ==========

def test_http_backend_posts_chat_completion(monkeypatch):
    monkeypatch.setenv("GRAFT_TEST_KEY", "secret")
    session = FakeSession([completion("Hallo.", 12, 2)])
    response = http_backend(session).complete(request(prompt="Hello."))

    assert response.text == "Hallo."
    assert (response.prompt_tokens, response.completion_tokens) == (12, 2)
    post = session.posts[0]
    assert post["url"] == "http://backend.test/v1/chat/completions"
    assert post["headers"]["Authorization"] == "Bearer secret"
    assert post["json"]["messages"] == [{"role": "user", "content": "Hello."}]
    assert post["json"]["max_tokens"] == 4096
    assert post["timeout"] == 5


def test_http_backend_retries_transient_failures():
    session = FakeSession([
        requests.ConnectionError("refused"),
        FakeResponse(503),
        completion("ok"),
    ])
    assert http_backend(session, max_retries=2).complete(request()).text == "ok"
    assert len(session.posts) == 3


def test_http_backend_gives_up_after_retries():
    session = FakeSession([FakeResponse(429), FakeResponse(500)])
    with pytest.raises(TransportError):
        http_backend(session, max_retries=1).complete(request())
    assert len(session.posts) == 2


def test_http_backend_does_not_retry_auth_or_client_errors():
    with pytest.raises(AuthenticationError):
        http_backend(FakeSession([FakeResponse(401)])).complete(request())

    session = FakeSession([FakeResponse(400, text="bad request")])
    with pytest.raises(TransportError):
        http_backend(session).complete(request())
    assert len(session.posts) == 1


def test_http_backend_rejects_malformed_payload():
    with pytest.raises(MalformedResponseError):
        http_backend(FakeSession([FakeResponse(200, {"choices": []})])).complete(request())
    with pytest.raises(MalformedResponseError):
        http_backend(FakeSession([FakeResponse(200, None)])).complete(request())


# ========== Mock backend ==========

def test_mock_backend_first_match_wins():
    backend = MockBackend([
        {"match": {"agent": "edge", "ordinal": 1}, "response": "no"},
        {"match": {"agent": "edge"}, "response": "yes"},
    ])
    assert backend.complete(request("edge", ordinal=1)).text == "no"
    assert backend.complete(request("edge", ordinal=2)).text == "yes"
    assert backend.count_calls("edge") == 2


def test_mock_backend_matches_prompt_and_hash():
    backend = MockBackend([
        {"match": {"prompt_sha256": prompt_sha256("exact")}, "response": "by hash"},
        {"match": {"prompt": "other"}, "response": "by prompt"},
    ])
    assert backend.complete(request(prompt="exact")).text == "by hash"
    assert backend.complete(request(prompt="other")).text == "by prompt"


def test_mock_backend_token_counts_and_zero_latency():
    backend = MockBackend([{"match": {}, "response": "eins zwei"}])
    response = backend.complete(request(prompt="one two three"))
    assert (response.prompt_tokens, response.completion_tokens, response.latency) == (3, 2, 0.0)


def test_mock_backend_unmatched_request_fails():
    backend = MockBackend([{"match": {"agent": "edge"}, "response": "yes"}])
    with pytest.raises(MockScriptError):
        backend.complete(request("translation"))


def test_mock_script_validation(tmp_path):
    with pytest.raises(MockScriptError):
        MockBackend([{"response": "x"}])
    path = tmp_path / "script.json"
    path.write_text(json.dumps({"match": {}}), encoding="utf-8")
    with pytest.raises(MockScriptError):
        MockBackend.from_file(path)


# ========== Cache and accounting ==========

def test_cache_hit_skips_backend(tmp_path):
    backend = MockBackend([{"match": {}, "response": "Hallo Welt"}])
    gateway = LLMGateway(backend, model_name="m", temperature=0.1, cache=ResponseCache(tmp_path))

    first = gateway.complete(request(prompt="Hello world"))
    second = gateway.complete(request(prompt="Hello world", doc_id="other"))

    assert first.text == second.text == "Hallo Welt"
    assert second.cached and second.prompt_tokens == 0
    assert backend.count_calls() == 1
    totals = gateway.ledger.totals()
    assert (totals["calls"], totals["network_calls"], totals["cached_calls"]) == (2, 1, 1)


class SlowBackend(ChatBackend):
    """Counts calls and holds each one long enough for others to pile up."""

    def __init__(self):
        self.hits = 0
        self._lock = threading.Lock()

    def complete(self, req):
        with self._lock:
            self.hits += 1
        time.sleep(0.05)
        return BackendResponse("Hallo Welt", 3, 2)


def test_concurrent_identical_requests_reach_backend_once(tmp_path):
    backend = SlowBackend()
    gateway = LLMGateway(backend, model_name="m", temperature=0.1, cache=ResponseCache(tmp_path))
    barrier = threading.Barrier(4)

    def send(doc_id):
        barrier.wait()
        return gateway.complete(request(prompt="Hello world", doc_id=doc_id))

    with ThreadPoolExecutor(max_workers=4) as executor:
        responses = list(executor.map(send, ["a", "b", "c", "d"]))

    assert backend.hits == 1
    assert {r.text for r in responses} == {"Hallo Welt"}
    totals = gateway.ledger.totals()
    assert (totals["network_calls"], totals["cached_calls"]) == (1, 3)


def test_cache_key_depends_on_model_and_temperature():
    base = ResponseCache.key(request())
    other_model = ChatRequest.for_agent("translation", "Translate this.", model_name="n", temperature=0.1)
    other_temp = ChatRequest.for_agent("translation", "Translate this.", model_name="m", temperature=0.2)
    assert base != ResponseCache.key(other_model)
    assert base != ResponseCache.key(other_temp)


def test_ledger_groups_memory_components():
    ledger = UsageLedger()
    ledger.record("memory.entities", BackendResponse("x", 10, 2))
    ledger.record("memory.summary", BackendResponse("y", 5, 1, cached=True))
    ledger.record("edge", BackendResponse("yes", 3, 1))

    assert ledger.calls("memory") == 2
    assert ledger.calls() == 3
    record = ledger.to_dict(prompt_per_1k=1.0, completion_per_1k=2.0, source_words=100)
    assert record["totals"]["prompt_tokens"] == 18
    assert record["estimated_cost"] == pytest.approx((18 * 1.0 + 4 * 2.0) / 1000)
    assert record["cost_per_1k_words"] == pytest.approx(record["estimated_cost"] * 10)
    assert record["by_agent"]["memory"]["cached_calls"] == 1


# ========== Agent client ==========

def test_ask_binary_reasks_once_with_reminder():
    prompt = "Is this relevant?"
    backend = MockBackend([
        {"match": {"prompt": f"{prompt}\n{BINARY_REMINDER}"}, "response": "no"},
        {"match": {"agent": "edge"}, "response": "perhaps"},
    ])
    client = LLMGateway(backend, model_name="m").client("d", "en", "de")
    assert client.ask_binary("edge", prompt, ordinal=0) is False
    assert backend.count_calls("edge") == 2
    assert client.ledger.calls("edge") == 2


def test_ask_binary_fails_after_second_bad_answer():
    backend = MockBackend([{"match": {"agent": "segmentation"}, "response": "unclear"}])
    client = LLMGateway(backend, model_name="m").client("d", "en", "de")
    with pytest.raises(BinaryParseError):
        client.ask_binary("segmentation", "Same discourse?", ordinal=3)
    assert backend.count_calls() == 2


def test_client_stamps_doc_id_and_ordinal():
    backend = MockBackend([{"match": {"doc_id": "doc-7", "ordinal": 4}, "response": "Text."}])
    client = LLMGateway(backend, model_name="m").client("doc-7", "en", "de")
    assert client.ask("translation", "Source.", ordinal=4) == "Text."
    assert backend.call_log[0].doc_id == "doc-7"
