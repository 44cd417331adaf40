import pytest

from stub_llm import stub_server
from wolfdial.llm import (
    DEFAULT_TEMPERATURE,
    BackendConfig,
    BackendFailure,
    CompletionRequest,
    ConfigError,
    HTTPBackend,
    Purpose,
    RecordingBackend,
    ScriptedBackend,
    route,
)


def test_default_routing():
    cfg = BackendConfig()
    assert cfg.model_for(Purpose.VOTE_DECLARATION) == "gpt-3.5-turbo"
    for p in Purpose:
        if p is not Purpose.VOTE_DECLARATION:
            assert cfg.model_for(p) == "gpt-4-turbo"
    assert route(CompletionRequest("x", Purpose.TALK), cfg).temperature == 0.7
    assert route(CompletionRequest("x", Purpose.TARGET_DECISION), cfg).temperature == 0.0
    assert route(CompletionRequest("x", Purpose.TALK, temperature=0.2), cfg).temperature == 0.2


def test_config_from_mapping():
    cfg = BackendConfig.from_mapping({"base_url": "http://x/v1", "models": {"summary": "small-model"}})
    assert cfg.model_for(Purpose.SUMMARY) == "small-model"
    assert cfg.model_for(Purpose.TALK) == "gpt-4-turbo"
    with pytest.raises(ConfigError):
        BackendConfig.from_mapping({"api_key": "sk-secret"})
    with pytest.raises(ConfigError):
        BackendConfig.from_mapping({"models": {"gossip": "m"}})
    with pytest.raises(ConfigError):
        BackendConfig.from_mapping({"colour": "blue"})


def test_scripted_backend_is_deterministic():
    digest = {"task": "decide_vote", "agent": 1, "role": "VILLAGER", "candidates": [2, 3, 4, 5], "alive": [1, 2, 3, 4, 5]}
    req = CompletionRequest("prompt", Purpose.TARGET_DECISION, digest=digest)
    first = {ScriptedBackend(7, 1).complete(req) for _ in range(3)}
    assert len(first) == 1
    b1, b2 = ScriptedBackend(7, 1), ScriptedBackend(7, 1)
    assert [b1.complete(req) for _ in range(5)] == [b2.complete(req) for _ in range(5)]


def test_digest_does_not_affect_equality():
    assert CompletionRequest("p", Purpose.TALK, digest={"a": 1}) == CompletionRequest("p", Purpose.TALK)


def test_http_backend_round_trip_and_payload():
    with stub_server() as (server, url):
        cfg = BackendConfig(base_url=url, retry_backoff=0.0)
        backend = RecordingBackend(HTTPBackend(cfg), cfg)
        out = backend.complete(CompletionRequest("Candidates: Agent[02], Agent[03]", Purpose.TARGET_DECISION))
        assert out.splitlines()[-1] in ("Answer: Agent[02]", "Answer: Agent[03]")
        backend.complete(CompletionRequest("hello", Purpose.VOTE_DECLARATION))
    first, second = server.requests
    assert first["model"] == "gpt-4-turbo" and first["temperature"] == 0.0
    assert second["model"] == "gpt-3.5-turbo" and second["temperature"] == DEFAULT_TEMPERATURE[Purpose.VOTE_DECLARATION]
    assert [m["role"] for m in first["messages"]] == ["system", "user"]
    assert "digest" not in first
    assert [r.purpose for r, _ in backend.calls] == [Purpose.TARGET_DECISION, Purpose.VOTE_DECLARATION]


def test_http_backend_retries_then_succeeds():
    with stub_server(fail_next=2) as (server, url):
        backend = HTTPBackend(BackendConfig(base_url=url, retry_count=3, retry_backoff=0.0))
        assert backend.complete(CompletionRequest("hello", Purpose.TALK))
        assert len(server.requests) == 3


def test_http_backend_gives_up():
    with stub_server(fail_next=10) as (server, url):
        backend = HTTPBackend(BackendConfig(base_url=url, retry_count=2, retry_backoff=0.0))
        with pytest.raises(BackendFailure):
            backend.complete(CompletionRequest("hello", Purpose.TALK))
        assert len(server.requests) == 3


def test_http_backend_unreachable():
    backend = HTTPBackend(BackendConfig(base_url="http://127.0.0.1:9/v1", retry_count=0, timeout=1))
    with pytest.raises(BackendFailure):
        backend.complete(CompletionRequest("hello", Purpose.TALK))


def test_api_key_comes_from_environment(monkeypatch):
    monkeypatch.setenv("WOLFDIAL_TEST_KEY", "abc")
    assert HTTPBackend(BackendConfig(api_key_env="WOLFDIAL_TEST_KEY"))._api_key() == "abc"


def test_http_body_is_surfaced_verbatim():
    from stub_llm import stub_reply

    prompt = "Summarize the dialogue\nAgent[01]: hi\nAgent[02]: hello"
    with stub_server() as (_, url):
        out = HTTPBackend(BackendConfig(base_url=url)).complete(CompletionRequest(prompt, Purpose.SUMMARY))
    assert out == stub_reply(prompt)
