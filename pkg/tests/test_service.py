from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from gear.backends import BagOfWordsEmbedder, HttpBackend, ScriptedBackend, ScriptedRule
from gear.config import DEFAULT_ROUTE_PROMPT, EngineComponents
from gear.scoring import ScoreConfig
from gear.service import create_app
from conftest import demo_slm


def service_llm():
    return ScriptedBackend(
        [
            ScriptedRule("(?s)external tool.*(hello|hi there)", "no", regex=True),
            ScriptedRule("external tool", "yes"),
            ScriptedRule("Rephrase this tool output", "Here you go: six!"),
            ScriptedRule("Calculator API calls", "<API> [Calculator(2 + 4)]"),
            ScriptedRule("Pow API calls", "<API> [Pow(2, 5)]"),
            ScriptedRule(
                "TimezoneConverter API calls",
                '<API> [TimezoneConverter("2022-01-02 22:00:00", "Asia/Shanghai", "America/New_York")]',
            ),
        ],
        default="I can help with that.",
    )


@pytest.fixture()
def parts(tools10, patterns7):
    patterns, priors = patterns7
    return EngineComponents(
        registry=tools10,
        slm=demo_slm(),
        llm=service_llm(),
        embedder=BagOfWordsEmbedder(),
        patterns=patterns,
        priors=priors,
        score=ScoreConfig(),
        mock_all=True,
        route_prompt=DEFAULT_ROUTE_PROMPT,
    )


@pytest.fixture()
def client(parts):
    return TestClient(create_app(parts))


class TestGroundEndpoint:
    def test_fixture_query_selects_calculator(self, client):
        response = client.post("/api/ground", json={"query": "2 + 4 = ?"})
        assert response.status_code == 200
        body = response.json()
        assert body["selected_tool"] == "Calculator"
        assert body["final_answer"] is None
        assert len(body["per_tool"]) == 10

    def test_empty_query_is_400(self, client):
        assert client.post("/api/ground", json={"query": "  "}).status_code == 400
        assert client.post("/api/ground", json={}).status_code == 400

    def test_backend_down_is_502(self, tools10, patterns7):
        patterns, priors = patterns7
        broken = EngineComponents(
            registry=tools10,
            slm=HttpBackend(endpoint="http://127.0.0.1:1/generate", timeout_ms=200),
            llm=service_llm(),
            embedder=BagOfWordsEmbedder(),
            patterns=patterns,
            priors=priors,
            score=ScoreConfig(),
            mock_all=True,
        )
        client = TestClient(create_app(broken))
        assert client.post("/api/ground", json={"query": "x"}).status_code == 502


class TestToolsAndExecute:
    def test_tool_listing(self, client, tools10):
        body = client.get("/api/tools").json()
        assert [t["name"] for t in body] == list(tools10.names)
        assert all(t["description"] for t in body)

    def test_execute_calculator(self, client):
        body = client.post("/api/execute", json={"tool": "Calculator", "args": "2+4"}).json()
        assert body["text"] == "6"
        assert body["parsable"] is True

    def test_execute_unknown_tool_404(self, client):
        response = client.post("/api/execute", json={"tool": "Teleport", "args": "1"})
        assert response.status_code == 404


class TestChat:
    def test_tool_routed_turn(self, client, parts):
        slm_before = parts.slm.stats.generate_calls
        llm_before = parts.llm.stats.generate_calls
        response = client.post(
            "/api/chat", json={"session_id": "s1", "text": "what is 2 + 4 = ?"}
        )
        assert response.status_code == 200
        turn = response.json()
        assert turn["route"] == "tool"
        assert turn["answer_text"] == "6"
        grounding = turn["grounding"]
        assert grounding["tool"] == "Calculator"
        top = max(grounding["scores"], key=lambda s: s["combined"])
        assert grounding["confidence"] == top["combined"]
        # call budget: n+1 SLM, 1 routing LLM + 1 execution LLM
        assert parts.slm.stats.generate_calls - slm_before == len(parts.registry) + 1
        assert parts.llm.stats.generate_calls - llm_before == 2

    def test_confidence_matches_ground_endpoint(self, client):
        query = ("what time is it in the America/New_York time zone when it is "
                 "2022-01-02 22:00:00 in the Asia/Shanghai time zone")
        ground_body = client.post("/api/ground", json={"query": query}).json()
        chat_turn = client.post(
            "/api/chat", json={"session_id": "s2", "text": query}
        ).json()
        assert ground_body["selected_tool"] == "TimezoneConverter"
        assert chat_turn["grounding"]["tool"] == "TimezoneConverter"
        selected = ground_body["per_tool"][ground_body["selected_index"]]
        assert chat_turn["grounding"]["confidence"] == selected["score"]["combined"]
        assert chat_turn["answer_text"] == "2022-01-02 09:00:00"

    def test_direct_route(self, client, parts):
        llm_before = parts.llm.stats.generate_calls
        turn = client.post("/api/chat", json={"session_id": "s3", "text": "hello"}).json()
        assert turn["route"] == "direct"
        assert turn["grounding"] is None
        assert turn["answer_text"] == "I can help with that."
        assert parts.llm.stats.generate_calls - llm_before == 2  # route + direct reply

    def test_tool_override(self, client, parts):
        llm_before = parts.llm.stats.generate_calls
        turn = client.post(
            "/api/chat",
            json={"session_id": "s4", "text": "what is 2 + 4 = ?", "tool_override": "Pow"},
        ).json()
        assert turn["route"] == "tool"
        assert turn["overridden"] is True
        assert turn["grounding"]["tool"] == "Pow"
        assert turn["answer_text"] == "32"
        # override skips the routing call: exactly 1 LLM (execution) call
        assert parts.llm.stats.generate_calls - llm_before == 1

    def test_unknown_override_is_400(self, client):
        response = client.post(
            "/api/chat", json={"session_id": "s5", "text": "x", "tool_override": "Teleport"}
        )
        assert response.status_code == 400

    def test_empty_text_is_400(self, client):
        assert client.post("/api/chat", json={"session_id": "s6", "text": ""}).status_code == 400

    def test_transcript_reconstructible(self, client):
        client.post("/api/chat", json={"session_id": "s7", "text": "what is 2 + 4 = ?"})
        client.post("/api/chat", json={"session_id": "s7", "text": "hello"})
        body = client.get("/api/session/s7").json()
        assert body["session_id"] == "s7"
        assert [t["route"] for t in body["turns"]] == ["tool", "direct"]
        assert body["turns"][0]["user_text"] == "what is 2 + 4 = ?"

    def test_unknown_session_is_empty(self, client):
        assert client.get("/api/session/ghost").json()["turns"] == []


class TestChatOptions:
    def test_post_processing_rewrites_answer(self, tools10, patterns7):
        patterns, priors = patterns7
        parts = EngineComponents(
            registry=tools10, slm=demo_slm(), llm=service_llm(),
            embedder=BagOfWordsEmbedder(), patterns=patterns, priors=priors,
            score=ScoreConfig(), mock_all=True, post_process=True,
        )
        client = TestClient(create_app(parts))
        turn = client.post(
            "/api/chat", json={"session_id": "p1", "text": "what is 2 + 4 = ?"}
        ).json()
        assert turn["answer_text"] == "Here you go: six!"

    def test_session_persistence(self, tools10, patterns7, tmp_path):
        patterns, priors = patterns7
        store = tmp_path / "sessions.json"
        parts = EngineComponents(
            registry=tools10, slm=demo_slm(), llm=service_llm(),
            embedder=BagOfWordsEmbedder(), patterns=patterns, priors=priors,
            score=ScoreConfig(), mock_all=True, sessions_path=store,
        )
        client = TestClient(create_app(parts))
        client.post("/api/chat", json={"session_id": "k1", "text": "hello"})
        saved = json.loads(store.read_text())
        assert saved["k1"][0]["route"] == "direct"
