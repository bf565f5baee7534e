"""HTTP service: grounding, execution, tool listing, and a chat flow.

The chat flow mirrors the tool-augmented assistant loop: a single LLM
prompt decides whether the message needs a tool; if so the engine grounds
the query, executes the selected tool, and the turn reports the tool name
with its confidence (the selected combined score) and the full per-tool
score breakdown. A client may force a specific tool with tool_override,
which skips the route decision and the selection argmax.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, replace

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .backends import GenerationRequest, TransportError
from .config import EngineComponents
from .engine import execute_grounded, ground
from .tools import UnknownToolError

__all__ = ["ChatTurn", "create_app"]


class GroundBody(BaseModel):
    query: str = ""


class ChatBody(BaseModel):
    session_id: str
    text: str = ""
    tool_override: str | None = None


class ExecuteBody(BaseModel):
    tool: str
    args: str = ""


@dataclass(frozen=True)
class ChatTurn:
    session_id: str
    user_text: str
    route: str  # "tool" | "direct"
    answer_text: str
    grounding: dict | None = None
    overridden: bool = False

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "user_text": self.user_text,
            "route": self.route,
            "answer_text": self.answer_text,
            "grounding": self.grounding,
            "overridden": self.overridden,
        }


class _Sessions:
    """In-memory transcripts with one in-flight turn per session."""

    def __init__(self, persist_path=None) -> None:
        self._turns: dict[str, list[ChatTurn]] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        self._persist_path = persist_path

    def lock(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            if session_id not in self._locks:
                self._locks[session_id] = threading.Lock()
                self._turns.setdefault(session_id, [])
            return self._locks[session_id]

    def append(self, turn: ChatTurn) -> None:
        self._turns.setdefault(turn.session_id, []).append(turn)
        if self._persist_path is not None:
            payload = {
                sid: [t.to_dict() for t in turns] for sid, turns in self._turns.items()
            }
            self._persist_path.write_text(
                json.dumps(payload, ensure_ascii=False, indent=2), encoding="utf-8"
            )

    def transcript(self, session_id: str) -> list[ChatTurn]:
        return list(self._turns.get(session_id, []))


def create_app(parts: EngineComponents) -> FastAPI:
    app = FastAPI(title="gear", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions = _Sessions(persist_path=parts.sessions_path)

    def _ground(query: str):
        try:
            return ground(
                query, parts.registry, parts.slm, parts.embedder,
                parts.patterns, parts.priors, parts.score,
                mock_all=parts.mock_all, max_concurrency=parts.max_concurrency,
            )
        except TransportError as exc:
            raise HTTPException(status_code=502, detail=str(exc)) from exc

    @app.post("/api/ground")
    def api_ground(body: GroundBody) -> dict:
        if not body.query.strip():
            raise HTTPException(status_code=400, detail="query must be nonempty")
        return _ground(body.query).to_dict()

    @app.get("/api/tools")
    def api_tools() -> list[dict]:
        return [
            {"name": t.name, "description": t.description, "kind": t.kind}
            for t in parts.registry
        ]

    @app.post("/api/execute")
    def api_execute(body: ExecuteBody) -> dict:
        try:
            response = parts.registry.execute(body.tool, body.args, mode="real")
        except UnknownToolError:
            raise HTTPException(status_code=404, detail=f"unknown tool {body.tool!r}") from None
        return response.to_dict()

    @app.get("/api/session/{session_id}")
    def api_session(session_id: str) -> dict:
        return {
            "session_id": session_id,
            "turns": [t.to_dict() for t in sessions.transcript(session_id)],
        }

    def _route_decision(text: str) -> bool:
        prompt = parts.route_prompt.format(query=text)
        try:
            reply = parts.llm.generate(GenerationRequest(prompt=prompt, stop_sequences=("\n",)))
        except TransportError as exc:
            raise HTTPException(status_code=502, detail=str(exc)) from exc
        return "yes" in reply.lower()

    def _tool_turn(body: ChatBody) -> ChatTurn:
        result = _ground(body.text)
        overridden = False
        if body.tool_override:
            result = replace(
                result, selected_index=parts.registry.index_of(body.tool_override)
            )
            overridden = True
        try:
            result = execute_grounded(body.text, result, parts.llm, parts.registry)
        except TransportError as exc:
            raise HTTPException(status_code=502, detail=str(exc)) from exc
        answer = result.final_answer or ""
        if parts.post_process and not result.tool_bypassed:
            prompt = (
                f"Rephrase this tool output as a friendly answer to the user.\n"
                f"User: {body.text}\nTool ({result.selected_tool}): {answer}\nAnswer:"
            )
            answer = parts.llm.generate(
                GenerationRequest(prompt=prompt, stop_sequences=("\n",))
            ).strip() or answer
        return ChatTurn(
            session_id=body.session_id,
            user_text=body.text,
            route="tool",
            answer_text=answer,
            grounding={
                "tool": result.selected_tool,
                "confidence": result.selected.score.combined,
                "tool_bypassed": result.tool_bypassed,
                "scores": [t.score.to_dict() for t in result.per_tool],
            },
            overridden=overridden,
        )

    @app.post("/api/chat")
    def api_chat(body: ChatBody) -> dict:
        if not body.text.strip():
            raise HTTPException(status_code=400, detail="text must be nonempty")
        if body.tool_override and body.tool_override not in parts.registry.names:
            raise HTTPException(
                status_code=400, detail=f"unknown tool_override {body.tool_override!r}"
            )
        with sessions.lock(body.session_id):
            if body.tool_override or _route_decision(body.text):
                turn = _tool_turn(body)
            else:
                try:
                    reply = parts.llm.generate(
                        GenerationRequest(prompt=body.text, stop_sequences=("\n",))
                    )
                except TransportError as exc:
                    raise HTTPException(status_code=502, detail=str(exc)) from exc
                turn = ChatTurn(
                    session_id=body.session_id,
                    user_text=body.text,
                    route="direct",
                    answer_text=reply.strip(),
                )
            sessions.append(turn)
        return turn.to_dict()

    return app
