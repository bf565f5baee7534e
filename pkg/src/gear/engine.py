"""End-to-end grounding: score every tool for a query, pick one, execute.

A grounding run over n tools costs exactly n+1 small-model generate
calls: one zero-shot preliminary answer for the bare query, plus one
API-call generation per tool. Each tool's generated call is parsed and
executed (mock-aware), its response profile is compared against the
preliminary answer's profile, and the tool with the highest combined
score wins (ties break to the first-registered tool). The final
execution stage costs exactly one large-model call.
"""

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

from .backends import Embedder, GenerationRequest, LMBackend
from .patterns import PatternProfile, PatternSet, PriorDistribution, encode
from .scoring import ScoreConfig, ToolScore, combined_score, cosine, pattern_score
from .tools import ToolRegistry, ToolResponse, ToolSpec

__all__ = [
    "ApiCall",
    "ToolGrounding",
    "GroundingResult",
    "preliminary_answer",
    "build_api_prompt",
    "parse_api_call",
    "ground",
    "execute_grounded",
]

_GENERATION_DEFAULTS = dict(max_tokens=128, decoding="greedy", stop_sequences=("\n",))
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass(frozen=True)
class ApiCall:
    """A parsed bracketed invocation "[Name(args)]"."""

    tool_name: str
    raw_args: str
    source_text: str

    def to_dict(self) -> dict:
        return {"tool": self.tool_name, "args": self.raw_args}


@dataclass(frozen=True)
class ToolGrounding:
    """Per-tool outcome of a grounding run."""

    score: ToolScore
    api_call: ApiCall | None
    response: ToolResponse

    def to_dict(self, include_latency: bool = True) -> dict:
        return {
            "score": self.score.to_dict(),
            "api_call": self.api_call.to_dict() if self.api_call else None,
            "response": self.response.to_dict(include_latency=include_latency),
        }


@dataclass(frozen=True)
class GroundingResult:
    query: str
    preliminary: str
    per_tool: tuple[ToolGrounding, ...]
    selected_index: int
    final_answer: str | None = None
    final_response: ToolResponse | None = None
    tool_bypassed: bool = False

    @property
    def selected(self) -> ToolGrounding:
        return self.per_tool[self.selected_index]

    @property
    def selected_tool(self) -> str:
        return self.selected.score.tool_name

    def to_dict(self, include_latency: bool = True) -> dict:
        """JSON form; latency fields are measurements and can be dropped
        when comparing results for determinism."""
        return {
            "query": self.query,
            "preliminary": self.preliminary,
            "per_tool": [t.to_dict(include_latency=include_latency) for t in self.per_tool],
            "selected_index": self.selected_index,
            "selected_tool": self.selected_tool,
            "final_answer": self.final_answer,
            "tool_bypassed": self.tool_bypassed,
        }


def preliminary_answer(query: str, slm: LMBackend) -> str:
    """Zero-shot greedy continuation of the bare query (one SLM call)."""
    return slm.generate(GenerationRequest(prompt=query, **_GENERATION_DEFAULTS))


def build_api_prompt(tool: ToolSpec, query: str) -> str:
    """Demonstrations block followed by the query in Input/Output form."""
    return f"{tool.demonstrations}\nInput: {query}\nOutput:"


def parse_api_call(generated: str, registry: ToolRegistry) -> ApiCall | None:
    """Extract the last "[Name(args)]" naming a registered tool.

    Parentheses are balanced and quotes respected inside the argument
    list. Absence of a call is a value (None), not an error: it flows to
    an empty tool response and a pattern score of exactly 0.
    """
    found: ApiCall | None = None
    i = 0
    while i < len(generated):
        start = generated.find("[", i)
        if start == -1:
            break
        name_match = _NAME.match(generated, start + 1)
        if name_match is None or name_match.end() >= len(generated):
            i = start + 1
            continue
        if generated[name_match.end()] != "(":
            i = start + 1
            continue
        args, end = _scan_args(generated, name_match.end() + 1)
        if end is None or end >= len(generated) or generated[end] != "]":
            i = start + 1
            continue
        name = name_match.group(0)
        if name in registry.names:
            found = ApiCall(tool_name=name, raw_args=args.strip(), source_text=generated)
        i = end + 1
    return found


def _scan_args(text: str, start: int) -> tuple[str, int | None]:
    """Scan from just after '(' to its balanced ')'; returns (args, index
    after ')') or (..., None) when unterminated."""
    depth = 1
    quote: str | None = None
    i = start
    while i < len(text):
        ch = text[i]
        if quote:
            if ch == "\\":
                i += 2
                continue
            if ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0:
                return text[start:i], i + 1
        i += 1
    return "", None


def _ground_one_tool(
    tool: ToolSpec,
    query: str,
    query_vec: Sequence[float],
    a_profile: PatternProfile,
    registry: ToolRegistry,
    slm: LMBackend,
    embedder: Embedder,
    patterns: PatternSet,
    priors: PriorDistribution,
    config: ScoreConfig,
    mock_all: bool,
) -> ToolGrounding:
    generated = slm.generate(
        GenerationRequest(prompt=build_api_prompt(tool, query), **_GENERATION_DEFAULTS)
    )
    call = parse_api_call(generated, registry)
    mode = "mock" if (tool.kind == "mock" or mock_all) else "real"
    if call is not None and call.tool_name == tool.name:
        response = registry.execute(tool, call.raw_args, mode=mode)
    else:
        # No call the tool can parse; empty response by contract.
        response = ToolResponse(text="", parsable=False)
    if response.parsable and mode == "mock" and tool.mock_profile is not None:
        b_profile = registry.mock_profile(tool)
    elif response.parsable:
        b_profile = encode(response.text, patterns)
    else:
        b_profile = PatternProfile.empty()
    semantic = cosine(query_vec, embedder.embed(tool.description))
    pattern = pattern_score(a_profile, b_profile, priors, config)
    score = ToolScore(
        tool_name=tool.name,
        semantic=semantic,
        pattern=pattern,
        combined=combined_score(semantic, pattern, config),
    )
    return ToolGrounding(score=score, api_call=call, response=response)


def ground(
    query: str,
    library: ToolRegistry,
    slm: LMBackend,
    embedder: Embedder,
    patterns: PatternSet,
    priors: PriorDistribution,
    config: ScoreConfig,
    *,
    mock_all: bool = False,
    max_concurrency: int = 1,
) -> GroundingResult:
    """Select the best tool for a query; no final answer yet.

    Per-tool work can fan out over threads; results are merged in
    registration order, so scoring and selection are schedule
    independent.
    """
    if len(library) == 0:
        raise ValueError("tool library is empty")
    if max_concurrency < 1:
        raise ValueError("max_concurrency must be >= 1")
    prelim = preliminary_answer(query, slm)
    a_profile = encode(prelim, patterns)
    query_vec = embedder.embed(query)

    def run(tool: ToolSpec) -> ToolGrounding:
        return _ground_one_tool(
            tool, query, query_vec, a_profile, library, slm, embedder,
            patterns, priors, config, mock_all,
        )

    tools = list(library)
    if max_concurrency == 1 or len(tools) == 1:
        per_tool = [run(t) for t in tools]
    else:
        with ThreadPoolExecutor(max_workers=min(max_concurrency, len(tools))) as pool:
            per_tool = list(pool.map(run, tools))

    selected = max(range(len(per_tool)), key=lambda i: per_tool[i].score.combined)
    return GroundingResult(
        query=query,
        preliminary=prelim,
        per_tool=tuple(per_tool),
        selected_index=selected,
    )


def execute_grounded(
    query: str,
    result: GroundingResult,
    llm: LMBackend,
    registry: ToolRegistry,
) -> GroundingResult:
    """Generate the final API call with the LLM and run the selected tool.

    Exactly one LLM call. If the LLM emits no call parsable by the
    selected tool, the raw LLM text becomes the answer and the result is
    flagged tool-bypassed. Execution failures are recorded in the
    response, never raised.
    """
    tool = registry.get(result.selected_tool)
    generated = llm.generate(
        GenerationRequest(prompt=build_api_prompt(tool, query), **_GENERATION_DEFAULTS)
    )
    call = parse_api_call(generated, registry)
    if call is None or call.tool_name != tool.name:
        return replace(result, final_answer=generated.strip(), tool_bypassed=True)
    response = registry.execute(tool, call.raw_args, mode="real")
    return replace(
        result,
        final_answer=response.text,
        final_response=response,
        tool_bypassed=False,
    )
