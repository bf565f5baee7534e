"""Tool specifications, executors, and the registry.

Built-in executors: Calculator (arithmetic expressions), Pow, Log, and
TimezoneConverter. Sleep and RobotMove are mock tools: during grounding
they answer with a declared template/pattern profile and perform no side
effect; in real mode Sleep actually waits. QA, MT, and WikiSearch are
HTTP-client tools, and MultilingualQA is a pipeline composing MT then QA.

Executors never raise on malformed arguments: they return an unparsable
(empty-text) response, which downstream scoring maps to pattern score 0.
"""

from __future__ import annotations

import json
import logging
import math
import re
import time
from dataclasses import dataclass
from datetime import datetime
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence
from zoneinfo import ZoneInfo

import httpx

from .arithmetic import ArithmeticError_, eval_arithmetic, render_number
from .patterns import PatternProfile

logger = logging.getLogger(__name__)

__all__ = [
    "ToolSpec",
    "ToolResponse",
    "ToolRegistry",
    "ToolConfigError",
    "UnknownToolError",
    "split_args",
    "convert_timezone",
    "load_library",
    "TIMESTAMP_FORMATS",
]

# Accepted timestamp formats, tried in order; output keeps the input's format.
TIMESTAMP_FORMATS = (
    "%Y-%m-%d %H:%M:%S",
    "%b %d %Y %I:%M:%S%p",
    "%Y-%m-%dT%H:%M:%S",
)


class ToolConfigError(ValueError):
    """Invalid tool library configuration."""


class UnknownToolError(KeyError):
    """Named tool is not registered."""


@dataclass(frozen=True)
class ToolSpec:
    """One tool: executable, natural-language description, demonstrations.

    ``kind`` is one of builtin | http | mock | pipeline. Mock tools must
    declare a ``mock_template`` (text answered during grounding) and/or a
    synthetic ``mock_profile`` used directly for pattern scoring.
    """

    name: str
    description: str
    demonstrations: str
    kind: str = "builtin"
    endpoint: str | None = None
    timeout_ms: int = 10_000
    mock_profile: Mapping[str, int] | None = None
    mock_template: str | None = None
    pipeline: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("builtin", "http", "mock", "pipeline"):
            raise ToolConfigError(f"tool {self.name!r}: unknown kind {self.kind!r}")
        if not self.demonstrations:
            raise ToolConfigError(f"tool {self.name!r}: demonstrations must be nonempty")
        if self.kind == "mock" and self.mock_profile is None and self.mock_template is None:
            raise ToolConfigError(
                f"tool {self.name!r}: mock kind needs a mock_profile or mock_template"
            )
        if self.kind == "http" and not self.endpoint:
            raise ToolConfigError(f"tool {self.name!r}: http kind needs an endpoint")


@dataclass(frozen=True)
class ToolResponse:
    """Tool output; unparsable input yields parsable=False and empty text."""

    text: str = ""
    parsable: bool = True
    latency_ms: float = 0.0

    def to_dict(self, include_latency: bool = True) -> dict:
        data = {"text": self.text, "parsable": self.parsable}
        if include_latency:
            data["latency_ms"] = self.latency_ms
        return data


def _failed(started: float) -> ToolResponse:
    return ToolResponse(text="", parsable=False, latency_ms=(time.perf_counter() - started) * 1000)


def _ok(text: str, started: float) -> ToolResponse:
    return ToolResponse(text=text, parsable=True, latency_ms=(time.perf_counter() - started) * 1000)


def split_args(raw: str) -> list[str]:
    """Split an argument string on top-level commas.

    Commas inside double or single quotes (or nested parentheses) do not
    split; surrounding quotes are stripped from each argument.
    """
    args: list[str] = []
    buf: list[str] = []
    quote: str | None = None
    depth = 0
    i = 0
    while i < len(raw):
        ch = raw[i]
        if quote:
            if ch == "\\" and i + 1 < len(raw):
                buf.append(ch)
                buf.append(raw[i + 1])
                i += 2
                continue
            if ch == quote:
                quote = None
            buf.append(ch)
        elif ch in "\"'":
            quote = ch
            buf.append(ch)
        elif ch == "(":
            depth += 1
            buf.append(ch)
        elif ch == ")":
            depth -= 1
            buf.append(ch)
        elif ch == "," and depth == 0:
            args.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
        i += 1
    args.append("".join(buf))
    return [_unquote(a.strip()) for a in args if a.strip() or len(args) == 1]


def _unquote(arg: str) -> str:
    if len(arg) >= 2 and arg[0] == arg[-1] and arg[0] in "\"'":
        inner = arg[1:-1]
        return inner.replace('\\"', '"').replace("\\'", "'")
    return arg


def convert_timezone(timestamp: str, from_zone: str, to_zone: str) -> str:
    """Convert a wall-clock timestamp between IANA time zones.

    The timestamp must match one of TIMESTAMP_FORMATS; the result is
    rendered in the same format. Raises ValueError on an unparsable
    timestamp or unknown zone.
    """
    parsed: datetime | None = None
    fmt_used: str | None = None
    for fmt in TIMESTAMP_FORMATS:
        try:
            parsed = datetime.strptime(timestamp.strip(), fmt)
            fmt_used = fmt
            break
        except ValueError:
            continue
    if parsed is None or fmt_used is None:
        raise ValueError(f"unparsable timestamp {timestamp!r}")
    try:
        src = ZoneInfo(from_zone.strip())
        dst = ZoneInfo(to_zone.strip())
    except Exception as exc:
        raise ValueError(f"unknown time zone: {exc}") from exc
    converted = parsed.replace(tzinfo=src).astimezone(dst)
    return converted.strftime(fmt_used)


def _parse_number(arg: str) -> Fraction:
    try:
        return Fraction(arg.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a number: {arg!r}") from exc


def _run_calculator(raw_args: str) -> str:
    try:
        return eval_arithmetic(raw_args)
    except ArithmeticError_ as exc:
        raise ValueError(str(exc)) from exc


def _run_pow(raw_args: str) -> str:
    args = split_args(raw_args)
    if len(args) != 2:
        raise ValueError("Pow expects two arguments: base, exponent")
    base, exponent = _parse_number(args[0]), _parse_number(args[1])
    if exponent.denominator == 1:
        return render_number(base ** exponent.numerator)
    result = math.pow(float(base), float(exponent))
    if math.isnan(result) or math.isinf(result):
        raise ValueError("non-finite result")
    return render_number(result)


def _run_log(raw_args: str) -> str:
    args = split_args(raw_args)
    if len(args) != 2:
        raise ValueError("Log expects two arguments: base, value")
    base, value = float(_parse_number(args[0])), float(_parse_number(args[1]))
    if base <= 0 or base == 1 or value <= 0:
        raise ValueError("log domain error")
    return render_number(math.log(value, base))


def _run_timezone(raw_args: str) -> str:
    args = split_args(raw_args)
    if len(args) != 3:
        raise ValueError("TimezoneConverter expects: timestamp, from_zone, to_zone")
    return convert_timezone(args[0], args[1], args[2])


_BUILTIN_EXECUTORS = {
    "Calculator": _run_calculator,
    "Pow": _run_pow,
    "Log": _run_log,
    "TimezoneConverter": _run_timezone,
}


def _fill_template(template: str, raw_args: str) -> str:
    if "{}" in template:
        args = split_args(raw_args)
        return template.replace("{}", args[0] if args and args[0] else raw_args.strip(), 1)
    return template


class ToolRegistry:
    """Immutable, ordered collection of tools with an execute dispatcher."""

    def __init__(self, tools: Sequence[ToolSpec]) -> None:
        names = [t.name for t in tools]
        if len(set(names)) != len(names):
            raise ToolConfigError(f"duplicate tool names in {names}")
        self._tools = tuple(tools)
        self._by_name = {t.name: t for t in tools}

    def __iter__(self):
        return iter(self._tools)

    def __len__(self) -> int:
        return len(self._tools)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(t.name for t in self._tools)

    def get(self, name: str) -> ToolSpec:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownToolError(name) from None

    def index_of(self, name: str) -> int:
        for i, tool in enumerate(self._tools):
            if tool.name == name:
                return i
        raise UnknownToolError(name)

    def mock_profile(self, tool: ToolSpec | str) -> PatternProfile:
        """Declared synthetic pattern profile for a mocked tool."""
        spec = self.get(tool) if isinstance(tool, str) else tool
        if spec.mock_profile is None:
            raise ToolConfigError(f"tool {spec.name!r} declares no mock profile")
        return PatternProfile.from_counts(spec.mock_profile)

    def execute(self, tool: ToolSpec | str, raw_args: str, mode: str = "real") -> ToolResponse:
        """Run a tool on a raw argument string.

        mode "mock" must not trigger side effects: mock-kind tools answer
        from their template, HTTP/pipeline tools answer from a declared
        template (unparsable if none), and the pure builtin executors run
        normally. Malformed arguments produce parsable=False, never an
        exception.
        """
        if mode not in ("real", "mock"):
            raise ValueError(f"unknown execution mode {mode!r}")
        spec = self.get(tool) if isinstance(tool, str) else tool
        if spec.name not in self._by_name:
            raise UnknownToolError(spec.name)
        started = time.perf_counter()
        try:
            if mode == "mock":
                return self._execute_mock(spec, raw_args, started)
            return self._execute_real(spec, raw_args, started)
        except Exception as exc:  # malformed args / tool failure, by contract
            logger.debug("tool %s failed on %r: %s", spec.name, raw_args, exc)
            return _failed(started)

    # -- execution paths -------------------------------------------------

    def _execute_mock(self, spec: ToolSpec, raw_args: str, started: float) -> ToolResponse:
        if spec.kind == "builtin":
            # Builtins are pure; their real path is already side-effect free.
            return _ok(_BUILTIN_EXECUTORS[spec.name](raw_args), started)
        if spec.name in ("Sleep", "RobotMove"):
            _parse_number(split_args(raw_args)[0])  # validate even when mocked
        if spec.mock_template is not None:
            return _ok(_fill_template(spec.mock_template, raw_args), started)
        if spec.mock_profile is not None:
            # Profile-only mock: no text, but still a parsable response.
            return ToolResponse(
                text="", parsable=True, latency_ms=(time.perf_counter() - started) * 1000
            )
        return _failed(started)

    def _execute_real(self, spec: ToolSpec, raw_args: str, started: float) -> ToolResponse:
        if spec.kind == "builtin":
            return _ok(_BUILTIN_EXECUTORS[spec.name](raw_args), started)
        if spec.kind == "mock":
            return self._execute_effect(spec, raw_args, started)
        if spec.kind == "pipeline":
            return self._execute_pipeline(spec, raw_args, started, mode="real")
        if spec.kind == "http":
            return self._execute_http(spec, raw_args, started)
        return _failed(started)

    def _execute_effect(self, spec: ToolSpec, raw_args: str, started: float) -> ToolResponse:
        value = float(_parse_number(split_args(raw_args)[0]))
        if spec.name == "Sleep":
            time.sleep(max(value, 0.0))
        # RobotMove has no hardware binding here; the template text stands in.
        if spec.mock_template is not None:
            return _ok(_fill_template(spec.mock_template, raw_args), started)
        return ToolResponse(text="", parsable=True, latency_ms=(time.perf_counter() - started) * 1000)

    def _execute_http(self, spec: ToolSpec, raw_args: str, started: float) -> ToolResponse:
        args = split_args(raw_args)
        try:
            resp = httpx.post(
                spec.endpoint or "",
                json={"tool": spec.name, "args": args, "raw_args": raw_args},
                timeout=spec.timeout_ms / 1000.0,
            )
            resp.raise_for_status()
            text = resp.json().get("text", "")
        except (httpx.HTTPError, json.JSONDecodeError) as exc:
            logger.warning("http tool %s unreachable: %s", spec.name, exc)
            return _failed(started)
        if not isinstance(text, str) or not text:
            return _failed(started)
        return _ok(text, started)

    def _execute_pipeline(
        self, spec: ToolSpec, raw_args: str, started: float, mode: str
    ) -> ToolResponse:
        """MT-then-QA composition over 'question: ... context: ...' input."""
        stages = spec.pipeline or ("MT", "QA")
        match = re.search(r"question:\s*(.*?)\s*context:\s*(.*)", raw_args, re.DOTALL)
        if match is None:
            return _failed(started)
        question, context = match.group(1), match.group(2)
        mt = self.execute(stages[0], f'"{_escape(question)}", "en"', mode=mode)
        if not mt.parsable or not mt.text:
            return _failed(started)
        qa_input = f"question: {mt.text} context: {context}"
        qa = self.execute(stages[1], f'"{_escape(qa_input)}"', mode=mode)
        if not qa.parsable or not qa.text:
            return _failed(started)
        return _ok(qa.text, started)


def _escape(text: str) -> str:
    return text.replace('"', '\\"')


def load_library(source: str | Path | Sequence[Mapping]) -> ToolRegistry:
    """Load a tool library from its JSON file (a list of tool objects)."""
    if isinstance(source, (str, Path)):
        entries = json.loads(Path(source).read_text(encoding="utf-8"))
    else:
        entries = source
    if not isinstance(entries, list) or not entries:
        raise ToolConfigError("tool library must be a nonempty JSON list")
    tools = []
    for entry in entries:
        tools.append(
            ToolSpec(
                name=entry["name"],
                description=entry["description"],
                demonstrations=entry["demonstrations"],
                kind=entry.get("kind", "builtin"),
                endpoint=entry.get("endpoint"),
                timeout_ms=int(entry.get("timeout_ms", 10_000)),
                mock_profile=entry.get("mock_profile"),
                mock_template=entry.get("mock_template"),
                pipeline=tuple(entry.get("pipeline", ())),
            )
        )
    registry = ToolRegistry(tools)
    for tool in registry:
        if tool.kind == "builtin" and tool.name not in _BUILTIN_EXECUTORS:
            raise ToolConfigError(
                f"tool {tool.name!r}: no builtin executor (have {sorted(_BUILTIN_EXECUTORS)})"
            )
    return registry
