"""Engine configuration: one JSON document wiring every component.

Schema (paths resolve relative to the config file):

    {
      "score": {"gamma": 0.75, "lambda": 1.0},
      "patterns": "patterns7.json",        # pattern set (+ priors) document
      "priors": null,                      # optional separate priors file
      "library": "tools10.json",
      "slm": {"kind": "scripted", ...},
      "llm": {"kind": "scripted", ...},
      "embedder": {"kind": "bow"},
      "max_concurrency": 4,
      "mock_all": false,
      "route_prompt": "route_prompt.txt",  # service: tool-or-direct decision
      "post_process": false,
      "sessions_path": null
    }
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .backends import Embedder, LMBackend, load_backend, load_embedder
from .patterns import PatternSet, PriorDistribution, load_pattern_config, validate_priors
from .scoring import ScoreConfig
from .tools import ToolRegistry, load_library

__all__ = ["ConfigError", "EngineConfig", "EngineComponents", "DEFAULT_ROUTE_PROMPT"]

CONFIG_ENV_VAR = "GEAR_CONFIG"

DEFAULT_ROUTE_PROMPT = (
    "Decide whether answering the user message requires using an external tool.\n"
    "Reply with a single word, yes or no.\n"
    "Message: {query}\n"
    "Answer:"
)


class ConfigError(ValueError):
    """Invalid or unreadable engine configuration."""


@dataclass(frozen=True)
class EngineComponents:
    """Everything a grounding run needs, built from one config."""

    registry: ToolRegistry
    slm: LMBackend
    llm: LMBackend
    embedder: Embedder
    patterns: PatternSet
    priors: PriorDistribution
    score: ScoreConfig
    max_concurrency: int = 1
    mock_all: bool = False
    route_prompt: str = DEFAULT_ROUTE_PROMPT
    post_process: bool = False
    sessions_path: Path | None = None


@dataclass(frozen=True)
class EngineConfig:
    score: ScoreConfig
    patterns_path: Path
    library_path: Path
    slm: Mapping
    llm: Mapping
    embedder: Mapping = field(default_factory=lambda: {"kind": "bow"})
    priors_path: Path | None = None
    max_concurrency: int = 1
    mock_all: bool = False
    route_prompt_path: Path | None = None
    post_process: bool = False
    sessions_path: Path | None = None

    def __post_init__(self) -> None:
        if self.max_concurrency < 1:
            raise ConfigError("max_concurrency must be >= 1")

    @classmethod
    def load(cls, path: str | Path | None = None) -> "EngineConfig":
        """Read the config file (argument, else $GEAR_CONFIG)."""
        if path is None:
            path = os.environ.get(CONFIG_ENV_VAR)
        if path is None:
            raise ConfigError(f"no config path given and {CONFIG_ENV_VAR} is unset")
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        base = path.parent

        def resolve(key: str, required: bool = True) -> Path | None:
            value = doc.get(key)
            if value is None:
                if required:
                    raise ConfigError(f"config {path} missing required key {key!r}")
                return None
            resolved = (base / value).resolve() if not Path(value).is_absolute() else Path(value)
            if not resolved.is_file():
                raise ConfigError(f"config {path}: {key} file not found: {resolved}")
            return resolved

        for key in ("slm", "llm"):
            if key not in doc:
                raise ConfigError(f"config {path} missing required key {key!r}")

        return cls(
            score=ScoreConfig.from_dict(doc.get("score", {})),
            patterns_path=resolve("patterns"),
            priors_path=resolve("priors", required=False),
            library_path=resolve("library"),
            slm=doc["slm"],
            llm=doc["llm"],
            embedder=doc.get("embedder", {"kind": "bow"}),
            max_concurrency=int(doc.get("max_concurrency", 1)),
            mock_all=bool(doc.get("mock_all", False)),
            route_prompt_path=resolve("route_prompt", required=False),
            post_process=bool(doc.get("post_process", False)),
            sessions_path=Path(doc["sessions_path"]) if doc.get("sessions_path") else None,
        )

    def build(
        self,
        *,
        library_override: str | Path | None = None,
        mock_all_override: bool | None = None,
    ) -> EngineComponents:
        try:
            patterns, priors = load_pattern_config(self.patterns_path)
            if self.priors_path is not None:
                doc = json.loads(self.priors_path.read_text(encoding="utf-8"))
                priors = PriorDistribution(prior=dict(doc.get("priors", doc)))
                validate_priors(priors, patterns)
            registry = load_library(library_override or self.library_path)
        except (ValueError, OSError, KeyError) as exc:
            raise ConfigError(str(exc)) from exc
        route_prompt = DEFAULT_ROUTE_PROMPT
        if self.route_prompt_path is not None:
            route_prompt = self.route_prompt_path.read_text(encoding="utf-8")
        return EngineComponents(
            registry=registry,
            slm=load_backend(self.slm),
            llm=load_backend(self.llm),
            embedder=load_embedder(self.embedder),
            patterns=patterns,
            priors=priors,
            score=self.score,
            max_concurrency=self.max_concurrency,
            mock_all=self.mock_all if mock_all_override is None else mock_all_override,
            route_prompt=route_prompt,
            post_process=self.post_process,
            sessions_path=self.sessions_path,
        )
