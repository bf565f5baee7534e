"""Grounding scores: pattern similarity, semantic similarity, and their blend.

The pattern score aligns two pattern profiles a (preliminary answer) and
b (tool response):

    sum_j  (C_j^a + lambda) * C_j^b / ((|a| + lambda*|S|) * |b|) * ln(1/P_j)

with add-lambda smoothing on the a side and rare patterns upweighted by
ln(1/P_j). An empty b (unparsable or empty tool response) scores exactly
0, the lower bound. With lambda = 0 the score is bounded above by the
cross-entropy between b's empirical pattern distribution and the prior.

The semantic score is the raw cosine between two embeddings; the combined
grounding score is gamma * semantic + (1 - gamma) * pattern.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Protocol, Sequence

from .patterns import PatternProfile, PriorDistribution

__all__ = [
    "ScoreConfig",
    "ToolScore",
    "Embedder",
    "pattern_score",
    "pattern_score_upper_bound",
    "semantic_score",
    "combined_score",
    "cosine",
]


class Embedder(Protocol):
    """Anything that maps text to a finite-valued vector."""

    def embed(self, text: str) -> Sequence[float]: ...


@dataclass(frozen=True)
class ScoreConfig:
    """Weights for the combined score.

    ``gamma`` weights the semantic side (1 - gamma weights the pattern
    side); ``smoothing`` is the add-lambda constant. Defaults are the
    stock settings gamma = 0.75, lambda = 1.
    """

    gamma: float = 0.75
    smoothing: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.gamma <= 1.0):
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")
        if self.smoothing < 0.0:
            raise ValueError(f"smoothing lambda must be >= 0, got {self.smoothing}")

    @classmethod
    def from_dict(cls, data: Mapping) -> "ScoreConfig":
        return cls(
            gamma=float(data.get("gamma", 0.75)),
            smoothing=float(data.get("lambda", data.get("smoothing", 1.0))),
        )

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "lambda": self.smoothing}


@dataclass(frozen=True)
class ToolScore:
    tool_name: str
    semantic: float
    pattern: float
    combined: float

    def to_dict(self) -> dict:
        return {
            "tool": self.tool_name,
            "semantic": self.semantic,
            "pattern": self.pattern,
            "combined": self.combined,
        }


def pattern_score(
    a: PatternProfile,
    b: PatternProfile,
    prior: PriorDistribution,
    config: ScoreConfig,
) -> float:
    """Smoothed pattern-similarity score between profiles a and b.

    |S| is taken as the number of patterns carrying a prior, synthetic
    patterns included. Returns exactly 0.0 when b is empty, and also for
    an empty a without smoothing (every term is then 0/0; the
    no-evidence reading is 0).
    """
    if b.total == 0:
        return 0.0
    lam = config.smoothing
    set_size = len(prior)
    denom = (a.total + lam * set_size) * b.total
    if denom == 0.0:
        return 0.0
    score = 0.0
    for pid, p_j in prior.items():
        c_b = b.get(pid)
        if c_b == 0:
            continue
        score += (a.get(pid) + lam) * c_b / denom * math.log(1.0 / p_j)
    return score


def pattern_score_upper_bound(b: PatternProfile, prior: PriorDistribution) -> float:
    """Cross-entropy CE(p_b, prior); upper bound of the lambda=0 score."""
    if b.total == 0:
        raise ValueError("upper bound undefined for an empty profile")
    return sum(
        b.get(pid) / b.total * math.log(1.0 / p_j)
        for pid, p_j in prior.items()
        if b.get(pid)
    )


def cosine(u: Sequence[float], v: Sequence[float]) -> float:
    """Cosine of two vectors; 0.0 when either has zero norm.

    Written as dot/sqrt(|u|^2 * |v|^2) so that identical vectors score
    exactly 1.0.
    """
    dot = sum(x * y for x, y in zip(u, v))
    nu2 = sum(x * x for x in u)
    nv2 = sum(y * y for y in v)
    if nu2 == 0.0 or nv2 == 0.0:
        return 0.0
    return dot / math.sqrt(nu2 * nv2)


def semantic_score(query: str, description: str, embedder: Embedder) -> float:
    """Raw cosine between the embeddings of query and tool description.

    Not clamped: a backend embedding space can produce negative values.
    """
    return cosine(embedder.embed(query), embedder.embed(description))


def combined_score(semantic: float, pattern: float, config: ScoreConfig) -> float:
    return config.gamma * semantic + (1.0 - config.gamma) * pattern
