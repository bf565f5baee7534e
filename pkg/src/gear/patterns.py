"""Pattern codec: encode raw text into pattern-count profiles.

A pattern set is an ordered list of symbolic output categories (English
run, non-ASCII run, number, symbol, plus synthetic categories used only
for mocked tools). Text is tokenized on whitespace and each token is
segmented into maximal homogeneous runs; every run emits one occurrence
of the pattern that matched it. Only counts survive, so encoding is
order-insensitive and additive under concatenation.

Example with the default four patterns: "Hello World 2023" encodes to
{e: 2, n: 1}; "lächeln" splits into l|ä|cheln and encodes to {e: 2, f: 1}.
"""

from __future__ import annotations

import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

logger = logging.getLogger(__name__)

__all__ = [
    "PatternSpec",
    "PatternSet",
    "PriorDistribution",
    "PatternProfile",
    "PatternConfigError",
    "encode",
    "validate_priors",
    "load_pattern_config",
    "DEFAULT_FOUR",
    "DEFAULT_FOUR_PRIORS",
]

# Named character-class matchers. A "number" run may carry '.' or ','
# separators between digit groups; symbols are printable ASCII punctuation.
CHARACTER_CLASSES = {
    "ascii_letters": r"[A-Za-z]+",
    "non_ascii": r"[^\x00-\x7f]+",
    "number": r"\d+(?:[.,]\d+)*",
    "symbol": r"[!-/:-@\[-`{-~]+",
}

_REGEX_PREFIX = "regex:"


class PatternConfigError(ValueError):
    """Invalid pattern set or prior distribution configuration."""


@dataclass(frozen=True)
class PatternSpec:
    """One symbolic pattern.

    ``matcher`` is either a key of :data:`CHARACTER_CLASSES` or an
    arbitrary regex given as ``"regex:<expr>"``. Synthetic patterns have
    no matcher and never appear in encoded text; they exist only so that
    mock tool profiles and priors can reference them.
    """

    id: str
    name: str = ""
    matcher: str | None = None
    synthetic: bool = False

    def matcher_regex(self) -> str:
        if self.synthetic or not self.matcher:
            raise PatternConfigError(f"pattern {self.id!r} has no text matcher")
        if self.matcher.startswith(_REGEX_PREFIX):
            return self.matcher[len(_REGEX_PREFIX):]
        try:
            return CHARACTER_CLASSES[self.matcher]
        except KeyError:
            raise PatternConfigError(
                f"pattern {self.id!r}: unknown matcher {self.matcher!r}; "
                f"expected one of {sorted(CHARACTER_CLASSES)} or 'regex:...'"
            ) from None


@dataclass(frozen=True)
class PatternSet:
    """Ordered collection of patterns.

    Order matters: when several matchers could match at the same position
    within a token, the earliest-declared pattern wins, so more specific
    regex patterns should precede the broad character classes.
    """

    patterns: tuple[PatternSpec, ...]

    def __post_init__(self) -> None:
        ids = [p.id for p in self.patterns]
        if len(set(ids)) != len(ids):
            raise PatternConfigError(f"duplicate pattern ids in {ids}")
        if not any(not p.synthetic for p in self.patterns):
            raise PatternConfigError("pattern set needs at least one non-synthetic pattern")

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(p.id for p in self.patterns)

    @property
    def size(self) -> int:
        """Cardinality |S|, synthetic patterns included."""
        return len(self.patterns)

    def get(self, pattern_id: str) -> PatternSpec:
        for p in self.patterns:
            if p.id == pattern_id:
                return p
        raise KeyError(pattern_id)

    def scanner(self) -> re.Pattern[str]:
        """Compiled alternation over the non-synthetic matchers."""
        # Group names must be identifiers; map g<i> back to pattern ids.
        parts = []
        for i, spec in enumerate(self.patterns):
            if spec.synthetic:
                continue
            parts.append(f"(?P<g{i}>{spec.matcher_regex()})")
        return re.compile("|".join(parts))


@dataclass(frozen=True)
class PriorDistribution:
    """Prior probability per pattern id, each strictly in (0, 1]."""

    prior: Mapping[str, float]

    def __getitem__(self, pattern_id: str) -> float:
        return self.prior[pattern_id]

    def __len__(self) -> int:
        return len(self.prior)

    def items(self):
        return self.prior.items()


@dataclass(frozen=True)
class PatternProfile:
    """Multiset of pattern counts extracted from one text.

    ``total`` is the number of pattern emissions, i.e. the length of the
    encoded multiset; multi-pattern tokens contribute more than one.
    """

    counts: Mapping[str, int] = field(default_factory=dict)
    total: int = 0

    def __post_init__(self) -> None:
        if any(c < 0 for c in self.counts.values()):
            raise ValueError(f"negative pattern count in {self.counts}")
        if self.total != sum(self.counts.values()):
            raise ValueError(
                f"total {self.total} != sum of counts {sum(self.counts.values())}"
            )

    @classmethod
    def from_counts(cls, counts: Mapping[str, int]) -> "PatternProfile":
        cleaned = {k: int(v) for k, v in counts.items() if v}
        return cls(counts=cleaned, total=sum(cleaned.values()))

    @classmethod
    def empty(cls) -> "PatternProfile":
        return cls(counts={}, total=0)

    def get(self, pattern_id: str) -> int:
        return self.counts.get(pattern_id, 0)

    @property
    def is_empty(self) -> bool:
        return self.total == 0


def encode(text: str, patterns: PatternSet) -> PatternProfile:
    """Encode ``text`` into a pattern profile over ``patterns``.

    Tokenizes on whitespace, then scans each token left to right emitting
    one occurrence per maximal matcher run. Characters no matcher claims
    are skipped. Any string is encodable; empty text gives an empty
    profile.
    """
    scanner = patterns.scanner()
    ids = patterns.ids
    counts: Counter[str] = Counter()
    for token in text.split():
        for match in scanner.finditer(token):
            group = match.lastgroup
            if group is not None:
                counts[ids[int(group[1:])]] += 1
    return PatternProfile.from_counts(counts)


def validate_priors(prior: PriorDistribution, patterns: PatternSet) -> None:
    """Check that every pattern has a prior in (0, 1].

    The score weights rare patterns by log(1/P_j), so priors must be
    strictly positive. Priors are not required to sum to 1 (the stock
    four-pattern configuration sums to 1.03); a deviation beyond 0.05
    only triggers a warning.
    """
    missing = [pid for pid in patterns.ids if pid not in prior.prior]
    if missing:
        raise PatternConfigError(f"patterns without a prior: {missing}")
    for pid, value in prior.items():
        if not (0.0 < value <= 1.0):
            raise PatternConfigError(
                f"prior for pattern {pid!r} must be in (0, 1], got {value}"
            )
    total = sum(prior.prior.values())
    if abs(total - 1.0) > 0.05:
        logger.warning("pattern priors sum to %.4f (not normalized)", total)


def _build_pattern_set(entries: Iterable[Mapping]) -> PatternSet:
    specs = []
    for entry in entries:
        try:
            pid = entry["id"]
        except KeyError:
            raise PatternConfigError(f"pattern entry missing 'id': {entry}") from None
        spec = PatternSpec(
            id=pid,
            name=entry.get("name", pid),
            matcher=entry.get("matcher"),
            synthetic=bool(entry.get("synthetic", False)),
        )
        if not spec.synthetic:
            spec.matcher_regex()  # validate eagerly
        specs.append(spec)
    return PatternSet(patterns=tuple(specs))


def load_pattern_config(source: str | Path | Mapping) -> tuple[PatternSet, PriorDistribution]:
    """Load a pattern set and its priors from a JSON document.

    Schema: ``{"patterns": [{"id", "name", "matcher", "synthetic"}...],
    "priors": {id: probability}}``.
    """
    if isinstance(source, (str, Path)):
        doc = json.loads(Path(source).read_text(encoding="utf-8"))
    else:
        doc = source
    if "patterns" not in doc:
        raise PatternConfigError("pattern config missing 'patterns'")
    patterns = _build_pattern_set(doc["patterns"])
    priors = PriorDistribution(prior=dict(doc.get("priors", {})))
    validate_priors(priors, patterns)
    return patterns, priors


DEFAULT_FOUR = PatternSet(
    patterns=(
        PatternSpec(id="e", name="english", matcher="ascii_letters"),
        PatternSpec(id="f", name="non-ascii", matcher="non_ascii"),
        PatternSpec(id="n", name="number", matcher="number"),
        PatternSpec(id="s", name="symbol", matcher="symbol"),
    )
)

DEFAULT_FOUR_PRIORS = PriorDistribution(prior={"e": 0.78, "f": 0.18, "n": 0.05, "s": 0.02})
