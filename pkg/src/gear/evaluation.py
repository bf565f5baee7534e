"""Grounding-accuracy evaluation, downstream metrics, and the ablation runner."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

from .backends import Embedder, LMBackend
from .dataset import EvalRecord
from .engine import GroundingResult, execute_grounded, ground
from .metrics import bleu, extract_numeric_answer, match_choice, match_contains, match_exact
from .patterns import PatternSet, PriorDistribution
from .scoring import ScoreConfig
from .tools import ToolRegistry

__all__ = [
    "ConfusionMatrix",
    "grounding_accuracy",
    "AblationRow",
    "EvalReport",
    "run_eval",
    "run_ablation",
]


@dataclass
class ConfusionMatrix:
    """Counts of (gold tool, selected tool) pairs."""

    labels: tuple[str, ...]
    counts: dict[str, dict[str, int]] = field(default_factory=dict)

    @classmethod
    def from_pairs(
        cls, pairs: Sequence[tuple[str, str]], labels: Sequence[str] | None = None
    ) -> "ConfusionMatrix":
        seen: list[str] = list(labels) if labels else []
        for gold, sel in pairs:
            for name in (gold, sel):
                if name not in seen:
                    seen.append(name)
        matrix = cls(labels=tuple(seen))
        for gold, sel in pairs:
            matrix.add(gold, sel)
        return matrix

    def add(self, gold: str, selected: str) -> None:
        self.counts.setdefault(gold, {}).setdefault(selected, 0)
        self.counts[gold][selected] += 1

    def get(self, gold: str, selected: str) -> int:
        return self.counts.get(gold, {}).get(selected, 0)

    @property
    def total(self) -> int:
        return sum(sum(row.values()) for row in self.counts.values())

    @property
    def trace(self) -> int:
        return sum(self.get(label, label) for label in self.labels)

    def row_total(self, gold: str) -> int:
        return sum(self.counts.get(gold, {}).values())

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "counts": {g: dict(row) for g, row in self.counts.items()},
        }

    def to_csv(self) -> str:
        lines = ["gold\\selected," + ",".join(self.labels)]
        for gold in self.labels:
            lines.append(gold + "," + ",".join(str(self.get(gold, sel)) for sel in self.labels))
        return "\n".join(lines) + "\n"


def grounding_accuracy(
    results: Sequence[GroundingResult],
    golds: Sequence[EvalRecord],
    confusion: ConfusionMatrix | None = None,
) -> float:
    """Fraction of records whose selected tool equals the gold tool.

    Fills ``confusion`` when given. Raises on empty or misaligned inputs.
    """
    if len(results) != len(golds):
        raise ValueError(f"{len(results)} results vs {len(golds)} gold records")
    if not results:
        raise ValueError("cannot compute accuracy over zero records")
    hits = 0
    for result, record in zip(results, golds):
        selected = result.selected_tool
        if confusion is not None:
            confusion.add(record.gold_tool, selected)
        if selected == record.gold_tool:
            hits += 1
    return hits / len(results)


def _task_metric(task: str, answer: str, record: EvalRecord) -> float:
    golds = record.gold_answers
    if task == "arithm":
        if not golds:
            return 0.0
        gold_value = extract_numeric_answer(golds[0])
        return float(gold_value is not None
                     and match_exact(extract_numeric_answer(answer), gold_value))
    if task in ("odqa", "mlqa"):
        return float(match_contains(answer, golds))
    if task == "csqa":
        return float(bool(golds) and match_choice(answer, golds[0]))
    if task == "mt":
        return bleu(answer, list(golds))
    if task == "tz":
        return float(bool(golds) and answer.strip() == golds[0])
    return float(match_contains(answer, golds))


@dataclass(frozen=True)
class AblationRow:
    label: str
    gamma: float
    accuracy: float
    delta: float

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "gamma": self.gamma,
            "accuracy": self.accuracy,
            "delta": self.delta,
        }


@dataclass
class EvalReport:
    grounding_accuracy: float
    record_count: int
    confusion: ConfusionMatrix
    per_task: dict[str, float] = field(default_factory=dict)
    per_task_counts: dict[str, int] = field(default_factory=dict)
    ablation: list[AblationRow] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "grounding_accuracy": self.grounding_accuracy,
            "record_count": self.record_count,
            "per_task": self.per_task,
            "per_task_counts": self.per_task_counts,
            "confusion": self.confusion.to_dict(),
            "ablation": [row.to_dict() for row in self.ablation],
        }


GroundFn = Callable[[EvalRecord, ScoreConfig], GroundingResult]


def _default_ground_fn(
    library: ToolRegistry,
    slm: LMBackend,
    embedder: Embedder,
    patterns: PatternSet,
    priors: PriorDistribution,
    mock_all: bool,
    max_concurrency: int,
) -> GroundFn:
    def run(record: EvalRecord, config: ScoreConfig) -> GroundingResult:
        return ground(
            record.query, library, slm, embedder, patterns, priors, config,
            mock_all=mock_all, max_concurrency=max_concurrency,
        )

    return run


def run_eval(
    records: Sequence[EvalRecord],
    library: ToolRegistry,
    slm: LMBackend,
    embedder: Embedder,
    patterns: PatternSet,
    priors: PriorDistribution,
    config: ScoreConfig,
    *,
    llm: LMBackend | None = None,
    execute: bool = False,
    mock_all: bool = False,
    max_concurrency: int = 1,
    ablate: bool = False,
) -> tuple[list[GroundingResult], EvalReport]:
    """Ground (and optionally execute) every record and build the report."""
    if not records:
        raise ValueError("no evaluation records")
    run_one = _default_ground_fn(
        library, slm, embedder, patterns, priors, mock_all, max_concurrency
    )
    results = [run_one(record, config) for record in records]
    if execute:
        if llm is None:
            raise ValueError("execution requested but no LLM backend given")
        results = [
            execute_grounded(record.query, result, llm, library)
            for record, result in zip(records, results)
        ]

    confusion = ConfusionMatrix(labels=library.names)
    accuracy = grounding_accuracy(results, records, confusion)

    per_task: dict[str, float] = {}
    per_task_counts: dict[str, int] = {}
    if execute:
        sums: dict[str, float] = {}
        for record, result in zip(records, results):
            score = _task_metric(record.task, result.final_answer or "", record)
            sums[record.task] = sums.get(record.task, 0.0) + score
            per_task_counts[record.task] = per_task_counts.get(record.task, 0) + 1
        per_task = {task: sums[task] / per_task_counts[task] for task in sums}

    report = EvalReport(
        grounding_accuracy=accuracy,
        record_count=len(records),
        confusion=confusion,
        per_task=per_task,
        per_task_counts=per_task_counts,
    )
    if ablate:
        report.ablation = run_ablation(
            records, library,
            slm=slm, embedder=embedder, patterns=patterns, priors=priors,
            config=config, mock_all=mock_all, max_concurrency=max_concurrency,
        )
    return results, report


def run_ablation(
    records: Sequence[EvalRecord],
    library: ToolRegistry,
    *,
    slm: LMBackend,
    embedder: Embedder,
    patterns: PatternSet,
    priors: PriorDistribution,
    config: ScoreConfig,
    mock_all: bool = False,
    max_concurrency: int = 1,
) -> list[AblationRow]:
    """Leave-one-out study: rerun grounding with each score removed.

    gamma=1.0 drops the pattern score, gamma=0.0 drops the semantic
    score; the configured gamma is the full run. Deltas are accuracy
    points relative to the full run.
    """
    run_one = _default_ground_fn(
        library, slm, embedder, patterns, priors, mock_all, max_concurrency
    )
    variants = (
        ("full", config.gamma),
        ("no_pattern", 1.0),
        ("no_semantic", 0.0),
    )
    rows: list[AblationRow] = []
    full_accuracy: float | None = None
    for label, gamma in variants:
        variant_config = replace(config, gamma=gamma)
        results = [run_one(record, variant_config) for record in records]
        accuracy = grounding_accuracy(results, records)
        if full_accuracy is None:
            full_accuracy = accuracy
        rows.append(
            AblationRow(
                label=label,
                gamma=gamma,
                accuracy=accuracy,
                delta=accuracy - full_accuracy,
            )
        )
    return rows
