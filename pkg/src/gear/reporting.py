"""Report rendering: aligned text tables, CSV, and matplotlib figures."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .engine import GroundingResult
from .evaluation import ConfusionMatrix, EvalReport

__all__ = [
    "grounding_table",
    "report_table",
    "save_confusion_figure",
    "save_ablation_figure",
    "write_report_files",
]


def grounding_table(result: GroundingResult) -> str:
    """Per-tool score table, highest combined score first."""
    rows = sorted(result.per_tool, key=lambda t: t.score.combined, reverse=True)
    lines = [f"{'tool':<20} {'semantic':>10} {'pattern':>10} {'combined':>10}  selected"]
    for entry in rows:
        s = entry.score
        marker = "*" if s.tool_name == result.selected_tool else ""
        lines.append(
            f"{s.tool_name:<20} {s.semantic:>10.6f} {s.pattern:>10.6f} "
            f"{s.combined:>10.6f}  {marker}"
        )
    lines.append(f"preliminary: {result.preliminary}")
    lines.append(f"selected: {result.selected_tool}")
    if result.final_answer is not None:
        suffix = " (tool bypassed)" if result.tool_bypassed else ""
        lines.append(f"answer: {result.final_answer}{suffix}")
    return "\n".join(lines)


def report_table(report: EvalReport) -> str:
    lines = [
        f"records              {report.record_count}",
        f"grounding accuracy   {report.grounding_accuracy:.4f}",
    ]
    if report.per_task:
        lines.append("")
        lines.append(f"{'task':<10} {'metric':>10} {'n':>6}")
        for task in sorted(report.per_task):
            lines.append(
                f"{task:<10} {report.per_task[task]:>10.4f} {report.per_task_counts[task]:>6}"
            )
    if report.ablation:
        lines.append("")
        lines.append(f"{'variant':<14} {'gamma':>6} {'accuracy':>10} {'delta':>8}")
        for row in report.ablation:
            lines.append(
                f"{row.label:<14} {row.gamma:>6.2f} {row.accuracy:>10.4f} {row.delta:>+8.4f}"
            )
    return "\n".join(lines) + "\n"


def save_confusion_figure(confusion: ConfusionMatrix, path: str | Path) -> None:
    """Render the confusion matrix as an annotated heatmap."""
    labels = list(confusion.labels)
    grid = [[confusion.get(g, s) for s in labels] for g in labels]
    size = max(4.0, 0.6 * len(labels) + 2.0)
    fig, ax = plt.subplots(figsize=(size, size))
    image = ax.imshow(grid, cmap="Blues")
    ax.set_xticks(range(len(labels)), labels, rotation=45, ha="right")
    ax.set_yticks(range(len(labels)), labels)
    ax.set_xlabel("selected tool")
    ax.set_ylabel("gold tool")
    peak = max((max(row) for row in grid), default=0)
    for i, row in enumerate(grid):
        for j, count in enumerate(row):
            if count:
                color = "white" if peak and count > peak / 2 else "black"
                ax.text(j, i, str(count), ha="center", va="center", color=color)
    fig.colorbar(image, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_ablation_figure(report: EvalReport, path: str | Path) -> None:
    rows = report.ablation
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(
        range(len(rows)),
        [row.accuracy for row in rows],
        tick_label=[f"{row.label}\n(gamma={row.gamma:.2f})" for row in rows],
        color=["#4c72b0", "#dd8452", "#55a868"][: len(rows)],
    )
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("grounding accuracy")
    for i, row in enumerate(rows):
        ax.text(i, row.accuracy + 0.01, f"{row.accuracy:.3f}", ha="center")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_report_files(report: EvalReport, outdir: str | Path) -> list[Path]:
    """Write report.json/report.txt/confusion.csv plus figures; returns paths."""
    import json

    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    json_path = out / "report.json"
    json_path.write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    written.append(json_path)

    txt_path = out / "report.txt"
    txt_path.write_text(report_table(report), encoding="utf-8")
    written.append(txt_path)

    csv_path = out / "confusion.csv"
    csv_path.write_text(report.confusion.to_csv(), encoding="utf-8")
    written.append(csv_path)

    fig_path = out / "confusion.png"
    save_confusion_figure(report.confusion, fig_path)
    written.append(fig_path)

    if report.ablation:
        ablation_path = out / "ablation.png"
        save_ablation_figure(report, ablation_path)
        written.append(ablation_path)

    return written
