"""Evaluation datasets: JSONL records and the timezone task generator.

The timezone dataset is built programmatically: five querying templates
(two taken verbatim from real querying scenarios, three authored here
and tagged as such), three time formats, and randomly selected IANA
zones. Every record's gold answer is produced by the real timezone
converter, so it round-trips by construction.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Iterable

from .tools import convert_timezone

__all__ = [
    "EvalRecord",
    "read_jsonl",
    "write_jsonl",
    "gen_timezone_dataset",
    "TIMEZONE_TEMPLATES",
    "TIMEZONE_FORMATS",
    "TIMEZONE_ZONES",
]

TASKS = ("arithm", "mt", "odqa", "csqa", "mlqa", "tz")


@dataclass(frozen=True)
class EvalRecord:
    """One dataset row; ``meta`` carries generator-specific fields."""

    id: str
    query: str
    gold_tool: str
    gold_answers: tuple[str, ...] = ()
    task: str = "odqa"
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        data = {
            "id": self.id,
            "query": self.query,
            "gold_tool": self.gold_tool,
            "gold_answers": list(self.gold_answers),
            "task": self.task,
        }
        if self.meta:
            data["meta"] = self.meta
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "EvalRecord":
        return cls(
            id=str(data["id"]),
            query=data["query"],
            gold_tool=data["gold_tool"],
            gold_answers=tuple(data.get("gold_answers", ())),
            task=data.get("task", "odqa"),
            meta=dict(data.get("meta", {})),
        )


def read_jsonl(path: str | Path) -> list[EvalRecord]:
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line:
            records.append(EvalRecord.from_dict(json.loads(line)))
    return records


def write_jsonl(records: Iterable[EvalRecord], path: str | Path) -> None:
    lines = [json.dumps(r.to_dict(), ensure_ascii=False) for r in records]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# The first two templates reproduce real querying scenarios verbatim; the
# remaining three are authored for this generator.
TIMEZONE_TEMPLATES: tuple[tuple[str, bool], ...] = (
    ("My friend is in {there}, and I am in {here}. If it is {ts} here, "
     "what time is it there?", False),
    ("I want to make a call to someone. He is in {there}, and I am in {here}. "
     "If it is {ts} here, what time is it there?", False),
    ("I live in {here} and my colleague works from the {there} time zone. My "
     "watch reads {ts} right now. What time is it for my colleague?", True),
    ("A flight departs from {here} at {ts} local time. What is the local time "
     "in the {there} time zone at that moment?", True),
    ("Our partner office sits in the {there} time zone while I work from "
     "{here}. It is {ts} here. What is the local time over there?", True),
)

# (strftime format, tag, authored). The third format is an authored guess:
# the source scenario names three formats but spells out only two.
TIMEZONE_FORMATS: tuple[tuple[str, str, bool], ...] = (
    ("%Y-%m-%d %H:%M:%S", "ymd_hms", False),
    ("%b %d %Y %I:%M:%S%p", "mon_dd_ampm", False),
    ("%Y-%m-%dT%H:%M:%S", "iso_t", True),
)

# Curated zones whose city component reads naturally in a sentence.
TIMEZONE_ZONES: tuple[str, ...] = (
    "America/Cordoba", "Atlantic/Madeira", "Africa/Johannesburg", "Pacific/Pitcairn",
    "Asia/Shanghai", "America/New_York", "Europe/Paris", "Asia/Tokyo",
    "Europe/London", "Australia/Sydney", "America/Los_Angeles", "Europe/Berlin",
    "Asia/Seoul", "America/Chicago", "Europe/Madrid", "America/Sao_Paulo",
    "Africa/Cairo", "Asia/Dubai", "Europe/Moscow", "Pacific/Auckland",
    "America/Denver", "Asia/Singapore", "Europe/Rome", "America/Toronto",
    "Asia/Bangkok", "Europe/Amsterdam", "America/Mexico_City", "Africa/Nairobi",
    "Asia/Hong_Kong", "Europe/Stockholm", "America/Lima", "Asia/Jakarta",
    "Europe/Athens", "America/Bogota", "Asia/Manila", "Europe/Lisbon",
    "America/Santiago", "Asia/Karachi", "Europe/Vienna", "America/Havana",
    "Pacific/Honolulu", "America/Anchorage", "Europe/Dublin", "Asia/Taipei",
)


def _city(zone: str) -> str:
    return zone.rsplit("/", 1)[-1].replace("_", " ")


def gen_timezone_dataset(n: int, seed: int) -> list[EvalRecord]:
    """Generate ``n`` timezone-conversion records, deterministic per seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = random.Random(seed)
    records = []
    for i in range(n):
        template_index = rng.randrange(len(TIMEZONE_TEMPLATES))
        template, template_authored = TIMEZONE_TEMPLATES[template_index]
        fmt, fmt_tag, fmt_authored = TIMEZONE_FORMATS[rng.randrange(len(TIMEZONE_FORMATS))]
        here, there = rng.sample(TIMEZONE_ZONES, 2)
        stamp = datetime(
            year=rng.randint(2015, 2025),
            month=rng.randint(1, 12),
            day=rng.randint(1, 28),
            hour=rng.randrange(24),
            minute=rng.randrange(60),
            second=rng.randrange(60),
        )
        ts = stamp.strftime(fmt)
        gold = convert_timezone(ts, here, there)
        records.append(
            EvalRecord(
                id=f"tz-{i:05d}",
                query=template.format(there=_city(there), here=_city(here), ts=ts),
                gold_tool="TimezoneConverter",
                gold_answers=(gold,),
                task="tz",
                meta={
                    "timestamp": ts,
                    "from_zone": here,
                    "to_zone": there,
                    "format": fmt_tag,
                    "template": template_index,
                    "authored_template": template_authored,
                    "authored_format": fmt_authored,
                },
            )
        )
    return records
