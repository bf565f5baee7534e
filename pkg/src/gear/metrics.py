"""Answer-matching metrics for the evaluation harness.

Arithmetic answers are extracted by first rewriting English numerals as
digits and then taking the last number in the text. Open-domain answers
match by case-insensitive containment of any gold answer; multiple-choice
answers match on the normalized choice label. Translations are scored
with BLEU-4 (clipped precision, brevity penalty, no smoothing) as a
percentage.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from typing import Sequence

__all__ = [
    "extract_numeric_answer",
    "match_exact",
    "match_contains",
    "match_choice",
    "bleu",
]

_UNITS = {
    "zero": 0, "one": 1, "two": 2, "three": 3, "four": 4, "five": 5,
    "six": 6, "seven": 7, "eight": 8, "nine": 9, "ten": 10, "eleven": 11,
    "twelve": 12, "thirteen": 13, "fourteen": 14, "fifteen": 15,
    "sixteen": 16, "seventeen": 17, "eighteen": 18, "nineteen": 19,
}
_TENS = {
    "twenty": 20, "thirty": 30, "forty": 40, "fifty": 50,
    "sixty": 60, "seventy": 70, "eighty": 80, "ninety": 90,
}
# Compositions are supported up to (but excluding) one billion.
_SCALES = {"hundred": 100, "thousand": 1_000, "million": 1_000_000}
_NUMBER_WORD = re.compile(
    r"\b(?:" + "|".join(list(_UNITS) + list(_TENS) + list(_SCALES)) + r")\b",
    re.IGNORECASE,
)
_NUMERAL_SEQ = re.compile(
    r"\b(?:(?:" + "|".join(list(_UNITS) + list(_TENS) + list(_SCALES)) + r")"
    r"(?:[\s-]+(?:and[\s-]+)?(?:" + "|".join(list(_UNITS) + list(_TENS) + list(_SCALES)) + r"))*)\b",
    re.IGNORECASE,
)
_NUMBER_LITERAL = re.compile(r"-?\d+(?:,\d{3})*(?:\.\d+)?")


def _words_to_value(words: Sequence[str]) -> int:
    total = 0
    current = 0
    for word in words:
        w = word.lower()
        if w in _UNITS:
            current += _UNITS[w]
        elif w in _TENS:
            current += _TENS[w]
        elif w == "hundred":
            current = max(current, 1) * 100
        else:  # thousand / million
            total += max(current, 1) * _SCALES[w]
            current = 0
    return total + current


def _replace_numerals(text: str) -> str:
    def sub(match: re.Match) -> str:
        words = [w for w in re.split(r"[\s-]+", match.group(0)) if w.lower() != "and"]
        return str(_words_to_value(words))

    return _NUMERAL_SEQ.sub(sub, text)


def extract_numeric_answer(text: str) -> int | float | None:
    """Last number in the text, after English numerals become digits.

    Idempotent on already-digit text; None when no number exists.
    """
    if not text:
        return None
    rewritten = _replace_numerals(text) if _NUMBER_WORD.search(text) else text
    matches = _NUMBER_LITERAL.findall(rewritten)
    if not matches:
        return None
    literal = matches[-1].replace(",", "")
    if "." in literal:
        return float(literal)
    return int(literal)


def match_exact(pred: int | float | None, gold: int | float) -> bool:
    return pred is not None and float(pred) == float(gold)


def match_contains(pred_text: str, gold_answers: Sequence[str]) -> bool:
    lowered = pred_text.lower()
    return any(gold.lower() in lowered for gold in gold_answers if gold)


_CHOICE_LABEL = re.compile(r"\b([A-E])\b")


def match_choice(pred_text: str, gold_choice: str) -> bool:
    """Match a multiple-choice answer on its normalized label.

    The gold may be bare ("B") or labeled text ("B: They wanted ...").
    The prediction's label is its last standalone capital A-E; when the
    gold carries answer text, containment of that text also counts.
    """
    gold_label_match = re.match(r"\s*\(?([A-Ea-e])\)?\s*[:.)]?\s*(.*)", gold_choice, re.DOTALL)
    gold_label = gold_label_match.group(1).upper() if gold_label_match else None
    gold_text = gold_label_match.group(2).strip() if gold_label_match else gold_choice.strip()
    pred_labels = _CHOICE_LABEL.findall(pred_text)
    if gold_label and pred_labels and pred_labels[-1] == gold_label:
        return True
    if gold_text and len(gold_text) > 3:
        return gold_text.lower() in pred_text.lower()
    return False


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate: str, references: Sequence[str], max_n: int = 4) -> float:
    """Sentence BLEU as a percentage, without smoothing.

    Any order with zero clipped matches (or too few candidate tokens to
    form the n-grams) makes the whole score 0, per the unsmoothed
    definition.
    """
    cand = candidate.split()
    refs = [r.split() for r in references if r.split()]
    if not cand or not refs:
        return 0.0
    log_precision = 0.0
    for n in range(1, max_n + 1):
        cand_counts = _ngrams(cand, n)
        total = sum(cand_counts.values())
        if total == 0:
            return 0.0
        ref_counters = [_ngrams(ref, n) for ref in refs]
        clipped = sum(
            min(count, max(rc.get(gram, 0) for rc in ref_counters))
            for gram, count in cand_counts.items()
        )
        if clipped == 0:
            return 0.0
        log_precision += math.log(clipped / total)
    c = len(cand)
    r = min((abs(len(ref) - c), len(ref)) for ref in refs)[1]
    brevity = 1.0 if c > r else math.exp(1.0 - r / c)
    return brevity * math.exp(log_precision / max_n) * 100.0
